"""Material parameters, state containers, and the internal magnetic energy density.

Vectors are plain numpy arrays of shape ``(2,)`` (in-plane components).
Field-like quantities are in A/m, polarizations and flux densities in T,
energy densities in J/m^3.  The internal energy of one pinning site is

    U(J) = -(A w J_s / pi) * log(cos(pi/2 * |J|_eps / (w J_s)))

with the smoothed norm ``|J|_eps = sqrt(|J|^2 + eps)``.  It is finite and
strongly convex for ``|J|_eps < w J_s`` and diverges at the bound, which
acts as a built-in barrier enforcing saturation.

All evaluators accept arrays with arbitrary leading batch dimensions on
the vector argument; per-site parameters broadcast against the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

#: Vacuum permeability, Vs/(Am).
MU0 = 4.0e-7 * np.pi


def as_vec2(v) -> np.ndarray:
    """Coerce ``v`` to a float64 array of shape (2,) with finite entries."""
    a = np.asarray(v, dtype=float)
    if a.shape != (2,):
        raise ValueError(f"expected a 2-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite vector components: {a}")
    return a


@dataclass(frozen=True)
class PinningSite:
    """One pinning strength with its weight and internal-energy parameters.

    Attributes
    ----------
    chi : float
        Pinning strength, A/m.  Zero gives the anhysteretic (reversible)
        limit for this site.
    weight : float
        Dimensionless weight of the site; the site saturates at
        ``weight * saturation``.
    steepness : float
        Steepness of the anhysteretic curve (A), A/m.
    saturation : float
        Saturation polarization (J_s), T.
    """

    chi: float
    weight: float = 1.0
    steepness: float = 38.0
    saturation: float = 1.54

    def __post_init__(self):
        if not (np.isfinite(self.chi) and self.chi >= 0.0):
            raise ValueError(f"chi must be >= 0, got {self.chi}")
        for name in ("weight", "steepness", "saturation"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be > 0, got {v}")

    @property
    def j_bound(self) -> float:
        """Strict upper bound on |J| for finite internal energy, T."""
        return self.weight * self.saturation


@dataclass(frozen=True)
class MaterialParams:
    """Ordered collection of pinning sites making up one material."""

    sites: tuple[PinningSite, ...]

    def __post_init__(self):
        if len(self.sites) < 1:
            raise ValueError("a material needs at least one pinning site")
        object.__setattr__(self, "sites", tuple(self.sites))

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def chi(self) -> np.ndarray:
        return np.array([s.chi for s in self.sites])

    @property
    def weight(self) -> np.ndarray:
        return np.array([s.weight for s in self.sites])

    @property
    def steepness(self) -> np.ndarray:
        return np.array([s.steepness for s in self.sites])

    @property
    def saturation(self) -> np.ndarray:
        return np.array([s.saturation for s in self.sites])

    @property
    def j_bound(self) -> np.ndarray:
        return self.weight * self.saturation

    @property
    def saturation_total(self) -> float:
        """Total saturation polarization sum_k w_k J_s,k, T."""
        return float(np.sum(self.j_bound))


def single_site_material(chi: float = 71.0, steepness: float = 38.0,
                         saturation: float = 1.54, weight: float = 1.0) -> MaterialParams:
    """Material with a single pinning force."""
    return MaterialParams((PinningSite(chi, weight, steepness, saturation),))


def graded_chain_material(n_sites: int = 20, chi_max: float = 140.0,
                          steepness: float = 50.0, saturation: float = 1.54) -> MaterialParams:
    """Material with ``n_sites`` equally weighted sites and linearly graded
    pinning strengths ``chi_k = chi_max * (k-1)/(n_sites-1)``."""
    if n_sites < 2:
        raise ValueError("graded chain needs at least 2 sites")
    chis = chi_max * np.arange(n_sites) / (n_sites - 1)
    w = 1.0 / n_sites
    return MaterialParams(tuple(PinningSite(float(c), w, steepness, saturation) for c in chis))


def default_fem_iron() -> MaterialParams:
    """Five-site iron used by the field solver demos.

    Steepness and saturation follow the standard soft-iron fit
    (A = 90.302, J_s = 1.573 T); the pinning spectrum
    chi = {10, 30, 60, 100, 150} A/m with equal weights is a repository
    default, overridable via the config file.
    """
    chis = (10.0, 30.0, 60.0, 100.0, 150.0)
    return MaterialParams(tuple(PinningSite(c, 0.2, 90.302, 1.573) for c in chis))


@dataclass
class MaterialState:
    """Partial polarizations J_k carried between time steps, shape (n_sites, 2), T."""

    partials: np.ndarray

    def __post_init__(self):
        self.partials = np.asarray(self.partials, dtype=float)
        if self.partials.ndim != 2 or self.partials.shape[1] != 2:
            raise ValueError(f"partials must have shape (n_sites, 2), got {self.partials.shape}")
        if not np.all(np.isfinite(self.partials)):
            raise ValueError("non-finite partial polarization")

    @classmethod
    def virgin(cls, params: MaterialParams) -> "MaterialState":
        return cls(np.zeros((params.n_sites, 2)))

    @property
    def total(self) -> np.ndarray:
        """Total polarization sum_k J_k, T."""
        return self.partials.sum(axis=0)

    def copy(self) -> "MaterialState":
        return MaterialState(self.partials.copy())

    def validate(self, params: MaterialParams):
        """Check the state is strictly inside the energy domain of ``params``."""
        if self.partials.shape[0] != params.n_sites:
            raise ValueError(
                f"state has {self.partials.shape[0]} sites, material has {params.n_sites}")
        mags = np.hypot(self.partials[:, 0], self.partials[:, 1])
        if np.any(mags >= params.j_bound):
            k = int(np.argmax(mags - params.j_bound))
            raise DomainError(f"partial polarization {k} at or beyond saturation bound")


@dataclass(frozen=True)
class MagneticPoint:
    """An (H, B) pair at one material point and time step."""

    h: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class SolverSettings:
    """Regularization and Newton line-search constants.

    ``epsilon`` is the squared-norm offset used both inside the internal
    energy and in the pinning term (one shared value, default 1e-8 T^2).
    ``grad_tol`` is scaled by max(1, |gradient at start|) inside the
    solver.  ``boundary_margin`` keeps iterates a relative distance away
    from the energy-domain boundary so log/tan stay finite in double
    precision.
    """

    epsilon: float = 1e-8
    grad_tol: float = 1e-10
    max_iter: int = 100
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 50
    boundary_margin: float = 1e-12

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be > 0")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must be in (0, 1)")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must be in (0, 1)")
        if not 0 < self.boundary_margin < 1:
            raise ValueError("boundary_margin must be in (0, 1)")

    def with_epsilon(self, epsilon: float) -> "SolverSettings":
        return replace(self, epsilon=epsilon)


def smoothed_norm(v, epsilon: float):
    """Smoothed Euclidean norm sqrt(|v|^2 + epsilon).

    Strictly positive and smooth everywhere; reduces to |v| as
    epsilon -> 0.  ``v`` may carry leading batch dimensions; the norm is
    taken over the trailing axis.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite vector components")
    return np.sqrt(np.sum(v * v, axis=-1) + epsilon)


# The batched kernels below take per-site parameter arrays broadcastable
# against the batch shape of j[..., 2].  The scalar API wraps them.

def _check_domain(s, w, js, margin):
    bound = (1.0 - margin) * np.asarray(w) * np.asarray(js)
    if np.any(s >= bound):
        raise DomainError("polarization magnitude at or beyond saturation bound")


def internal_energy_batch(j, eps, A, w, js, margin=0.0):
    j = np.asarray(j, dtype=float)
    s = np.sqrt(np.sum(j * j, axis=-1) + eps)
    _check_domain(s, w, js, margin)
    half_pi_ratio = 0.5 * np.pi / (w * js)
    return -(A * w * js / np.pi) * np.log(np.cos(half_pi_ratio * s))


def internal_energy_grad_batch(j, eps, A, w, js, margin=0.0):
    j = np.asarray(j, dtype=float)
    s = np.sqrt(np.sum(j * j, axis=-1) + eps)
    _check_domain(s, w, js, margin)
    t = np.tan(0.5 * np.pi / (w * js) * s)
    return (0.5 * A * t / s)[..., None] * j


def internal_energy_hess_batch(j, eps, A, w, js, margin=0.0):
    j = np.asarray(j, dtype=float)
    s2 = np.sum(j * j, axis=-1) + eps
    s = np.sqrt(s2)
    _check_domain(s, w, js, margin)
    c = 0.5 * np.pi / (w * js)
    t = np.tan(c * s)
    eye = np.eye(2)
    jj = j[..., :, None] * j[..., None, :]
    # d/dJ [ (A/2) tan(c s) J / s ]:
    #   radial curvature from sec^2, tangential from tan/s
    coef_iso = 0.5 * A * t / s
    coef_jj = 0.5 * A * (c * (1.0 + t * t) / s2 - t / (s2 * s))
    return coef_iso[..., None, None] * eye + coef_jj[..., None, None] * jj


def internal_energy(site: PinningSite, j, epsilon: float) -> float:
    """Internal energy density U(J) of one site, J/m^3.

    Raises :class:`DomainError` when ``|j|_eps`` reaches the saturation
    bound ``weight * saturation`` (the solver treats that as +inf).
    """
    j = as_vec2(j)
    return float(internal_energy_batch(j, epsilon, site.steepness, site.weight,
                                       site.saturation))


def internal_energy_grad(site: PinningSite, j, epsilon: float) -> np.ndarray:
    """Gradient of the internal energy, (A/2) tan(pi |J|_eps / (2 w J_s)) J/|J|_eps."""
    j = as_vec2(j)
    return internal_energy_grad_batch(j, epsilon, site.steepness, site.weight,
                                      site.saturation)


def internal_energy_hess(site: PinningSite, j, epsilon: float) -> np.ndarray:
    """2x2 Hessian of the internal energy; symmetric positive definite on the domain."""
    j = as_vec2(j)
    return internal_energy_hess_batch(j, epsilon, site.steepness, site.weight,
                                      site.saturation)
