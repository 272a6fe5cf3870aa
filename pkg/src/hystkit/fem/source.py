"""Coil current density and the divergence-free unit source field.

The two coil rectangles carry out-of-plane unit current densities
+-1/A_w (unit total current, opposite signs), so the source field H0
obtained from one linear vector-potential solve with the vacuum
coefficient satisfies the discrete Ampere law curl H0 = j0 exactly, up
to the direct-solver residual.  Time stepping only scales this field by
the waveform value I_s(t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from ..material import MU0
from .assembly import ElementGeometry, isotropic_tensor
from .mesh import COIL_MINUS, COIL_PLUS, GeometryParams, Mesh2D


@dataclass
class SourceModel:
    """Unit current density, winding metadata, and the unit source field."""

    j0: np.ndarray          # (M,) out-of-plane unit current density, A/m^2
    h0: np.ndarray          # (M, 2) unit source field, A/m
    winding_area: float     # A_w, m^2
    turns: int = 90


def unit_current_density(mesh: Mesh2D, winding_area: float) -> np.ndarray:
    """+-1/A_w on the coil regions, zero elsewhere."""
    j0 = np.zeros(mesh.n_triangles)
    j0[mesh.region == COIL_PLUS] = 1.0 / winding_area
    j0[mesh.region == COIL_MINUS] = -1.0 / winding_area
    return j0


def compute_source_field(mesh: Mesh2D, j0) -> np.ndarray:
    """Unit source field H0 with discrete curl H0 = j0.

    Solves one linear vector-potential problem with the vacuum
    reluctivity and homogeneous Dirichlet boundary, then takes
    H0 = Curl a0 / mu0 elementwise.
    """
    geom = ElementGeometry(mesh)
    j0 = np.asarray(j0, dtype=float)
    if not np.any(j0):
        return np.zeros((mesh.n_triangles, 2))
    K = geom.assemble_stiffness(isotropic_tensor(np.full(mesh.n_triangles, 1.0 / MU0)),
                                geom.curl)
    load = geom.assemble_load(j0)
    free = np.setdiff1d(np.arange(mesh.n_nodes), mesh.boundary_nodes)
    if free.size == 0:
        raise ValueError("mesh has no interior nodes")
    a = np.zeros(mesh.n_nodes)
    a[free] = spla.spsolve(K[free][:, free].tocsc(), load[free],
                           permc_spec="MMD_AT_PLUS_A")
    return geom.field_from_nodal(a, geom.curl) / MU0


def build_source(mesh: Mesh2D, geo: GeometryParams, turns: int = 90) -> SourceModel:
    aw = geo.coil_area
    j0 = unit_current_density(mesh, aw)
    return SourceModel(j0, compute_source_field(mesh, j0), aw, turns)


def curl_residual(mesh: Mesh2D, h0, j0) -> float:
    """Max relative defect of the discrete Ampere law over interior
    test functions: sum_T H0 . Curl phi_i area - sum_T j0 phi_i area."""
    geom = ElementGeometry(mesh)
    lhs = geom.assemble_flux_divergence(np.asarray(h0, dtype=float), geom.curl)
    rhs = geom.assemble_load(np.asarray(j0, dtype=float))
    free = np.setdiff1d(np.arange(mesh.n_nodes), mesh.boundary_nodes)
    scale = max(np.abs(rhs[free]).max(), np.abs(lhs[free]).max(), 1e-300)
    return float(np.abs(lhs[free] - rhs[free]).max() / scale)
