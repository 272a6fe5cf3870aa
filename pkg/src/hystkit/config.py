"""INI-style run configuration (material, protocol, solver, field solve).

Sections and keys (all optional, falling back to the defaults below):

    [material]
    steepness = 38.0        ; A, A/m
    saturation = 1.54       ; J_s, T
    chi = 71.0              ; comma list, one pinning strength per site
    weight = 1.0            ; comma list or single value for all sites

    [protocol]
    kind = uniaxial-sine    ; rotational-ramp | multi-amplitude-sine | csv-replay
    amplitude = 180.0       ; comma list for multi-amplitude-sine, A/m
    steps_per_period = 500
    periods = 3
    direction = forward     ; forward | inverse
    replay = trace.csv      ; csv-replay input
    literal_rotation = false
    ramp_periods = 3

    [solver]
    epsilon = 1e-8
    grad_tol = 1e-10
    max_iter = 100
    armijo_c = 1e-4
    backtrack = 0.5
    max_backtracks = 50
    boundary_margin = 1e-12

    [fem]
    limb_width = 0.03       ; geometry, m
    window_width = 0.04
    window_height = 0.05
    coil_width = 0.02
    coil_height = 0.025
    air_factor = 3.0
    mesh_core = 0.004       ; target mesh size, m
    mesh_air = 0.016
    refine = 0              ; uniform refinements of the built mesh
    turns = 90
    i_max = 120.0           ; waveform peak, A (total ampere-turns)
    harmonic3 = 0.3         ; third-harmonic admixture
    steps_per_period = 50
    periods = 1
    outer_tol = 1e-6
    outer_cap = 500
    probes = C6:0:0, C12:-0.07:0, C34:0.07:0   ; name:x:y list
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .driver import Protocol
from .fem.mesh import GeometryParams
from .material import MaterialParams, PinningSite, SolverSettings


@dataclass
class FemConfig:
    geometry: GeometryParams = field(default_factory=GeometryParams)
    refine: int = 0
    turns: int = 90
    i_max: float = 120.0
    harmonic3: float = 0.3
    steps_per_period: int = 50
    periods: int = 1
    outer_tol: float = 1e-6
    outer_cap: int = 500
    probes: dict = field(default_factory=lambda: {"C6": (0.0, 0.0),
                                                  "C12": (-0.07, 0.0),
                                                  "C34": (0.07, 0.0)})


@dataclass
class RunConfig:
    material: MaterialParams
    protocol: Protocol
    solver: SolverSettings
    fem: FemConfig
    has_material: bool = True  # whether the file carried a [material] section


def _floats(text: str):
    return [float(x) for x in text.replace(",", " ").split()]


def _material(sec) -> MaterialParams:
    steepness = sec.getfloat("steepness", 38.0)
    saturation = sec.getfloat("saturation", 1.54)
    chis = _floats(sec.get("chi", "71.0"))
    weights = _floats(sec.get("weight", "1.0"))
    if len(weights) == 1:
        weights = weights * len(chis)
    if len(weights) != len(chis):
        raise ValueError("weight list length does not match chi list")
    return MaterialParams(tuple(
        PinningSite(c, w, steepness, saturation) for c, w in zip(chis, weights)))


def _protocol(sec) -> Protocol:
    return Protocol(
        kind=sec.get("kind", "uniaxial-sine"),
        amplitudes=tuple(_floats(sec.get("amplitude", "180.0"))),
        steps_per_period=sec.getint("steps_per_period", 500),
        periods=sec.getint("periods", 3),
        direction=sec.get("direction", "forward"),
        replay_path=sec.get("replay", None),
        literal_rotation=sec.getboolean("literal_rotation", False),
        ramp_periods=sec.getint("ramp_periods", 3),
    )


def _solver(sec) -> SolverSettings:
    return SolverSettings(
        epsilon=sec.getfloat("epsilon", 1e-8),
        grad_tol=sec.getfloat("grad_tol", 1e-10),
        max_iter=sec.getint("max_iter", 100),
        armijo_c=sec.getfloat("armijo_c", 1e-4),
        backtrack=sec.getfloat("backtrack", 0.5),
        max_backtracks=sec.getint("max_backtracks", 50),
        boundary_margin=sec.getfloat("boundary_margin", 1e-12),
    )


def _probes(text: str) -> dict:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, sx, sy = item.split(":")
        out[name.strip()] = (float(sx), float(sy))
    return out


def _fem(sec) -> FemConfig:
    geo = GeometryParams(
        limb_width=sec.getfloat("limb_width", 0.03),
        window_width=sec.getfloat("window_width", 0.04),
        window_height=sec.getfloat("window_height", 0.05),
        coil_width=sec.getfloat("coil_width", 0.02),
        coil_height=sec.getfloat("coil_height", 0.025),
        air_factor=sec.getfloat("air_factor", 3.0),
        mesh_core=sec.getfloat("mesh_core", 0.004),
        mesh_air=sec.getfloat("mesh_air", 0.016),
    )
    return FemConfig(
        geometry=geo,
        refine=sec.getint("refine", 0),
        turns=sec.getint("turns", 90),
        i_max=sec.getfloat("i_max", 120.0),
        harmonic3=sec.getfloat("harmonic3", 0.3),
        steps_per_period=sec.getint("steps_per_period", 50),
        periods=sec.getint("periods", 1),
        outer_tol=sec.getfloat("outer_tol", 1e-6),
        outer_cap=sec.getint("outer_cap", 500),
        probes=_probes(sec.get("probes", "C6:0:0, C12:-0.07:0, C34:0.07:0")),
    )


def load_config(path) -> RunConfig:
    """Parse a config file; missing sections use the documented defaults."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path) as f:
        cp.read_file(f)
    empty = cp["DEFAULT"]
    return RunConfig(
        material=_material(cp["material"] if "material" in cp else empty),
        protocol=_protocol(cp["protocol"] if "protocol" in cp else empty),
        solver=_solver(cp["solver"] if "solver" in cp else empty),
        fem=_fem(cp["fem"] if "fem" in cp else empty),
        has_material="material" in cp,
    )
