"""2D P1 finite-element magnetostatics on a three-limb core geometry.

Scalar-potential solves use the forward hysteresis operator, and
vector-potential solves the inverse operator; both formulations of the
same field problem are driven over a load cycle and compared at probe
points.
"""

from .disc import build_disc_mesh, disc_flux, disc_potential, solve_disc
from .mesh import (GeometryParams, Mesh2D, REGIONS, build_geometry,
                   default_probes, find_triangle, read_mesh_text,
                   refine_uniform, write_mesh_text)
from .source import SourceModel, build_source, compute_source_field, curl_residual
from .solve import (FieldProblem, FieldState, ProbeRow, default_waveform,
                    read_probes, run_load_cycle, solve_scalar_step,
                    solve_vector_step, write_probes)

__all__ = [
    "GeometryParams", "Mesh2D", "REGIONS", "build_geometry", "default_probes",
    "find_triangle", "read_mesh_text", "refine_uniform", "write_mesh_text",
    "SourceModel", "build_source", "compute_source_field", "curl_residual",
    "FieldProblem", "FieldState", "ProbeRow", "default_waveform",
    "read_probes", "run_load_cycle", "solve_scalar_step", "solve_vector_step",
    "write_probes",
    "build_disc_mesh", "disc_flux", "disc_potential", "solve_disc",
]
