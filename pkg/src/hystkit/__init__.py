"""Energy-based magnetic vector hysteresis operators and field solves.

The forward operator maps a field H and the previous partial
polarizations to a flux density B by minimizing decoupled per-site
energies; the inverse operator maps B back to H through the convex
conjugate (a coupled minimization).  Both are exposed point-wise, in
vectorized batches, and through a time-stepping driver, a duality
verification suite, and a 2D finite-element magnetostatics solver
(:mod:`hystkit.fem`).
"""

from .errors import DomainError, OperatorError, OuterSolverError, SolverError
from .forward import (ForwardResult, coenergy_density, forward_solve,
                      forward_solve_batch, forward_update, site_objective)
from .inverse import (InverseResult, coupled_objective, energy_density,
                      inverse_solve, inverse_solve_batch, inverse_update)
from .material import (MU0, MagneticPoint, MaterialParams, MaterialState,
                       PinningSite, SolverSettings, as_vec2, default_fem_iron,
                       graded_chain_material, internal_energy,
                       internal_energy_grad, internal_energy_hess,
                       single_site_material, smoothed_norm)
from .newton import SmoothObjective, SolveReport, minimize
from .verify import (CheckResult, duality_check_suite, fenchel_gap,
                     gradient_residuals, near_kink, roundtrip_error)
from .driver import (BenchRow, Protocol, TraceRow, TraceRun, bench_quotients,
                     read_trace, run_benchmark, run_protocol, write_bench,
                     write_trace, zero_crossings)
from .config import FemConfig, RunConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "MU0", "PinningSite", "MaterialParams", "MaterialState", "MagneticPoint",
    "SolverSettings", "as_vec2", "smoothed_norm", "internal_energy",
    "internal_energy_grad", "internal_energy_hess", "single_site_material",
    "graded_chain_material", "default_fem_iron",
    "SmoothObjective", "SolveReport", "minimize",
    "forward_update", "forward_solve", "forward_solve_batch",
    "coenergy_density", "site_objective", "ForwardResult",
    "inverse_update", "inverse_solve", "inverse_solve_batch",
    "energy_density", "coupled_objective", "InverseResult",
    "fenchel_gap", "gradient_residuals", "roundtrip_error", "near_kink",
    "duality_check_suite", "CheckResult",
    "Protocol", "TraceRow", "TraceRun", "run_protocol", "run_benchmark",
    "bench_quotients", "read_trace", "write_trace", "write_bench",
    "zero_crossings", "BenchRow",
    "FemConfig", "RunConfig", "load_config",
    "DomainError", "SolverError", "OperatorError", "OuterSolverError",
]
