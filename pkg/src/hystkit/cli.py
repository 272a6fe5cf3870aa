"""Command-line entry points.

    hystkit loop  --config cfg.ini --out trace.csv
    hystkit bench --nchi 2,5,10,15,20 --out bench.csv
    hystkit check
    hystkit fem   --config cfg.ini --formulation scalar|vector \
                  --out probes.csv [--mesh-out mesh.txt]

``loop`` writes one trace CSV per run (multi-amplitude protocols append
the run label to the file name).  ``check`` prints the duality
verification table and exits nonzero on failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import load_config
from .driver import run_benchmark, run_protocol, write_bench, write_trace
from .material import SolverSettings, default_fem_iron
from .verify import duality_check_suite


def _out_path(base: str, label: str, multi: bool) -> str:
    if not multi:
        return base
    root, ext = os.path.splitext(base)
    return f"{root}-{label}{ext or '.csv'}"


def cmd_loop(args) -> int:
    cfg = load_config(args.config)
    runs = run_protocol(cfg.material, cfg.protocol, cfg.solver)
    multi = len(runs) > 1
    for run in runs:
        path = _out_path(args.out, run.label, multi)
        write_trace(path, run.rows)
        print(f"wrote {path} ({len(run.rows)} rows)")
    return 0


def cmd_bench(args) -> int:
    n_list = [int(x) for x in args.nchi.split(",") if x]
    rows = run_benchmark(n_list, repetitions=args.reps, steps=args.steps,
                         points=args.points)
    write_bench(args.out, rows)
    print(f"{'nchi':>5} {'dir':>8} {'time_ms':>10} {'iters':>7}")
    for r in rows:
        print(f"{r.nchi:>5} {r.direction:>8} {r.time_ms:>10.4f} {r.iters:>7.2f}")
    fwd = {r.nchi: r.time_ms for r in rows if r.direction == "forward"}
    inv = {r.nchi: r.time_ms for r in rows if r.direction == "inverse"}
    for n in n_list:
        print(f"quotient N={n}: {inv[n] / fwd[n]:.2f}")
    print(f"wrote {args.out}")
    return 0


def cmd_check(args) -> int:
    results = duality_check_suite(SolverSettings(), n_pairs=args.pairs,
                                  seed=args.seed)
    width = max(len(r.name) for r in results)
    ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        ok &= r.passed
        print(f"{status}  {r.name:<{width}}  {r.value:.3e} <= {r.bound:.0e}")
    return 0 if ok else 1


def cmd_fem(args) -> int:
    import numpy as np

    from .fem import (build_geometry, build_source, default_waveform,
                      refine_uniform, run_load_cycle, write_mesh_text,
                      write_probes, FieldProblem)

    cfg = load_config(args.config) if args.config else None
    fem = cfg.fem if cfg else None
    if fem is None:
        from .config import FemConfig
        fem = FemConfig()
    material = cfg.material if (cfg and cfg.has_material) else default_fem_iron()
    settings = cfg.solver if cfg else SolverSettings()

    mesh = build_geometry(fem.geometry)
    for _ in range(fem.refine):
        mesh = refine_uniform(mesh)
    source = build_source(mesh, fem.geometry, fem.turns)
    t, wave = default_waveform(fem.i_max, fem.steps_per_period, fem.periods,
                               fem.harmonic3)
    problem = FieldProblem(mesh, source, material, settings,
                           formulation=args.formulation,
                           outer_tol=fem.outer_tol, outer_cap=fem.outer_cap)
    rows, history = run_load_cycle(problem, t, wave, fem.probes)
    write_probes(args.out, rows)
    iters = [h.outer_iterations for h in history]
    print(f"wrote {args.out} ({len(rows)} rows; {mesh.n_triangles} triangles; "
          f"outer iterations mean {np.mean(iters):.1f} max {max(iters)})")
    if args.mesh_out:
        write_mesh_text(mesh, args.mesh_out)
        print(f"wrote {args.mesh_out}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hystkit",
                                 description="energy-based vector hysteresis toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("loop", help="run a single-point protocol, write a trace CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_loop)

    p = sub.add_parser("bench", help="time forward vs inverse operators")
    p.add_argument("--nchi", default="2,5,10,15,20")
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--reps", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="run the duality verification table")
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fem", help="run a field load cycle, write probe CSV")
    p.add_argument("--config", default=None)
    p.add_argument("--formulation", choices=("scalar", "vector"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mesh-out", default=None)
    p.set_defaults(func=cmd_fem)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
