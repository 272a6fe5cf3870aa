#!/usr/bin/env python3
"""Forward vs inverse operator cost as the site count grows.

The forward inner problems decouple (cost roughly linear in the number
of sites); the inverse couples all sites into one dense system (cubic
factorization cost).  The inverse/forward time quotient therefore grows
with the site count, while the Newton iteration counts of both stay in
the same narrow band.
"""

from hystkit import bench_quotients, run_benchmark

rows = run_benchmark([2, 5, 10, 15, 20], repetitions=3, steps=250, points=64)

print(f"{'N':>4} {'direction':>9} {'us/step/point':>14} {'iterations':>11}")
for r in rows:
    print(f"{r.nchi:>4} {r.direction:>9} {1e3 * r.time_ms:>14.1f} {r.iters:>11.2f}")
print("\ninverse/forward time quotient:")
for n, q in bench_quotients(rows).items():
    print(f"  N = {n:2d}: {q:.2f}")
