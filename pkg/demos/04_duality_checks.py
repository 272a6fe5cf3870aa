#!/usr/bin/env python3
"""Convex-duality consistency of the operator pair, numerically.

Three independent probes of the same structure:

* Fenchel-Young: at a conjugate pair (H, B = forward(H)) the energy and
  co-energy densities satisfy w(B) + w*(H) = <H, B> exactly.
* Danskin: central differences of the densities reproduce the operator
  outputs (B = dw*/dH, H = dw/dB) away from stick-region corners.
* Roundtrip: inverse(forward(H-sequence)) returns the H-sequence.

Same table as `hystkit check`, via the library API.
"""

from hystkit import SolverSettings, duality_check_suite

for r in duality_check_suite(SolverSettings(), n_pairs=50, n_fd=25, seed=0):
    print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<45} "
          f"{r.value:.3e} <= {r.bound:.0e}")
