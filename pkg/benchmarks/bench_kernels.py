#!/usr/bin/env python3
"""Benchmark the exact-sum kernels: numba JIT loop vs vectorized numpy.

Runs the iid and hierarchical classical log-sum-exp over all 2^N
configurations on a REM realization and reports timings and agreement.
Force a backend for the whole package with GREMPHASE_BACKEND=numpy|numba;
this script always times both implementations directly.
"""
import argparse
import math
import time

from gremphase import _kernels
from gremphase.model import IidField, MagneticEta, ModelSpec, PointMass, Step
from gremphase.verify import _hier_table, sample_realization


def _time(fn, *args, repeat=3):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=22, help="number of spins")
    parser.add_argument("--beta", type=float, default=1.2)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    spec = ModelSpec(
        Step((1.0,), (1.0,)), IidField(PointMass(0.5)), PointMass(0.0)
    )
    real = sample_realization(spec, args.n, args.seed)
    xcat, offs, shifts, coefs = real.tree_arrays()
    tab = _hier_table(MagneticEta(0.5), args.n)

    print(f"N = {args.n} ({1 << args.n} configurations), beta = {args.beta}")
    rows = []
    v_np, t_np = _time(
        _kernels.lse_iid_numpy, xcat, offs, shifts, coefs, real.h_weights,
        args.beta, args.n,
    )
    rows.append(("iid", "numpy", v_np, t_np))
    if _kernels.lse_iid_numba is not None:
        # warm the JIT before timing
        _kernels.lse_iid_numba(xcat, offs, shifts, coefs, real.h_weights, 0.1, args.n)
        v_nb, t_nb = _time(
            _kernels.lse_iid_numba, xcat, offs, shifts, coefs, real.h_weights,
            args.beta, args.n,
        )
        rows.append(("iid", "numba", v_nb, t_nb))
        print(f"iid agreement |numba - numpy| = {abs(v_nb - v_np):.3e}")

    h_np, ht_np = _time(
        _kernels.lse_hier_numpy, xcat, offs, shifts, coefs, tab, args.beta, args.n
    )
    rows.append(("hier", "numpy", h_np, ht_np))
    if _kernels.lse_hier_numba is not None:
        _kernels.lse_hier_numba(xcat, offs, shifts, coefs, tab, 0.1, args.n)
        h_nb, ht_nb = _time(
            _kernels.lse_hier_numba, xcat, offs, shifts, coefs, tab, args.beta, args.n
        )
        rows.append(("hier", "numba", h_nb, ht_nb))
        print(f"hier agreement |numba - numpy| = {abs(h_nb - h_np):.3e}")

    print(f"{'kernel':<6} {'backend':<7} {'phi_N':<20} {'best time':>10}")
    for kernel, backend, val, dt in rows:
        print(f"{kernel:<6} {backend:<7} {val:<20.12f} {dt:>9.3f}s")
    by = {(k, b): t for k, b, _, t in rows}
    for kernel in ("iid", "hier"):
        if (kernel, "numba") in by:
            print(
                f"{kernel}: numba speedup x{by[(kernel, 'numpy')] / by[(kernel, 'numba')]:.1f}"
            )


if __name__ == "__main__":
    main()
