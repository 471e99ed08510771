"""Compare the numba and numpy kernel paths.

Run ``python benchmarks/bench_kernels.py``.  Both implementations are imported
side by side, so the environment flag does not matter here; compilation is
excluded by a warmup call.
"""

import argparse
import time

import numpy as np

from loewner import _kernels


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(order, nsteps, n_seeds):
    rng = np.random.default_rng(1)
    a = np.zeros(order + 1, dtype=np.complex128)
    a[1] = 1.0
    p = np.zeros(order + 1, dtype=np.complex128)
    p[0], p[1] = 1.0, 0.5
    table = np.broadcast_to(p, (nsteps, 3, order + 1)).copy()
    z0 = 0.5 * np.sqrt(rng.random(n_seeds)) * np.exp(2j * np.pi * rng.random(n_seeds))
    u = np.zeros((nsteps, 3))
    poly = np.zeros((nsteps, 3, 2), dtype=np.complex128)
    poly[..., 0], poly[..., 1] = 1.0, 0.5
    zs = 0.9 * np.exp(2j * np.pi * np.arange(4096) / 4096)
    return {
        "lk_rhs": lambda impl: impl.lk_rhs(a, p),
        "rk4_fixed_p": lambda impl: impl.rk4_fixed_p(a, p, 1e-3, nsteps),
        "rk4_tabulated_p": lambda impl: impl.rk4_tabulated_p(a, table, 1e-3),
        "horner": lambda impl: impl.horner(a, zs),
        "lkord_slit": lambda impl: impl.lkord_slit(z0, u, 1e-3, 1e-9),
        "lkord_poly": lambda impl: impl.lkord_poly(z0, poly, 1e-3),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=16)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--seeds", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    _kernels.warmup(_kernels.numba_impl)
    impls = {"numba": _kernels.numba_impl, "numpy": _kernels.numpy_impl}
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max |diff|':>12}")
    for name, fn in cases(args.order, args.steps, args.seeds).items():
        res = {k: fn(impl) for k, impl in impls.items()}
        r0, r1 = (np.asarray(r[0] if isinstance(r, tuple) else r) for r in res.values())
        diff = float(np.max(np.abs(r0 - r1)))
        t = {k: _best(lambda impl=impl: fn(impl), args.repeat) for k, impl in impls.items()}
        print(f"{name:<18}{1e3 * t['numba']:>12.3f}{1e3 * t['numpy']:>12.3f}{t['numpy'] / t['numba']:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
