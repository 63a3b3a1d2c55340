"""Benchmark the hot kernels: numba @njit path vs the numpy fallback.

Times the QR renormalization chain (the per-realization inner loop) and
the Gray-code Ryser permanent on a few representative sizes, and
cross-checks that both paths agree. Run from the repo root:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from ginprod import _kernels


def benchmark(func, args, n_warmup=2, n_iter=20):
    """Mean wall time in ms (warmup excluded; covers JIT compilation)."""
    for _ in range(n_warmup):
        func(*args)
    start = time.perf_counter()
    for _ in range(n_iter):
        func(*args)
    return (time.perf_counter() - start) / n_iter * 1000.0


def numba_paths():
    try:
        import numba
    except ImportError:
        return None
    if _kernels.BACKEND == "numba":
        return _kernels.qr_chain, _kernels.ryser
    # compiled here so the comparison works even under GINPROD_DISABLE_NUMBA
    return (
        numba.njit(cache=True)(_kernels._qr_chain_njit),
        numba.njit(cache=True)(_kernels._ryser_njit),
    )


def chain_workload(rng, n, t):
    stack = (
        rng.standard_normal((t, n, n)) + 1j * rng.standard_normal((t, n, n))
    ) / np.sqrt(2.0)
    rows = np.full(t, n, dtype=np.int64)
    cols = np.full(t, n, dtype=np.int64)
    return stack.astype(np.complex128), rows, cols


def main():
    rng = np.random.default_rng(0)
    nb = numba_paths()
    if nb is None:
        print("numba unavailable: timing the numpy fallback only")

    print("QR renormalization chain (complex, square)")
    print("=" * 60)
    for n, t in [(3, 200), (8, 200), (16, 100)]:
        args = chain_workload(rng, n, t)
        time_np = benchmark(_kernels._qr_chain_numpy, args)
        line = f"N={n:3d} t={t:4d}  numpy {time_np:8.3f} ms"
        if nb is not None:
            time_nb = benchmark(nb[0], args)
            line += f"  numba {time_nb:8.3f} ms  ({time_np / time_nb:5.2f}x)"
            acc_np, ok_np = _kernels._qr_chain_numpy(*args)
            acc_nb, ok_nb = nb[0](*args)
            if ok_np != ok_nb or not np.allclose(acc_np, acc_nb, atol=1e-10):
                line += "  WARNING: paths disagree"
        print(line)

    print()
    print("Ryser permanent (complex)")
    print("=" * 60)
    for n in [8, 10, 12]:
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        time_np = benchmark(_kernels._ryser_numpy, (a,), n_iter=10)
        line = f"n={n:3d}         numpy {time_np:8.3f} ms"
        if nb is not None:
            time_nb = benchmark(nb[1], (a,), n_iter=10)
            line += f"  numba {time_nb:8.3f} ms  ({time_np / time_nb:5.2f}x)"
            v_np, v_nb = _kernels._ryser_numpy(a), nb[1](a)
            if abs(v_np - v_nb) > 1e-8 * max(1.0, abs(v_np)):
                line += "  WARNING: paths disagree"
        print(line)


if __name__ == "__main__":
    main()
