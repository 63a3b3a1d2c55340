"""Hot numerical kernels with a numba fast path and a numpy fallback.

Two kernels live here: the thin-QR renormalization chain (the per-factor
inner loop of every Monte Carlo realization) and the Gray-code Ryser
permanent. Both are written twice: once in plain numpy and once in a
numba-friendly style compiled with @njit. The active implementation is
chosen at import time; setting the environment variable
GINPROD_DISABLE_NUMBA to anything but "" or "0" forces the numpy path
(it is also used automatically when numba is unavailable).

benchmarks/bench_kernels.py compares the two paths.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _numba_disabled() -> bool:
    return os.environ.get("GINPROD_DISABLE_NUMBA", "") not in ("", "0")


# ---------------------------------------------------------------------------
# QR renormalization chain
#
# Factors arrive as a padded stack: stack[i, :rows[i], :cols[i]] holds
# factor i (complex128). The frame starts as the cols[0] x cols[0]
# identity; each step multiplies by the next factor, re-orthonormalizes
# with a thin QR, forces the R diagonal positive by column phase flips,
# and accumulates log|R_jj|. Returns (acc, ok): ok=False marks a rank
# collapse (a zero R diagonal).
# ---------------------------------------------------------------------------


def _qr_chain_numpy(stack, rows, cols):
    n = cols[0]
    q = np.eye(n, dtype=np.complex128)
    acc = np.zeros(n, dtype=np.float64)
    for i in range(stack.shape[0]):
        x = stack[i, : rows[i], : cols[i]]
        qf, rf = np.linalg.qr(x @ q)
        d = np.diagonal(rf).copy()
        m = np.abs(d)
        if np.any(m == 0.0):
            return acc, False
        acc += np.log(m)
        q = qf * (d / m)[None, :]
    return acc, True


def _qr_chain_njit(stack, rows, cols):
    n = cols[0]
    q = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        q[j, j] = 1.0
    acc = np.zeros(n, dtype=np.float64)
    for i in range(stack.shape[0]):
        r_i = rows[i]
        x = stack[i, :r_i, : cols[i]].copy()
        qf, rf = np.linalg.qr(np.dot(x, q))
        qnew = np.empty((r_i, n), dtype=np.complex128)
        for j in range(n):
            d = rf[j, j]
            m = abs(d)
            if m == 0.0:
                return acc, False
            acc[j] += math.log(m)
            s = d / m
            for k in range(r_i):
                qnew[k, j] = qf[k, j] * s
        q = qnew
    return acc, True


# ---------------------------------------------------------------------------
# Ryser permanent, Gray-code subset walk.
#
# perm(A) = (-1)^n sum_{S nonempty} (-1)^{|S|} prod_i sum_{j in S} a_ij;
# consecutive subsets differ by one column, so the row sums are updated
# in O(n) per subset.
# ---------------------------------------------------------------------------


def _ryser_numpy(a):
    n = a.shape[0]
    v = np.zeros(n, dtype=np.complex128)
    total = 0.0 + 0.0j
    parity = 1.0
    g_prev = 0
    for g in range(1, 1 << n):
        gray = g ^ (g >> 1)
        bit = gray ^ g_prev
        j = bit.bit_length() - 1
        if gray & bit:
            v += a[:, j]
        else:
            v -= a[:, j]
        parity = -parity
        total += parity * np.prod(v)
        g_prev = gray
    return total if n % 2 == 0 else -total


def _ryser_njit(a):
    n = a.shape[0]
    v = np.zeros(n, dtype=np.complex128)
    total = 0.0 + 0.0j
    parity = 1.0
    g_prev = 0
    for g in range(1, 1 << n):
        gray = g ^ (g >> 1)
        diff = gray ^ g_prev
        j = 0
        while (diff >> j) & 1 == 0:
            j += 1
        if (gray >> j) & 1:
            for i in range(n):
                v[i] += a[i, j]
        else:
            for i in range(n):
                v[i] -= a[i, j]
        parity = -parity
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= v[i]
        total += parity * prod
        g_prev = gray
    if n % 2 == 1:
        return -total
    return total


# ---------------------------------------------------------------------------
# Backend selection
# ---------------------------------------------------------------------------

BACKEND = "numpy"
qr_chain = _qr_chain_numpy
ryser = _ryser_numpy

if not _numba_disabled():
    try:
        import numba

        qr_chain = numba.njit(cache=True)(_qr_chain_njit)
        ryser = numba.njit(cache=True)(_ryser_njit)
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - exercised via env flag instead
        pass


def backend_name() -> str:
    """Active kernel backend, "numba" or "numpy"."""
    return BACKEND
