"""Extended-precision linear algebra for eigenvalue extraction.

At t = 200 the product's eigenvalue moduli span hundreds of nats, far
beyond double precision, so the product is accumulated in gmpy2
big-floats with a running max-abs rescaling, its characteristic
polynomial is formed by Faddeev-LeVerrier (N matrix products, no
divisions by pivots), and the roots are found with the Aberth-Ehrlich
simultaneous iteration started from Newton-polygon circles. Everything
here works on small matrices (N of order ten) where this route needs
far less machinery than a full big-float QR eigensolver.

All public functions take matrices as numpy object arrays of gmpy2
numbers (as produced by scaled_chain) and are deterministic for a
given precision.
"""

from __future__ import annotations

import math
from contextlib import contextmanager

import gmpy2
import numpy as np

from .errors import DegenerateSampleError, DomainError, PrecisionError


@contextmanager
def working_precision(bits: int):
    """Temporarily set the gmpy2 thread context precision."""
    bits = int(bits)
    if bits < 53:
        raise DomainError(f"precision must be >= 53 bits, got {bits}")
    ctx = gmpy2.get_context()
    saved = ctx.precision
    ctx.precision = bits
    try:
        yield
    finally:
        ctx.precision = saved


def _to_object_matrix(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            v = a[i, j]
            out[i, j] = gmpy2.mpc(v.real, v.imag)
    return out


def scaled_chain(factor_arrays, bits: int):
    """Product X_t ... X_1 with per-step max-abs rescaling.

    factor_arrays: complex ndarrays ordered X_1 first. Returns (yhat,
    log_scale) with the true product equal to e^{log_scale} * yhat and
    max |yhat entry| = 1. Raises on an exactly zero partial product.
    """
    if len(factor_arrays) == 0:
        raise DomainError("empty factor chain")
    with working_precision(bits):
        acc = _to_object_matrix(np.asarray(factor_arrays[0], dtype=np.complex128))
        log_scale = gmpy2.mpfr(0)
        acc, log_scale = _rescale(acc, log_scale)
        for a in factor_arrays[1:]:
            nxt = _to_object_matrix(np.asarray(a, dtype=np.complex128))
            acc = np.dot(nxt, acc)
            acc, log_scale = _rescale(acc, log_scale)
        return acc, float(log_scale)


def _rescale(acc: np.ndarray, log_scale):
    m = gmpy2.mpfr(0)
    for v in acc.flat:
        av = abs(v)
        if av > m:
            m = av
    if m == 0:
        raise DegenerateSampleError("partial product is exactly zero")
    inv = 1 / m
    for idx in np.ndindex(acc.shape):
        acc[idx] = acc[idx] * inv
    return acc, log_scale + gmpy2.log(m)


def char_poly(a: np.ndarray, bits: int):
    """Monic characteristic polynomial coefficients, leading first.

    Faddeev-LeVerrier: c_0 = 1; M_1 = A, c_k = -tr(A M_k)/k with
    M_{k+1} = A M_k + c_k I. Returns [c_0, c_1, ..., c_n] so that
    p(x) = sum_k c_k x^{n-k}.
    """
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise DomainError(f"char_poly requires a square matrix, got {a.shape}")
    with working_precision(bits):
        coeffs = [gmpy2.mpc(1)]
        m = a.copy()
        for k in range(1, n + 1):
            tr = gmpy2.mpc(0)
            for j in range(n):
                tr += m[j, j]
            ck = -tr / k
            coeffs.append(ck)
            if k < n:
                for j in range(n):
                    m[j, j] = m[j, j] + ck
                m = np.dot(a, m)
        return coeffs


def _newton_polygon_radii(coeffs):
    """Initial moduli for the roots from the upper hull of (k, log|c_k|).

    coeffs are leading-first; returns one radius per root (double
    precision log, exponentiated in mpfr so extreme magnitudes survive).
    """
    n = len(coeffs) - 1
    logs = []
    for c in coeffs:
        ac = abs(c)
        logs.append(float(gmpy2.log(ac)) if ac != 0 else -math.inf)
    # points (j, logs_rev[j]) with j = degree of the coefficient's power
    # counted from the constant term; hull walked from j=0 to j=n.
    pts = list(enumerate(reversed(logs)))
    hull = [pts[-1]]  # start from (n, 0): the monic leading coefficient
    j = n
    while j > 0:
        best = None
        best_slope = None
        for i, li in pts[:j]:
            if li == -math.inf:
                continue
            slope = (hull[-1][1] - li) / (j - i)
            if best_slope is None or slope < best_slope:
                best_slope = slope
                best = (i, li)
        if best is None:
            raise DegenerateSampleError("zero eigenvalue: vanishing trailing coefficients")
        hull.append(best)
        j = best[0]
    radii = []
    for (j_hi, l_hi), (j_lo, l_lo) in zip(hull, hull[1:]):
        r_log = (l_lo - l_hi) / (j_hi - j_lo)
        radii.extend([r_log] * (j_hi - j_lo))
    return radii  # log-radii, one per root, largest modulus first


def aberth(coeffs, bits: int, max_iter: int = 200):
    """All roots of the monic polynomial by Aberth-Ehrlich iteration.

    Stops when every correction satisfies |dz| <= 2^-(bits-16) (1+|z|);
    failure to converge raises a precision error (retry with more bits).
    """
    n = len(coeffs) - 1
    if n < 1:
        raise DomainError("polynomial must have degree >= 1")
    with working_precision(bits):
        log_radii = _newton_polygon_radii(coeffs)
        roots = []
        for k, lr in enumerate(log_radii):
            # golden-angle fan breaks conjugate symmetry of the start points
            ang = 2.399963229728653 * (k + 1) + 0.35
            r = gmpy2.exp(gmpy2.mpfr(lr))
            roots.append(r * gmpy2.mpc(math.cos(ang), math.sin(ang)))
        tol = gmpy2.exp2(-(bits - 16))
        dcoeffs = [c * (n - k) for k, c in enumerate(coeffs[:-1])]
        for _ in range(max_iter):
            done = True
            for k in range(n):
                z = roots[k]
                p = coeffs[0]
                for c in coeffs[1:]:
                    p = p * z + c
                dp = dcoeffs[0]
                for c in dcoeffs[1:]:
                    dp = dp * z + c
                if dp == 0:
                    done = False
                    roots[k] = z * (1 + tol) + tol
                    continue
                w = p / dp
                s = gmpy2.mpc(0)
                for j in range(n):
                    if j != k:
                        dz = z - roots[j]
                        if dz == 0:
                            raise PrecisionError(
                                "coincident root iterates; retry with more bits"
                            )
                        s += 1 / dz
                corr = w / (1 - w * s)
                roots[k] = z - corr
                if abs(corr) > tol * (1 + abs(roots[k])):
                    done = False
            if done:
                return roots
    raise PrecisionError(
        f"root iteration did not converge at {bits} bits; retry with more bits"
    )
