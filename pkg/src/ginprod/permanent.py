"""Permanents and eigenvalue-interaction factors for joint densities.

permanent_ryser evaluates via Ryser's inclusion-exclusion formula in
Gray-code order, O(2^n n): each step flips one column in the running
row-sum vector. permanent_naive sums over all permutations and exists
as an independent cross-check for small n.

vandermonde_interaction gives the log of the eigenvalue repulsion
factor of the joint densities for each symmetry class.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ._kernels import ryser
from .errors import CapabilityError, DimensionError, DomainError


def _as_square(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"permanent requires a square matrix, got {a.shape}")
    return a


def permanent_ryser(a) -> complex:
    """Permanent of a square complex matrix (Ryser, Gray code), n <= 20."""
    a = _as_square(a)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n > 20:
        raise CapabilityError(f"permanent_ryser limited to n <= 20, got n={n}")
    return complex(ryser(a))


def permanent_naive(a) -> complex:
    """Permanent by explicit permutation sum, n <= 8. Cross-check oracle."""
    a = _as_square(a)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n > 8:
        raise CapabilityError(f"permanent_naive limited to n <= 8, got n={n}")
    total = 0.0 + 0.0j
    for perm in itertools.permutations(range(n)):
        p = 1.0 + 0.0j
        for i in range(n):
            p *= a[i, perm[i]]
        total += p
    return total


def vandermonde_interaction(beta: int, points) -> float:
    """Log of the eigenvalue interaction factor; -inf at coincident points.

    beta=1 (real points):    sum_{k<l} log|x_k - x_l|
    beta=2:                  sum_{k<l} 2 log|z_k - z_l|
    beta=4 (upper half z):   sum_{k<l} 2(log|z_k - z_l| + log|z_k - conj z_l|)
                             + sum_n 2 log|z_n - conj z_n|
    """
    z = np.asarray(points, dtype=np.complex128).ravel()
    n = len(z)
    if beta == 1:
        if np.any(z.imag != 0.0):
            raise DomainError("beta=1 interaction takes real points")
        total = 0.0
        for k in range(n):
            for l in range(k + 1, n):
                total += _log_abs(z[k] - z[l])
        return total
    if beta == 2:
        total = 0.0
        for k in range(n):
            for l in range(k + 1, n):
                total += 2.0 * _log_abs(z[k] - z[l])
        return total
    if beta == 4:
        total = 0.0
        for k in range(n):
            total += 2.0 * _log_abs(z[k] - np.conj(z[k]))
            for l in range(k + 1, n):
                total += 2.0 * _log_abs(z[k] - z[l])
                total += 2.0 * _log_abs(z[k] - np.conj(z[l]))
        return total
    raise DomainError(f"beta must be 1, 2 or 4, got {beta}")


def _log_abs(d: complex) -> float:
    m = abs(d)
    return math.log(m) if m > 0.0 else -math.inf
