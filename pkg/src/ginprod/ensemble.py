"""Rectangular Ginibre factor sampling for the three symmetry classes.

Normalization convention: every scalar entry has E|entry|^2 = 1. For
beta=1 that is a standard real normal; for beta=2 the real and
imaginary components each carry variance 1/2; for beta=4 the four
quaternion components each carry variance 1/4. This is the convention
under which the closed-form exponent means hold without rescaling.

Quaternionic factors are represented in the canonical 2x2 complex
embedding: the (k, n) quaternion entry a + bi + cj + dk becomes the
block [[alpha, beta], [-conj(beta), conj(alpha)]] with alpha = a + ib,
beta = c + id, so an r x c quaternion matrix is a 2r x 2c complex one
satisfying the symplectic reality Omega_r conj(X) Omega_c^T = X.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError


class DysonIndex(enum.IntEnum):
    """Symmetry-class label: 1 real, 2 complex, 4 quaternionic."""

    REAL = 1
    COMPLEX = 2
    QUATERNION = 4


def as_dyson(beta) -> DysonIndex:
    try:
        return DysonIndex(int(beta))
    except ValueError:
        raise DomainError(f"beta must be 1, 2 or 4, got {beta!r}") from None


@dataclass(frozen=True)
class DimensionProfile:
    """Smallest dimension N plus the offsets nu_1..nu_t (nu_0 = 0 implied).

    Factor i is (N+nu_i) x (N+nu_{i-1}); the offsets must be
    nondecreasing (the canonical ordering, statistically equivalent to
    any other by weak commutation of the factors).
    """

    n: int
    nus: tuple[int, ...]

    def __post_init__(self):
        if int(self.n) < 1:
            raise DomainError(f"need N >= 1, got {self.n}")
        nus = tuple(int(v) for v in self.nus)
        if len(nus) < 1:
            raise DomainError("profile needs at least one factor")
        if nus[0] < 0 or any(a > b for a, b in zip(nus, nus[1:])):
            raise DomainError(f"offsets must be nondecreasing and >= 0: {nus}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "nus", nus)

    @classmethod
    def square(cls, n: int, t: int) -> "DimensionProfile":
        """All-square chain: nu identically zero, t factors."""
        return cls(n, (0,) * t)

    @property
    def t(self) -> int:
        return len(self.nus)

    def factor_shape(self, i: int) -> tuple[int, int]:
        """(rows, cols) of factor i, 1-based, before any beta=4 doubling."""
        if not 1 <= i <= self.t:
            raise DomainError(f"factor index {i} outside 1..{self.t}")
        prev = 0 if i == 1 else self.nus[i - 2]
        return self.n + self.nus[i - 1], self.n + prev

    def prefix(self, t: int) -> "DimensionProfile":
        """Profile of the first t factors (partial products at time t)."""
        if not 1 <= t <= self.t:
            raise DomainError(f"prefix length {t} outside 1..{self.t}")
        return DimensionProfile(self.n, self.nus[:t])


@dataclass(frozen=True)
class GinibreFactor:
    """One sampled factor; entries are complex for every symmetry class."""

    entries: np.ndarray = field(repr=False)
    rows: int
    cols: int
    beta: DysonIndex


def sample_factor(beta, rows: int, cols: int, rng: np.random.Generator) -> GinibreFactor:
    """Draw one rows x cols Ginibre factor.

    For beta=4, rows and cols count quaternion entries; the returned
    complex embedding is 2*rows x 2*cols.
    """
    beta = as_dyson(beta)
    rows = int(rows)
    cols = int(cols)
    if rows < 1 or cols < 1:
        raise DimensionError(f"factor dimensions must be >= 1, got {rows}x{cols}")
    if beta == DysonIndex.REAL:
        entries = rng.standard_normal((rows, cols)).astype(np.complex128)
        return GinibreFactor(entries, rows, cols, beta)
    if beta == DysonIndex.COMPLEX:
        comps = rng.standard_normal((2, rows, cols))
        entries = (comps[0] + 1j * comps[1]) * np.sqrt(0.5)
        return GinibreFactor(entries, rows, cols, beta)
    comps = 0.5 * rng.standard_normal((4, rows, cols))
    alpha = comps[0] + 1j * comps[1]
    betaq = comps[2] + 1j * comps[3]
    entries = np.empty((2 * rows, 2 * cols), dtype=np.complex128)
    entries[0::2, 0::2] = alpha
    entries[0::2, 1::2] = betaq
    entries[1::2, 0::2] = -np.conj(betaq)
    entries[1::2, 1::2] = np.conj(alpha)
    return GinibreFactor(entries, 2 * rows, 2 * cols, beta)


def sample_factor_chain(spec, rng: np.random.Generator):
    """Independent factors X_1..X_t for a product experiment.

    spec is anything exposing beta and profile (a product.ProductSpec in
    normal use).
    """
    beta = as_dyson(spec.beta)
    profile = spec.profile
    return [
        sample_factor(beta, *profile.factor_shape(i), rng)
        for i in range(1, profile.t + 1)
    ]


def symplectic_defect(entries: np.ndarray) -> float:
    """Max-abs deviation from Omega_r conj(X) Omega_c^T = X (beta=4 check)."""
    r2, c2 = entries.shape
    if r2 % 2 or c2 % 2:
        raise DimensionError("symplectic check needs even complex dimensions")
    swapped = np.empty_like(entries)
    # Omega conj(X) Omega^T in the 2x2-block picture maps
    # [[a,b],[c,d]] -> [[conj d, -conj c], [-conj b, conj a]].
    swapped[0::2, 0::2] = np.conj(entries[1::2, 1::2])
    swapped[0::2, 1::2] = -np.conj(entries[1::2, 0::2])
    swapped[1::2, 0::2] = -np.conj(entries[0::2, 1::2])
    swapped[1::2, 1::2] = np.conj(entries[0::2, 0::2])
    return float(np.max(np.abs(swapped - entries)))
