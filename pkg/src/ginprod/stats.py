"""Empirical summaries and goodness-of-fit checks for Monte Carlo output.

Kolmogorov-Smirnov comparisons use fixed critical values (1.63/sqrt(n)
at the 1% level, 1.36/sqrt(n) at 5%); acceptance runs need thresholds,
not p-values. Histograms and moment accumulators merge associatively so
realization-parallel workers can reduce their partial results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import theory
from .ensemble import DysonIndex, as_dyson
from .errors import DomainError

_KS_CRITICAL = {0.01: 1.63, 0.05: 1.36}


def ks_critical(n: int, level: float = 0.01) -> float:
    """Critical KS distance at the given level (1% or 5% only)."""
    if n < 1:
        raise DomainError("need at least one sample")
    try:
        c = _KS_CRITICAL[level]
    except KeyError:
        raise DomainError(f"level must be one of {sorted(_KS_CRITICAL)}") from None
    return c / math.sqrt(n)


def summarize(samples):
    """(mean, variance, skewness, count) with unbiased mean/variance.

    Skewness is the adjusted Fisher-Pearson estimator; a zero-variance
    sample reports skewness 0.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = len(x)
    if n < 2:
        raise DomainError(f"need at least two samples, got {n}")
    mean = float(np.mean(x))
    d = x - mean
    m2 = float(np.sum(d * d))
    variance = m2 / (n - 1)
    if m2 == 0.0:
        return mean, 0.0, 0.0, n
    s = math.sqrt(variance)
    skew = n / ((n - 1) * (n - 2)) * float(np.sum(d**3)) / s**3 if n > 2 else 0.0
    return mean, variance, skew, n


class MomentAccumulator:
    """Streaming mean/variance/skewness with associative merge.

    Keeps count, mean, and the centered power sums M2, M3; the merge
    update is the standard pairwise (Chan-style) combination, so chunked
    parallel reduction reproduces the single-pass result.
    """

    __slots__ = ("count", "mean", "m2", "m3")

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.m3 = 0.0

    def add(self, samples) -> "MomentAccumulator":
        x = np.asarray(samples, dtype=np.float64).ravel()
        if len(x) == 0:
            return self
        other = MomentAccumulator()
        other.count = len(x)
        other.mean = float(np.mean(x))
        d = x - other.mean
        other.m2 = float(np.sum(d * d))
        other.m3 = float(np.sum(d**3))
        return self.merge(other)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean = other.count, other.mean
            self.m2, self.m3 = other.m2, other.m3
            return self
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        m2 = self.m2 + other.m2 + delta**2 * na * nb / n
        m3 = (
            self.m3
            + other.m3
            + delta**3 * na * nb * (na - nb) / n**2
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n
        )
        self.count = n
        self.mean += delta * nb / n
        self.m2, self.m3 = m2, m3
        return self

    def summary(self):
        """(mean, variance, skewness, count) as in summarize()."""
        n = self.count
        if n < 2:
            raise DomainError(f"need at least two samples, got {n}")
        variance = self.m2 / (n - 1)
        if self.m2 == 0.0 or n < 3:
            return self.mean, variance, 0.0, n
        skew = n / ((n - 1) * (n - 2)) * self.m3 / variance**1.5
        return self.mean, variance, skew, n


@dataclass(frozen=True)
class Histogram:
    """Binned counts; edges sorted, len(counts) = len(edges) - 1."""

    edges: tuple[float, ...]
    counts: tuple[int, ...]
    total: int

    def __post_init__(self):
        if len(self.edges) < 2:
            raise DomainError("histogram needs at least two edges")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise DomainError("histogram edges must be strictly increasing")
        if len(self.counts) != len(self.edges) - 1:
            raise DomainError("len(counts) must be len(edges) - 1")
        if any(c < 0 for c in self.counts):
            raise DomainError("negative bin count")
        if sum(self.counts) != self.total:
            raise DomainError("total must equal the sum of counts")

    @classmethod
    def from_samples(cls, samples, edges=None) -> "Histogram":
        """Bin samples; default edges are Freedman-Diaconis on the data.

        With explicit edges, samples outside [edges[0], edges[-1]] are
        dropped (total counts only the binned ones).
        """
        x = np.asarray(samples, dtype=np.float64).ravel()
        if edges is None:
            if len(x) == 0:
                raise DomainError("cannot derive bin edges from no samples")
            e = np.histogram_bin_edges(x, bins="fd")
        else:
            e = np.asarray(edges, dtype=np.float64)
        counts, e = np.histogram(x, bins=e)
        return cls(tuple(e), tuple(int(c) for c in counts), int(counts.sum()))

    def merge(self, other: "Histogram") -> "Histogram":
        if len(self.edges) != len(other.edges) or any(
            a != b for a, b in zip(self.edges, other.edges)
        ):
            raise DomainError("can only merge histograms with identical edges")
        counts = tuple(a + b for a, b in zip(self.counts, other.counts))
        return Histogram(self.edges, counts, self.total + other.total)

    def density(self) -> np.ndarray:
        """Per-bin probability density (counts / total / width)."""
        if self.total == 0:
            return np.zeros(len(self.counts))
        widths = np.diff(np.asarray(self.edges))
        return np.asarray(self.counts) / (self.total * widths)


def ks_statistic(samples, cdf) -> float:
    """sup_x |empirical CDF - cdf(x)|; cdf must accept a sorted array."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = len(x)
    if n == 0:
        raise DomainError("need at least one sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max(np.max(i / n - f), np.max(f - (i - 1.0) / n)))


@dataclass(frozen=True)
class PhaseTestReport:
    """Result of comparing sampled phases to the asymptotic phase law.

    kind "ks-uniform" (beta=2) and "ks-sine-squared" (beta=4) carry a KS
    statistic; kind "off-axis-fraction" (beta=1) carries the fraction of
    phases away from {0, pi}, with a fixed 1e-3 allowance.
    """

    beta: DysonIndex
    kind: str
    count: int
    statistic: float
    critical: float
    passed: bool


def phase_histogram_test(beta, thetas, level: float = 0.01) -> PhaseTestReport:
    """Test phases against the per-beta asymptotic law.

    beta=2: KS against uniform on [0, 2pi). beta=4: KS against the
    sine-squared CDF (theta - sin theta cos theta)/pi on [0, pi].
    beta=1: phases are poles, so the test is the off-axis fraction
    (|sin theta| >= 1e-6), required below 1e-3.
    """
    beta = as_dyson(beta)
    th = np.asarray(thetas, dtype=np.float64).ravel()
    n = len(th)
    if n == 0:
        raise DomainError("need at least one phase")
    if beta == DysonIndex.REAL:
        off = float(np.mean(np.abs(np.sin(th)) >= 1e-6))
        return PhaseTestReport(beta, "off-axis-fraction", n, off, 1e-3, off <= 1e-3)
    kind = "ks-uniform" if beta == DysonIndex.COMPLEX else "ks-sine-squared"
    stat = ks_statistic(th, lambda x: theory.phase_cdf(beta, x))
    crit = ks_critical(n, level)
    return PhaseTestReport(beta, kind, n, stat, crit, stat < crit)
