"""Stable formation of Y(t) = X_t ... X_1 and finite-time exponents.

Two extraction routes:

* singular route: a thin-QR renormalization chain propagates an
  orthonormal frame through the factors and accumulates log|R_jj|;
  gamma_n = (accumulated log)/t. Never forms the raw product, so it is
  immune to overflow at any t.

* eigenvalue route: the product is accumulated in extended precision
  with max-abs rescaling, the characteristic polynomial of the rescaled
  product is solved with Aberth, and the rescaling is added back:
  lambda_n = (log|zhat_n| + log_scale)/t, theta_n = arg zhat_n.

The eigenvalue route needs the overall product square, which under the
nondecreasing-offset convention means an all-square profile (nu_t = 0
forces nu identically 0). Singular exponents support every profile.

For beta=4 both routes work on the 2x2 complex embedding: singular
accumulations and eigenvalues come in exactly degenerate/conjugate
pairs, which are reduced to the N quaternionic representatives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import gmpy2
import numpy as np

from . import theory
from ._kernels import qr_chain
from .ensemble import DimensionProfile, DysonIndex, GinibreFactor, as_dyson
from .errors import DegenerateSampleError, DimensionError, DomainError
from .xprec import aberth, char_poly, scaled_chain, working_precision


@dataclass(frozen=True)
class ProductSpec:
    """Full description of one product-ensemble experiment."""

    beta: DysonIndex
    profile: DimensionProfile
    reps: int = 1
    seed: int = 0
    precision_bits: Union[int, str] = "auto"

    def __post_init__(self):
        object.__setattr__(self, "beta", as_dyson(self.beta))
        if not isinstance(self.profile, DimensionProfile):
            raise DomainError("profile must be a DimensionProfile")
        if int(self.reps) < 1:
            raise DomainError(f"reps must be >= 1, got {self.reps}")
        object.__setattr__(self, "reps", int(self.reps))
        object.__setattr__(self, "seed", int(self.seed))
        pb = self.precision_bits
        if pb != "auto":
            pb = int(pb)
            if pb < 53:
                raise DomainError(f"explicit precision must be >= 53 bits, got {pb}")
            object.__setattr__(self, "precision_bits", pb)

    @property
    def t(self) -> int:
        return self.profile.t


@dataclass(frozen=True)
class SpectralSample:
    """Per-realization exponents.

    lam/theta are None when the eigenvalue route was skipped (non-square
    chains); log_scale is the accumulated max-abs rescaling of that
    route (0.0 when skipped); real_count is set for beta=1 only.
    """

    lam: Optional[tuple[float, ...]]
    theta: Optional[tuple[float, ...]]
    gamma: tuple[float, ...]
    log_scale: float
    real_count: Optional[int] = None


def resolve_precision(spec: ProductSpec) -> int:
    """Working bits: explicit, or ceil(t * gap sum / ln 2) + 96.

    gap sum = sum_n (mu_max - mu_n). The trailing characteristic
    polynomial coefficient is det of the rescaled product, of size
    e^{-t * gap sum}, assembled from O(1) traces; it needs that much
    cancellation headroom before the smallest root rises above rounding
    noise (the pairwise spread mu_max - mu_min is not enough for N > 2,
    and root residuals cannot detect coefficient noise, so under-
    provisioning would go unflagged). beta=4 runs the eigensolve on the
    2N x 2N embedding whose polynomial duplicates every exponent, so its
    determinant needs twice the gap sum. 96 guard bits cover the chain
    product and the polynomial evaluation.
    """
    if spec.precision_bits != "auto":
        return spec.precision_bits
    pred = theory.predict(spec.beta, spec.profile)
    gaps = sum(pred.mu[-1] - m for m in pred.mu)
    if as_dyson(spec.beta) == DysonIndex.QUATERNION:
        gaps *= 2.0
    return int(math.ceil(spec.t * gaps / math.log(2.0))) + 96


def _check_chain(factors: Sequence[GinibreFactor]):
    if len(factors) == 0:
        raise DomainError("empty factor chain")
    for i in range(1, len(factors)):
        if factors[i].cols != factors[i - 1].rows:
            raise DimensionError(
                f"factor {i + 1} has {factors[i].cols} columns, "
                f"expected {factors[i - 1].rows}"
            )


def _padded_stack(factors: Sequence[GinibreFactor]):
    rows = np.array([f.rows for f in factors], dtype=np.int64)
    cols = np.array([f.cols for f in factors], dtype=np.int64)
    stack = np.zeros(
        (len(factors), int(rows.max()), int(cols.max())), dtype=np.complex128
    )
    for i, f in enumerate(factors):
        stack[i, : f.rows, : f.cols] = f.entries
    return stack, rows, cols


def singular_exponents(factors: Sequence[GinibreFactor]) -> np.ndarray:
    """gamma_1 >= ... >= gamma_N from the QR renormalization chain."""
    _check_chain(factors)
    stack, rows, cols = _padded_stack(factors)
    acc, ok = qr_chain(stack, rows, cols)
    if not ok:
        raise DegenerateSampleError("rank collapse in QR chain (zero R diagonal)")
    gam = np.sort(acc / len(factors))[::-1]
    if factors[0].beta == DysonIndex.QUATERNION:
        # the embedding's accumulations are exactly doubly degenerate
        gam = 0.5 * (gam[0::2] + gam[1::2])
    return gam


def scaled_product(factors: Sequence[GinibreFactor], precision_bits: int = 128):
    """(yhat, log_scale) with Y = e^{log_scale} yhat, max-abs entry 1."""
    _check_chain(factors)
    return scaled_chain([f.entries for f in factors], precision_bits)


def _spectrum(factors: Sequence[GinibreFactor], precision_bits: int):
    """Complex-frame roots as (log-modulus, phase) lists plus log_scale.

    Log-moduli include the rescaling (they are log|z_n| of the true
    product) and arrive sorted descending. For beta=4 the full
    2N-point spectrum is returned, exactly conjugate-paired: the
    characteristic polynomial of a symplectic-real matrix has real
    coefficients (enforced, the imaginary parts being rounding residue)
    and each root pair is symmetrized to (z, conj z).
    """
    _check_chain(factors)
    if factors[-1].rows != factors[0].cols:
        raise DimensionError(
            "eigenvalues need a square overall product; "
            f"got {factors[-1].rows} x {factors[0].cols}"
        )
    beta = factors[0].beta
    yhat, log_scale = scaled_chain([f.entries for f in factors], precision_bits)
    return _spectrum_of(yhat, log_scale, beta, precision_bits)


def _spectrum_of(yhat, log_scale: float, beta: DysonIndex, precision_bits: int):
    """Spectrum of an already-accumulated scaled product (see _spectrum)."""
    coeffs = char_poly(yhat, precision_bits)
    if beta != DysonIndex.COMPLEX:
        # real (beta=1) and symplectic-real (beta=4) products have real
        # characteristic polynomials
        with working_precision(precision_bits):
            coeffs = [gmpy2.mpc(c.real, 0) for c in coeffs]
    roots = aberth(coeffs, precision_bits)
    logmod = []
    phase = []
    with working_precision(precision_bits):
        for z in roots:
            az = abs(z)
            if az == 0:
                raise DegenerateSampleError("zero eigenvalue")
            logmod.append(float(gmpy2.log(az)) + log_scale)
            phase.append(float(gmpy2.atan2(z.imag, z.real)))
    if beta == DysonIndex.QUATERNION:
        # conjugate partners share (log-modulus, |phase|) up to solver
        # jitter, so this sort makes them adjacent even when two pairs
        # have close moduli
        order = sorted(range(len(roots)), key=lambda i: (-logmod[i], abs(phase[i])))
        lm, ph = [], []
        for a, b in zip(order[0::2], order[1::2]):
            m = 0.5 * (logmod[a] + logmod[b])
            p = 0.5 * (abs(phase[a]) + abs(phase[b]))
            lm.extend([m, m])
            ph.extend([p, -p])
        return lm, ph, log_scale
    order = sorted(range(len(roots)), key=lambda i: -logmod[i])
    return [logmod[i] for i in order], [phase[i] for i in order], log_scale


def eigen_exponents(factors: Sequence[GinibreFactor], precision_bits: int):
    """(lambda, theta), lambda descending, phases canonicalized per beta.

    beta=2: theta in [0, 2pi). beta=1: theta in (-pi, pi] (classify_real
    snaps near-real ones to {0, pi}). beta=4: the N upper-half-plane
    representatives with theta in [0, pi].
    """
    lam, theta, _ = _eigen_with_scale(factors, precision_bits)
    return lam, theta


def _eigen_with_scale(factors: Sequence[GinibreFactor], precision_bits: int):
    beta = factors[0].beta
    logmod, phase, log_scale = _spectrum(factors, precision_bits)
    lam, theta = _exponents(beta, logmod, phase, len(factors))
    return lam, theta, log_scale


def _exponents(beta: DysonIndex, logmod, phase, t: int):
    """Map a spectrum to (lambda, theta) with per-beta phase domains."""
    if beta == DysonIndex.QUATERNION:
        logmod = logmod[0::2]
        phase = [abs(p) for p in phase[0::2]]
    lam = np.array(logmod) / t
    theta = np.array(phase)
    if beta == DysonIndex.COMPLEX:
        twopi = 2.0 * math.pi
        theta = np.mod(theta, twopi)
        # np.mod maps a tiny negative phase to the float 2 pi itself,
        # which is outside [0, 2 pi)
        theta[theta >= twopi] = 0.0
    return lam, theta


def classify_real(lam, theta, tol: float = 1e-6):
    """(real_count, theta) counting |sin theta| < tol as real.

    |sin theta| is the eigenvalue's imaginary part relative to its
    modulus; classified-real phases are snapped to 0 or pi.
    """
    theta = np.array(theta, dtype=np.float64)
    real_count = 0
    for i, th in enumerate(theta):
        if abs(math.sin(th)) < tol:
            theta[i] = 0.0 if math.cos(th) > 0.0 else math.pi
            real_count += 1
    return real_count, theta


def spectral_sample(
    factors: Sequence[GinibreFactor],
    precision_bits: int,
    want_eigen: bool = True,
    classify_tol: float = 1e-6,
) -> SpectralSample:
    """One realization's full exponent record from a sampled chain."""
    gamma = singular_exponents(factors)
    if not want_eigen:
        return SpectralSample(None, None, tuple(map(float, gamma)), 0.0, None)
    beta = factors[0].beta
    lam, theta, log_scale = _eigen_with_scale(factors, precision_bits)
    real_count = None
    if beta == DysonIndex.REAL:
        real_count, theta = classify_real(lam, theta, classify_tol)
    return SpectralSample(
        tuple(map(float, lam)),
        tuple(map(float, theta)),
        tuple(map(float, gamma)),
        log_scale,
        real_count,
    )
