"""Realization loop: seeds, precision retries, and convergence traces.

Each repetition draws its factors from an independent Philox stream
spawned as SeedSequence(entropy=seed, spawn_key=(rep,)), so results are
reproducible per rep and independent of worker count or replay order. A
repetition that fails with a precision error is retried once on the
same factors with doubled bits; a second failure propagates.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensemble import DysonIndex, sample_factor_chain
from .errors import DegenerateSampleError, PrecisionError
from .product import (
    ProductSpec,
    SpectralSample,
    _exponents,
    _spectrum_of,
    resolve_precision,
    spectral_sample,
)
from .xprec import _rescale, _to_object_matrix, working_precision

import gmpy2


def rep_rng(seed: int, rep: int) -> np.random.Generator:
    """The dedicated random stream of one repetition."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(rep,))
    return np.random.Generator(np.random.Philox(ss))


def _one_rep(spec: ProductSpec, rep: int, bits: int, want_eigen: bool):
    factors = sample_factor_chain(spec, rep_rng(spec.seed, rep))
    try:
        return spectral_sample(factors, bits, want_eigen), False
    except PrecisionError:
        return spectral_sample(factors, 2 * bits, want_eigen), True


@dataclass(frozen=True)
class RunResult:
    spec: ProductSpec
    bits: int
    samples: tuple[SpectralSample, ...]
    retried: tuple[int, ...]  # rep indices that needed doubled bits


def run_reps(
    spec: ProductSpec,
    want_eigen: Optional[bool] = None,
    workers: int = 1,
) -> RunResult:
    """All repetitions of spec, ordered by rep index.

    want_eigen defaults to whether the overall product is square (the
    offset profile ends at 0); rectangular chains get singular exponents
    only.
    """
    if want_eigen is None:
        want_eigen = spec.profile.nus[-1] == 0
    bits = resolve_precision(spec)
    reps = range(spec.reps)
    if workers <= 1 or spec.reps == 1:
        pairs = [_one_rep(spec, r, bits, want_eigen) for r in reps]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pairs = list(
                pool.map(
                    _one_rep,
                    [spec] * spec.reps,
                    reps,
                    [bits] * spec.reps,
                    [want_eigen] * spec.reps,
                    chunksize=max(1, spec.reps // (8 * workers)),
                )
            )
    samples = tuple(s for s, _ in pairs)
    retried = tuple(r for r, (_, flag) in enumerate(pairs) if flag)
    return RunResult(spec, bits, samples, retried)


@dataclass(frozen=True)
class TracePoint:
    """Exponents of the partial product over the first `step` factors."""

    step: int
    gamma: tuple[float, ...]
    lam: Optional[tuple[float, ...]] = None
    theta: Optional[tuple[float, ...]] = None


def _step_spectrum(yhat, log_scale, beta, bits):
    try:
        return _spectrum_of(yhat, log_scale, beta, bits)
    except PrecisionError:
        return _spectrum_of(yhat, log_scale, beta, 2 * bits)


def convergence_trace(spec: ProductSpec, want_eigen: Optional[bool] = None):
    """Single-realization exponent history at every step t' = 1..t.

    Uses rep 0 of the spec's seed. The QR frame and the extended
    precision product are advanced incrementally, so the cost is one
    factor multiply plus one small eigenproblem per step.
    """
    if want_eigen is None:
        want_eigen = spec.profile.nus[-1] == 0
    factors = sample_factor_chain(spec, rep_rng(spec.seed, 0))
    beta = spec.beta
    bits = resolve_precision(spec) if want_eigen else 64
    q = np.eye(factors[0].cols, dtype=np.complex128)
    acc = np.zeros(factors[0].cols)
    yhat = None
    log_scale = gmpy2.mpfr(0)
    out = []
    for step, f in enumerate(factors, start=1):
        z = f.entries @ q
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        if np.any(d == 0):
            raise DegenerateSampleError("rank collapse in QR chain (zero R diagonal)")
        acc = acc + np.log(np.abs(d))
        q = q * (d / np.abs(d))[None, :]
        gam = np.sort(acc / step)[::-1]
        if beta == DysonIndex.QUATERNION:
            gam = 0.5 * (gam[0::2] + gam[1::2])
        lam = theta = None
        if want_eigen:
            with working_precision(bits):
                nxt = _to_object_matrix(f.entries)
                yhat = nxt if yhat is None else np.dot(nxt, yhat)
                yhat, log_scale = _rescale(yhat, gmpy2.mpfr(log_scale))
            logmod, phase, _ = _step_spectrum(yhat, float(log_scale), beta, bits)
            lam_a, theta_a = _exponents(beta, logmod, phase, step)
            lam, theta = tuple(map(float, lam_a)), tuple(map(float, theta_a))
        out.append(TracePoint(step, tuple(map(float, gam)), lam, theta))
    return out
