"""Realization loop: rng streams, retries, parallel map, traces."""

import math

import numpy as np
import pytest

import ginprod.engine as engine
from ginprod.engine import RunResult, TracePoint, convergence_trace, rep_rng, run_reps
from ginprod.ensemble import DimensionProfile, sample_factor_chain
from ginprod.errors import PrecisionError
from ginprod.product import ProductSpec, resolve_precision, spectral_sample


def test_rep_rng_streams():
    a = rep_rng(123, 0).standard_normal(8)
    b = rep_rng(123, 0).standard_normal(8)
    c = rep_rng(123, 1).standard_normal(8)
    d = rep_rng(124, 0).standard_normal(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def _spec(**kw):
    args = dict(
        beta=2,
        profile=DimensionProfile.square(2, 4),
        reps=3,
        seed=7,
    )
    args.update(kw)
    return ProductSpec(**args)


def test_run_reps_reproducible():
    r1 = run_reps(_spec())
    r2 = run_reps(_spec())
    assert isinstance(r1, RunResult)
    assert len(r1.samples) == 3
    assert r1.retried == ()
    for s, t in zip(r1.samples, r2.samples):
        assert s.gamma == t.gamma
        assert s.lam == t.lam
        assert s.theta == t.theta


def test_run_reps_matches_manual_rep():
    spec = _spec()
    res = run_reps(spec)
    bits = resolve_precision(spec)
    for r in (0, 2):
        factors = sample_factor_chain(spec, rep_rng(spec.seed, r))
        direct = spectral_sample(factors, bits, want_eigen=True)
        assert res.samples[r].gamma == direct.gamma
        assert res.samples[r].lam == direct.lam


def test_want_eigen_defaults_to_square():
    square = run_reps(_spec(reps=1))
    assert square.samples[0].lam is not None
    rect = run_reps(_spec(profile=DimensionProfile(2, (0, 1, 1)), reps=1))
    assert rect.samples[0].lam is None
    assert rect.samples[0].theta is None
    assert len(rect.samples[0].gamma) == 2
    forced = run_reps(_spec(reps=1), want_eigen=False)
    assert forced.samples[0].lam is None


def test_retry_doubles_bits(monkeypatch):
    spec = _spec(reps=3)
    real = spectral_sample
    calls = []

    def flaky(factors, bits, want_eigen):
        calls.append(bits)
        # second rep fails on its first attempt only
        if len(calls) == 2:
            raise PrecisionError("forced")
        return real(factors, bits, want_eigen)

    monkeypatch.setattr(engine, "spectral_sample", flaky)
    res = run_reps(spec)
    assert res.retried == (1,)
    base = resolve_precision(spec)
    assert calls == [base, base, 2 * base, base]
    # retried rep still produced a valid sample
    assert len(res.samples) == 3
    assert all(math.isfinite(g) for g in res.samples[1].gamma)


def test_parallel_workers_agree():
    spec = _spec(profile=DimensionProfile.square(2, 3), reps=4)
    seq = run_reps(spec, workers=1)
    par = run_reps(spec, workers=2)
    assert seq.retried == par.retried
    for s, p in zip(seq.samples, par.samples):
        assert s.gamma == p.gamma
        assert s.lam == p.lam
        assert s.theta == p.theta


def test_trace_reaches_direct_sample():
    spec = _spec(profile=DimensionProfile.square(2, 5), reps=1, seed=42)
    trace = convergence_trace(spec)
    assert [p.step for p in trace] == [1, 2, 3, 4, 5]
    assert all(isinstance(p, TracePoint) for p in trace)
    direct = run_reps(spec).samples[0]
    end = trace[-1]
    assert end.gamma == pytest.approx(direct.gamma, abs=1e-12)
    assert end.lam == pytest.approx(direct.lam, abs=1e-10)
    assert end.theta == pytest.approx(direct.theta, abs=1e-10)


def test_trace_partial_steps_match_prefix_chains():
    # the step-k gamma equals singular exponents of the first k factors
    from ginprod.product import singular_exponents

    spec = _spec(profile=DimensionProfile.square(3, 4), reps=1, seed=5)
    factors = sample_factor_chain(spec, rep_rng(spec.seed, 0))
    trace = convergence_trace(spec, want_eigen=False)
    for k in (1, 2, 3, 4):
        ref = singular_exponents(factors[:k])
        assert trace[k - 1].gamma == pytest.approx(tuple(ref), abs=1e-12)
        assert trace[k - 1].lam is None


def test_trace_rectangular_defaults_singular_only():
    spec = _spec(profile=DimensionProfile(2, (0, 1)), reps=1)
    trace = convergence_trace(spec)
    assert all(p.lam is None and p.theta is None for p in trace)


def test_trace_beta4_pairs():
    spec = _spec(beta=4, profile=DimensionProfile.square(2, 3), reps=1)
    trace = convergence_trace(spec)
    for p in trace:
        assert len(p.gamma) == 2
        assert len(p.lam) == 2
        assert all(0.0 <= th <= math.pi for th in p.theta)
