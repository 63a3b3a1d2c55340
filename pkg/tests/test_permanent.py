"""Permanent evaluators and eigenvalue interaction factors."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ginprod.errors import CapabilityError, DimensionError, DomainError
from ginprod.permanent import (
    permanent_naive,
    permanent_ryser,
    vandermonde_interaction,
)


def test_permanent_identity_and_ones():
    for n in range(1, 8):
        assert permanent_ryser(np.eye(n)) == pytest.approx(1.0)
        assert permanent_ryser(np.ones((n, n))) == pytest.approx(
            math.factorial(n), rel=1e-12
        )


def test_permanent_2x2():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert permanent_ryser(a) == pytest.approx(1 * 4 + 2 * 3)
    assert permanent_naive(a) == pytest.approx(10.0)


def test_permanent_diagonal():
    d = np.array([2.0, -3.0, 0.5, 1.5])
    assert permanent_ryser(np.diag(d)) == pytest.approx(np.prod(d))


def test_ryser_matches_naive_complex():
    rng = np.random.default_rng(42)
    for n in range(1, 8):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        r = permanent_ryser(a)
        v = permanent_naive(a)
        assert abs(r - v) <= 1e-10 * max(1.0, abs(v))


def test_permanent_empty_matrix():
    assert permanent_ryser(np.zeros((0, 0))) == 1.0 + 0.0j
    assert permanent_naive(np.zeros((0, 0))) == 1.0 + 0.0j


def test_permanent_size_limits_and_shape():
    with pytest.raises(CapabilityError):
        permanent_ryser(np.eye(21))
    with pytest.raises(CapabilityError):
        permanent_naive(np.eye(9))
    with pytest.raises(DimensionError):
        permanent_ryser(np.ones((2, 3)))


@settings(deadline=None, max_examples=40)
@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=10**6))
def test_permanent_row_permutation_invariance(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    shuffled = a[rng.permutation(n), :]
    assert abs(permanent_ryser(a) - permanent_ryser(shuffled)) <= 1e-9 * max(
        1.0, abs(permanent_ryser(a))
    )


@settings(deadline=None, max_examples=40)
@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=10**6))
def test_permanent_row_scaling(n, seed):
    # multilinearity in rows: scaling one row scales the permanent
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    b = a.copy()
    b[0] *= 3.0
    assert permanent_ryser(b) == pytest.approx(3.0 * permanent_ryser(a), rel=1e-9)


def test_permanent_expansion_recursion():
    # expansion along the first row: perm(A) = sum_j a_0j perm(A_0j)
    rng = np.random.default_rng(7)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    rest = np.arange(1, 5)
    total = 0.0 + 0.0j
    for j in range(5):
        minor = a[np.ix_(rest, [c for c in range(5) if c != j])]
        total += a[0, j] * permanent_ryser(minor)
    assert abs(permanent_ryser(a) - total) <= 1e-10 * abs(total)


# ---------------------------------------------------------------------------
# interaction factors


def test_interaction_beta2_matches_vandermonde_determinant():
    rng = np.random.default_rng(3)
    for n in range(2, 7):
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        got = vandermonde_interaction(2, z)
        det = np.linalg.det(np.vander(z, increasing=True))
        assert got == pytest.approx(2.0 * math.log(abs(det)), rel=1e-10)


def test_interaction_beta1_real_line():
    x = np.array([0.0, 1.0, 3.0])
    # |0-1| |0-3| |1-3| = 1*3*2
    assert vandermonde_interaction(1, x) == pytest.approx(math.log(6.0))
    with pytest.raises(DomainError):
        vandermonde_interaction(1, np.array([1.0 + 1j]))


def test_interaction_beta4_single_point():
    z = np.array([0.5 + 2.0j])
    # only the self term 2 log|z - conj z| = 2 log(2 Im z)
    assert vandermonde_interaction(4, z) == pytest.approx(2.0 * math.log(4.0))


def test_interaction_beta4_pair():
    z = np.array([1j, 1.0 + 1j])
    expect = (
        2.0 * math.log(2.0)  # self term of 1j
        + 2.0 * math.log(2.0)  # self term of 1+1j
        + 2.0 * math.log(abs(1j - (1 + 1j)))
        + 2.0 * math.log(abs(1j - (1 - 1j)))
    )
    assert vandermonde_interaction(4, z) == pytest.approx(expect, rel=1e-12)


def test_interaction_coincident_points():
    assert vandermonde_interaction(2, np.array([1.0, 1.0])) == -math.inf
    assert vandermonde_interaction(4, np.array([2.0 + 0j])) == -math.inf


def test_interaction_rejects_bad_beta():
    with pytest.raises(DomainError):
        vandermonde_interaction(3, np.array([1.0]))


def test_interaction_translation_invariance():
    rng = np.random.default_rng(11)
    z = rng.normal(size=5) + 1j * rng.normal(size=5)
    shift = 2.3 - 0.7j
    a = vandermonde_interaction(2, z)
    b = vandermonde_interaction(2, z + shift)
    assert a == pytest.approx(b, rel=1e-10)
