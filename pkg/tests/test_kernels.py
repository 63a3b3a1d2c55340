"""Kernel backends: the compiled path must match the numpy reference."""

import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ginprod._kernels import (
    _qr_chain_numpy,
    _ryser_numpy,
    backend_name,
    qr_chain,
    ryser,
)


def _random_stack(rng, shapes):
    # stack[i, :rows[i], :cols[i]] holds factor i
    rmax = max(r for r, _ in shapes)
    cmax = max(c for _, c in shapes)
    stack = np.zeros((len(shapes), rmax, cmax), dtype=np.complex128)
    rows = np.empty(len(shapes), dtype=np.int64)
    cols = np.empty(len(shapes), dtype=np.int64)
    for i, (r, c) in enumerate(shapes):
        stack[i, :r, :c] = rng.normal(size=(r, c)) + 1j * rng.normal(size=(r, c))
        rows[i] = r
        cols[i] = c
    return stack, rows, cols


def test_qr_chain_single_factor_is_plain_qr():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    stack = x[None, :, :].copy()
    acc, ok = qr_chain(stack, np.array([4]), np.array([4]))
    assert ok
    _, r = np.linalg.qr(x)
    assert_allclose(acc, np.log(np.abs(np.diagonal(r))), rtol=1e-12)


def test_qr_chain_partial_sums_are_gram_volumes():
    # sum of the first k accumulated logs equals the log k-volume of the
    # image of the first k basis vectors: (1/2) logdet(Y_k^* Y_k)
    rng = np.random.default_rng(1)
    shapes = [(3, 3), (5, 3), (4, 5), (3, 4), (3, 3)]
    stack, rows, cols = _random_stack(rng, shapes)
    acc, ok = qr_chain(stack, rows, cols)
    assert ok
    y = np.eye(3, dtype=np.complex128)
    for i in range(len(shapes)):
        y = stack[i, : rows[i], : cols[i]] @ y
    for k in range(1, 4):
        yk = y[:, :k]
        _, logdet = np.linalg.slogdet(yk.conj().T @ yk)
        assert abs(np.sum(acc[:k]) - 0.5 * logdet) < 1e-9


def test_qr_chain_square_determinant_identity():
    rng = np.random.default_rng(2)
    shapes = [(4, 4)] * 6
    stack, rows, cols = _random_stack(rng, shapes)
    acc, ok = qr_chain(stack, rows, cols)
    assert ok
    expect = 0.0
    for i in range(6):
        _, ld = np.linalg.slogdet(stack[i, :4, :4])
        expect += ld
    assert abs(np.sum(acc) - expect) < 1e-10


def test_qr_chain_rank_collapse_flag():
    stack = np.zeros((1, 3, 3), dtype=np.complex128)
    acc, ok = qr_chain(stack, np.array([3]), np.array([3]))
    assert not ok


def test_qr_chain_backends_agree():
    rng = np.random.default_rng(3)
    shapes = [(2, 2), (4, 2), (3, 4), (2, 3)]
    stack, rows, cols = _random_stack(rng, shapes)
    a1, ok1 = qr_chain(stack, rows, cols)
    a2, ok2 = _qr_chain_numpy(stack, rows, cols)
    assert ok1 and ok2
    assert_allclose(a1, a2, rtol=1e-13, atol=1e-13)


def test_ryser_backends_agree():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    assert abs(complex(ryser(a)) - complex(_ryser_numpy(a))) <= 1e-10 * abs(
        complex(_ryser_numpy(a))
    )


def test_backend_name_reported():
    assert backend_name() in ("numba", "numpy")


def test_disable_flag_forces_numpy_backend():
    env = dict(os.environ, GINPROD_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "import ginprod._kernels as k; print(k.backend_name())"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_disable_flag_zero_means_enabled():
    env = dict(os.environ, GINPROD_DISABLE_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", "import ginprod._kernels as k; print(k.backend_name())"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    # "0" does not disable; the backend is numba when importable
    assert out.stdout.strip() in ("numba", "numpy")
