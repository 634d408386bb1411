"""Jacobi eigensolver against closed forms and a power-iteration oracle."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fxtnes.errors import EigenSolveError
from fxtnes.linalg import (
    SYMMETRY_TOL,
    max_symmetric_eigenvalue,
    min_symmetric_eigenvalue,
    symmetric_eigenvalues,
)
from oracles import symmetric_eigen_range


def test_diagonal_matrix_returns_sorted_diagonal():
    vals = symmetric_eigenvalues(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(vals, [-1.0, 2.0, 3.0], atol=1e-14)


def test_two_by_two_closed_form():
    vals = symmetric_eigenvalues(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(vals, [1.0, 3.0], atol=1e-13)


def test_complete_graph_laplacian_spectrum():
    lap = np.array([[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]])
    vals = symmetric_eigenvalues(lap)
    assert np.allclose(vals, [0.0, 3.0, 3.0], atol=1e-12)


def test_one_by_one_and_zero_matrix():
    assert symmetric_eigenvalues(np.array([[5.0]]))[0] == 5.0
    assert np.allclose(symmetric_eigenvalues(np.zeros((4, 4))), 0.0)


def test_ascending_order_invariant():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(8, 8))
    vals = symmetric_eigenvalues(m + m.T)
    assert np.all(np.diff(vals) >= -1e-12)


def test_matches_power_iteration_oracle():
    rng = np.random.default_rng(11)
    for _ in range(5):
        m = rng.normal(size=(6, 6))
        sym = m + m.T
        lo, hi = symmetric_eigen_range(sym)
        assert min_symmetric_eigenvalue(sym) == pytest.approx(lo, abs=1e-8)
        assert max_symmetric_eigenvalue(sym) == pytest.approx(hi, abs=1e-8)


def test_trace_and_frobenius_are_preserved():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(7, 7))
    sym = m + m.T
    vals = symmetric_eigenvalues(sym)
    assert np.sum(vals) == pytest.approx(np.trace(sym), rel=1e-12)
    assert np.sum(vals**2) == pytest.approx(np.sum(sym**2), rel=1e-12)


@given(
    arrays(
        np.float64,
        (5, 5),
        elements=st.floats(min_value=-50, max_value=50, allow_nan=False),
    )
)
def test_random_symmetric_matches_characteristic_sums(m):
    sym = 0.5 * (m + m.T)
    vals = symmetric_eigenvalues(sym)
    scale = max(1.0, float(np.sum(sym**2)))
    assert np.sum(vals) == pytest.approx(np.trace(sym), abs=1e-9 * scale)
    assert np.sum(vals**2) == pytest.approx(np.sum(sym**2), abs=1e-9 * scale)


def test_rejects_nonsymmetric_input():
    bad = np.array([[1.0, 2.0], [0.5, 1.0]])
    with pytest.raises(ValueError, match="not symmetric"):
        symmetric_eigenvalues(bad)


def test_symmetry_tolerance_boundary():
    a = np.array([[1.0, 1.0], [1.0 + 0.5 * SYMMETRY_TOL, 1.0]])
    symmetric_eigenvalues(a)
    b = np.array([[1.0, 1.0], [1.0 + 10 * SYMMETRY_TOL, 1.0]])
    with pytest.raises(ValueError):
        symmetric_eigenvalues(b)


def test_rejects_nonsquare_input():
    with pytest.raises(ValueError, match="square"):
        symmetric_eigenvalues(np.ones((2, 3)))


def test_sweep_exhaustion_raises():
    rng = np.random.default_rng(2)
    m = rng.normal(size=(6, 6))
    with pytest.raises(EigenSolveError):
        symmetric_eigenvalues(m + m.T, max_sweeps=0)
