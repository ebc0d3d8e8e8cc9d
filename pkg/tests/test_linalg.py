from __future__ import annotations

import numpy as np
import pytest

from platelab.errors import JacobiConvergenceError, SingularSystemError
from platelab.linalg import (
    gauss_inverse,
    inverse_small,
    jacobi_eigh,
    largest_singular_value,
    power_sigma_max,
    solve_small,
    top_singular_pair,
)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def _herm(rng, n, batch=()):
    A = rng.standard_normal(batch + (n, n)) + 1j * rng.standard_normal(batch + (n, n))
    return A + np.conj(np.swapaxes(A, -1, -2))


@pytest.mark.parametrize("n", [2, 3, 5])
def test_jacobi_matches_lapack(rng, n):
    H = _herm(rng, n, (200,))
    w = jacobi_eigh(H)
    ref = np.linalg.eigvalsh(H)
    np.testing.assert_allclose(w, ref, atol=1e-12 * np.abs(ref).max())


def test_jacobi_vectors(rng):
    H = _herm(rng, 3, (50,))
    w, V = jacobi_eigh(H, vectors=True)
    np.testing.assert_allclose(H @ V, V * w[:, None, :], atol=1e-11)
    np.testing.assert_allclose(np.conj(np.swapaxes(V, -1, -2)) @ V, np.broadcast_to(np.eye(3), V.shape), atol=1e-12)


def test_jacobi_wide_dynamic_range():
    # entries spanning the subnormal range must not lose their phase
    G = np.array([[1e-24, 1e-318 * (1 + 1j), 0], [1e-318 * (1 - 1j), 1e-30, 0], [0, 0, 1e-20]])
    w = jacobi_eigh(G)
    np.testing.assert_allclose(w, [1e-30, 1e-24, 1e-20], rtol=1e-12)


def test_jacobi_budget():
    H = _herm(np.random.default_rng(0), 6)
    with pytest.raises(JacobiConvergenceError):
        jacobi_eigh(H, max_sweeps=0)


def test_singular_values(rng):
    R = rng.standard_normal((100, 3, 3)) + 1j * rng.standard_normal((100, 3, 3))
    ref = np.linalg.svd(R, compute_uv=False)[:, 0]
    np.testing.assert_allclose(largest_singular_value(R), ref, rtol=1e-13)
    s, v = top_singular_pair(R)
    np.testing.assert_allclose(np.linalg.norm(R @ v[..., None], axis=(1, 2)), ref, rtol=1e-12)


def test_small_solves(rng):
    A = rng.standard_normal((300, 3, 3)) + 1j * rng.standard_normal((300, 3, 3))
    b = rng.standard_normal((300, 3)) + 1j * rng.standard_normal((300, 3))
    x = solve_small(A, b)
    np.testing.assert_allclose(np.einsum("nij,nj->ni", A, x), b, atol=1e-10)
    np.testing.assert_allclose(inverse_small(A), np.linalg.inv(A), rtol=1e-9, atol=1e-9)


def test_singular_pivot():
    with pytest.raises(SingularSystemError):
        solve_small(np.zeros((3, 3)), np.ones(3))
    with pytest.raises(SingularSystemError):
        gauss_inverse(np.zeros((2, 2)))


def test_dense_oracle_routines(rng):
    A = rng.standard_normal((24, 24)) + 1j * rng.standard_normal((24, 24))
    np.testing.assert_allclose(gauss_inverse(A) @ A, np.eye(24), atol=1e-10)
    ref = np.linalg.svd(A, compute_uv=False)[0]
    assert power_sigma_max(A) == pytest.approx(ref, rel=1e-11)
    assert power_sigma_max(np.zeros((3, 3))) == 0.0
