"""Structured solves, inertia counts and subspace helpers."""

import numpy as np
import pytest

from conftest import random_hermitian
from qplattice.linalg import (
    ArgumentError,
    bandwidth,
    banded_to_full_band,
    eig_count_below,
    eigenvalues_banded,
    nearest_eigenpair,
    orthonormal_columns,
    principal_angles,
    restriction_norm,
    solve_shifted,
    solve_shifted_banded,
    to_banded_upper,
)


def banded_hermitian(rng, n, bw):
    h = random_hermitian(rng, n)
    mask = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) <= bw
    return h * mask


def test_bandwidth_detection():
    rng = np.random.default_rng(1)
    assert bandwidth(np.diag(rng.normal(size=5))) == 0
    assert bandwidth(banded_hermitian(rng, 30, 3)) == 3
    assert bandwidth(rng.normal(size=(7, 7))) == 6


def test_banded_round_trip():
    rng = np.random.default_rng(2)
    h = banded_hermitian(rng, 40, 4)
    ab = to_banded_upper(h, 4)
    band, bw = banded_to_full_band(ab)
    assert bw == 4
    full = np.zeros_like(h)
    for k in range(-bw, bw + 1):
        idx = np.arange(40 - abs(k))
        if k >= 0:
            full[idx, idx + k] = band[bw - k, k:]
        else:
            full[idx - k, idx] = band[bw - k, : 40 + k]
    np.testing.assert_allclose(full, h, atol=1e-14)


@pytest.mark.parametrize("z", [0.3, 2.0 + 0.5j, -1.0 + 1e-3j])
def test_shifted_solve_matches_dense(z):
    rng = np.random.default_rng(3)
    h = banded_hermitian(rng, 60, 2)
    rhs = rng.normal(size=60) + 1j * rng.normal(size=60)
    x = solve_shifted(h, z, rhs)
    y = np.linalg.solve(h - z * np.eye(60), rhs)
    np.testing.assert_allclose(x, y, atol=1e-9)
    xb = solve_shifted_banded(to_banded_upper(h, 2), z, rhs)
    np.testing.assert_allclose(xb, y, atol=1e-9)


def test_shifted_solve_dense_path():
    # above MAX_BANDWIDTH relative to size the dense branch must kick in
    rng = np.random.default_rng(4)
    h = random_hermitian(rng, 12)
    rhs = rng.normal(size=12)
    x = solve_shifted(h, 0.7j, rhs)
    np.testing.assert_allclose((h - 0.7j * np.eye(12)) @ x, rhs, atol=1e-10)


def test_shifted_solve_rejects_rectangular():
    with pytest.raises(ArgumentError):
        solve_shifted(np.zeros((3, 4)), 0.0, np.zeros(4))


def test_eigenvalues_banded_matches_dense():
    rng = np.random.default_rng(5)
    h = banded_hermitian(rng, 50, 3)
    vals = eigenvalues_banded(to_banded_upper(h, 3))
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(h), atol=1e-10)
    # real tridiagonal fast path
    t = np.real(banded_hermitian(rng, 50, 1))
    vals = eigenvalues_banded(to_banded_upper(t, 1))
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(t), atol=1e-10)


def test_eig_count_below():
    rng = np.random.default_rng(6)
    h = banded_hermitian(rng, 40, 2)
    eigs = np.linalg.eigvalsh(h)
    for e in [-1.0, eigs[5] + 1e-9, 0.0, 10.0]:
        assert eig_count_below(h, e) == int(np.sum(eigs < e))
    assert eig_count_below(to_banded_upper(h, 2), 0.0) == int(np.sum(eigs < 0))


def test_eig_count_below_rejects_non_hermitian():
    with pytest.raises(ArgumentError):
        eig_count_below(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.0)


def test_nearest_eigenpair():
    rng = np.random.default_rng(7)
    h = banded_hermitian(rng, 80, 2)
    eigs = np.linalg.eigvalsh(h)
    target = eigs[17]
    lam, x = nearest_eigenpair(to_banded_upper(h, 2), target + 1e-4)
    assert abs(lam - target) < 1e-8
    np.testing.assert_allclose(h @ x, lam * x, atol=1e-8)
    assert abs(np.linalg.norm(x) - 1.0) < 1e-12


def test_orthonormal_columns():
    rng = np.random.default_rng(8)
    a = rng.normal(size=(6, 3))
    q = orthonormal_columns(a)
    np.testing.assert_allclose(q.conj().T @ q, np.eye(3), atol=1e-12)
    assert principal_angles(q, a).max() < 1e-12
    with pytest.raises(ArgumentError):
        orthonormal_columns(np.column_stack([a[:, 0], a[:, 0]]))


def test_principal_angles_known_value():
    # plane pair meeting at exactly 0.3 rad in one direction
    a = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    b = np.array([[1.0, 0.0], [0.0, np.cos(0.3)], [0.0, np.sin(0.3)]])
    angles = principal_angles(a, b)
    np.testing.assert_allclose(angles, [0.0, 0.3], atol=1e-12)
    # tiny angles survive the sine formulation
    c = np.array([[1.0], [1e-10]])
    d = np.array([[1.0], [0.0]])
    np.testing.assert_allclose(principal_angles(c, d), [1e-10], rtol=1e-3)


def test_restriction_norm():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(5, 5))
    q = orthonormal_columns(rng.normal(size=(5, 2)))
    direct = np.linalg.norm(a @ q, 2)
    assert abs(restriction_norm(a, q) - direct) < 1e-13
    assert restriction_norm(a, np.zeros((5, 0))) == 0.0
