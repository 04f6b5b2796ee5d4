"""Boundary matrices, whole-line kernel, resolvent oracle, measure bounds."""

import numpy as np
import pytest

from conftest import random_strip
from qplattice.linalg import ArgumentError, ConvergenceError
from qplattice.operators import almost_mathieu, fold_to_strip, free_laplacian
from qplattice.weyl import (
    green_oracle,
    im_m_trace,
    m_matrix,
    m_minus,
    m_plus,
    spectral_bound,
)

SQRT5 = np.sqrt(5.0)
FREE = fold_to_strip(free_laplacian())


# ── free-operator closed forms ───────────────────────────────────────────────

def test_right_boundary_matrix_free():
    # decaying solution x^n with x + 1/x = i: x = i (1 - sqrt 5)/2
    value = m_plus(FREE, 1j)
    assert abs(complex(value[0, 0]) - 1j * (SQRT5 - 1) / 2) < 1e-6


def test_left_boundary_matrix_free():
    value = m_minus(FREE, 1j)
    assert abs(complex(value[0, 0]) - 1j * (SQRT5 + 1) / 2) < 1e-6


def test_boundary_sum_free():
    total = complex(m_plus(FREE, 1j)[0, 0] + m_minus(FREE, 1j)[0, 0])
    assert abs(total - 1j * SQRT5) < 1e-6


def test_right_boundary_matrix_real_energy():
    # off the spectrum the contracting eigenvalue of [[5, -1], [1, 0]]
    value = m_plus(FREE, 5.0)
    assert abs(complex(value[0, 0]) + (5 - np.sqrt(21.0)) / 2) < 1e-8


def test_whole_line_kernel_free():
    data = m_matrix(FREE, 1j)
    assert abs(complex(data.block(1, 1)[0, 0]) - 1j / SQRT5) < 1e-6
    # constant operator: both center sites carry the same kernel value
    assert abs(complex(data.block(0, 0)[0, 0]) - 1j / SQRT5) < 1e-6
    assert abs(im_m_trace(data) - 2 / SQRT5) < 1e-6


# ── structural properties on random strips ───────────────────────────────────

def test_boundary_matrices_are_herglotz():
    rng = np.random.default_rng(71)
    for _ in range(5):
        strip = random_strip(rng, k_max=2)
        z = rng.uniform(-1, 1) + 1j * 10 ** rng.uniform(-2, 0)
        for value in (m_plus(strip, z), m_minus(strip, z)):
            im = np.linalg.eigvalsh((value - value.conj().T) / 2j)
            assert im.min() > 0


def test_trace_expansion_matches_direct():
    rng = np.random.default_rng(72)
    for _ in range(3):
        strip = random_strip(rng, k_max=2)
        data = m_matrix(strip, 0.2 + 0.05j)
        direct = float(np.real(np.trace(
            (data.matrix - data.matrix.conj().T) / 2j)))
        assert abs(im_m_trace(data) - direct) < 1e-8 * max(1.0, abs(direct))


def test_kernel_blocks_match_truncated_resolvent():
    rng = np.random.default_rng(73)
    z = 0.3 + 0.01j
    for strip in [fold_to_strip(almost_mathieu(0.5, theta=0.2)),
                  random_strip(rng, k_max=2)]:
        data = m_matrix(strip, z)
        for i in (0, 1):
            for j in (0, 1):
                block = np.atleast_2d(data.block(i, j))
                oracle = np.atleast_2d(
                    green_oracle(strip, z, i - 1, j - 1, n_sites=4001,
                                 verify=False))
                err = np.abs(block - oracle).max() / np.abs(oracle).max()
                assert err < 1e-2


# ── the resolvent oracle itself ──────────────────────────────────────────────

def test_green_oracle_free_value():
    value = green_oracle(free_laplacian(), 1j, 0, 0)
    assert abs(complex(value) - 1j / SQRT5) < 1e-4


def test_green_oracle_checks_input():
    with pytest.raises(ArgumentError):
        green_oracle(free_laplacian(), 2.0, 0, 0)  # real spectral parameter
    with pytest.raises(ArgumentError):
        green_oracle(free_laplacian(), 1j, 5000, 0, n_sites=101)


def test_green_oracle_detects_unconverged_window():
    # tiny Im z, tiny window: the doubled window must move the answer
    with pytest.raises(ConvergenceError):
        green_oracle(free_laplacian(), 1e-8j, 0, 0, n_sites=51)


# ── fitted measure bounds ────────────────────────────────────────────────────

def test_spectral_bound_subcritical_cosine():
    report = spectral_bound(
        fold_to_strip(almost_mathieu(0.5, theta=0.1)),
        -0.0011684844606349998,  # truncation eigenvalue: on-spectrum energy
        eps_grid=(1e-2, 3e-2, 1e-1),
    )
    assert report.dims == (0, 2, 0)
    assert np.all(report.trace_im > 0)
    assert np.all(report.mu_bound <= report.jl_rhs * (1 + 1e-9))
    assert np.all(report.criterion_lhs >= report.criterion_rhs * (1 - 1e-9))
    assert report.jl_constant > 0 and report.criterion_constant > 0


def test_spectral_bound_needs_neutral_energy():
    with pytest.raises(ArgumentError):
        spectral_bound(FREE, 3.0, eps_grid=(1e-1,))
    with pytest.raises(ArgumentError):
        spectral_bound(FREE, 0.0, eps_grid=(0.0, 1e-1))
