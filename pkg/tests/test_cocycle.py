"""Cocycle products: exponents, rotation numbers, complexified growth."""

import numpy as np
import pytest

from conftest import random_line, random_strip
from qplattice.cocycle import (
    Cocycle,
    acceleration,
    companion_cocycle,
    energy_monotonicity,
    finite_window_rates,
    iterate,
    lyapunov_spectrum,
    phase_lattice,
    rotation_number,
    top_lyapunov,
    transfer_cocycle,
    upper_lyapunov_sum,
)
from qplattice.linalg import ArgumentError
from qplattice.operators import almost_mathieu, fold_to_strip, free_laplacian

# arccosh(3/2): top exponent of the free operator at energy 3
FREE_TOP_AT_3 = 0.9624236501192069


def rotation_cocycle(phi):
    r = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])

    def matrix_fn(phases):
        return np.broadcast_to(r, np.shape(phases) + (2, 2)).copy()

    return Cocycle(0.1234, matrix_fn, 2)


def test_phase_lattice_midpoints():
    np.testing.assert_allclose(phase_lattice(4), [0.125, 0.375, 0.625, 0.875])


def test_transfer_state_solves_difference_equation():
    rng = np.random.default_rng(41)
    strip = random_strip(rng)
    m = strip.width
    energy = 0.6
    cocycle = transfer_cocycle(strip, energy)
    theta = 0.21
    state = rng.normal(size=2 * m) + 1j * rng.normal(size=2 * m)
    states = [state]
    for n in range(6):
        states.append(cocycle.matrix(theta + n * strip.alpha) @ states[-1])
    c = strip.coupling
    # step n maps (u(n), u(n-1)) -> (u(n+1), u(n)) through the site-n row
    for n in range(5):
        u_next = states[n + 1][:m]
        u_here, u_prev = states[n][:m], states[n][m:]
        v = strip.potential(strip.theta + theta + n * strip.alpha)
        lhs = c @ u_next + v @ u_here + c.conj().T @ u_prev
        np.testing.assert_allclose(lhs, energy * u_here, atol=1e-10)


def test_companion_product_reproduces_strip_step():
    rng = np.random.default_rng(42)
    op = random_line(rng, k_max=2)
    comp = companion_cocycle(op, 0.4)
    tr = transfer_cocycle(fold_to_strip(op), 0.4)
    for x in [0.0, 0.3, 0.77]:
        np.testing.assert_allclose(iterate(comp, x, 2), tr.matrix(x),
                                   atol=1e-12)


def test_companion_determinant_modulus_one():
    rng = np.random.default_rng(43)
    op = random_line(rng, k_max=3)
    comp = companion_cocycle(op, -0.2)
    dets = np.linalg.det(comp.matrices(phase_lattice(8)))
    np.testing.assert_allclose(np.abs(dets), 1.0, atol=1e-12)


def test_iterate_cocycle_property():
    rng = np.random.default_rng(44)
    cocycle = transfer_cocycle(random_strip(rng), 0.9)
    theta = 0.37
    full = iterate(cocycle, theta, 7)
    split = iterate(cocycle, theta + 4 * cocycle.alpha, 3) @ iterate(
        cocycle, theta, 4)
    np.testing.assert_allclose(full, split, atol=1e-10)
    back = iterate(cocycle, theta, -4)
    np.testing.assert_allclose(back @ iterate(cocycle, theta - 4 * cocycle.alpha, 4),
                               np.eye(cocycle.dim), atol=1e-10)
    np.testing.assert_allclose(iterate(cocycle, theta, 0), np.eye(cocycle.dim))


def test_free_operator_top_exponent():
    cocycle = transfer_cocycle(fold_to_strip(free_laplacian()), 3.0)
    top, spread = top_lyapunov(cocycle, 4000, samples=8)
    assert abs(top - FREE_TOP_AT_3) < 2e-3
    assert spread < 1e-12  # constant cocycle: no phase dependence at all


def test_exponents_come_in_opposite_pairs():
    rng = np.random.default_rng(45)
    strip = random_strip(rng, k_max=2)
    est = lyapunov_spectrum(transfer_cocycle(strip, 0.3), 3000, samples=8)
    ex = est.exponents
    assert all(ex[i] >= ex[i + 1] - 1e-12 for i in range(len(ex) - 1))
    pair_defect = np.abs(ex + ex[::-1]).max()
    assert pair_defect < max(5 * est.spread, 1e-8)


def test_exponent_sum_is_log_determinant():
    rng = np.random.default_rng(46)
    op = random_line(rng, k_max=2)
    comp = companion_cocycle(op, 0.1)
    total, total_spread = upper_lyapunov_sum(comp, comp.dim, 1500, samples=4)
    # unit-modulus determinant: all exponents cancel exactly
    assert abs(total) < 1e-12


def test_strip_exponent_is_fold_width_times_line_exponent():
    rng = np.random.default_rng(47)
    op = random_line(rng, k_max=2)
    energy = 0.5
    comp_top, comp_spread = top_lyapunov(companion_cocycle(op, energy), 6000,
                                         samples=8)
    strip_top, strip_spread = top_lyapunov(
        transfer_cocycle(fold_to_strip(op), energy), 3000, samples=8)
    assert abs(strip_top - 2 * comp_top) < 10 * (strip_spread + comp_spread) + 5e-3


def test_finite_window_rates_descending():
    rng = np.random.default_rng(48)
    cocycle = transfer_cocycle(random_strip(rng, k_max=2), 0.25)
    rates = finite_window_rates(cocycle, 0.11, 400)
    assert len(rates) == cocycle.dim
    assert all(rates[i] >= rates[i + 1] for i in range(len(rates) - 1))


def test_rotation_number_of_constant_rotation():
    for phi in [0.3, 2.0, 5.5]:
        rho, spread = rotation_number(rotation_cocycle(phi), 500)
        assert abs((rho - phi / (2 * np.pi)) % 1.0) < 1e-10 or \
            abs((rho - phi / (2 * np.pi)) % 1.0 - 1.0) < 1e-10
        assert spread < 1e-8


def test_rotation_number_free_band_center():
    cocycle = transfer_cocycle(fold_to_strip(free_laplacian()), 0.0)
    rho, _ = rotation_number(cocycle, 4000)
    assert abs(rho - 0.25) < 1e-3


def test_rotation_number_input_checks():
    rng = np.random.default_rng(49)
    big = transfer_cocycle(random_strip(rng, k_max=2), 0.0)
    with pytest.raises(ArgumentError):
        rotation_number(big, 10)
    # complex-valued 2x2 cocycles carry no projective lift
    bad = transfer_cocycle(fold_to_strip(free_laplacian()), 1j)
    with pytest.raises(ArgumentError):
        rotation_number(bad, 10)


def test_acceleration_supercritical_cosine():
    strip = fold_to_strip(almost_mathieu(2.0))
    est = acceleration(strip, 0.5, n_steps=4000, samples=8, fit_tol=5e-3)
    assert est.rounded == 1
    assert abs(est.value - 1.0) < 0.05
    assert est.residual < 5e-3


def test_energy_monotonicity_sign_and_reference():
    rng = np.random.default_rng(50)
    for _ in range(20):
        strip = random_strip(rng, k_max=2)
        v = rng.normal(size=2 * strip.width) + 1j * rng.normal(size=2 * strip.width)
        value, reference = energy_monotonicity(strip, rng.normal(), rng.uniform(),
                                               v)
        assert abs(value.imag) < 1e-10 * max(1.0, abs(value))
        assert value.real < 0
        assert abs(value - reference) < 1e-10 * max(1.0, abs(reference))
