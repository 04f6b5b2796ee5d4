"""Boundary pairings, subordinacy chain, duality, and growth probes."""

import numpy as np
import pytest
from dataclasses import replace

from qplattice.linalg import ArgumentError, nearest_eigenpair
from qplattice.longrange import (
    duality_transform,
    lagrange_form,
    lagrange_sum_bounds,
    solution_growth,
    subordinacy_probe,
)
from qplattice.operators import almost_mathieu, dual_operator, free_laplacian

GOLDEN_MEAN = (np.sqrt(5.0) - 1) / 2
FREE = free_laplacian()

SITES = np.arange(-60, 61)
COS_HALF = np.cos(np.pi * SITES / 2)     # solves the free equation at 0
SIN_HALF = np.sin(np.pi * SITES / 2)
COS_THIRD = np.cos(np.pi * SITES / 3)    # solves the free equation at 1


# ── windowed boundary pairing ────────────────────────────────────────────────

def test_pairing_of_same_energy_solutions_vanishes():
    for radius in (3, 10, 40):
        assert abs(lagrange_form(FREE, COS_HALF, SIN_HALF, radius)) < 1e-12


def test_pairing_of_split_energies_is_the_overlap():
    # (Hf) g - f (Hg) summed over the window collapses to
    # (E_f - E_g) * sum f g when both sequences solve their equations
    center = SITES.size // 2
    for radius in (3, 10, 25):
        value = lagrange_form(FREE, COS_HALF, COS_THIRD, radius)
        sl = slice(center - radius, center + radius + 1)
        overlap = -np.sum(COS_HALF[sl] * COS_THIRD[sl])
        assert abs(value - overlap) < 1e-12


def test_pairing_conjugate_antisymmetry():
    rng = np.random.default_rng(5)
    f = rng.normal(size=41) + 1j * rng.normal(size=41)
    g = rng.normal(size=41) + 1j * rng.normal(size=41)
    forward = lagrange_form(FREE, f, g, 7)
    assert abs(forward + np.conj(lagrange_form(FREE, g, f, 7))) < 1e-12


def test_pairing_window_validation():
    with pytest.raises(ArgumentError, match="window too short"):
        lagrange_form(FREE, COS_HALF, SIN_HALF, 60)
    with pytest.raises(ArgumentError, match="share one window"):
        lagrange_form(FREE, COS_HALF, SIN_HALF[:-1], 5)


def test_radius_summed_bounds_dominate():
    rng = np.random.default_rng(11)
    offsets = np.arange(-60, 61)
    decaying = (rng.normal(size=121) + 1j * rng.normal(size=121)) * np.exp(
        -np.abs(offsets) / 15
    )
    orbit = np.cos(2 * np.pi * (0.3 + offsets * GOLDEN_MEAN))
    lhs, window_bound, tail_bound = lagrange_sum_bounds(FREE, decaying, orbit, 30)
    assert 0 < lhs <= window_bound
    assert lhs <= tail_bound
    # single-neighbor hopping: the window envelope is 4 ||f|| ||g||
    lo, hi = 60 - 31, 60 + 32
    expected = 4.0 * np.linalg.norm(decaying[lo:hi]) * np.linalg.norm(orbit[lo:hi])
    assert abs(window_bound - expected) < 1e-12
    with pytest.raises(ArgumentError, match="sup norm"):
        lagrange_sum_bounds(FREE, decaying, 3.0 * orbit, 30)


# ── subordinacy chain ────────────────────────────────────────────────────────

def test_subordinacy_chain_free_center():
    sites = np.arange(-513, 514)
    u = np.cos(np.pi * sites / 2)
    report = subordinacy_probe(FREE, 0.0, u, r_grid=(64, 128, 256))
    assert report.ok
    assert report.trend == "saturating"
    proxies = [rec["proxy"] for rec in report.records]
    # the scaled solve mass approximates pi times the state density
    assert all(0.5 < p < 0.8 for p in proxies)
    assert max(proxies) / min(proxies) < 1.1
    for rec in report.records:
        assert rec["lower"] <= rec["w_total"] + 1e-12
        assert rec["w_total"] <= rec["window_bound"] + 1e-12
        assert rec["w_total"] <= rec["tail_bound"] + 1e-12


def test_subordinacy_validation():
    sites = np.arange(-513, 514)
    u = np.cos(np.pi * sites / 2)
    with pytest.raises(ArgumentError, match="sup norm"):
        subordinacy_probe(FREE, 0.0, 5.0 * u, r_grid=(64,))
    with pytest.raises(ArgumentError, match="not a generalized solution"):
        subordinacy_probe(FREE, 0.5, u, r_grid=(64,))
    with pytest.raises(ArgumentError, match="window too short"):
        subordinacy_probe(FREE, 0.0, u, r_grid=(64, 512))
    # the candidate vanishes at every odd site, so a probe there pairs to zero
    phi = np.zeros(u.size, dtype=complex)
    phi[u.size // 2 + 1] = 1.0
    with pytest.raises(ArgumentError, match="orthogonal"):
        subordinacy_probe(FREE, 0.0, u, phi=phi, r_grid=(64,))


# ── duality ──────────────────────────────────────────────────────────────────

def test_duality_turns_dual_eigenvectors_into_solutions():
    op = almost_mathieu(coupling=0.5, theta=0.2)
    dual = replace(dual_operator(op), theta=0.0)
    value, vector = nearest_eigenpair(dual.assemble_banded(2001), 0.5)
    sites = np.arange(-512, 513)
    u = duality_transform(vector, -1000, 0.0, op.theta, op.alpha, sites)
    u = u / np.max(np.abs(u))
    hu = op.apply(u, first_site=-512)
    residual = float(np.max(np.abs(hu - value * u)[1:-1]))
    assert residual < 1e-8


def test_duality_profile_sampling():
    # a single Fourier coefficient produces a unimodular orbit sample
    sites = np.arange(-8, 9)
    out = duality_transform([1.0], 2, 0.25, 0.1, GOLDEN_MEAN, sites)
    expected = np.exp(2j * np.pi * 2 * (0.1 + sites * GOLDEN_MEAN))
    expected = expected * np.exp(2j * np.pi * sites * 0.25)
    assert np.max(np.abs(out - expected)) < 1e-12


# ── growth probe ─────────────────────────────────────────────────────────────

def test_solution_growth_trends():
    sites = np.arange(-513, 514)
    u = np.cos(np.pi * sites / 2)
    flat = solution_growth(u, (32, 64, 128, 256), 1.0)
    assert flat.trend == "saturating"
    assert abs(flat.minimum - 1.0) < 0.05
    assert solution_growth(u, (32, 64, 128, 256), 2.0).trend == "vanishing"
    assert solution_growth(u, (8, 32, 128, 512), 0.5).trend == "diverging"
    with pytest.raises(ArgumentError, match="window too short"):
        solution_growth(u, (1024,), 1.0)
