"""Integrated density of states, Thouless quadrature, and measure probes.

Tables of the integrated density of states are built from centered
Dirichlet truncations, phase-averaged over a midpoint lattice.  On top
of them sit the log-energy quadrature tying exponent sums to the state
density, the Borel/Stieltjes transform, and the scaling probes for
local dimensions of the underlying spectral measure.
"""

import numpy as np
from dataclasses import dataclass

from .linalg import ArgumentError, eigenvalues_banded
from .operators import LineOperator, StripOperator

DEFAULT_THETA_SAMPLES = 32
DEFAULT_TRUNCATION = 2048
MASS_FLOOR = 1e-12


# ── tables ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class IdsTable:
    """Sampled integrated density of states.

    energies ascend; values lie in [0, 1] and are nondecreasing up to
    the finite-size resolution 1 / (truncation * samples).
    """

    energies: np.ndarray
    values: np.ndarray
    truncation: int
    samples: int

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or e.shape != v.shape or e.size < 2:
            raise ArgumentError("table needs matching 1-d energy and value arrays")
        if np.any(np.diff(e) <= 0):
            raise ArgumentError("table energies must strictly ascend")

    def value_at(self, energy):
        return float(np.interp(energy, self.energies, self.values))

    def resolution(self):
        return 1.0 / (self.truncation * self.samples)


def _phase_lattice(samples):
    return (np.arange(samples) + 0.5) / samples


def _line_spectra(op, n_sites, samples):
    spectra = []
    for theta in _phase_lattice(samples):
        shifted = LineOperator(
            hopping=op.hopping,
            potential=op.potential,
            alpha=op.alpha,
            theta=theta,
            epsilon=op.epsilon,
        )
        ab = shifted.assemble_banded(n_sites)
        spectra.append(np.sort(eigenvalues_banded(ab)))
    return spectra


def ids(op, energies, n_sites=DEFAULT_TRUNCATION, samples=DEFAULT_THETA_SAMPLES):
    """Integrated density of states on an energy grid.

    Line operators use plain eigenvalue counting of centered Dirichlet
    truncations, averaged over the phase lattice.  Strip operators
    weight each truncation eigenvector by the squared mass of its block
    at the center site and normalize by the strip width, which keeps the
    values in [0, 1] and makes folded strips agree with their unfolded
    lines.

    Returns
    -------
    IdsTable
    """
    energies = np.asarray(energies, dtype=float)
    if energies.size < 2:
        raise ArgumentError("need at least two grid energies")

    if isinstance(op, StripOperator):
        import scipy.linalg as sla

        m = op.width
        first = -(n_sites // 2)
        values = np.zeros(energies.size)
        for theta in _phase_lattice(samples):
            shifted = StripOperator(
                coupling=op.coupling,
                potential=op.potential,
                alpha=op.alpha,
                theta=theta,
                width=m,
            )
            ab = shifted.assemble_banded(n_sites, first_block=first)
            w, v = sla.eig_banded(ab, lower=False)
            center = -first * m
            weights = np.sum(np.abs(v[center : center + m, :]) ** 2, axis=0)
            order = np.argsort(w)
            w = w[order]
            cumulative = np.concatenate([[0.0], np.cumsum(weights[order])])
            values += cumulative[np.searchsorted(w, energies)] / m
        values /= samples
    else:
        spectra = _line_spectra(op, n_sites, samples)
        values = np.zeros(energies.size)
        for eigs in spectra:
            values += np.searchsorted(eigs, energies) / float(n_sites)
        values /= samples

    return IdsTable(
        energies=energies.copy(),
        values=values,
        truncation=int(n_sites),
        samples=int(samples),
    )


# ── quadrature against the state density ─────────────────────────────────────


def _nodes_and_masses(table):
    mids = (table.energies[1:] + table.energies[:-1]) / 2.0
    masses = np.diff(table.values)
    return mids, masses


def log_energy_integral(table, energy):
    """Midpoint quadrature of log|energy - x| against the table's
    measure.  Real energies must keep at least one grid step away from
    any node carrying mass; the near-singular case is refused rather
    than regularized."""
    mids, masses = _nodes_and_masses(table)
    step = float(np.max(np.diff(table.energies)))
    z = complex(energy)
    if abs(z.imag) < step:
        near = np.abs(z.real - mids) < step
        if np.any(masses[near] > MASS_FLOOR):
            raise ArgumentError(
                "energy sits within one grid step of spectral mass; "
                "the log quadrature is unreliable there"
            )
    return float(np.sum(masses * np.log(np.abs(z - mids))))


def thouless_residual(op, energy, table, lyap_sum):
    """Defect of the exponent-sum / state-density identity at one energy.

    For a finite-range line operator the identity reads
    sum of the top K exponents = integral of log|E - x| dN(x) - log|w_K|;
    for a strip the integral is weighted by the width and the correction
    is log|det C|.  The caller supplies the independently computed
    exponent sum; the return value is the absolute defect.
    """
    quad = log_energy_integral(table, energy)
    if isinstance(op, StripOperator):
        correction = float(np.log(np.abs(np.linalg.det(op.coupling))))
        rhs = op.width * quad - correction
    else:
        k = op.hopping.range
        w_top = op.hopping.coefficient(k)
        if w_top == 0:
            raise ArgumentError("top hopping coefficient vanishes")
        rhs = quad - float(np.log(np.abs(w_top)))
    return float(abs(lyap_sum - rhs))


def stieltjes(table, z):
    """Borel transform of the table's measure at a nonreal point."""
    if np.imag(z) == 0:
        raise ArgumentError("transform needs a nonreal point")
    mids, masses = _nodes_and_masses(table)
    return complex(np.sum(masses / (mids - z)))


# ── local scaling probes ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class AlphaDerivativeReport:
    eps_grid: tuple
    values: np.ndarray
    value: float
    trend: str


def upper_alpha_derivative(table, energy, alpha, eps_grid=None):
    """Scaled imaginary boundary values eps^(1-alpha) Im F(E + i eps).

    The maximum over the grid estimates the upper alpha-derivative of
    the measure; the trend flag reports whether the scaled values grow,
    settle, or die out as eps decreases.
    """
    if eps_grid is None:
        eps_grid = tuple(np.geomspace(1e-1, 1e-3, 13))
    eps_grid = tuple(float(e) for e in sorted(eps_grid, reverse=True))
    vals = np.array(
        [e ** (1.0 - alpha) * np.imag(stieltjes(table, energy + 1j * e)) for e in eps_grid]
    )
    head = np.mean(vals[: max(1, len(vals) // 3)])
    tail = np.mean(vals[-max(1, len(vals) // 3) :])
    if tail > 4.0 * head:
        trend = "diverging"
    elif tail < head / 4.0:
        trend = "vanishing"
    else:
        trend = "saturating"
    return AlphaDerivativeReport(
        eps_grid=eps_grid, values=vals, value=float(np.max(vals)), trend=trend
    )


@dataclass(frozen=True)
class HolderReport:
    eps_grid: tuple
    increments: np.ndarray
    slope: float
    gap: bool
    upper_half_constant: float
    lower_three_halves_constant: float


def holder_probe(table, energy, eps_grid=None):
    """Local scaling exponent of the state density around one energy.

    Fits the least-squares slope of log(N(E+eps) - N(E-eps)) against
    log eps.  Windows whose mass stays below the table resolution raise
    the gap flag instead of fitting.  Alongside the slope the probe
    reports the fitted constants of the two-sided envelope: the smallest
    C with increments <= C sqrt(eps) and the largest c with increments
    >= c eps^(3/2) over the grid.
    """
    if eps_grid is None:
        eps_grid = tuple(np.geomspace(1e-3, 1e-1, 13))
    eps_grid = tuple(float(e) for e in sorted(eps_grid))
    incs = np.array(
        [table.value_at(energy + e) - table.value_at(energy - e) for e in eps_grid]
    )
    floor = 4.0 * table.resolution()
    usable = incs > floor
    if np.count_nonzero(usable) < 3 or incs[-1] <= floor:
        return HolderReport(
            eps_grid=eps_grid,
            increments=incs,
            slope=float("nan"),
            gap=True,
            upper_half_constant=float("nan"),
            lower_three_halves_constant=float("nan"),
        )
    es = np.array(eps_grid)[usable]
    gs = incs[usable]
    slope = float(np.polyfit(np.log(es), np.log(gs), 1)[0])
    upper = float(np.max(gs / np.sqrt(es)))
    lower = float(np.min(gs / es**1.5))
    return HolderReport(
        eps_grid=eps_grid,
        increments=incs,
        slope=slope,
        gap=False,
        upper_half_constant=upper,
        lower_three_halves_constant=lower,
    )
