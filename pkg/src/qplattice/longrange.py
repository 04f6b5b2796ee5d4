"""Boundary pairings, subordinacy chains, and duality for long-range lines.

The discrete analogue of the Lagrange bracket measures how far two
windowed sequences are from commuting with the operator across a
boundary; summed over growing radii it is controlled by hopping-weighted
norms.  Against a shifted solve those bounds squeeze the resolvent mass
from below, which is the computable core of the subordinacy argument.
Duality maps eigenvectors of the Fourier-transposed operator to
quasi-Bloch sequences on the original lattice.
"""

import numpy as np
from dataclasses import dataclass

from .linalg import ArgumentError, InvariantError, solve_shifted_banded

ZETA_TWO = np.pi**2 / 6.0


# ── windowed boundary pairing ────────────────────────────────────────────────


def _window_first(values, first_site):
    values = np.asarray(values)
    if first_site is None:
        first_site = -(values.size // 2)
    return values, int(first_site)


def lagrange_form(op, f, g, radius, first_site=None):
    """Boundary pairing sum_{|n| <= radius} (Hf)_n conj(g_n) - f_n conj((Hg)_n).

    Both sequences live on a common centered window; the window must
    extend at least the hopping range beyond the radius so the interior
    application of the operator is exact.  For two true solutions at the
    same energy the value is independent of the radius.
    """
    f, first = _window_first(f, first_site)
    g, first_g = _window_first(g, first_site)
    if f.shape != g.shape or first != first_g:
        raise ArgumentError("sequences must share one window")
    k = op.hopping.range
    if -(radius + k) < first or radius + k >= first + f.size:
        raise ArgumentError("window too short for radius %d" % radius)
    hf = op.apply(f, first_site=first)
    hg = op.apply(g, first_site=first)
    lo, hi = -radius - first, radius - first + 1
    return complex(
        np.sum(hf[lo:hi] * np.conj(g[lo:hi])) - np.sum(f[lo:hi] * np.conj(hg[lo:hi]))
    )


def lagrange_sum_bounds(op, f, g, r_max, first_site=None):
    """Radius-summed boundary pairing and its two envelopes.

    Computes lhs = |sum_{r=1}^{r_max} W_r(f, g)| together with the
    hopping-weighted bound over the (r_max + range) window and the
    cubic-tail bound over the whole window, and asserts that the
    envelopes actually dominate.  The second sequence must be bounded
    by one in supremum norm.

    Returns
    -------
    (lhs, window_bound, tail_bound)
    """
    f, first = _window_first(f, first_site)
    g, _ = _window_first(g, first_site)
    if np.max(np.abs(g)) > 1.0 + 1e-12:
        raise ArgumentError("second sequence must have sup norm at most one")
    k = op.hopping.range
    if -(r_max + k) < first or r_max + k >= first + f.size:
        raise ArgumentError("window too short for radius %d" % r_max)

    hf = op.apply(f, first_site=first)
    hg = op.apply(g, first_site=first)
    density = hf * np.conj(g) - f * np.conj(hg)
    center = -first
    total = 0.0 + 0.0j
    running = density[center]
    for r in range(1, r_max + 1):
        running += density[center + r] + density[center - r]
        total += running
    lhs = float(np.abs(total))

    weights = sum(4.0 * kk * abs(op.hopping.coefficient(kk)) for kk in range(1, k + 1))
    lo = max(0, center - (r_max + k))
    hi = min(f.size, center + r_max + k + 1)
    window_bound = float(
        weights * np.linalg.norm(f[lo:hi]) * np.linalg.norm(g[lo:hi])
    )
    cubic = max(abs(op.hopping.coefficient(kk)) * kk**3 for kk in range(1, k + 1))
    tail_bound = float(4.0 * ZETA_TWO * cubic * np.linalg.norm(f) * np.linalg.norm(g))

    if lhs > window_bound * (1 + 1e-9) + 1e-12:
        raise InvariantError(
            "windowed envelope %.6e fails to dominate the pairing sum %.6e"
            % (window_bound, lhs)
        )
    if lhs > tail_bound * (1 + 1e-9) + 1e-12:
        raise InvariantError(
            "cubic-tail envelope %.6e fails to dominate the pairing sum %.6e"
            % (tail_bound, lhs)
        )
    return lhs, window_bound, tail_bound


# ── subordinacy chain ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SubordinacyReport:
    energy: float
    alpha: float
    records: tuple
    trend: str
    ok: bool


def subordinacy_probe(op, energy, u, phi=None, r_grid=(256, 512, 1024, 2048, 4096),
                      alpha=1.0, first_site=None):
    """Resolve the chain of boundary-pairing bounds against a shifted solve.

    For each radius R the imaginary offset is set to 1/R, the windowed
    resolvent v = (H - E - i/R)^{-1} phi is computed on the 4R window,
    and the chain

        |sum_r <phi, u>_r| - (R/R) * ||v|| ||u||  <=  |sum_r W_r(v, u)|
                                               <=  hopping-weighted envelopes

    is recorded, along with the solve identity Im<phi, v> = ||v||^2 / R
    and the scaled mass (1/R)^alpha ||v||^2 that proxies the upper
    alpha-derivative of the spectral measure at the energy.

    Parameters
    ----------
    op : LineOperator
    energy : float
    u : ndarray
        Candidate generalized solution on a centered window covering at
        least [-2 max(R) - range, 2 max(R) + range], sup norm at most
        one; its residual must vanish to 1e-8 on the solve windows.
    phi : ndarray or None
        Probe vector on the same window; defaults to the delta at the
        origin.  Must not be orthogonal to u.
    r_grid : iterable of int
    alpha : float

    Raises
    ------
    ArgumentError
        If u fails the solution-residual test or phi is orthogonal to u.
    InvariantError
        If the solve identity or an envelope fails.
    """
    u, first = _window_first(u, first_site)
    r_grid = tuple(int(r) for r in sorted(r_grid))
    r_max = max(r_grid)
    k = op.hopping.range
    if np.max(np.abs(u)) > 1.0 + 1e-12:
        raise ArgumentError("candidate solution must have sup norm at most one")
    if -(2 * r_max + k) < first or 2 * r_max + k >= first + u.size:
        raise ArgumentError("candidate window too short for radius %d" % r_max)
    if phi is None:
        phi = np.zeros(u.size, dtype=complex)
        phi[-first] = 1.0
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != u.shape:
        raise ArgumentError("probe vector must share the candidate's window")

    hu = op.apply(u, first_site=first)
    lo, hi = -2 * r_max - first, 2 * r_max - first + 1
    residual = float(np.max(np.abs(hu[lo:hi] - energy * u[lo:hi])))
    scale = float(np.max(np.abs(u)))
    if residual > 1e-8 * max(scale, 1e-30):
        raise ArgumentError(
            "candidate is not a generalized solution at this energy: "
            "residual %.3e" % residual
        )
    pairing = complex(np.sum(phi * np.conj(u)))
    if abs(pairing) <= 1e-8 * np.linalg.norm(phi) * max(scale, 1e-30):
        raise ArgumentError("probe vector is orthogonal to the candidate solution")

    records = []
    ok = True
    for r in r_grid:
        eps = 1.0 / r
        n_win = 4 * r + 1
        w_first = -(n_win // 2)
        ab = op.assemble_banded(n_win, first_site=w_first)
        shift = w_first - first
        phi_w = phi[shift : shift + n_win]
        u_w = u[shift : shift + n_win]
        v = solve_shifted_banded(ab, energy + 1j * eps, phi_w.reshape(-1, 1))[:, 0]

        mass = float(np.linalg.norm(v) ** 2)
        identity_lhs = float(np.imag(np.sum(np.conj(phi_w) * v)))
        if abs(identity_lhs - eps * mass) > 1e-10 * max(1.0, eps * mass):
            raise InvariantError(
                "solve identity violated at radius %d: %.3e vs %.3e"
                % (r, identity_lhs, eps * mass)
            )

        base = phi_w * np.conj(u_w)
        cross = v * np.conj(u_w)
        center = -w_first
        total = 0.0 + 0.0j
        base_total = 0.0 + 0.0j
        run_b = base[center]
        run_c = cross[center]
        for rr in range(1, r + 1):
            run_b += base[center + rr] + base[center - rr]
            run_c += cross[center + rr] + cross[center - rr]
            base_total += run_b
            total += run_b + 1j * eps * run_c
        w_total = float(np.abs(total))
        lower = float(
            np.abs(base_total)
            - eps * r * np.linalg.norm(v) * np.linalg.norm(u_w)
        )
        _, window_bound, tail_bound = lagrange_sum_bounds(
            op, v, u_w, r, first_site=w_first
        )
        chain_ok = (
            lower <= w_total * (1 + 1e-9) + 1e-12
            and w_total <= window_bound * (1 + 1e-9) + 1e-12
            and w_total <= tail_bound * (1 + 1e-9) + 1e-12
        )
        ok = ok and chain_ok
        records.append(
            {
                "radius": r,
                "eps": eps,
                "w_total": w_total,
                "lower": lower,
                "window_bound": window_bound,
                "tail_bound": tail_bound,
                "mass": mass,
                "proxy": float(eps**alpha * mass),
                "ok": bool(chain_ok),
            }
        )

    proxies = [rec["proxy"] for rec in records]
    if min(proxies) <= 0:
        trend = "vanishing"
    elif max(proxies) > 4.0 * proxies[0]:
        trend = "diverging"
    elif min(proxies) < proxies[0] / 4.0:
        trend = "vanishing"
    else:
        trend = "saturating"
    return SubordinacyReport(
        energy=float(energy),
        alpha=float(alpha),
        records=tuple(records),
        trend=trend,
        ok=bool(ok),
    )


# ── duality and growth ───────────────────────────────────────────────────────


def duality_transform(dual_vector, first_index, x, theta, alpha, sites):
    """Quasi-Bloch sequence generated by a dual-side eigenvector.

    The dual vector's entries are read as Fourier coefficients of a
    periodic profile; the output sequence samples that profile along the
    rotation orbit and twists it by the Bloch phase:

        out(n) = sum_j hat(u)_j exp(2 pi i j (theta + n alpha)) * exp(2 pi i n x).

    Returns the sequence on the requested sites.
    """
    dual_vector = np.asarray(dual_vector, dtype=complex)
    sites = np.asarray(sites, dtype=int)
    js = first_index + np.arange(dual_vector.size)
    angles = np.outer(sites * alpha + theta, js)
    profile = np.exp(2j * np.pi * angles) @ dual_vector
    return profile * np.exp(2j * np.pi * sites * x)


@dataclass(frozen=True)
class GrowthReport:
    r_grid: tuple
    values: np.ndarray
    minimum: float
    trend: str


def solution_growth(u, r_grid, alpha, first_site=None):
    """Scaled window masses R^(-alpha) * sum_{|n| <= R} |u_n|^2.

    The minimum over the grid estimates the subordinacy-scale constant;
    the trend flag reports whether the scaled masses grow, settle, or
    die out as the radius increases.
    """
    u, first = _window_first(u, first_site)
    r_grid = tuple(int(r) for r in sorted(r_grid))
    if -r_grid[-1] < first or r_grid[-1] >= first + u.size:
        raise ArgumentError("window too short for radius %d" % r_grid[-1])
    center = -first
    values = np.array(
        [
            float(np.sum(np.abs(u[center - r : center + r + 1]) ** 2)) / r**alpha
            for r in r_grid
        ]
    )
    if values[-1] > 4.0 * values[0]:
        trend = "diverging"
    elif values[-1] < values[0] / 4.0:
        trend = "vanishing"
    else:
        trend = "saturating"
    return GrowthReport(
        r_grid=r_grid,
        values=values,
        minimum=float(np.min(values)),
        trend=trend,
    )
