"""Boundary matrices, the whole-line kernel, and measure bounds.

The two half-line boundary matrices at a non-real z assemble into a
2x2-block matrix whose entries are resolvent kernel values at the two
sites next to the split.  A brute-force banded solve on a long finite
section must reproduce every block; the imaginary trace then caps how
much spectral mass can sit inside a shrinking real window.
"""

import numpy as np

from qplattice import (
    almost_mathieu,
    fold_to_strip,
    free_laplacian,
    green_oracle,
    im_m_trace,
    m_matrix,
    m_plus,
    spectral_bound,
)

strip = fold_to_strip(free_laplacian())
z = 0.4 + 0.01j

print("== free line at z = %s ==" % z)
data = m_matrix(strip, z)
print(f"m_plus(z)          {complex(data.plus[0, 0]):.10f}")
print(f"imaginary trace    {im_m_trace(data):.10f}  (positive off the real axis)")

print()
print(f"{'block':>6} {'assembled':>28} {'banded solve':>28} {'rel err':>9}")
for i in (0, 1):
    for j in (0, 1):
        lhs = complex(data.block(i, j)[0, 0])
        rhs = complex(green_oracle(strip, z, i - 1, j - 1, n_sites=4001))
        err = abs(lhs - rhs) / abs(rhs)
        print(f"({i},{j}) {lhs:28.12f} {rhs:28.12f} {err:9.2e}")

print()
print("== golden-mean limit of the half-line matrix ==")
gold = complex(m_plus(strip, 1j)[0, 0])
print(f"m_plus(i)  {gold:.12f}   target 0.618034i")

print()
print("== measure bound sweep, subcritical coupling ==")
sub = fold_to_strip(almost_mathieu(coupling=0.5))
report = spectral_bound(sub, 0.0, eps_grid=np.geomspace(1e-1, 1e-3, 5))
print(f"fitted prefactor {report.jl_constant:.4g}")
print(f"{'eps':>9} {'mass bound':>12} {'envelope rhs':>13}")
for eps, mu, rhs in zip(report.eps_grid, report.mu_bound, report.jl_rhs):
    flag = "ok" if mu <= rhs * (1 + 1e-9) else "VIOLATED"
    print(f"{eps:9.1e} {mu:12.5g} {rhs:13.5g}  {flag}")
