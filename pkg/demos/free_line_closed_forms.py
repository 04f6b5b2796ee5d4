"""The free line operator, checked against its closed forms.

Every quantity the package computes has an exactly known value on the
free Laplacian: the top Lyapunov exponent off the band is an arccosh,
the rotation number at the band center is 1/4, the half-line boundary
matrix at z = i is golden, and the whole-line kernel is i / sqrt(5).
"""

import numpy as np

from qplattice import (
    fold_to_strip,
    free_laplacian,
    ids,
    m_matrix,
    m_plus,
    rotation_number,
    top_lyapunov,
    transfer_cocycle,
)

op = free_laplacian()
strip = fold_to_strip(op)

print("== free line operator ==")

value, spread = top_lyapunov(transfer_cocycle(strip, 3.0), n_steps=4000, samples=8)
print(f"exponent at E=3   {value:.10f}   arccosh(3/2) = {np.arccosh(1.5):.10f}")

rho, _ = rotation_number(transfer_cocycle(strip, 0.0), n_steps=4000, samples=8)
print(f"rotation at E=0   {rho:.10f}   exact        = 0.25")

boundary = complex(m_plus(strip, 1j)[0, 0])
print(f"m_plus(i)         {boundary:.10f}   golden mean  = {1j * (np.sqrt(5) - 1) / 2:.10f}")

kernel = complex(m_matrix(strip, 1j).block(1, 1)[0, 0])
print(f"kernel G(0,0; i)  {kernel:.10f}   i/sqrt(5)    = {1j / np.sqrt(5):.10f}")

table = ids(op, np.linspace(-2.5, 2.5, 257), n_sites=512, samples=8)
print(f"N(0)              {table.value_at(0.0):.10f}   exact        = 0.5")
print(f"N(1)              {table.value_at(1.0):.10f}   exact        = {2 / 3:.10f}")
