"""
Solutions of the shifted Casimir equation from boundary data
============================================================

Q_nu is computed twice, from its two power series and from the
Bessel-Macdonald form, and both solve the same q-difference equation.
A finite boundary function psi then produces a solution F_nu in two
ways (transform of Q_nu psi, or convolution with the Poisson kernel),
and the scalar Casimir checks that F_nu is an eigenfunction.
"""

import itertools

import numpy as np

from qlob.checks import diagram_boundary_data
from qlob.context import QContext
from qlob.ncalg import casimir_scalar, omega_nu_constant
from qlob.poisson import (
    PoissonParams,
    convolve,
    omega_residual,
    poisson_solve,
    qnu_integral,
    qnu_series,
    solution_function,
)
from qlob.qfourier import fourier_2d

ctx = QContext(q=0.5, delta=1)
p = PoissonParams(nu=0.5)
q = ctx.q

grid = np.array([q**m for m in range(5)])
a, h, b = np.meshgrid(grid, grid, grid, indexing="ij")
s = qnu_series(p, a, h, b, ctx)
i = qnu_integral(p, a, h, b, ctx)
print("series vs integral form:", np.max(np.abs(s - i) / np.abs(s)))


def Q(a, h, b):
    return qnu_series(p, a, h, b, ctx)


res = max(omega_residual(Q, p, pt, ctx, scaled=True) for pt in itertools.product(grid, repeat=3))
print("difference equation residual:", res)

# two paths through the diagram
psi, _ = diagram_boundary_data()
pts = [(q**i, q**j, q**k) for i, j, k in itertools.product(range(3), (0, 2), range(1, 4))]
direct = poisson_solve(p, psi, ctx, pts)
via_conv = convolve(p, fourier_2d(psi, "inverse", ctx), ctx, pts)
print("diagram mismatch:", np.max(np.abs(direct - via_conv)) / np.max(np.abs(direct)))

F = solution_function(p, psi, ctx)
cn = omega_nu_constant(p.nu, ctx)
for pt in pts[:4]:
    pt4 = (*pt, q)
    print(f"F = {F(*pt4): .6e}   (Omega - c_nu) F / F = {abs(casimir_scalar(F, pt4, ctx) - cn * F(*pt4)) / abs(F(*pt4)):.1e}")
