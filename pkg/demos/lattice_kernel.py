"""
The lattice kernel and the Fourier pair
=======================================

The product E(q^2 y z) e(-u z) summed over the signed q^2 lattice is a
multiple of the lattice delta. This script shows the diagonal constant,
the vanishing off the diagonal, and what it buys: the Fourier pair on
finite lattice functions inverts to machine precision.
"""

import numpy as np

from qlob.context import QContext
from qlob.qfourier import LatticeFunction, fourier_1d, fourier_2d, lemma_integral
from qlob.qkernels import theta0

ctx = QContext(q=0.5)
c = 1 - ctx.q2

# diagonal: 2 Theta_0 / ((1 - q^2) u)
for k in (-2, 0, 2):
    u = ctx.q2**k
    val, _ = lemma_integral(u, u, ctx)
    print(f"u = q^{2 * k:3d}   L(u,u) = {val.real:.15f}   2Theta0/(cu) = {2 * theta0(ctx) / (c * u):.15f}")

# off the diagonal the plain sum converges when |y| < |u|
u = 1.0
for k in (1, 2, 5):
    y = ctx.q2**k
    val, _ = lemma_integral(y, u, ctx, method="direct")
    print(f"L(q^{2 * k}, 1) = {abs(val):.1e}")

# a point mass and a random finite function, there and back
rng = np.random.default_rng(3)
f = LatticeFunction(1, {(1, 2): 1.0, (-1, -1): 0.5j}, 15)
phi = fourier_1d(f, "inverse", ctx)
print("1D roundtrip error", f.relative_error(fourier_1d(phi, "forward", ctx)))

vals = {((int(rng.choice([1, -1])), int(rng.integers(-3, 6))), (1, int(rng.integers(-3, 6)))): complex(*rng.normal(size=2)) for _ in range(5)}
g = LatticeFunction(2, vals, 15)
print("2D roundtrip error", g.relative_error(fourier_2d(fourier_2d(g, "inverse", ctx), "forward", ctx)))

# the image itself grows quickly toward large arguments
print("largest |phi| on the window", phi.max_abs())
