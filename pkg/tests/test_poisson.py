import itertools

import numpy as np
import pytest

from qlob.checks import diagram_boundary_data, norm_cutoff
from qlob.context import DivergenceError, IntegerOrderError, QContext, QDomainError
from qlob.poisson import (
    B_from_norm_integral,
    PoissonParams,
    binomial_product,
    binomial_series,
    convolve,
    norm_integral,
    norm_integral_closed,
    norm_integral_printed,
    omega_residual,
    pkernel_scalar,
    poisson_solve,
    product_solution_residual,
    qnu_B,
    qnu_integral,
    qnu_parts,
    qnu_series,
    singularity_split,
)
from qlob.qfourier import LatticeFunction, fourier_2d

# mpmath, 30 digits: q = 0.5, nu = 0.5, delta = 0, (a, h, b) = (0.3, 1, 0.4)
PKERNEL_REF = 0.966053149108947697952877031498

NUS = (0.3, 0.5, 1.7)


def _ctx(q, d=0):
    return QContext(q=q, delta=d, lattice_cutoff=60 if q < 0.85 else 250)


def test_params():
    with pytest.raises(IntegerOrderError):
        PoissonParams(2.0)
    with pytest.raises(QDomainError):
        PoissonParams(-0.5)
    with pytest.raises(QDomainError):
        PoissonParams(0.5, grid=((1.0, 0.0, 1.0),))


def test_pkernel(ctx):
    p = PoissonParams(0.5)
    assert pkernel_scalar(p, 0.0, 2.0, 0.7, ctx) == pytest.approx(2.0**1.5, rel=1e-15)
    assert pkernel_scalar(p, 0.3, 1.0, 0.4, ctx) == pytest.approx(PKERNEL_REF, rel=1e-13)
    with pytest.raises(DivergenceError):
        pkernel_scalar(p, 4.0, 1.0, 4.0, ctx)


def test_pkernel_classical():
    ctx = QContext(q=0.999)
    p = PoissonParams(0.5)
    for a, h, b in ((0.3, 1.0, 0.3), (0.2, 0.7, 0.5)):
        ref = (1 + a * b) ** (-1.5) * h**1.5
        assert abs(pkernel_scalar(p, a, h, b, ctx) - ref) < 1e-2


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("d", [0, 1, 2])
def test_binomial_identity(q, d):
    ctx = _ctx(q, d)
    p = PoissonParams(0.5)
    rho = np.array([ctx.q**m for m in range(9)])
    assert np.max(np.abs(binomial_series(p, rho, ctx) / binomial_product(p, rho, ctx) - 1)) < 1e-10


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("d", [0, 1, 2])
@pytest.mark.parametrize("nu", NUS)
def test_qnu_two_implementations(q, d, nu):
    ctx = _ctx(q, d)
    A = np.array([ctx.q**m for m in range(7)])
    a, h, b = np.meshgrid(A, A, A, indexing="ij")
    p = PoissonParams(nu)
    s = qnu_series(p, a, h, b, ctx)
    i = qnu_integral(p, a, h, b, ctx)
    assert np.max(np.abs(s - i) / np.abs(s)) < 1e-8


def test_qnu_singular_exponent(ctx):
    p = PoissonParams(0.5)
    # the (ab)^nu part dominates the difference Q - Psi1 as ab -> 0
    ms = np.arange(10, 16)
    t = ctx.q ** (2 * ms)
    sing = np.array([qnu_series(p, x, 1.0, 1.0, ctx) - qnu_parts(p, x, 1.0, 1.0, ctx)[0] for x in t])
    slope = np.polyfit(np.log(t), np.log(np.abs(sing)), 1)[0]
    assert slope == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("d", [0, 1, 2])
def test_difference_equation(q, d):
    ctx = _ctx(q, d)
    grid = [(ctx.q**i, ctx.q**j, ctx.q**k) for i, j, k in itertools.product(range(7), repeat=3)]
    for nu in NUS:
        p = PoissonParams(nu)

        def g(a, h, b):
            return qnu_series(p, a, h, b, ctx)

        assert max(omega_residual(g, p, pt, ctx, scaled=True) for pt in grid) < 1e-9


def test_difference_equation_rejects_polynomial(ctx):
    p = PoissonParams(0.5)

    def g(a, h, b):
        return 1 + a * h - 2 * b**2 * h

    assert omega_residual(g, p, (0.5, 0.25, 1.0), ctx, scaled=True) > 1e-3


def test_product_residual(ctx):
    p = PoissonParams(0.5)

    def g(a, h, b):
        return qnu_series(p, a, h, b, ctx)

    pt = (0.5, 0.25, 0.125)
    assert product_solution_residual(g, lambda x, y: 1.0, 0.7, p, pt, ctx) == pytest.approx(
        omega_residual(g, p, pt, ctx), abs=1e-15
    )

    def point_mass(x, y):
        return 1.0 if np.isclose(x, 0.7 * 0.5) and np.isclose(y, 0.7 * 0.125) else 0.0

    assert abs(product_solution_residual(g, point_mass, 0.7, p, pt, ctx)) < 1e-12

    def bad(a, h, b):
        return a + h

    def psi(x, y):
        return 2.0 + x * y

    res = product_solution_residual(bad, psi, 0.7, p, pt, ctx, scaled=True)
    assert res > 1e-3


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("nu", NUS)
@pytest.mark.parametrize("d", [0, 1, 2])
def test_norm_integral_closed_value(q, nu, d):
    p = PoissonParams(nu)
    ctx = QContext(q=q, delta=d, lattice_cutoff=norm_cutoff(nu, q))
    val = norm_integral(p, ctx)
    assert val > 0
    assert val == pytest.approx(norm_integral_closed(p, ctx), rel=1e-10)


def test_printed_norm_value_is_positive(ctx):
    for nu in NUS:
        assert norm_integral_printed(PoissonParams(nu), ctx) > 0


@pytest.mark.parametrize("d", [0, 1, 2])
def test_B_from_printed_integral(d):
    ctx = QContext(q=0.5, delta=d)
    p = PoissonParams(0.5)
    assert B_from_norm_integral(p, ctx, norm_integral_printed(p, ctx)) == pytest.approx(qnu_B(p, ctx), rel=1e-13)


def _points(q):
    return [(q**i, q**j, q**k) for i, j, k in itertools.product(range(3), (0, 2), range(1, 4))]


def test_solve_zero_and_linear(ctx):
    p = PoissonParams(0.5)
    pts = _points(ctx.q)[:5]
    zero = LatticeFunction(2, {}, 10)
    assert np.all(poisson_solve(p, zero, ctx, pts) == 0)
    f, g = diagram_boundary_data()
    lhs = poisson_solve(p, f.scale(2.0) + g.scale(-1j), ctx, pts)
    rhs = 2.0 * poisson_solve(p, f, ctx, pts) - 1j * poisson_solve(p, g, ctx, pts)
    assert np.allclose(lhs, rhs, rtol=1e-13, atol=0)


def test_convolve_zero(ctx):
    p = PoissonParams(0.5)
    assert np.all(convolve(p, LatticeFunction(2, {}, 10), ctx, _points(ctx.q)[:3]) == 0)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("d", [0, 1, 2])
def test_diagram(q, d):
    ctx = QContext(q=q, delta=d)
    p = PoissonParams(0.5)
    pts = _points(q) + [(q**i, 1.0, q ** (i + 1), q) for i in range(4)]
    assert len(pts) >= 20
    for psi in diagram_boundary_data():
        phi = fourier_2d(psi, "inverse", ctx)
        a = poisson_solve(p, psi, ctx, pts)
        b = convolve(p, phi, ctx, pts)
        assert np.max(np.abs(a - b)) / np.max(np.abs(a)) < 1e-7


def test_direct_convolution_diverges(ctx):
    p = PoissonParams(0.5)
    psi, _ = diagram_boundary_data()
    phi = fourier_2d(psi, "inverse", ctx)
    with pytest.raises(DivergenceError):
        convolve(p, phi, ctx, [(0.5, 1.0, 0.25)], method="direct")


def test_split(ctx):
    p = PoissonParams(0.5)
    zero = LatticeFunction(2, {}, 10)
    a, b = singularity_split(p, zero, ctx)
    assert len(a) == 0 and len(b) == 0
    psi = LatticeFunction(2, {((1, 1), (1, 2)): 1.0, ((-1, 0), (1, 3)): 2j}, 10)
    a, b = singularity_split(p, psi, ctx, h=0.5)
    for key, val in psi.values.items():
        (s1, m1), (s2, m2) = key
        ys, y = s1 * ctx.q2**m1, s2 * ctx.q2**m2
        whole = qnu_series(p, ys, 0.5, y, ctx) * val
        assert a.values[key] + complex(ys + 0j) ** 0.5 * complex(y + 0j) ** 0.5 * b.values[key] == pytest.approx(whole, rel=1e-14)
    assert b.flagged == (((-1, 0), (1, 3)),)


def test_split_bounded(ctx):
    p = PoissonParams(0.5)
    psi = LatticeFunction(2, {((1, m), (1, m)): 1.0 for m in range(10, 21)}, 25)
    _, b = singularity_split(p, psi, ctx)
    vals = np.array([abs(v) for v in b.values.values()])
    assert vals.max() <= 1.01 * vals.min()
