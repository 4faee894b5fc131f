import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from qlob.context import DivergenceError, PoleError, QContext, QDomainError
from qlob.qkernels import (
    is_abs_integrable,
    jackson_halfline,
    jackson_z,
    qderiv,
    qexp_E,
    qexp_e,
    qgamma,
    qpoch,
    qpoch_ratio,
    tensor_exp,
    theta0,
)

# mpmath qp at 30 digits
E_AT_HALF = 2.38423102903137172414989928868
BIG_E_AT_ONE = 2.71181934772695876069108846971
BIG_E_AT_075I = 0.800112044577211291075128949413 + 0.990476519053325069161083276329j
THETA0_HALF = 0.850541164824562226975707975926
QGAMMA_HALF = {0.3: 2.09527345384751453714933280182, 2.5: 1.10576316760549235201489947602,
               -0.7: -0.958779695551422595463357933}


def test_qpoch_small_cases(ctx):
    assert qpoch(3.7, 0, ctx) == 1
    assert qpoch(0.0, math.inf, ctx) == 1
    assert qpoch(0.5, 2, ctx) == pytest.approx(0.4375, rel=1e-15)


def test_qpoch_rejects_bad_length(ctx):
    with pytest.raises(QDomainError):
        qpoch(0.5, -1, ctx)
    with pytest.raises(QDomainError):
        qpoch(0.5, 1.5, ctx)


def test_qpoch_infinite_matches_ratio(ctx):
    a, b = 0.3 + 0.2j, -0.7
    assert qpoch_ratio(a, b, ctx) == pytest.approx(qpoch(a, math.inf, ctx) / qpoch(b, math.inf, ctx), rel=1e-14)


def test_exponentials_against_product_oracle(ctx):
    assert qexp_e(0.0, ctx) == 1
    assert qexp_E(0.0, ctx) == 1
    assert qexp_e(0.5, ctx) == pytest.approx(E_AT_HALF, rel=1e-14)
    assert qexp_E(1.0, ctx) == pytest.approx(BIG_E_AT_ONE, rel=1e-14)
    assert qexp_E(-1.0, ctx) == 0


def test_e_has_poles(ctx):
    with pytest.raises(PoleError):
        qexp_e(4.0, ctx)


def test_tensor_exp(ctx):
    assert tensor_exp("e", 0.0, 123.0, ctx) == 1
    assert tensor_exp("E", 1.0, 1.0, ctx) == pytest.approx(BIG_E_AT_075I, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.1, 0.95),
    st.complex_numbers(max_magnitude=30, allow_nan=False, allow_infinity=False),
)
def test_reciprocity(q, z):
    ctx = QContext(q=q)
    # stay away from the poles z = q^(-2n)
    n = np.arange(200)
    if np.min(np.abs(1 - z * q ** (2 * n))) < 1e-3:
        return
    assert abs(qexp_e(z, ctx) * qexp_E(-z, ctx) - 1) < 1e-12


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("y", [0.7, -1.3, 2.0])
def test_derivative_relations(q, y):
    ctx = QContext(q=q)
    c = 1 - ctx.q2
    for zeta in (0.4, -1.1, 3.0):
        dE = qderiv(lambda t: tensor_exp("E", y, t, ctx), zeta, ctx)
        assert dE == pytest.approx(1j * y * tensor_exp("E", ctx.q2 * y, zeta, ctx), rel=1e-10)
        de = qderiv(lambda t: tensor_exp("e", y, t, ctx), zeta, ctx)
        assert de == pytest.approx(1j * y * tensor_exp("e", y, zeta, ctx), rel=1e-10)
    assert c > 0


def test_qgamma_values(ctx):
    assert qgamma(1.0, ctx) == pytest.approx(1.0, rel=1e-15)
    assert qgamma(2.0, ctx) == pytest.approx(1.0, rel=1e-15)
    for nu, ref in QGAMMA_HALF.items():
        assert qgamma(nu, ctx) == pytest.approx(ref, rel=1e-13)


def test_qgamma_poles(ctx):
    for nu in (0.0, -1.0, -3.0):
        with pytest.raises(QDomainError):
            qgamma(nu, ctx)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("nu", [0.3, 0.5, 1.5, 2.7])
def test_qgamma_recurrence(q, nu):
    ctx = QContext(q=q)
    lhs = qgamma(nu + 1, ctx)
    rhs = (1 - ctx.q2**nu) / (1 - ctx.q2) * qgamma(nu, ctx)
    assert abs(lhs / rhs - 1) < 1e-12


@pytest.mark.parametrize("nu", [0.3, 0.5, 1.7])
def test_qgamma_classical_limit(nu):
    errs = [abs(qgamma(nu, QContext(q=q)) / gamma(nu) - 1) for q in (0.9, 0.99, 0.999)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_theta0(ctx):
    assert theta0(ctx) == pytest.approx(THETA0_HALF, rel=1e-14)
    # Q(z) = Q(1/z) at z = 1 - q^2
    z = 1 - ctx.q2
    m = np.arange(-60, 61)

    def Q(z):
        return np.sum(1 / (z * ctx.q2**m + ctx.q2**-m / z))

    assert Q(z) == pytest.approx(Q(1 / z), rel=1e-14)
    assert theta0(ctx) == pytest.approx((1 - ctx.q2) * Q(z), rel=1e-14)


def test_qderiv(ctx):
    assert qderiv(lambda z: 5.0, 0.3, ctx) == 0
    assert qderiv(lambda z: z, 0.3, ctx) == pytest.approx(1.0, rel=1e-15)
    z = 0.7
    assert qderiv(lambda t: t * t, z, ctx) == pytest.approx(z * (1 + ctx.q2), rel=1e-15)
    with pytest.raises(QDomainError):
        qderiv(lambda t: t, 0.0, ctx)


def test_jackson_z_basic(ctx):
    assert jackson_z(lambda z: z * np.exp(-z * z), ctx) == 0
    point = ctx.q2

    def indicator(z):
        return np.where(np.isclose(z, point, rtol=1e-13, atol=0), 1.0, 0.0)

    assert jackson_z(indicator, ctx) == pytest.approx((1 - ctx.q2) * ctx.q2, rel=1e-15)


def test_jackson_z_fundamental_theorem(ctx):
    def g(z):
        return z * z * qexp_e(-(z**2), ctx)

    assert abs(jackson_z(lambda z: qderiv(g, z, ctx), ctx)) < 1e-10


def test_jackson_halfline(ctx):
    assert jackson_halfline(lambda x: 0 * x, ctx) == 0
    q = ctx.q

    def at_q(x):
        return np.where(np.isclose(x, q, rtol=1e-13, atol=0), 1.0, 0.0)

    assert jackson_halfline(at_q, ctx) == pytest.approx((1 - q * q) * q, rel=1e-15)
    small = ctx.with_(lattice_cutoff=200)
    assert jackson_halfline(lambda x: np.where(x <= 1, x, 0.0), small) == pytest.approx(1.0, rel=1e-13)


def test_divergent_sum_reports_partial(ctx):
    with pytest.raises(DivergenceError) as err:
        jackson_z(lambda z: 1 / z**2, ctx)
    assert err.value.partial is not None


def test_abs_integrable(ctx):
    assert is_abs_integrable(lambda z: 0 * z, ctx)
    assert not is_abs_integrable(lambda z: 1 / z, ctx)
    assert is_abs_integrable(lambda z: qexp_E(-np.abs(z), ctx) / (1 + z * z), ctx)
