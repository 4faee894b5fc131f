"""q^2-Bessel functions of order zero, the I and K series, and classical K_nu.

Conventions
-----------
``j2_zero`` is Jackson's second q^2-Bessel function of order zero,

    J(t) = sum_k (-1)^k q^(2k^2) (t/2)^(2k) / (q^2;q^2)_k^2,

and ``j1_zero`` is the first one, J(t) / (-t^2/4; q^2)_oo. For large t the
first grows and the second decays faster than any double can hold, so both
are summed in mpmath and only the final value is rounded.

``i2`` is the bare series

    sum_l q^(2l(l+nu)) w^l (t/2)^(2l+nu) / ((q^2;q^2)_l (q^(2nu+2);q^2)_l)

with the weight w = q^(delta |nu|). ``k2`` combines i2(-nu) and i2(nu) so
that B (ab)^(nu/2) h^(nu+1) k2(nu, 2 sqrt(ab) q^delta (1-q^2)) is the
series form of Q_nu in :mod:`qlob.poisson`. For delta = 0 and q -> 1 it
tends to K_nu(t / (1 - q^2)).
"""

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .context import IntegerOrderError, QContext, QDomainError
from .qkernels import qgamma

__all__ = [
    "BesselSpec",
    "j2_zero",
    "j1_zero",
    "j2_zero_mp",
    "j1_zero_mp",
    "i2",
    "k2",
    "classical_k",
]


@dataclass(frozen=True)
class BesselSpec:
    kind: str
    nu: float = 0.0
    convention_note: str = ""

    def __post_init__(self):
        if self.kind not in ("J1", "J2", "I2", "K2", "classicalK"):
            raise QDomainError(f"unknown Bessel kind {self.kind!r}")
        if self.kind == "K2" and _is_integer(self.nu):
            raise IntegerOrderError("K2 is only available for non-integer order")


def _is_integer(nu):
    return abs(nu - round(nu)) < 1e-12


def _j2_series_mp(t, q):
    """Sum the J2 series in the current mpmath precision."""
    q2 = q * q
    x2 = (t / 2) ** 2
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    k = 0
    small = 0
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec)
    while True:
        k += 1
        # ratio of consecutive terms: -q^(4k-2) x^2 / (1-q^(2k))^2
        term *= -(q ** (4 * k - 2)) * x2 / (1 - q2**k) ** 2
        total += term
        if abs(term) <= eps * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0


def j2_zero_mp(t, ctx: QContext):
    """J2 of order zero as an mpmath number, accurate to double precision."""
    t = mpmath.mpf(t)
    if t < 0:
        raise QDomainError("j2_zero needs t >= 0")
    prec = 60
    previous = None
    while True:
        with mpmath.workprec(prec):
            val = _j2_series_mp(t, mpmath.mpf(ctx.q))
        if previous is not None and abs(val - previous) <= 1e-18 * abs(val):
            return val
        previous = val
        prec *= 2
        if prec > 20000:
            return val


def j1_zero_mp(t, ctx: QContext):
    """J1 of order zero as an mpmath number."""
    t = mpmath.mpf(t)
    j2 = j2_zero_mp(t, ctx)
    with mpmath.workprec(80):
        q2 = mpmath.mpf(ctx.q) ** 2
        return j2 / mpmath.qp(-(t**2) / 4, q2)


def _vectorize(fn, t, ctx):
    arr = np.asarray(t, dtype=float)
    out = np.array([float(fn(v, ctx)) for v in arr.reshape(-1)]).reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def j2_zero(t, ctx: QContext):
    """Jackson's second q^2-Bessel function of order zero.

    Overflows to ``inf`` for very large arguments; use :func:`j2_zero_mp`
    to keep the exponent.
    """
    return _vectorize(j2_zero_mp, t, ctx)


def j1_zero(t, ctx: QContext):
    """Jackson's first q^2-Bessel function of order zero, J2(t)/(-t^2/4;q^2)_oo."""
    return _vectorize(j1_zero_mp, t, ctx)


def _series(first, ratio, ctx):
    """Sum a series given its first term and a function l -> term_l/term_(l-1).

    Stops when a term falls below series_tol relative to the running sum,
    after at least eight terms.
    """
    term = np.asarray(first, dtype=float)
    total = term.copy()
    for l in range(1, ctx.max_terms):
        term = term * ratio(l)
        total = total + term
        if l >= 8 and np.all(np.abs(term) <= ctx.series_tol * np.abs(total)):
            break
    return total


def _i2_terms(nu, t, ctx):
    """The bare I series without the leading (t/2)^nu."""
    q = ctx.q
    q2 = ctx.q2
    x2 = (np.asarray(t, dtype=float) / 2.0) ** 2
    w = q ** (ctx.delta * abs(nu))

    def ratio(l):
        # q^(2l(l+nu)) / q^(2(l-1)(l-1+nu)) = q^(4l - 2 + 2nu)
        return q ** (4 * l - 2 + 2 * nu) * w * x2 / ((1 - q2**l) * (1 - q2 ** (nu + l)))

    return _series(np.ones_like(x2), ratio, ctx)


def i2(nu, t, ctx: QContext):
    """q^2-modified Bessel series of order ``nu`` (see the module notes).

    ``nu`` may be negative as long as nu is not a negative integer.
    """
    if nu < 0 and _is_integer(nu):
        raise IntegerOrderError("i2 is undefined at negative integer order")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise QDomainError("i2 needs t >= 0")
    with np.errstate(divide="ignore"):
        lead = (t / 2.0) ** nu
    out = lead * _i2_terms(nu, t, ctx)
    return float(out) if out.ndim == 0 else out


def _i2_mp(nu, t, ctx, dps):
    """i2 in mpmath at ``dps`` digits."""
    with mpmath.workdps(dps):
        q = mpmath.mpf(ctx.q)
        q2 = q * q
        nu = mpmath.mpf(nu)
        t = mpmath.mpf(t)
        x2 = (mpmath.mpf(t) / 2) ** 2
        w = q ** (ctx.delta * abs(nu))
        term = mpmath.mpf(1)
        total = term
        eps = mpmath.mpf(10) ** (-dps)
        for l in range(1, ctx.max_terms):
            term *= q ** (4 * l - 2 + 2 * nu) * w * x2 / ((1 - q2**l) * (1 - q2 ** (nu + l)))
            total += term
            if l >= 8 and abs(term) <= eps * abs(total):
                break
        return (mpmath.mpf(t) / 2) ** nu * total


def _k2_parts(nu, ctx):
    q = ctx.q
    d = ctx.delta
    c = 1.0 - ctx.q2
    pre = 0.5 * qgamma(nu, ctx) * q ** (nu - nu * nu - d * (0.5 * nu * nu + nu))
    g = qgamma(1.0 - nu, ctx) / qgamma(1.0 + nu, ctx)
    return pre, q ** (d * nu) * c**nu, g * q ** (-d * nu) * c ** (-nu)


def _k2_mp(nu, t, ctx):
    """k2 at one point with enough digits to survive the cancellation."""
    dps = 40
    while True:
        with mpmath.workdps(dps):
            q = mpmath.mpf(ctx.q)
            q2 = q * q
            n = mpmath.mpf(nu)
            d = ctx.delta
            c = 1 - q2

            def gamma(x):
                return mpmath.qp(q2, q2) / mpmath.qp(q2**x, q2) * c ** (1 - x)

            pre = gamma(n) / 2 * q ** (n - n * n - d * (n * n / 2 + n))
            a = q ** (d * n) * c**n * _i2_mp(-nu, t, ctx, dps)
            b = gamma(1 - n) / gamma(1 + n) * q ** (-d * n) * c ** (-n) * _i2_mp(nu, t, ctx, dps)
            val = a - b
            lost = mpmath.log10(max(abs(a), abs(b)) / abs(val)) if val != 0 else dps
            if lost < dps - 20 or dps >= 640:
                return float(pre * val)
        dps = 2 * dps


def k2(nu, t, ctx: QContext):
    """q^2-Bessel-Macdonald function of the second kind, non-integer ``nu``.

    Gamma(nu)/2 q^(nu - nu^2 - delta(nu^2/2 + nu))
      [q^(delta nu) c^nu i2(-nu, t) - G q^(-delta nu) c^-nu i2(nu, t)]

    with c = 1 - q^2 and G = Gamma(1-nu)/Gamma(1+nu), all Gammas in base q^2.
    The two series cancel for large t; points where more than six digits
    are lost are recomputed in mpmath with enough working precision.
    """
    if _is_integer(nu):
        raise IntegerOrderError(f"k2 is not available for integer order {nu}")
    pre, wa, wb = _k2_parts(nu, ctx)
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        first = wa * np.asarray(i2(-nu, t, ctx))
        second = wb * np.asarray(i2(nu, t, ctx))
        out = np.asarray(pre * (first - second), dtype=float)
        bad = ~(np.abs(first - second) > 1e-6 * np.maximum(np.abs(first), np.abs(second)))
    bad &= t > 0
    if np.any(bad):
        out = out.copy()
        flat_t, flat_out, flat_bad = t.reshape(-1), out.reshape(-1), bad.reshape(-1)
        for i in np.nonzero(flat_bad)[0]:
            flat_out[i] = _k2_mp(nu, flat_t[i], ctx)
        out = flat_out.reshape(t.shape)
    return float(out) if np.ndim(out) == 0 else out


def classical_k(nu, x):
    """Classical Bessel-Macdonald function from its cosh integral.

    K_nu(x) = int_0^oo exp(-x cosh t) cosh(nu t) dt, with the trapezoid rule
    on [0, T] where the integrand has dropped below 1e-16. The integrand
    is smooth and even, so the rule converges geometrically in the step.
    """
    if x <= 0:
        raise QDomainError("classical_k needs x > 0")
    nu = abs(nu)
    # integrand ~ exp(-x e^t/2 + nu t); find T with that below 1e-16 e^-x
    big = x + 37.0
    T = 1.0
    while x * math.cosh(T) - nu * T < big:
        T *= 1.25
    n = 4000
    t = np.linspace(0.0, T, n + 1)
    f = np.exp(-x * np.cosh(t)) * np.cosh(nu * t)
    h = T / n
    return float(h * (np.sum(f) - 0.5 * f[0] - 0.5 * f[-1]))
