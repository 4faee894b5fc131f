"""Poisson kernel, its Fourier image Q_nu and the solutions built from it.

Scalar stand-ins (a, h, b) replace the ordered generators (y*, H, y) or
(x*, H, x): every expression here is normal ordered, so evaluating it on
commuting scalars is exact monomial by monomial.
"""

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .context import DivergenceError, IntegerOrderError, QContext, QDomainError
from .qbessel import k2
from .qkernels import jackson_halfline, qgamma, qpoch_ratio, tensor_exp, theta0

__all__ = [
    "PoissonParams",
    "pkernel_scalar",
    "binomial_series",
    "binomial_product",
    "qnu_prefactor",
    "qnu_B",
    "qnu_series",
    "qnu_parts",
    "qnu_integral",
    "omega_residual",
    "product_solution_residual",
    "norm_integral",
    "norm_integral_closed",
    "norm_integral_printed",
    "B_from_norm_integral",
    "poisson_solve",
    "solution_function",
    "convolve",
    "singularity_split",
]


@dataclass(frozen=True)
class PoissonParams:
    """Spectral parameter nu (positive, non-integer) and an optional grid."""

    nu: float = 0.5
    grid: tuple = field(default=())

    def __post_init__(self):
        if not self.nu > 0:
            raise QDomainError(f"nu must be positive, got {self.nu}")
        if abs(self.nu - round(self.nu)) < 1e-12:
            raise IntegerOrderError(
                "integer nu gives a logarithmic singularity and is not supported"
            )
        for pt in self.grid:
            if any(v <= 0 for v in pt):
                raise QDomainError("grid points must be positive")


def _kernel_z(nu, ctx):
    """Power of q multiplying (ab)^k in the kernel series."""
    d = ctx.delta
    return ctx.q ** (2 - nu * d - 2 * d)


def pkernel_scalar(p: PoissonParams, a, h, b, ctx: QContext):
    """Poisson kernel series sum_k (-1)^k (q^(2nu+2);q^2)_k/(q^2;q^2)_k z^k h^(nu+1)
    with z = q^(2 - nu delta - 2 delta) a b.

    Raises :class:`DivergenceError` when |z| >= 1, where the terms no longer
    decay.
    """
    nu = p.nu
    q2 = ctx.q2
    z = _kernel_z(nu, ctx) * np.asarray(a, dtype=float) * np.asarray(b, dtype=float)
    if np.any(np.abs(z) >= 1.0):
        raise DivergenceError(f"kernel series diverges: |z| = {np.max(np.abs(z)):.4g} >= 1")
    term = np.ones_like(z)
    total = term.copy()
    for k in range(1, ctx.max_terms):
        term = term * (-(1.0 - q2 ** (nu + k)) / (1.0 - q2**k) * z)
        total = total + term
        if k >= 8 and np.all(np.abs(term) <= ctx.series_tol * np.abs(total)):
            break
    else:
        raise DivergenceError("kernel series did not settle within max_terms", partial=total)
    out = total * np.asarray(h, dtype=float) ** (nu + 1)
    return float(out) if out.ndim == 0 else out


def binomial_product(p: PoissonParams, rho, ctx: QContext):
    """(-q^((2+nu)(2-delta)) rho^2; q^2)_oo / (-q^(2-(2+nu)delta) rho^2; q^2)_oo."""
    nu, d, q = p.nu, ctx.delta, ctx.q
    r2 = np.asarray(rho, dtype=float) ** 2
    num = -(q ** ((2 + nu) * (2 - d))) * r2
    den = -(q ** (2 - (2 + nu) * d)) * r2
    out = np.real(qpoch_ratio(num, den, ctx))
    return float(out) if np.ndim(out) == 0 else out


def _clearing_plan(ax, p2, tol=1e-25):
    """Number J of poles to clear and number of terms for |x| = ax."""
    J = 0 if ax < 1 else int(math.floor(math.log(ax) / -math.log(p2))) + 2
    r = ax * p2**J  # convergence ratio of the cleared series
    nterms = int(math.ceil(math.log(tol) / math.log(r))) + 10 if r > 0 else 10
    return J, nterms


def _binomial_series_mp(a_par, x, p2, J, nterms):
    """sum_k (a;p)_k/(p;p)_k x^k, continued past |x| >= 1.

    Inside the unit disk the series is summed as is (J = 0). Outside, the
    factor prod_{j<J}(1 - x p^j) is multiplied into the series coefficients,
    which removes the first J poles and leaves a series converging for
    |x| < p^-J; the result is divided by the same factor.
    """
    # coefficients of prod_{j<J}(1 - x p^j) in powers of x
    e = [mpmath.mpf(1)]
    for j in range(J):
        e = [e[i] - (p2**j * e[i - 1] if i > 0 else 0) for i in range(len(e))] + [
            -(p2**j) * e[-1]
        ]
    c = [mpmath.mpf(1)]
    for k in range(1, nterms + J):
        c.append(c[-1] * (1 - a_par * p2 ** (k - 1)) / (1 - p2**k))
    total = mpmath.mpf(0)
    for k in range(nterms):
        d_k = mpmath.fsum(e[i] * c[k - i] for i in range(min(k, J) + 1))
        total += d_k * x**k
    clear = mpmath.mpf(1)
    for j in range(J):
        clear *= 1 - x * p2**j
    return total / clear


def binomial_series(p: PoissonParams, rho, ctx: QContext, continued=True):
    """Series side of the q-binomial identity for the kernel on the diagonal a = b = rho.

    sum_k (-1)^k (q^(2nu+2);q^2)_k/(q^2;q^2)_k (q^(2-(2+nu)delta) rho^2)^k

    When the argument lies outside the unit disk the power series diverges;
    with ``continued`` it is replaced by its analytic continuation computed
    from the same coefficients, otherwise :class:`DivergenceError` is raised.
    """
    nu, d, q = p.nu, ctx.delta, ctx.q
    rho = np.asarray(rho, dtype=float)
    out = np.empty(rho.shape)
    for idx, r in np.ndenumerate(rho):
        zr = q ** (2 - (2 + nu) * d) * r * r
        if zr >= 1 and not continued:
            raise DivergenceError(f"binomial series diverges at rho={r} (|z|={zr:.4g})")
        # the cleared coefficients are of size r^k while the raw ones are O(1),
        # so the working precision must absorb |x|^k over all terms used
        J, nterms = _clearing_plan(zr, ctx.q2)
        digits = 30 + int(nterms * math.log10(max(zr, 1.0))) + 1
        with mpmath.workdps(digits):
            qm = mpmath.mpf(q)
            p2 = qm * qm
            a_par = qm ** (2 * nu + 2)
            x = -(qm ** (2 - (2 + nu) * d)) * mpmath.mpf(r) ** 2
            out[idx] = float(_binomial_series_mp(a_par, x, p2, J, nterms))
    return float(out) if out.ndim == 0 else out


def qnu_prefactor(p: PoissonParams, ctx: QContext):
    """(1+q)(1-q^2) q^(2nu) / (4 Theta0^2 (1-q^(2nu))), the overall constant of Q_nu."""
    q, nu = ctx.q, p.nu
    th = theta0(ctx)
    return (1 + q) * (1 - q * q) * q ** (2 * nu) / (4 * th * th * (1 - q ** (2 * nu)))


def qnu_B(p: PoissonParams, ctx: QContext):
    """B = (1+q) q^(nu^2 + nu + delta(nu^2/2 + nu)) / (2 Theta0^2 Gamma(nu+1))."""
    q, nu, d = ctx.q, p.nu, ctx.delta
    th = theta0(ctx)
    return (1 + q) * q ** (nu * nu + nu + d * (0.5 * nu * nu + nu)) / (
        2 * th * th * qgamma(nu + 1, ctx)
    )


def _lseries(p, t, ctx, sign):
    """The two l-series of Q_nu without prefactors, as functions of t = ab.

    sign=-1: sum q^(2l(l-nu)) c^(2l) q^(delta l (nu+2)) t^l / ((q^2)_l (q^(2-2nu))_l)
    sign=+1: the same with nu -> -nu in the q-powers and (q^(2nu+2))_l.
    """
    q, q2, nu, d = ctx.q, ctx.q2, p.nu, ctx.delta
    c2 = (1 - q2) ** 2
    t = np.asarray(t, dtype=complex)
    mu = sign * nu
    term = np.ones_like(t)
    total = term.copy()
    for l in range(1, ctx.max_terms):
        term = term * (
            q ** (4 * l - 2 + 2 * mu) * c2 * q ** (d * (nu + 2)) * t
            / ((1 - q2**l) * (1 - q2 ** (mu + l)))
        )
        total = total + term
        if l >= 8 and np.all(np.abs(term) <= ctx.series_tol * np.abs(total)):
            break
    return total


def _power(x, e):
    """Principal-branch power, real when the base is positive."""
    x = np.asarray(x, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x == 0, 0.0 if e > 0 else np.inf, x**e)


def qnu_parts(p: PoissonParams, a, h, b, ctx: QContext):
    """Regular and singular parts (Psi1, Psi2) with Q_nu = Psi1 + (ab)^nu Psi2.

    Both carry the factor h^(nu+1). For negative a or b the power (ab)^nu
    uses the principal branch of a^nu b^nu.
    """
    if abs(p.nu - round(p.nu)) < 1e-12:
        raise IntegerOrderError("Q_nu series needs non-integer nu")
    nu = p.nu
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = a * b
    pre = qnu_prefactor(p, ctx) * _power(h, nu + 1)
    g = qgamma(1 - nu, ctx) / qgamma(1 + nu, ctx)
    psi1 = pre * _lseries(p, t, ctx, -1)
    psi2 = -g * pre * _lseries(p, t, ctx, +1)
    return psi1, psi2


def _out(x):
    x = np.asarray(x)
    if np.all(np.abs(x.imag) <= 1e-300):
        x = x.real
    return x[()] if x.ndim == 0 else x


def qnu_series(p: PoissonParams, a, h, b, ctx: QContext):
    """Q_nu from its two l-series (regular part plus (ab)^nu times a second series)."""
    psi1, psi2 = qnu_parts(p, a, h, b, ctx)
    return _out(psi1 + _power(a, p.nu) * _power(b, p.nu) * psi2)


def qnu_integral(p: PoissonParams, a, h, b, ctx: QContext):
    """Q_nu = B (ab)^(nu/2) h^(nu+1) k2(nu, 2 sqrt(ab) q^delta (1-q^2)), a, b >= 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise QDomainError("qnu_integral needs a, b >= 0")
    nu = p.nu
    t = a * b
    arg = 2.0 * np.sqrt(t) * ctx.q**ctx.delta * (1 - ctx.q2)
    out = qnu_B(p, ctx) * t ** (nu / 2) * np.asarray(h, dtype=float) ** (nu + 1) * k2(nu, arg, ctx)
    return _out(np.asarray(out, dtype=complex))


def _shifted_terms(g, nu, a, h, b, ctx):
    q, d = ctx.q, ctx.delta
    t1 = g(a / q, q * h, b / q) / q
    t2 = -(q**nu + q**-nu) * g(a, h, b)
    t3 = q * g(q * a, h / q, q * b)
    t4 = -((1 - q * q) ** 2) * q ** (d + 1) * a * g(q * a, q ** (d - 1) * h, q * b) * b
    return t1, t2, t3, t4


def omega_residual(g, p: PoissonParams, point, ctx: QContext, scaled=False):
    """Left minus right side of the Fourier-side eigenvalue equation at ``point``.

    q^-1 g(a/q, qh, b/q) - (q^nu + q^-nu) g(a,h,b) + q g(qa, h/q, qb)
      - (1-q^2)^2 q^(delta+1) a g(qa, q^(delta-1) h, qb) b

    With ``scaled`` the residual is divided by the largest of the four terms.
    """
    a, h, b = point
    terms = _shifted_terms(g, p.nu, a, h, b, ctx)
    res = sum(terms)
    if scaled:
        scale = max(abs(complex(x)) for x in terms)
        return abs(complex(res)) / scale if scale > 0 else 0.0
    return res


def product_solution_residual(g, psi, alpha, p: PoissonParams, point, ctx: QContext, scaled=False):
    """Residual of the same equation for G = g(a,h,b) psi(alpha a, alpha b).

    alpha shifts like h does for delta = 0: by q in the first term, by 1/q in
    the third term and on the right-hand side, so alpha a and alpha b are left
    unchanged by the paired scalings.
    """
    q = ctx.q
    a, h, b = point
    t1, t2, t3, t4 = _shifted_terms(g, p.nu, a, h, b, ctx)
    t1 = t1 * psi(q * alpha * (a / q), q * alpha * (b / q))
    t2 = t2 * psi(alpha * a, alpha * b)
    t3 = t3 * psi((alpha / q) * (q * a), (alpha / q) * (q * b))
    t4 = t4 * psi((alpha / q) * (q * a), (alpha / q) * (q * b))
    terms = (t1, t2, t3, t4)
    res = sum(terms)
    if scaled:
        scale = max(abs(complex(x)) for x in terms)
        return abs(complex(res)) / scale if scale > 0 else 0.0
    return res


def _norm_exponents(p, ctx):
    nu, d, q = p.nu, ctx.delta, ctx.q
    return q ** (2 - (2 + nu) * d), q ** ((2 + nu) * (2 - d))


def norm_integral(p: PoissonParams, ctx: QContext):
    """int_0^oo d(rho^2) e_{q^2}(-A rho^2) E_{q^2}(C rho^2) on the half-line q^2 lattice.

    A = q^(2-(2+nu)delta), C = q^((2+nu)(2-delta)).
    """
    A, C = _norm_exponents(p, ctx)

    def integrand(t):
        return qpoch_ratio(-C * t, -A * t, ctx)

    return jackson_halfline(integrand, ctx, step=2).real


def norm_integral_closed(p: PoissonParams, ctx: QContext):
    """Exact value (1-q^2) / (A (1-q^(2nu))) from Ramanujan's 1psi1 sum."""
    A, _ = _norm_exponents(p, ctx)
    return (1 - ctx.q2) / (A * (1 - ctx.q ** (2 * p.nu)))


def norm_integral_printed(p: PoissonParams, ctx: QContext):
    """The value -(1-q^2)/(1-q^(-2nu)) that yields the stated constant B."""
    return -(1 - ctx.q2) / (1 - ctx.q ** (-2 * p.nu))


def B_from_norm_integral(p: PoissonParams, ctx: QContext, integral=None):
    """Solve (1+q)/(4 Theta0^2) I = B/2 q^(-nu^2+nu-delta(nu^2/2+nu)) Gamma(nu) for B."""
    q, nu, d = ctx.q, p.nu, ctx.delta
    if integral is None:
        integral = norm_integral(p, ctx)
    th = theta0(ctx)
    lhs = (1 + q) / (4 * th * th) * integral
    return 2 * lhs / (q ** (-nu * nu + nu - d * (0.5 * nu * nu + nu)) * qgamma(nu, ctx))


# --- solutions from boundary data -----------------------------------------


def _jackson_weight(y, ctx):
    return (1.0 - ctx.q2) * abs(y)


def _split_point(point):
    if len(point) == 3:
        return (*point, 1.0)
    if len(point) == 4:
        return tuple(point)
    raise QDomainError("a sample point is (a, h, b) or (a, h, b, alpha)")


def _support_values(psi, ctx):
    """[(v*, v, value)] for a two-variable lattice function."""
    if psi.arity != 2:
        raise QDomainError("boundary data must be a two-variable lattice function")
    out = []
    for ((s1, m1), (s2, m2)), val in psi.values.items():
        out.append((s1 * ctx.q ** (psi.step * m1), s2 * ctx.q ** (psi.step * m2), val))
    return out


def _mode(p, ctx, ys, y, a, h, b):
    """Weighted Fourier mode w(y*) w(y) e(-a y*) Q_nu(y*, h, y) e(-y b)."""
    q_val = qnu_series(p, ys, h, y, ctx)
    ea = tensor_exp("e", -a, ys, ctx)
    eb = tensor_exp("e", -y, b, ctx)
    return _jackson_weight(ys, ctx) * _jackson_weight(y, ctx) * ea * q_val * eb


def _fourier_side_sum(p, data, ctx, points):
    out = np.zeros(len(points), dtype=complex)
    for i, point in enumerate(points):
        a, h, b, alpha = _split_point(point)
        if alpha <= 0:
            raise QDomainError("alpha must be positive")
        total = 0j
        for vs, v, val in data:
            total += val * _mode(p, ctx, vs / alpha, v / alpha, a, h, b)
        out[i] = total
    return out


def solution_function(p: PoissonParams, psi, ctx: QContext):
    """F(a, h, b, alpha=1) = sigma F(Q_nu psi)(a, h, b) as a scalar function.

    The boundary data enter as psi(alpha y*, alpha y), so a point mass of
    psi at (v*, v) selects y* = v*/alpha, y = v/alpha.
    """
    data = _support_values(psi, ctx)

    def F(a, h, b, alpha=1.0):
        return _fourier_side_sum(p, data, ctx, [(a, h, b, alpha)])[0]

    return F


def poisson_solve(p: PoissonParams, psi, ctx: QContext, points):
    """Samples of F_nu = sigma F(Q_nu psi) at the given points.

    ``psi`` is a finite two-variable :class:`LatticeFunction`; the product
    Q_nu psi has the same finite support, so the forward transform, with the
    sign flip sigma(a, b) = (-a, -b), is the finite sum

        sum w(y*) w(y) e(-a y*) Q_nu(y*, h, y) psi(alpha y*, alpha y) e(-y b)

    with Jackson weights w(y) = (1-q^2)|y|. Each point is (a, h, b) or
    (a, h, b, alpha). Returns a complex array.
    """
    return _fourier_side_sum(p, _support_values(psi, ctx), ctx, list(points))


def _kernel_resummed(p, x, h, y, ctx):
    """Poisson kernel h^(nu+1) (-q^(2nu+2) z; q^2)_oo / (-z; q^2)_oo, z = q^(2-nu d-2d) x y.

    The q-binomial theorem sums the kernel series for |z| < 1; the product
    continues it to every z off the poles.
    """
    z = _kernel_z(p.nu, ctx) * x * y
    return qpoch_ratio(-(ctx.q2 ** (p.nu + 1)) * z, -z, ctx) * _power(h, p.nu + 1)


def convolve(p: PoissonParams, phi, ctx: QContext, points, method="fourier"):
    """Samples of the convolution of the Poisson kernel with phi.

    ``method="fourier"`` writes the kernel through its Fourier image,
    P(a - zeta*, h, b - zeta) = sigma F[e(zeta* y*) Q_nu e(y zeta)], and
    integrates out zeta*, zeta first: that leaves the forward transform of
    phi, multiplied by Q_nu and transformed back with sigma. The forward
    transform of phi is computed by :func:`qlob.qfourier.fourier_2d`, in
    exchanged order when phi carries its preimage. Lattice points where it
    vanishes do not contribute.

    ``method="direct"`` sums the double Jackson integral
    sum w w P(a - zeta*, h, b - zeta) phi(zeta*, zeta) over the stored
    values of phi with the resummed kernel and applies the tail test to the
    terms ordered by lattice index; it raises :class:`DivergenceError` when
    the values of phi outgrow the kernel, which is the generic case.
    """
    from .qfourier import fourier_2d

    if method == "fourier":
        psi = fourier_2d(phi, "forward", ctx)
        return _fourier_side_sum(p, _support_values(psi, ctx), ctx, list(points))
    if method != "direct":
        raise QDomainError("method must be 'fourier' or 'direct'")
    out = np.zeros(len(points), dtype=complex)
    for i, point in enumerate(points):
        a, h, b, _ = _split_point(point)
        by_index = {}
        for ((s1, m1), (s2, m2)), val in phi.values.items():
            zs, z = s1 * ctx.q ** (phi.step * m1), s2 * ctx.q ** (phi.step * m2)
            with np.errstate(over="ignore", invalid="ignore"):
                term = (
                    _jackson_weight(zs, ctx)
                    * _jackson_weight(z, ctx)
                    * _kernel_resummed(p, a - zs, h, b - z, ctx)
                    * val
                )
            k = min(m1, m2)
            by_index[k] = by_index.get(k, 0j) + term
        ks = sorted(by_index)
        terms = np.array([by_index[k] for k in ks])
        total = complex(np.sum(terms))
        # the growth direction is toward large arguments, i.e. small index
        head = terms[: min(4, len(terms))]
        scale = np.sum(np.abs(terms))
        if not np.all(np.isfinite(terms)) or np.max(np.abs(head)) > ctx.cauchy_tol * scale:
            raise DivergenceError(
                "direct convolution does not converge on the stored window", partial=total
            )
        out[i] = total
    return out


def singularity_split(p: PoissonParams, psi, ctx: QContext, h=1.0):
    """Split Q_nu psi on the lattice into Psi1 psi and Psi2 psi.

    Q_nu psi = Psi1 psi + (y* y)^nu Psi2 psi, with both parts evaluated at
    the points of psi's support and the given h. Points with a negative
    coordinate use the principal branch of the fractional power; their keys
    are listed in the ``flagged`` attribute of the singular part.
    """
    if abs(p.nu - round(p.nu)) < 1e-12:
        raise IntegerOrderError("the split needs non-integer nu")
    from .qfourier import LatticeFunction

    reg, sing, flagged = {}, {}, []
    for key, val in psi.values.items():
        (s1, m1), (s2, m2) = key
        ys, y = s1 * ctx.q ** (psi.step * m1), s2 * ctx.q ** (psi.step * m2)
        psi1, psi2 = qnu_parts(p, ys, h, y, ctx)
        reg[key] = complex(psi1) * val
        sing[key] = complex(psi2) * val
        if s1 < 0 or s2 < 0:
            flagged.append(key)
    part1 = LatticeFunction(2, reg, psi.window, psi.step)
    part2 = LatticeFunction(2, sing, psi.window, psi.step)
    part2.flagged = tuple(flagged)
    return part1, part2
