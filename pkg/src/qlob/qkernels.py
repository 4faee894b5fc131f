"""Scalar q-calculus in base q**2.

Products are evaluated factor by factor in binary64. Infinite products stop
once the factors are within ``ctx.series_tol`` of one; the number of factors
is fixed per element from its modulus, so results do not depend on what else
is evaluated in the same call.
"""

import math

import numpy as np

from .context import DivergenceError, PoleError, QContext, QDomainError

__all__ = [
    "qpoch",
    "qpoch_ratio",
    "qexp_e",
    "qexp_E",
    "tensor_exp",
    "qgamma",
    "theta0",
    "qderiv",
    "lattice_indices",
    "lattice_points",
    "jackson_z",
    "jackson_halfline",
    "is_abs_integrable",
    "tail_defect",
]

_MIN_FACTORS = 8


def _factor_count(absval, ctx):
    """Number of factors of (a; q^2)_oo needed for |a| q^(2j) < series_tol."""
    absval = np.asarray(absval, dtype=float)
    with np.errstate(divide="ignore"):
        need = np.log(ctx.series_tol / np.maximum(absval, 1e-300)) / np.log(ctx.q2)
    need = np.where(absval > 0, np.ceil(need) + 1, 0)
    return np.clip(need, _MIN_FACTORS, ctx.max_terms).astype(int)


def _finite_product(factors_of, a, counts):
    """Multiply factors_of(a, j) for j < counts, elementwise in a."""
    flat = a.reshape(-1)
    cnt = counts.reshape(-1)
    out = np.ones(flat.shape, dtype=complex)
    if flat.size == 0:
        return out.reshape(a.shape)
    nmax = int(cnt.max())
    zero = np.zeros(flat.shape, dtype=bool)
    # chunk over j so that huge counts (q near 1) stay within memory
    chunk = max(1, min(nmax, 4_000_000 // max(flat.size, 1)))
    with np.errstate(over="ignore", invalid="ignore"):
        for start in range(0, nmax, chunk):
            j = np.arange(start, min(nmax, start + chunk))
            fac = factors_of(flat[:, None], j[None, :])
            fac = np.where(j[None, :] < cnt[:, None], fac, 1.0)
            zero |= np.any(fac == 0, axis=1)
            out = out * np.prod(fac, axis=1)
    # an exact zero factor wins over overflow in the others
    out[zero] = 0
    return out.reshape(a.shape)


def _as_result(value, like):
    value = np.asarray(value)
    if np.ndim(like) == 0:
        value = value.reshape(())[()]
        return complex(value)
    return value


def qpoch(a, n, ctx: QContext):
    """q-Pochhammer symbol (a; q^2)_n.

    ``n`` is a nonnegative integer or ``math.inf``. The infinite product is
    truncated once ``|a| q^(2j) < ctx.series_tol`` (with at least eight
    factors and at most ``ctx.max_terms``).

    >>> qpoch(0.5, 2, QContext(q=0.5))
    (0.4375+0j)
    """
    arr = np.asarray(a, dtype=complex)
    q2 = ctx.q2
    if n == math.inf:
        counts = _factor_count(np.abs(arr), ctx)
    else:
        if n < 0 or int(n) != n:
            raise QDomainError(f"n must be a nonnegative integer or inf, got {n}")
        counts = np.full(arr.shape, int(n))
    if counts.size and counts.max() == 0:
        return _as_result(np.ones(arr.shape, dtype=complex), a)
    res = _finite_product(lambda x, j: 1.0 - x * q2**j, arr, counts)
    return _as_result(res, a)


def qpoch_ratio(a, b, ctx: QContext):
    """(a; q^2)_oo / (b; q^2)_oo as a product of factor ratios.

    Taking the ratio factor by factor keeps the value finite when each
    product separately would overflow.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a, b = np.broadcast_arrays(a, b)
    counts = _factor_count(np.maximum(np.abs(a), np.abs(b)), ctx)
    q2 = ctx.q2
    stacked = np.stack([a, b], axis=-1)
    flat = stacked.reshape(-1, 2)
    cnt = counts.reshape(-1)
    out = np.ones(flat.shape[0], dtype=complex)
    if flat.shape[0]:
        nmax = int(cnt.max())
        chunk = max(1, min(nmax, 4_000_000 // flat.shape[0]))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for start in range(0, nmax, chunk):
                j = np.arange(start, min(nmax, start + chunk))
                w = q2 ** j[None, :]
                f = (1.0 - flat[:, 0:1] * w) / (1.0 - flat[:, 1:2] * w)
                f = np.where(j[None, :] < cnt[:, None], f, 1.0)
                out = out * np.prod(f, axis=1)
    return _as_result(out.reshape(a.shape), a)


def _check_poles(z, ctx):
    z = np.asarray(z, dtype=complex)
    counts = _factor_count(np.abs(z), ctx)
    if z.size == 0:
        return
    nmax = int(counts.max())
    j = np.arange(nmax)
    dist = np.abs(1.0 - z.reshape(-1)[:, None] * ctx.q2 ** j[None, :])
    dist = np.where(j[None, :] < counts.reshape(-1)[:, None], dist, np.inf)
    if np.any(dist < ctx.series_tol):
        raise PoleError("argument of e_{q^2} lies on a pole q^(-2n)")


def qexp_e(z, ctx: QContext):
    """e_{q^2}(z) = 1/(z; q^2)_oo, valid for all z off the poles q^(-2n)."""
    _check_poles(z, ctx)
    # factor-wise reciprocals underflow to zero instead of dividing by inf
    return qpoch_ratio(0.0, z, ctx)


def qexp_E(z, ctx: QContext):
    """E_{q^2}(z) = (-z; q^2)_oo, an entire function."""
    return qpoch(-np.asarray(z, dtype=complex) if np.ndim(z) else -complex(z), math.inf, ctx)


def tensor_exp(kind, y, zeta, ctx: QContext):
    """Exponential of the pairing ``i (1 - q^2) y zeta``.

    ``kind`` is ``"e"`` or ``"E"``. For real ``y`` and ``zeta`` the argument
    is purely imaginary and so never hits a pole of e_{q^2}.
    """
    arg = 1j * (1.0 - ctx.q2) * np.asarray(y) * np.asarray(zeta)
    if np.ndim(arg) == 0:
        arg = complex(arg)
    if kind == "e":
        return qexp_e(arg, ctx)
    if kind == "E":
        return qexp_E(arg, ctx)
    raise QDomainError(f"kind must be 'e' or 'E', got {kind!r}")


def qgamma(nu, ctx: QContext):
    """q^2-Gamma function (q^2;q^2)_oo / (q^(2 nu);q^2)_oo (1-q^2)^(1-nu).

    The product form holds for every nu off the poles 0, -1, -2, ...
    """
    if nu <= 0 and abs(nu - round(nu)) < 1e-12:
        raise QDomainError(f"qgamma has a pole at nu = {nu}")
    q2 = ctx.q2
    ratio = qpoch_ratio(q2, q2**nu, ctx)
    return float(ratio.real) * (1.0 - q2) ** (1.0 - nu)


def lattice_indices(ctx: QContext, step=2):
    """Indices of the lattice q^(step m); step 1 uses twice as many indices."""
    if step not in (1, 2):
        raise QDomainError(f"lattice step must be 1 or 2, got {step}")
    n = ctx.lattice_cutoff * (2 // step)
    return np.arange(-n, n + 1)


def lattice_points(ctx: QContext, step=2):
    """Positive lattice points q^(step m) in ascending index order."""
    return ctx.q ** (step * lattice_indices(ctx, step).astype(float))


def theta0(ctx: QContext, step=2):
    """Theta_0 = (1-q^s) sum_m 1/((1-q^2) q^(s m) + q^(-s m)/(1-q^2)).

    ``step=2`` is the constant of the q^2 lattice; ``step=1`` the analogue
    for the lattice q^m.
    """
    c = 1.0 - ctx.q2
    x = lattice_points(ctx, step)
    return (1.0 - ctx.q**step) * float(np.sum(1.0 / (c * x + 1.0 / (c * x))))


def qderiv(f, z, ctx: QContext):
    """q^2-derivative (f(z) - f(q^2 z)) / (z (1 - q^2))."""
    if z == 0:
        raise QDomainError("the q-derivative is not defined at z = 0")
    return (f(z) - f(ctx.q2 * z)) / (z * (1.0 - ctx.q2))


def _apply(f, x):
    """Evaluate f on an array, falling back to a loop for scalar-only f."""
    try:
        r = np.asarray(f(x), dtype=complex)
        if r.shape == x.shape:
            return r
    except (TypeError, ValueError):
        pass
    return np.array([complex(f(v)) for v in x], dtype=complex)


def tail_defect(terms):
    """Largest change of the symmetric partial sums over the last five cutoffs,
    relative to the sum of absolute values.

    ``terms`` is indexed by m = -N..N. Returns ``inf`` when a term is not
    finite.
    """
    terms = np.asarray(terms)
    if not np.all(np.isfinite(terms)):
        return math.inf
    n = (terms.shape[0] - 1) // 2
    total = np.sum(terms, axis=0)
    scale = np.sum(np.abs(terms), axis=0)
    worst = 0.0
    for j in range(1, 5):
        inner = np.sum(terms[j : terms.shape[0] - j], axis=0)
        d = np.abs(total - inner) / np.where(scale > 0, scale, 1.0)
        worst = max(worst, float(np.max(d)))
    return worst if n >= 5 else math.inf


def _finish(terms, weight, ctx, check, what):
    total = weight * np.sum(terms)
    if check:
        d = tail_defect(terms)
        if not d <= ctx.cauchy_tol:
            raise DivergenceError(
                f"{what}: partial sums fail the tail test (defect {d:.3g})", partial=total
            )
    return complex(total)


def jackson_z(f, ctx: QContext, step=2, check=True):
    """Jackson integral over the signed lattice {+-q^(step m)}.

    (1 - q^step) sum_m q^(step m) [f(q^(step m)) + f(-q^(step m))]

    ``f`` is called with an array of lattice points. With ``check`` the
    sum is tested for convergence and :class:`DivergenceError` is raised
    on failure.
    """
    x = lattice_points(ctx, step)
    terms = x * (_apply(f, x) + _apply(f, -x))
    return _finish(terms, 1.0 - ctx.q**step, ctx, check, "jackson_z")


def jackson_halfline(f, ctx: QContext, step=1, check=True):
    """Jackson integral over the half line, (1 - q^2) sum_m q^(step m) f(q^(step m)).

    ``step=1`` is the lattice q^m; ``step=2`` is the q^2 lattice, whose
    natural weight is also (1 - q^2).
    """
    x = lattice_points(ctx, step)
    terms = x * _apply(f, x)
    return _finish(terms, 1.0 - ctx.q2, ctx, check, "jackson_halfline")


def is_abs_integrable(f, ctx: QContext, step=2):
    """True when sum q^(2m) (|f(q^2m)| + |f(-q^2m)|) passes the tail test."""
    x = lattice_points(ctx, step)
    try:
        terms = x * (np.abs(_apply(f, x)) + np.abs(_apply(f, -x)))
    except (ArithmeticError, ValueError):
        return False
    return tail_defect(terms) <= ctx.cauchy_tol
