"""Lattice functions and the q-Fourier transforms between them.

Points of the q^2 lattice are encoded as (sign, m) with value sign q^(2m).
The Fourier pair is

    inverse:  phi(zeta) = N int dxi   psi(xi)  E(-q^2 xi zeta)
    forward:  psi(xi)   =   int dzeta e(xi zeta) phi(zeta)

with the tensor exponentials of :func:`qlob.qkernels.tensor_exp`, Jackson
integrals over {+-q^(2m)} and N = 1/(2 Theta_0) per variable.

Composing the two produces the kernel

    L(y, u) = int E(q^2 y zeta) e(-u zeta) dzeta,

Each sign sector of the Jackson sum is a bilateral 1psi1 series with the
closed form -(1-q^2)/(beta - alpha/q^2), alpha = -i(1-q^2)q^2 y,
beta = -i(1-q^2)u. The two sectors carry opposite signs, so off the diagonal
L vanishes: exactly where the sum converges (|y| < |u|) and by analytic
continuation in y where it does not, which is also the value the rule "the
integral of a q-derivative vanishes" assigns to the divergent sum. On the
diagonal the closed forms have a pole while the sum itself converges, to
2 Theta_0 / ((1-q^2)|u|); there it is summed directly.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .context import DivergenceError, QContext, QDomainError
from .ncalg import NormalOrderedElement
from .qbessel import j1_zero_mp, j2_zero_mp
from .qkernels import lattice_indices, qpoch_ratio, tail_defect, tensor_exp, theta0

__all__ = [
    "LatticePoint",
    "LatticeFunction",
    "RadialSeries",
    "skeleton_map",
    "lemma_integral",
    "lemma_kernel",
    "fourier_1d",
    "fourier_2d",
    "radial_decompose",
    "radial_reassemble",
    "hankel",
    "hankel_roundtrip_kernel",
]


@dataclass(frozen=True, order=True)
class LatticePoint:
    """The lattice point sign * q^(step m)."""

    sign: int
    m: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise QDomainError(f"sign must be +1 or -1, got {self.sign}")

    def value(self, ctx: QContext, step=2):
        return self.sign * ctx.q ** (step * self.m)

    def encode(self):
        return (self.sign, self.m)


def _key(point):
    if isinstance(point, LatticePoint):
        return point.encode()
    sign, m = point
    return LatticePoint(int(sign), int(m)).encode()


class LatticeFunction:
    """Finitely supported function on the q^2 lattice in one or two variables.

    ``values`` maps keys to complex numbers. A key is a tuple of ``arity``
    points, each point an encoded (sign, m) pair or a :class:`LatticePoint`.
    ``window`` is the index bound |m| <= window of the declared domain.

    A function produced by one of the transforms records its preimage in
    ``spectral`` as (direction, source). The opposite transform then sums
    in the exchanged order, through the kernel L, instead of summing the
    fast-growing values of the image.
    """

    def __init__(self, arity, values, window, step=2, spectral=None):
        if arity not in (1, 2):
            raise QDomainError("arity must be 1 or 2")
        if step not in (1, 2):
            raise QDomainError("step must be 1 or 2")
        self.arity = arity
        self.window = int(window)
        self.step = step
        self.spectral = spectral
        vals = {}
        for key, v in dict(values).items():
            if arity == 1 and not isinstance(key[0], (tuple, LatticePoint)):
                key = (key,)
            key = tuple(_key(p) for p in key)
            if len(key) != arity:
                raise QDomainError(f"key {key} does not have {arity} points")
            if any(abs(m) > self.window for _, m in key):
                raise QDomainError(f"key {key} lies outside the window {self.window}")
            v = complex(v)
            if v != 0:
                vals[key] = v
        self.values = dict(sorted(vals.items()))

    def __call__(self, *points):
        return self.values.get(tuple(_key(p) for p in points), 0j)

    def __len__(self):
        return len(self.values)

    def keys(self):
        return list(self.values)

    def _combine(self, other, op):
        if (self.arity, self.step) != (other.arity, other.step):
            raise QDomainError("functions live on different lattices")
        keys = set(self.values) | set(other.values)
        return LatticeFunction(
            self.arity,
            {k: op(self.values.get(k, 0j), other.values.get(k, 0j)) for k in keys},
            max(self.window, other.window),
            self.step,
        )

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def scale(self, c):
        return LatticeFunction(
            self.arity, {k: c * v for k, v in self.values.items()}, self.window, self.step
        )

    def max_abs(self):
        return max((abs(v) for v in self.values.values()), default=0.0)

    def restrict(self, window):
        """Values with every |m| <= window."""
        return LatticeFunction(
            self.arity,
            {k: v for k, v in self.values.items() if all(abs(m) <= window for _, m in k)},
            window,
            self.step,
        )

    def relative_error(self, other, window=None):
        """Largest difference relative to the largest value of ``self``."""
        a, b = (self, other) if window is None else (self.restrict(window), other.restrict(window))
        diff = (a - b).max_abs()
        size = a.max_abs()
        return diff / size if size > 0 else diff

    def finite_bound(self):
        """Smallest K with the function zero at every exponent below -K.

        Large arguments have negative exponents, so a finite function in the
        sense of vanishing for large arguments is one with a finite bound.
        """
        if not self.values:
            return -math.inf
        return max(-m for key in self.values for _, m in key)

    def is_finite(self, K):
        return self.finite_bound() <= K

    def is_abs_summable(self, ctx: QContext):
        """Jackson sum of |f| against q^(2m) per variable is finite."""
        total = 0.0
        for key, v in self.values.items():
            w = 1.0
            for _, m in key:
                w *= ctx.q ** (self.step * m)
            total += w * abs(v)
        return math.isfinite(total)

    # --- serialization ------------------------------------------------

    def _columns(self):
        cols = []
        for i in range(1, self.arity + 1):
            cols += [f"sign{i}", f"m{i}"]
        return cols + ["re", "im"]

    def to_records(self):
        out = []
        for key, v in self.values.items():
            rec = {}
            for i, (sign, m) in enumerate(key, start=1):
                rec[f"sign{i}"] = sign
                rec[f"m{i}"] = m
            rec["re"] = v.real
            rec["im"] = v.imag
            out.append(rec)
        return out

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self._columns(), lineterminator="\n")
        writer.writeheader()
        for rec in self.to_records():
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rec.items()})
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "arity": self.arity,
                "window": self.window,
                "step": self.step,
                "values": self.to_records(),
            }
        )

    @classmethod
    def _from_records(cls, arity, window, step, records):
        vals = {}
        for rec in records:
            key = tuple((int(rec[f"sign{i}"]), int(rec[f"m{i}"])) for i in range(1, arity + 1))
            vals[key] = complex(float(rec["re"]), float(rec["im"]))
        return cls(arity, vals, window, step)

    @classmethod
    def from_csv(cls, text, window=None, step=2):
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            return cls(1, {}, window or 0, step)
        arity = 2 if "sign2" in rows[0] else 1
        if window is None:
            window = max(abs(int(r[f"m{i}"])) for r in rows for i in range(1, arity + 1))
        return cls._from_records(arity, window, step, rows)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls._from_records(data["arity"], data["window"], data.get("step", 2), data["values"])

    @classmethod
    def from_callable(cls, fn, arity, window, ctx: QContext, step=2, signs=(1, -1)):
        """Sample fn at every lattice value in the window."""
        idx = range(-window, window + 1)
        pts = [(s, m) for s in signs for m in idx]
        vals = {}
        if arity == 1:
            for p in pts:
                vals[(p,)] = fn(p[0] * ctx.q ** (step * p[1]))
        else:
            for p in pts:
                for r in pts:
                    vals[(p, r)] = fn(p[0] * ctx.q ** (step * p[1]), r[0] * ctx.q ** (step * r[1]))
        return cls(arity, vals, window, step)

    def __repr__(self):
        return f"LatticeFunction(arity={self.arity}, window={self.window}, nonzero={len(self.values)})"


@dataclass(frozen=True)
class RadialSeries:
    """sum c_(l,k) (x*)^l H^k x^l as a finite map (l, k) -> coefficient."""

    coeffs: tuple = field(default=())

    def __post_init__(self):
        items = dict(self.coeffs).items() if not isinstance(self.coeffs, dict) else self.coeffs.items()
        clean = tuple(sorted(((int(l), int(k)), complex(v)) for (l, k), v in items if v != 0))
        object.__setattr__(self, "coeffs", clean)

    def as_dict(self):
        return dict(self.coeffs)

    def grades(self):
        return sorted({k for (_, k), _ in self.coeffs})

    def profile(self, k):
        """rho -> sum_l c_(l,k) rho^(2l) for one power k of H."""
        terms = [(l, c) for (l, kk), c in self.coeffs if kk == k]

        def f(rho):
            rho = np.asarray(rho, dtype=float)
            return sum(c * rho ** (2 * l) for l, c in terms) + 0j * rho

        return f

    def to_element(self, ctx: QContext):
        return NormalOrderedElement("XT", ctx, {(l, k, l): c for (l, k), c in self.coeffs})


def skeleton_map(coeffs, window, ctx: QContext, negative="zero"):
    """Evaluate sum a_(m,n) (xi*)^m xi^n on the lattice.

    psi(k, l) = sum a_(m,n) q^(2mk + 2nl) for |k| <= K and |l| <= L, with
    ``window = (K, L)`` or a single bound for both. ``negative="zero"``
    leaves the sectors with a negative coordinate empty; ``"extend"``
    evaluates the same monomials at -q^(2k) and -q^(2l).
    """
    if isinstance(window, int):
        K = L = window
    else:
        K, L = window
    if negative not in ("zero", "extend"):
        raise QDomainError("negative must be 'zero' or 'extend'")
    items = [((int(m), int(n)), complex(a)) for (m, n), a in dict(coeffs).items() if a != 0]
    signs = (1,) if negative == "zero" else (1, -1)
    q2 = ctx.q2
    vals = {}
    for s1 in signs:
        for k in range(-K, K + 1):
            for s2 in signs:
                for l in range(-L, L + 1):
                    try:
                        terms = [
                            a * (s1 * q2**k) ** m * (s2 * q2**l) ** n for (m, n), a in items
                        ]
                    except OverflowError:
                        terms = [math.inf]
                    if not all(np.isfinite(t) for t in terms):
                        raise DivergenceError(f"skeleton sum is not finite at (k, l) = ({k}, {l})")
                    vals[((s1, k), (s2, l))] = sum(terms)
    return LatticeFunction(2, vals, max(K, L))


# --- the kernel L ---------------------------------------------------------


def _sector_closed_form(y, u, ctx, step):
    """Continued value of each sign sector: (+ sector, - sector).

    The lattice q^m is two copies of the q^2 lattice (offsets 1 and q), and
    the q^2-lattice sector value does not depend on the offset.
    """
    c = 1.0 - ctx.q2
    alpha = -1j * c * ctx.q2 * y
    beta = -1j * c * u
    plus = -(1.0 - ctx.q**step) * (2 // step) / (beta - alpha / ctx.q2)
    return plus, -plus


def _direct_terms(y, u, ctx, step):
    x = ctx.q ** (step * lattice_indices(ctx, step).astype(float))
    # E(q^2 y zeta) e(-u zeta) = (-i c q^2 y zeta; q^2)_oo / (-i c u zeta; q^2)_oo
    c = 1.0 - ctx.q2
    a_, b_ = -1j * c * ctx.q2 * y, -1j * c * u
    with np.errstate(over="ignore", invalid="ignore"):
        plus = qpoch_ratio(a_ * x, b_ * x, ctx)
        minus = qpoch_ratio(-a_ * x, -b_ * x, ctx)
        return x * (plus + minus)


def lemma_integral(y, u, ctx: QContext, step=2, method="auto"):
    """L(y, u) = int E(q^2 y zeta) e(-u zeta) d zeta over the lattice {+-q^(step m)}.

    Returns (value, how). ``method``:

    - ``"direct"``: the plain Jackson sum, ``how = "direct"``; raises
      :class:`DivergenceError` when it fails its tail test (|y| > |u|).
    - ``"closed"``: the sum of the two sector closed forms, defined for
      y != u; ``how = "closed"``.
    - ``"auto"``: direct on the diagonal y = u, where the closed forms have
      their pole and the sum converges, closed form elsewhere.
    """
    if y == 0 or u == 0:
        raise QDomainError("L(y, u) needs nonzero y and u")
    if method not in ("auto", "direct", "closed"):
        raise QDomainError(f"unknown method {method!r}")
    if method == "closed" or (method == "auto" and y != u):
        if y == u:
            raise QDomainError("the closed form has a pole at y = u")
        p, m = _sector_closed_form(y, u, ctx, step)
        return complex(p + m), "closed"
    terms = _direct_terms(y, u, ctx, step)
    total = complex((1.0 - ctx.q**step) * np.sum(terms))
    defect = tail_defect(terms)
    if not defect <= ctx.cauchy_tol:
        raise DivergenceError(
            f"L({y}, {u}) fails the tail test (defect {defect:.3g})", partial=total
        )
    return total, "direct"


@lru_cache(maxsize=16)
def _kernel_cache(ctx, step):
    return {}


def lemma_kernel(ctx: QContext, step=2):
    """Cached L on lattice points, using L(y, u) = L(y/|u|, sign u) / |u|.

    Returns a function of two encoded points (sign, m).
    """
    cache = _kernel_cache(ctx, step)

    def kernel(ypt, upt):
        (sy, my), (su, mu) = ypt, upt
        key = (sy, my - mu, su)
        if key not in cache:
            cache[key] = lemma_integral(sy * ctx.q ** (step * (my - mu)), su, ctx, step)[0]
        return cache[key] / ctx.q ** (step * mu)

    return kernel


# --- Fourier pair ---------------------------------------------------------


def _points(window):
    return [(s, m) for s in (1, -1) for m in range(-window, window + 1)]


def _val(pt, ctx):
    return pt[0] * ctx.q ** (2 * pt[1])


def _inverse_matrix(out_pts, in_pts, ctx):
    """N w_xi E(-q^2 xi zeta) for output points zeta and input points xi."""
    th = theta0(ctx, 2)
    z = np.array([_val(p, ctx) for p in out_pts])
    xi = np.array([_val(p, ctx) for p in in_pts])
    w = (1.0 - ctx.q2) * np.abs(xi)
    with np.errstate(over="ignore", invalid="ignore"):
        E = tensor_exp("E", -ctx.q2 * xi[None, :], z[:, None], ctx)
    return np.asarray(E) * w[None, :] / (2.0 * th)


def _forward_matrix(out_pts, in_pts, ctx):
    """w_zeta e(xi zeta) for output points xi and input points zeta."""
    xi = np.array([_val(p, ctx) for p in out_pts])
    z = np.array([_val(p, ctx) for p in in_pts])
    w = (1.0 - ctx.q2) * np.abs(z)
    e = tensor_exp("e", xi[:, None], z[None, :], ctx)
    return np.asarray(e) * w[None, :]


def _exchange_matrix(out_pts, in_pts, ctx, kernel):
    """N w_v L(-v, -t) for output points t and input points v.

    Both compositions reduce to this: F(F^-1 psi)(t) = sum_v psi(v) N w_v
    L(-v, -t), and F^-1(F phi)(t) the same with phi.
    """
    th = theta0(ctx, 2)
    out = np.zeros((len(out_pts), len(in_pts)), dtype=complex)
    for j, v in enumerate(in_pts):
        wv = (1.0 - ctx.q2) * ctx.q2 ** v[1]
        nv = (-v[0], v[1])
        for i, t in enumerate(out_pts):
            out[i, j] = wv * kernel(nv, (-t[0], t[1])) / (2.0 * th)
    return out


def _matrix(direction, out_pts, in_pts, ctx, kernel, exchanged):
    if exchanged:
        return _exchange_matrix(out_pts, in_pts, ctx, kernel)
    if direction == "inverse":
        return _inverse_matrix(out_pts, in_pts, ctx)
    return _forward_matrix(out_pts, in_pts, ctx)


def _check_direction(direction):
    if direction not in ("forward", "inverse"):
        raise QDomainError("direction must be 'forward' or 'inverse'")


def _source(f, direction, exchange):
    """The data actually summed, and whether the exchanged order applies."""
    opposite = "inverse" if direction == "forward" else "forward"
    if exchange and f.spectral is not None and f.spectral[0] == opposite:
        return f.spectral[1], True
    return f, False


def fourier_1d(f: LatticeFunction, direction, ctx: QContext, window=None, exchange=True):
    """One-variable q-Fourier transform on the q^2 lattice.

    The result is evaluated at every lattice point with |m| <= ``window``
    (default: the window of ``f``). If ``f`` is itself a transform of the
    opposite direction and ``exchange`` is true, the composition is summed
    in exchanged order through the kernel L.
    """
    _check_direction(direction)
    if f.arity != 1 or f.step != 2:
        raise QDomainError("fourier_1d needs a one-variable function on the q^2 lattice")
    window = f.window if window is None else window
    src, exchanged = _source(f, direction, exchange)
    out_pts = _points(window)
    in_pts = [key[0] for key in src.values]
    if not in_pts:
        return LatticeFunction(1, {}, window, spectral=(direction, f))
    kernel = lemma_kernel(ctx) if exchanged else None
    mat = _matrix(direction, out_pts, in_pts, ctx, kernel, exchanged)
    vec = np.array([src.values[(p,)] for p in in_pts])
    with np.errstate(over="ignore", invalid="ignore"):
        res = mat @ vec
    return LatticeFunction(
        1, {(p,): v for p, v in zip(out_pts, res)}, window, spectral=(direction, f)
    )


def fourier_2d(f: LatticeFunction, direction, ctx: QContext, window=None, exchange=True):
    """Two-variable transform with normalization 1/(4 Theta_0^2) for the inverse.

    The exponentials factor over the two variables, so the transform is the
    one-variable transform applied along each axis.
    """
    _check_direction(direction)
    if f.arity != 2 or f.step != 2:
        raise QDomainError("fourier_2d needs a two-variable function on the q^2 lattice")
    window = f.window if window is None else window
    src, exchanged = _source(f, direction, exchange)
    out_pts = _points(window)
    if not src.values:
        return LatticeFunction(2, {}, window, spectral=(direction, f))
    rows = sorted({k[0] for k in src.values})
    cols = sorted({k[1] for k in src.values})
    ri = {p: i for i, p in enumerate(rows)}
    ci = {p: i for i, p in enumerate(cols)}
    data = np.zeros((len(rows), len(cols)), dtype=complex)
    for (a, b), v in src.values.items():
        data[ri[a], ci[b]] = v
    kernel = lemma_kernel(ctx) if exchanged else None
    left = _matrix(direction, out_pts, rows, ctx, kernel, exchanged)
    right = _matrix(direction, out_pts, cols, ctx, kernel, exchanged)
    with np.errstate(over="ignore", invalid="ignore"):
        res = left @ data @ right.T
    vals = {
        (p, r): res[i, j] for i, p in enumerate(out_pts) for j, r in enumerate(out_pts)
    }
    return LatticeFunction(2, vals, window, spectral=(direction, f))


# --- radial part and the q-Hankel pair ------------------------------------


def radial_decompose(f: NormalOrderedElement):
    """Split an XT element into sum_r (x*)^-r phi_r + phi_0 + sum_r phi_r x^r.

    Returns {r: RadialSeries}; r = n - m for each monomial (m, k, n).
    """
    if f.tag != "XT":
        raise QDomainError("radial decomposition is defined for XT elements")
    parts = {}
    for (m, k, n), c in f.terms:
        r = n - m
        l = m if r >= 0 else n
        parts.setdefault(r, {})[(l, k)] = c
    return {r: RadialSeries(v) for r, v in sorted(parts.items())}


def radial_reassemble(parts, ctx: QContext):
    """Inverse of :func:`radial_decompose`."""
    out = {}
    for r, series in parts.items():
        for (l, k), c in series.coeffs:
            key = (l, k, l + r) if r >= 0 else (l - r, k, l)
            out[key] = out.get(key, 0) + c
    return NormalOrderedElement("XT", ctx, out)


def _radial_profiles(f, ctx):
    """{k: callable rho -> value} from a RadialSeries or radial samples."""
    if isinstance(f, RadialSeries):
        return {k: f.profile(k) for k in f.grades()}
    if isinstance(f, LatticeFunction):
        if f.arity != 1:
            raise QDomainError("radial samples must be a one-variable function")
        table = {key[0][1]: v for key, v in f.values.items() if key[0][0] == 1}
        step = f.step

        def prof(rho):
            out = []
            for r in np.atleast_1d(rho):
                m = round(math.log(r) / (step * math.log(ctx.q)))
                out.append(table.get(m, 0j))
            return np.array(out)

        return {0: prof}
    raise QDomainError("hankel needs a RadialSeries or a LatticeFunction")


def _hankel_value(bessel, arg_scale, profile, u, ctx, check):
    """(1-q^2) sum_m q^m J(arg_scale u q^m) f(q^m) q^m over the q lattice."""
    m = lattice_indices(ctx, 1)
    rho = ctx.q ** m.astype(float)
    f = np.asarray(profile(rho), dtype=complex)
    nz = f != 0
    terms = np.zeros(rho.shape, dtype=complex)
    for i in np.nonzero(nz)[0]:
        terms[i] = complex(bessel(arg_scale * u * rho[i], ctx)) * f[i] * rho[i] ** 2
    total = (1.0 - ctx.q2) * np.sum(terms)
    if check and nz.sum() > 0 and (nz[:5].any() or nz[-5:].any()):
        if tail_defect(terms) > ctx.cauchy_tol:
            raise DivergenceError("hankel sum fails the tail test", partial=total)
    return total


def hankel(f, direction, ctx: QContext, window=None, check=True):
    """Radial q-Fourier transform through the q^2-Bessel functions of order zero.

    inverse: g(u) = (1+q)/(4 Theta_0^2) int_0^oo J2(2 u q (1-q^2) rho) f(rho) rho d_q rho,
             with every power H^k of the input carried to H^(k-2)
    forward: f(u) = (1+q) int_0^oo J1(2 u (1-q^2) r) g(r) r d_q r

    ``f`` is a :class:`RadialSeries` (its profile in rho for each power of H)
    or a one-variable :class:`LatticeFunction` of radial samples on the
    positive q lattice (treated as the H^0 part). The result maps each
    output power of H to a :class:`LatticeFunction` on the q lattice.
    """
    _check_direction(direction)
    window = (f.window if isinstance(f, LatticeFunction) else ctx.lattice_cutoff) if window is None else window
    c = 1.0 - ctx.q2
    if direction == "inverse":
        pre = (1.0 + ctx.q) / (4.0 * theta0(ctx, 2) ** 2)
        bessel, scale, shift = j2_zero_mp, 2.0 * ctx.q * c, -2
    else:
        pre = 1.0 + ctx.q
        bessel, scale, shift = j1_zero_mp, 2.0 * c, 0
    out = {}
    for k, prof in _radial_profiles(f, ctx).items():
        vals = {}
        for m in range(-window, window + 1):
            u = ctx.q**m
            vals[((1, m),)] = pre * _hankel_value(bessel, scale, prof, u, ctx, check)
        out[k + shift] = LatticeFunction(1, vals, window, step=1)
    return out


def hankel_roundtrip_kernel(rho_m, u_m, ctx: QContext):
    """Kernel of forward after inverse in exchanged order.

    K(rho, u) = (1+q)^2/(4 Theta_0^2) (1-q^2) sum_r r^2 J1(2(1-q^2) u r) J2(2q(1-q^2) rho r),
    with rho = q^rho_m and u = q^u_m, so that the composition maps f to
    (1-q^2) sum_rho rho^2 f(rho) K(rho, u). The identity needs K to be a
    lattice delta. Raises :class:`DivergenceError` (with the partial sum)
    when the r-sum fails its tail test.
    """
    import mpmath

    c = 1.0 - ctx.q2
    q = mpmath.mpf(ctx.q)
    rho = q**rho_m
    u = q**u_m
    terms = []
    for m in lattice_indices(ctx, 1):
        r = q ** int(m)
        terms.append(r**2 * j1_zero_mp(2 * c * u * r, ctx) * j2_zero_mp(2 * ctx.q * c * rho * r, ctx))
    pre = (1 + ctx.q) ** 2 / (4 * theta0(ctx, 2) ** 2) * c
    arr = np.array([float(t) for t in terms])
    total = pre * float(mpmath.fsum(terms))
    if tail_defect(arr) > ctx.cauchy_tol:
        raise DivergenceError("the r-sum of the Hankel composition does not converge", partial=total)
    return total
