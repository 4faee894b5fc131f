"""Normal-ordered elements of the Lobachevsky algebras and the quantum group action.

An element is a finite sum of monomials L^m M^k R^n with the left generator
L on the left, the middle generator M in the middle and the right generator
R on the right:

====  =====  =====  =====  ===============================================
tag   L      M      R      relations
====  =====  =====  =====  ===============================================
W     z*     H      z      Hz = q^d zH, z*H = q^d Hz*,
                           z*z = q^(2-2d) zz* - q^-d (1-q^2) H^-2
XT    x*     H      x      Hx = q^d xH, x*H = q^d Hx*,
                           x*x = q^2 xx* - q^d (1-q^2)
V     zeta*  alpha  zeta   alpha central, zeta* zeta = q^2 zeta zeta*
YT    y*     H      y      evaluation and order-preserving shifts only
====  =====  =====  =====  ===============================================

Coefficients are complex numbers at the numeric q of the element's context.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .context import QContext, QDomainError, TagError

__all__ = [
    "TAGS",
    "GENERATORS",
    "NormalOrderedElement",
    "monomial",
    "element",
    "normal_multiply",
    "star",
    "act",
    "casimir",
    "casimir_composed",
    "casimir_scalar",
    "omega_nu",
    "omega_nu_constant",
    "casimir_residual",
    "coproduct_residual",
]

TAGS = ("W", "XT", "V", "YT")
GENERATORS = ("A", "Astar", "B", "C", "D")
_REORDERABLE = ("W", "XT", "V")


@dataclass(frozen=True)
class NormalOrderedElement:
    """Finite sparse sum of ordered monomials.

    ``terms`` maps exponent triples (m, k, n) to complex coefficients; zero
    coefficients are dropped on construction.
    """

    tag: str
    ctx: QContext
    terms: tuple = field(default=())

    def __post_init__(self):
        if self.tag not in TAGS:
            raise TagError(f"unknown algebra tag {self.tag!r}")
        cleaned = {}
        items = self.terms.items() if isinstance(self.terms, dict) else self.terms
        for key, c in items:
            key = tuple(int(e) for e in key)
            if len(key) != 3:
                raise QDomainError("monomials are indexed by (m, k, n)")
            cleaned[key] = cleaned.get(key, 0) + complex(c)
        ordered = tuple(sorted((k, v) for k, v in cleaned.items() if v != 0))
        object.__setattr__(self, "terms", ordered)

    @property
    def coeffs(self):
        return dict(self.terms)

    def __add__(self, other):
        _same_algebra(self, other)
        d = self.coeffs
        for k, v in other.terms:
            d[k] = d.get(k, 0) + v
        return NormalOrderedElement(self.tag, self.ctx, d)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return NormalOrderedElement(self.tag, self.ctx, {k: c * v for k, v in self.terms})

    def __mul__(self, other):
        if isinstance(other, NormalOrderedElement):
            return normal_multiply(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def __bool__(self):
        return bool(self.terms)

    def max_abs(self):
        return max((abs(v) for _, v in self.terms), default=0.0)

    def distance(self, other):
        """Largest coefficient difference relative to the largest coefficient."""
        diff = (self - other).max_abs()
        scale = max(self.max_abs(), other.max_abs())
        return diff / scale if scale > 0 else diff

    def evaluate(self, a, h, b):
        """Value on commuting scalars a, h, b standing for L, M, R."""
        return sum(c * a**m * h**k * b**n for (m, k, n), c in self.terms)

    def shift(self, left=0, right=0):
        """Multiply by L^left on the left and R^right on the right (no reordering)."""
        return NormalOrderedElement(
            self.tag, self.ctx, {(m + left, k, n + right): c for (m, k, n), c in self.terms}
        )

    def to_records(self):
        """JSON-ready list of {m, k, n, re, im}."""
        return [
            {"m": m, "k": k, "n": n, "re": c.real, "im": c.imag} for (m, k, n), c in self.terms
        ]

    @classmethod
    def from_records(cls, tag, ctx, records):
        return cls(
            tag, ctx, {(r["m"], r["k"], r["n"]): complex(r["re"], r.get("im", 0.0)) for r in records}
        )


def monomial(tag, m, k, n, ctx: QContext, coeff=1.0):
    return NormalOrderedElement(tag, ctx, {(m, k, n): coeff})


def element(tag, coeffs, ctx: QContext):
    return NormalOrderedElement(tag, ctx, dict(coeffs))


def _same_algebra(f, g):
    if f.tag != g.tag:
        raise TagError(f"cannot combine elements of {f.tag} and {g.tag}")
    if f.ctx != g.ctx:
        raise TagError("elements belong to algebras with different parameters")


# --- multiplication -------------------------------------------------------


@lru_cache(maxsize=64)
def _relations(tag, ctx):
    """Reordering data (a_L, a_R, rho, kappa, p).

    M L = a_L L M, R M = a_R M R, R L = rho L R + kappa M^p.
    """
    q, d = ctx.q, ctx.delta
    c = 1 - q * q
    if tag == "W":
        return q**-d, q**-d, q ** (2 * d - 2), q ** (d - 2) * c, -2
    if tag == "XT":
        return q**-d, q**-d, q**-2, q ** (d - 2) * c, 0
    if tag == "V":
        return 1.0, 1.0, q**-2, 0.0, 0
    raise TagError(f"{tag} has no polynomial reordering rule")


def _swap(tag, ctx, n, m, absolute=False):
    """R^n L^m as a dict {(a, b, c): coeff} of normal monomials L^a M^b R^c.

    For W and XT both exponents must be nonnegative; V allows any sign since
    its relation is a pure q-commutation.
    """
    aL, aR, rho, kappa, p = _relations(tag, ctx)
    if kappa == 0:
        return {(m, 0, n): abs(rho ** (n * m)) if absolute else rho ** (n * m)}
    if n < 0 or m < 0:
        raise QDomainError(
            f"{tag}: reordering needs nonnegative powers of the outer generators"
        )
    return dict(_swap_cached(tag, ctx, n, m, absolute))


@lru_cache(maxsize=4096)
def _swap_cached(tag, ctx, n, m, absolute=False):
    aL, aR, rho, kappa, p = _relations(tag, ctx)
    if absolute:
        aL, aR, rho, kappa = abs(aL), abs(aR), abs(rho), abs(kappa)
    if n == 0 or m == 0:
        return (((m, 0, n), 1.0),)
    # R^n L = rho^n L R^n + sigma_n M^p R^(n-1)
    sigma = 0.0
    for j in range(1, n + 1):
        sigma = rho * sigma + kappa * aR ** (p * (j - 1))
    out = {}
    # L (R^n L^(m-1))
    for (a, b, c), v in _swap_cached(tag, ctx, n, m - 1, absolute):
        key = (a + 1, b, c)
        out[key] = out.get(key, 0) + rho**n * v
    # M^p (R^(n-1) L^(m-1)); moving M^p past L^a gives a_L^(p a)
    for (a, b, c), v in _swap_cached(tag, ctx, n - 1, m - 1, absolute):
        key = (a, b + p, c)
        out[key] = out.get(key, 0) + sigma * aL ** (p * a) * v
    return tuple(out.items())


def _monomial_product(tag, ctx, x, y, absolute=False):
    m, k, n = x
    m2, k2, n2 = y
    aL, aR, *_ = _relations(tag, ctx)
    if absolute:
        aL, aR = abs(aL), abs(aR)
    out = {}
    for (a, b, c), v in _swap(tag, ctx, n, m2, absolute).items():
        # L^m M^k (L^a M^b R^c) M^k2 R^n2
        coeff = v * aL ** (k * a) * aR ** (c * k2)
        key = (m + a, k + b + k2, c + n2)
        out[key] = out.get(key, 0) + coeff
    return out


def normal_multiply(f: NormalOrderedElement, g: NormalOrderedElement, absolute=False):
    """Product f g rewritten in normal order.

    With ``absolute`` every coefficient and every reordering factor is
    replaced by its modulus, which bounds the size of the terms that cancel
    in the true product.
    """
    _same_algebra(f, g)
    if f.tag not in _REORDERABLE:
        raise TagError(f"{f.tag} elements can only be shifted, not multiplied")
    out = {}
    for x, cx in f.terms:
        for y, cy in g.terms:
            for key, v in _monomial_product(f.tag, f.ctx, x, y, absolute).items():
                w = cx * cy * v
                out[key] = out.get(key, 0) + (abs(w) if absolute else w)
    return NormalOrderedElement(f.tag, f.ctx, out)


def star(f: NormalOrderedElement):
    """Conjugate-linear anti-involution; (L^m M^k R^n)* = L^n M^k R^m."""
    if f.tag not in _REORDERABLE:
        raise TagError(f"star is not available for {f.tag}")
    return NormalOrderedElement(
        f.tag, f.ctx, {(n, k, m): c.conjugate() for (m, k, n), c in f.terms}
    )


# --- generator actions ----------------------------------------------------


def _action_terms(tag, ctx, gen, m, k, n):
    """Right action of a generator on one monomial: list of (coeff, (m,k,n))."""
    q, d, s = ctx.q, ctx.delta, ctx.s
    c = 1 - q * q
    if tag == "W":
        if gen == "A":
            return [(q ** (-n + k / 2), (m, k, n))]
        if gen == "D":
            return [(q ** (n - k / 2), (m, k, n))]
        if gen == "Astar":
            return [(q ** ((1 - d) * (-2 * m + k) / s), (m, k, n))]
        if gen == "B":
            return [(q ** (-n + (k + 1) / 2) * (1 - q ** (2 * n)) / c, (m, k, n - 1))]
        if gen == "C":
            return [
                (q ** (n - 3 * (k - 1) / 2 + d * (k - 1)) * (1 - q ** (2 * m)) / c, (m - 1, k - 2, n)),
                (-(q ** (-n + (k + 3) / 2)) * (1 - q ** (2 * n - 2 * k)) / c, (m, k, n + 1)),
            ]
    elif tag in ("XT", "V"):
        # the cone acts like XT with delta = 0, alpha in the role of H
        dd = d if tag == "XT" else 0
        astar = (1 - d) if tag == "XT" else 1
        e = -(3 * m + 3 * k + n - 3) / 2
        if gen == "A":
            return [(q ** ((m + k - n) / 2), (m, k, n))]
        if gen == "D":
            return [(q ** (-(m + k - n) / 2), (m, k, n))]
        if gen == "Astar":
            return [(q ** (astar * (-m + k + n) / s), (m, k, n))]
        if gen == "B":
            return [
                (q ** ((m + k - n + 1) / 2 - dd * (n - 1)) * (1 - q ** (2 * n)) / c, (m, k + 1, n - 1))
            ]
        if gen == "C":
            return [
                (q ** (e + dd * (k + n)) * (1 - q ** (2 * m)) / c, (m - 1, k - 1, n)),
                (q ** (e + dd * n) * (1 - q ** (2 * m + 2 * k)) / c, (m, k - 1, n + 1)),
            ]
    else:
        raise TagError(f"no generator action on {tag}")
    raise QDomainError(f"unknown generator {gen!r}")


def act(f: NormalOrderedElement, X, power=1, absolute=False):
    """Right action f.X of a generator, extended linearly.

    ``X`` is one of ``A, Astar, B, C, D``. ``power`` applies it repeatedly;
    for the diagonal generators (A, D, Astar) any real power is allowed and
    acts by the corresponding power of the eigenvalue. ``absolute`` works
    with moduli throughout, as in :func:`normal_multiply`.
    """
    if X not in GENERATORS:
        raise QDomainError(f"unknown generator {X!r}")
    if f.tag not in _REORDERABLE:
        raise TagError(f"no generator action on {f.tag}")
    diagonal = X in ("A", "D", "Astar")
    if not diagonal and (power < 0 or int(power) != power):
        raise QDomainError("B and C only take nonnegative integer powers")
    if not diagonal:
        out = f
        for _ in range(int(power)):
            out = _act_once(out, X, absolute)
        return out
    res = {}
    for (m, k, n), cf in f.terms:
        ((ev, key),) = _action_terms(f.tag, f.ctx, X, m, k, n)
        w = cf * ev**power
        res[key] = res.get(key, 0) + (abs(w) if absolute else w)
    return NormalOrderedElement(f.tag, f.ctx, res)


def _act_once(f, X, absolute=False):
    res = {}
    for (m, k, n), cf in f.terms:
        for v, key in _action_terms(f.tag, f.ctx, X, m, k, n):
            w = cf * v
            res[key] = res.get(key, 0) + (abs(w) if absolute else w)
    return NormalOrderedElement(f.tag, f.ctx, res)


# --- Casimir --------------------------------------------------------------


def _casimir_terms(tag, ctx, m, k, n):
    q, d = ctx.q, ctx.delta
    c2 = (1 - q * q) ** 2
    if tag == "W":
        return [
            (q ** (-k + 1) * (1 - q ** (k + 1)) ** 2 / c2, (m, k, n)),
            (
                q ** ((d - 1) * (k - 1)) * (1 - q ** (2 * m)) * (1 - q ** (2 * n)) / c2,
                (m - 1, k - 2, n - 1),
            ),
        ]
    N = m + k + n
    extra = d * (k + 1) if tag == "XT" else 0
    return [
        (q ** (-N + 1) * (1 - q ** (N + 1)) ** 2 / c2, (m, k, n)),
        (q ** (-N + 1 + extra) * (1 - q ** (2 * m)) * (1 - q ** (2 * n)) / c2, (m - 1, k, n - 1)),
    ]


def casimir(f: NormalOrderedElement):
    """Casimir action from the closed monomial formulas."""
    if f.tag not in _REORDERABLE:
        raise TagError(f"no Casimir action on {f.tag}")
    res = {}
    for (m, k, n), cf in f.terms:
        for v, key in _casimir_terms(f.tag, f.ctx, m, k, n):
            res[key] = res.get(key, 0) + cf * v
    return NormalOrderedElement(f.tag, f.ctx, res)


def casimir_composed(f: NormalOrderedElement):
    """Casimir action assembled from the generator actions:

    [(q^-1 + q)(A^2 + A^-2) - 4] / (2 (q^-1 - q)^2) + (BC + CB)/2
    """
    q = f.ctx.q
    diag = act(f, "A", 2) + act(f, "A", -2)
    first = (diag.scale(q**-1 + q) - f.scale(4)).scale(1 / (2 * (q**-1 - q) ** 2))
    bc = act(act(f, "B"), "C")
    cb = act(act(f, "C"), "B")
    return first + (bc + cb).scale(0.5)


def _modulus(f):
    return NormalOrderedElement(f.tag, f.ctx, {key: abs(v) for key, v in f.terms})


def _relative_defect(x, y, scale):
    """Largest coefficient of x - y relative to the largest coefficient of
    ``scale``, an elementwise bound on the terms that were summed."""
    size = max(scale.max_abs(), x.max_abs(), y.max_abs())
    diff = (x - y).max_abs()
    return diff / size if size > 0 else diff


def casimir_residual(f: NormalOrderedElement):
    """Defect between :func:`casimir` and :func:`casimir_composed`.

    Measured against the moduli of the pieces that the composed form adds
    up, so that exact cancellations to zero are not mistaken for errors.
    """
    q = f.ctx.q
    g = _modulus(f)
    diag = act(g, "A", 2, absolute=True) + act(g, "A", -2, absolute=True)
    first = (diag.scale(q**-1 + q) + g.scale(4)).scale(1 / (2 * (q**-1 - q) ** 2))
    bc = act(act(g, "B", absolute=True), "C", absolute=True)
    cb = act(act(g, "C", absolute=True), "B", absolute=True)
    scale = first + (bc + cb).scale(0.5)
    return _relative_defect(casimir(f), casimir_composed(f), scale)


def omega_nu_constant(nu, ctx: QContext, squared=True):
    """Eigenvalue subtracted in the shifted Casimir.

    ``squared=True`` gives q^(2-nu) ((1-q^nu)/(1-q^2))^2, the value for
    which the Fourier image of the shifted Casimir is the q-difference
    equation solved by Q_nu, and which tends to nu^2/4 as q -> 1.
    ``squared=False`` gives q^(2-nu) (1-q^nu)/(1-q^2).
    """
    q = ctx.q
    r = (1 - q**nu) / (1 - q * q)
    return q ** (2 - nu) * (r * r if squared else r)


def omega_nu(f: NormalOrderedElement, nu, squared=True):
    """Shifted Casimir casimir(f) - c_nu f."""
    return casimir(f) - f.scale(omega_nu_constant(nu, f.ctx, squared))


def _qd(g, idx, x, ctx):
    """q^2-derivative of g in its argument number idx, at the point x."""
    q2 = ctx.q2
    y = list(x)
    y[idx] = q2 * x[idx]
    return (g(*x) - g(*y)) / (x[idx] * (1 - q2))


def casimir_scalar(g, point, ctx: QContext, basis="XT"):
    """Casimir as a q-difference operator on a scalar function.

    For ``basis="XT"`` and g(a, h, b):

      q^2 [q^-1 g(a/q, h/q, b/q) + q g(qa, qh, qb) - 2 g] / (1-q^2)^2
        + q^(delta-1) (D_a D_b g)(a/q, q^(delta-1) h, b/q)

    with D the q^2-derivative. For ``basis="W"`` only h is rescaled in the
    first bracket, and the second term is q^(1-delta) h^-2 (D_a D_b g)(a,
    q^(delta-1) h, b). On a^m h^k b^n both reproduce the closed monomial
    formulas exactly.

    A fourth coordinate alpha may be appended to ``point``; it is scaled
    like h with delta = 0 (alpha/q, q alpha, alpha/q in the three terms).
    """
    q, d = ctx.q, ctx.delta
    c2 = (1 - q * q) ** 2
    a, h, b = point[:3]
    extra = tuple(point[3:])
    if len(extra) > 1:
        raise QDomainError("point has at most four coordinates")
    down = tuple(e / q for e in extra)
    up = tuple(e * q for e in extra)
    if basis == "XT":
        first = q * g(a / q, h / q, b / q, *down) + q**3 * g(q * a, q * h, q * b, *up)
        first = (first - 2 * q * q * g(a, h, b, *extra)) / c2

        def inner(x, y):
            return _qd(lambda u, hh, w, *al: g(u, hh, w, *al), 0, (x, q ** (d - 1) * h, y) + down, ctx)

        mixed = _qd(lambda x, hh, y, *al: inner(x, y), 2, (a / q, h, b / q) + down, ctx)
        return first + q ** (d - 1) * mixed
    if basis == "W":
        first = q * g(a, h / q, b, *down) + q**3 * g(a, q * h, b, *up)
        first = (first - 2 * q * q * g(a, h, b, *extra)) / c2

        def inner(x, y):
            return _qd(lambda u, hh, w, *al: g(u, hh, w, *al), 0, (x, q ** (d - 1) * h, y) + down, ctx)

        mixed = _qd(lambda x, hh, y, *al: inner(x, y), 2, (a, h, b) + down, ctx)
        return first + q ** (1 - d) * h**-2 * mixed
    raise TagError(f"no scalar Casimir for basis {basis!r}")


# --- module algebra check -------------------------------------------------


def coproduct_residual(f: NormalOrderedElement, g: NormalOrderedElement, X):
    """Defect of the right-module rule for the product f g, with r = 0.

    A: (fg).A = (f.A)(g.A)
    B: (fg).B = (f.A)(g.B) + (f.B)(g.D (A*)^s)
    C: (fg).C = (f.A)(g.C) + (f.C)(g.D (A*)^-s)

    Returns the largest coefficient of the difference, relative to the
    moduli of the terms summed on either side.
    """
    s = f.ctx.s

    def sides(f, g, absolute):
        lhs = act(normal_multiply(f, g, absolute), X, absolute=absolute)
        if X == "A":
            rhs = normal_multiply(act(f, "A", absolute=absolute), act(g, "A", absolute=absolute), absolute)
            return lhs, rhs
        if X not in ("B", "C"):
            raise QDomainError("coproduct rule is checked for A, B and C")
        sign = 1 if X == "B" else -1
        twisted = act(act(g, "D", absolute=absolute), "Astar", sign * s, absolute=absolute)
        rhs = normal_multiply(
            act(f, "A", absolute=absolute), act(g, X, absolute=absolute), absolute
        ) + normal_multiply(act(f, X, absolute=absolute), twisted, absolute)
        return lhs, rhs

    lhs, rhs = sides(f, g, False)
    lhs_abs, rhs_abs = sides(_modulus(f), _modulus(g), True)
    return _relative_defect(lhs, rhs, lhs_abs + rhs_abs)
