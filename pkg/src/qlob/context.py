"""Shared parameter bundle and error types."""

from dataclasses import dataclass, replace


class QlobError(Exception):
    """Base class for errors raised by qlob."""


class QDomainError(QlobError, ValueError):
    """An argument lies outside the domain of the function."""


class PoleError(QDomainError):
    """Evaluation too close to a pole of a q-exponential."""


class IntegerOrderError(QDomainError):
    """Integer order requested where only non-integer orders are supported."""


class DivergenceError(QlobError, ArithmeticError):
    """A lattice sum or series failed its convergence test.

    The truncated value is kept in ``partial`` for inspection.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TagError(QlobError, TypeError):
    """Elements of different algebras were combined, or an operation is
    not available for the algebra."""


@dataclass(frozen=True)
class QContext:
    """Numerical parameters shared by every routine.

    Parameters
    ----------
    q : float
        Deformation parameter, ``0 < q < 1``.
    delta : int
        Algebra parameter, one of 0, 1, 2.
    s : float
        Twist exponent of the coproduct, nonzero.
    lattice_cutoff : int
        Index bound ``M`` of the q**2 lattice sums, ``|m| <= M``. Lattices
        with finer step use proportionally more indices so that they cover
        the same range of values.
    series_tol : float
        Relative size below which a product factor or series term is
        considered negligible.
    max_terms : int
        Hard cap on the number of factors or terms.
    cauchy_tol : float
        Tolerance of the tail test applied to lattice sums, relative to the
        sum of absolute values of the terms.
    """

    q: float = 0.5
    delta: int = 0
    s: float = 1.0
    lattice_cutoff: int = 60
    series_tol: float = 1e-17
    max_terms: int = 200_000
    cauchy_tol: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise QDomainError(f"q must lie in (0, 1), got {self.q}")
        if self.delta not in (0, 1, 2):
            raise QDomainError(f"delta must be 0, 1 or 2, got {self.delta}")
        if self.s == 0:
            raise QDomainError("s must be nonzero")
        if self.lattice_cutoff < 5:
            raise QDomainError("lattice_cutoff must be at least 5")
        if self.series_tol <= 0 or self.cauchy_tol <= 0:
            raise QDomainError("tolerances must be positive")
        if self.max_terms < 8:
            raise QDomainError("max_terms must be at least 8")

    @property
    def q2(self):
        return self.q * self.q

    def with_(self, **changes):
        """Copy with some fields replaced."""
        return replace(self, **changes)

    def as_dict(self):
        return {
            "q": self.q,
            "delta": self.delta,
            "s": self.s,
            "lattice_cutoff": self.lattice_cutoff,
            "series_tol": self.series_tol,
            "max_terms": self.max_terms,
            "cauchy_tol": self.cauchy_tol,
        }
