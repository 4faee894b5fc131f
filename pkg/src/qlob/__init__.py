"""q-deformed harmonic analysis on the quantum Lobachevsky space."""

from .context import (
    DivergenceError,
    IntegerOrderError,
    PoleError,
    QContext,
    QDomainError,
    QlobError,
    TagError,
)

__all__ = [
    "QContext",
    "QlobError",
    "QDomainError",
    "PoleError",
    "IntegerOrderError",
    "DivergenceError",
    "TagError",
]
