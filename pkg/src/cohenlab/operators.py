"""Dense operators and multiplication operators on a finite weighted space.

Operators act on raw coordinates, (Af)_i = sum_j a_ij f_j.  The measure only
enters through norms, inner products and adjoints.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .measure import MeasurableFunction, MeasureSpace, _frozen

INVERTIBILITY_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    space: MeasureSpace
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        n = self.space.size
        if a.shape != (n, n):
            raise InputError(f"operator must be {n}x{n} to act on this space, got shape {a.shape}")
        object.__setattr__(self, "entries", _frozen(a))

    @classmethod
    def from_array(cls, entries, weights=None) -> "MatrixOperator":
        a = np.asarray(entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"operator entries must form a square matrix, got shape {a.shape}")
        space = MeasureSpace.counting(a.shape[0]) if weights is None else MeasureSpace(weights)
        return cls(space, a)

    @classmethod
    def identity(cls, space: MeasureSpace) -> "MatrixOperator":
        return cls(space, np.eye(space.size))

    @property
    def n(self) -> int:
        return self.space.size

    def __mul__(self, c) -> "MatrixOperator":
        return MatrixOperator(self.space, self.entries * c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, MultiplicationOperator):
            other = other.as_matrix()
        return compose(self, other)

    def __rmatmul__(self, other):
        if isinstance(other, MultiplicationOperator):
            return compose(other.as_matrix(), self)
        return NotImplemented


@dataclass(frozen=True, eq=False)
class MultiplicationOperator:
    space: MeasureSpace
    symbol: np.ndarray

    def __post_init__(self):
        d = np.array(self.symbol, dtype=complex).ravel()
        if d.size != self.space.size:
            raise InputError(
                f"symbol has {d.size} entries but the space has {self.space.size} atoms"
            )
        object.__setattr__(self, "symbol", _frozen(d))

    @classmethod
    def identity(cls, space: MeasureSpace) -> "MultiplicationOperator":
        return cls(space, np.ones(space.size))

    def is_positive_symbol(self) -> bool:
        return bool(np.all(self.symbol.imag == 0) and np.all(self.symbol.real >= 0))

    def is_invertible(self, eps: float = 0.0) -> bool:
        # eps=0 is plain injectivity; callers needing L^inf-invertibility pass a floor
        mod = np.abs(self.symbol)
        return bool(np.all(mod > 0) and np.all(mod >= eps))

    def inverse(self) -> "MultiplicationOperator":
        if not self.is_invertible():
            raise InputError("multiplication operator has a zero in its symbol")
        return MultiplicationOperator(self.space, 1.0 / self.symbol)

    def equals_identity(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.symbol - 1.0) <= tol))

    def dominates_identity(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.symbol.imag) <= tol) and np.all(self.symbol.real >= 1.0 - tol))

    def as_matrix(self) -> MatrixOperator:
        return MatrixOperator(self.space, np.diag(self.symbol))

    def __matmul__(self, other):
        if isinstance(other, MultiplicationOperator):
            return product_of_symbols([self, other])
        if isinstance(other, MatrixOperator):
            return compose(self.as_matrix(), other)
        return NotImplemented


def _check_spaces(a, b):
    if a.space != b.space:
        raise InputError("operands act on different measure spaces")


def apply(A: MatrixOperator, f: MeasurableFunction) -> MeasurableFunction:
    _check_spaces(A, f)
    return MeasurableFunction(A.space, A.entries @ f.values)


def compose(A: MatrixOperator, B: MatrixOperator) -> MatrixOperator:
    _check_spaces(A, B)
    return MatrixOperator(A.space, A.entries @ B.entries)


def adjoint(A: MatrixOperator) -> MatrixOperator:
    """Adjoint for the weighted pairing: W^-1 A^H W."""
    w = A.space.weights
    return MatrixOperator(A.space, (A.entries.conj().T * w[None, :]) / w[:, None])


def is_positive_operator(A: MatrixOperator, tol: float = 0.0) -> bool:
    a = A.entries
    return bool(np.all(np.abs(a.imag) <= tol) and np.all(a.real >= -tol))


def product_of_symbols(Ds: Sequence[MultiplicationOperator]) -> MultiplicationOperator:
    if not Ds:
        raise InputError("empty family of multiplication operators")
    space = Ds[0].space
    out = np.ones(space.size, dtype=complex)
    for D in Ds:
        if D.space != space:
            raise InputError("multiplication operators act on different measure spaces")
        out = out * D.symbol
    return MultiplicationOperator(space, out)


def similarity_to_unweighted(A: MatrixOperator) -> MatrixOperator:
    """W^{1/2} A W^{-1/2}, returned on the counting measure of the same size.

    Its standard singular values and numerical range are the weighted ones of A.
    """
    s = np.sqrt(A.space.weights)
    return MatrixOperator(MeasureSpace.counting(A.n), unweighted_entries(A.entries, s))


def unweighted_entries(a: np.ndarray, sqrt_w: np.ndarray) -> np.ndarray:
    return a * sqrt_w[:, None] / sqrt_w[None, :]
