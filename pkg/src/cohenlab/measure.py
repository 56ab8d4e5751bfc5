"""Finite weighted measure spaces and the function spaces L^p over them.

A space is a list of atoms with strictly positive masses, so the essential
supremum is a plain maximum and every integral is a weighted sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, PreconditionError

DEFAULT_TOL = 1e-9
EXPONENT_IDENTITY_TOL = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size < 1:
            raise InputError("a measure space needs at least one atom")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InputError("atom weights must be finite and strictly positive")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def counting(cls, n: int) -> "MeasureSpace":
        return cls(np.ones(n))

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def __eq__(self, other):
        return isinstance(other, MeasureSpace) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True, eq=False)
class MeasurableFunction:
    space: MeasureSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).ravel()
        if v.size != self.space.size:
            raise InputError(
                f"function has {v.size} values but the space has {self.space.size} atoms"
            )
        object.__setattr__(self, "values", _frozen(v))

    def __mul__(self, c) -> "MeasurableFunction":
        return MeasurableFunction(self.space, self.values * c)

    __rmul__ = __mul__

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values.imag == 0) and np.all(self.values.real >= 0))


@dataclass(frozen=True)
class Exponent:
    """An exponent p in [1, inf]; infinity is stored as ``math.inf`` so 1/p is exactly 0."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v < 1:
            raise InputError(f"exponent must lie in [1, inf], got {self.value!r}")
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, p) -> "Exponent":
        if isinstance(p, Exponent):
            return p
        if isinstance(p, str) and p.strip().lower() in ("inf", "infinity", "∞"):
            return cls(math.inf)
        return cls(float(p))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def reciprocal(self) -> float:
        return 0.0 if self.is_infinite else 1.0 / self.value

    def conjugate(self) -> "Exponent":
        if self.is_infinite:
            return Exponent(1.0)
        if self.value == 1.0:
            return Exponent(math.inf)
        return Exponent(self.value / (self.value - 1.0))

    def __str__(self):
        return "inf" if self.is_infinite else f"{self.value:g}"


INF = Exponent(math.inf)


def _same_space(*fs: MeasurableFunction) -> MeasureSpace:
    space = fs[0].space
    for f in fs[1:]:
        if f.space != space:
            raise InputError("functions live on different measure spaces")
    return space


def pnorm(f: MeasurableFunction, p) -> float:
    p = Exponent.parse(p)
    mod = np.abs(f.values)
    if p.is_infinite:
        return float(mod.max())
    top = mod.max()
    if top == 0:
        return 0.0
    # factor out the max modulus so large p cannot overflow
    s = np.dot(f.space.weights, (mod / top) ** p.value)
    return float(top * s ** (1.0 / p.value))


def inner_product(f: MeasurableFunction, g: MeasurableFunction) -> complex:
    space = _same_space(f, g)
    return complex(np.sum(space.weights * f.values * np.conj(g.values)))


def pointwise_product(fs: Sequence[MeasurableFunction]) -> MeasurableFunction:
    if len(fs) == 0:
        raise InputError("pointwise product of an empty list")
    space = _same_space(*fs)
    out = np.ones(space.size, dtype=complex)
    for f in fs:
        out = out * f.values
    return MeasurableFunction(space, out)


def holder_check(fs: Sequence[MeasurableFunction], ps: Sequence, r, tol: float = DEFAULT_TOL):
    """Evaluate both sides of the generalized Hölder inequality.

    Requires sum(1/p_i) == 1/r to within 1e-12.
    """
    from .inequalities import InequalityReport

    if len(fs) != len(ps) or not fs:
        raise InputError("need one exponent per function")
    ps = [Exponent.parse(p) for p in ps]
    r = Exponent.parse(r)
    lhs_recip = math.fsum(p.reciprocal for p in ps)
    if abs(lhs_recip - r.reciprocal) > EXPONENT_IDENTITY_TOL:
        raise PreconditionError(
            "sum of 1/p_i equals 1/r", f"sum 1/p_i = {lhs_recip!r}, 1/r = {r.reciprocal!r}"
        )
    lhs = pnorm(pointwise_product(fs), r)
    factors = [pnorm(f, p) for f, p in zip(fs, ps)]
    return InequalityReport.build(
        name="holder",
        lhs=lhs,
        factors=factors,
        tolerance=tol,
        witnesses={
            "weights": fs[0].space.weights.tolist(),
            "functions": [[[z.real, z.imag] for z in f.values] for f in fs],
            "exponents": [str(p) for p in ps],
            "r": str(r),
        },
        methods=["closed-form"] * len(factors),
    )
