"""Checkers for the Cohen-type inequalities and their norm / numerical-radius analogues.

Every checker evaluates both sides and returns an :class:`InequalityReport`.
Hypotheses are enforced unless ``unchecked=True``; the unchecked form exists
so counterexamples that deliberately violate a hypothesis can be evaluated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InputError, PreconditionError
from .measure import DEFAULT_TOL, Exponent, MeasurableFunction, MeasureSpace
from .numrad import numerical_radius
from .operators import (
    INVERTIBILITY_EPS,
    MatrixOperator,
    MultiplicationOperator,
    adjoint,
    is_positive_operator,
    product_of_symbols,
)
from .spectral import operator_norm, operator_norm_method, perron_radius, spectral_radius

ZERO_LHS = 1e-12
IDENTITY_TOL = 1e-12
LEFT, RIGHT = "left", "right"


def _cpx(values) -> list:
    """[re, im] pairs, nested like the input; -0.0 is normalized to 0.0."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim > 1:
        return [_cpx(sub) for sub in arr]
    return [[float(z.real) + 0.0, float(z.imag) + 0.0] for z in arr.ravel()]


def serialize_matrix(A: MatrixOperator) -> dict:
    return {
        "n": A.n,
        "entries": _cpx(A.entries),
        "weights": A.space.weights.tolist(),
    }


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs_factors: list
    rhs_product: float
    margin_ratio: float
    satisfied: bool
    tolerance: float
    witnesses: dict = field(default_factory=dict)
    functionals_used: list = field(default_factory=list)
    infinite_margin: bool = False
    hypotheses_checked: bool = True
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, lhs, factors, tolerance=DEFAULT_TOL, witnesses=None, methods=None,
              hypotheses_checked=True, notes=None, extra=None) -> "InequalityReport":
        factors = [float(f) for f in factors]
        rhs = math.prod(factors)
        lhs = float(lhs)
        if lhs < ZERO_LHS:
            margin, inf_flag, ok = math.inf, True, True
        else:
            margin = rhs / lhs
            inf_flag = False
            ok = margin >= 1.0 - tolerance
        return cls(name, lhs, factors, rhs, margin, ok, tolerance, witnesses or {},
                   list(methods or []), inf_flag, hypotheses_checked, list(notes or []),
                   dict(extra or {}))

    @property
    def m(self) -> int:
        return len(self.rhs_factors)

    def _rechecked(self, checked: bool) -> "InequalityReport":
        self.hypotheses_checked = checked
        return self

    def recompute_satisfied(self) -> bool:
        if self.lhs < ZERO_LHS:
            return True
        return self.rhs_product / self.lhs >= 1.0 - self.tolerance

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "lhs": self.lhs,
            "rhsFactors": self.rhs_factors,
            "rhsProduct": self.rhs_product,
            "marginRatio": None if self.infinite_margin else self.margin_ratio,
            "infiniteMargin": self.infinite_margin,
            "satisfied": self.satisfied,
            "tolerance": self.tolerance,
            "hypothesesChecked": self.hypotheses_checked,
            "functionalsUsed": self.functionals_used,
            "witnesses": self.witnesses,
            "notes": self.notes,
        }
        d.update(self.extra)
        return d


def batch_summary(reports: Sequence[InequalityReport]) -> dict:
    finite = [r.margin_ratio for r in reports if not r.infinite_margin]
    sat = sum(1 for r in reports if r.satisfied)
    return {
        "total": len(reports),
        "satisfied": sat,
        "violated": len(reports) - sat,
        "minMarginRatio": min(finite) if finite else None,
    }


# -- hypothesis helpers -------------------------------------------------------

def _require(cond: bool, hypothesis: str, detail: str = ""):
    if not cond:
        raise PreconditionError(hypothesis, detail)


def _same_space(A: MatrixOperator, Ds: Sequence[MultiplicationOperator]):
    for D in Ds:
        if D.space != A.space:
            raise InputError("operator and multiplication operators act on different spaces")


def _check_side(side: str):
    if side not in (LEFT, RIGHT):
        raise InputError(f"side must be 'left' or 'right', got {side!r}")


def _products(A: MatrixOperator, Ds, side: str) -> list:
    a = A.entries
    if side == LEFT:
        return [MatrixOperator(A.space, D.symbol[:, None] * a) for D in Ds]
    return [MatrixOperator(A.space, a * D.symbol[None, :]) for D in Ds]


def _witness(A, Ds=None, **more) -> dict:
    w = {"A": serialize_matrix(A)}
    if Ds is not None:
        w["symbols"] = [_cpx(D.symbol) for D in Ds]
    w.update(more)
    return w


def _radius_fn(method: str) -> tuple[Callable, str]:
    if method == "gelfand":
        return (lambda B: spectral_radius(B).value), "gelfand-squaring"
    if method == "perron":
        return (lambda B: perron_radius(B).value), "perron-power-iteration"
    raise InputError(f"unknown spectral radius method {method!r}")


# -- spectral radius (Cohen) --------------------------------------------------

def check_cohen_spectral_multi(A: MatrixOperator, Ds: Sequence[MultiplicationOperator],
                               tol: float = DEFAULT_TOL, unchecked: bool = False,
                               method: str = "gelfand", name: str = "cohen-multi"
                               ) -> InequalityReport:
    """r(A)^m <= prod r(D_i A) for nonnegative A and positive D_i with D_1...D_m = I."""
    Ds = list(Ds)
    if not Ds:
        raise InputError("need at least one multiplication operator")
    _same_space(A, Ds)
    if not unchecked:
        _require(is_positive_operator(A), "A is a positive operator")
        for i, D in enumerate(Ds):
            _require(D.is_positive_symbol(), f"D_{i + 1} has a positive symbol")
        _require(product_of_symbols(Ds).equals_identity(IDENTITY_TOL), "D_1 ... D_m = I")
    radius, label = _radius_fn(method)
    r_a = radius(A)
    factors = [radius(B) for B in _products(A, Ds, LEFT)]
    return InequalityReport.build(name, r_a ** len(Ds), factors, tol, _witness(A, Ds),
                                  [label] * len(Ds), not unchecked)


def check_cohen_spectral(A: MatrixOperator, D: MultiplicationOperator, tol: float = DEFAULT_TOL,
                         unchecked: bool = False, method: str = "gelfand") -> InequalityReport:
    """r(A)^2 <= r(DA) r(D^-1 A) for nonnegative A and positive invertible D."""
    if not unchecked:
        _require(is_positive_operator(A), "A is a positive operator")
        _require(D.is_positive_symbol(), "D has a positive symbol")
        _require(D.is_invertible(INVERTIBILITY_EPS), "D is invertible")
    elif not D.is_invertible():
        raise InputError("D has a zero in its symbol and cannot be inverted")
    return check_cohen_spectral_multi(A, [D, D.inverse()], tol, unchecked=True,
                                      method=method, name="cohen")._rechecked(not unchecked)


# -- operator norm --------------------------------------------------------------

def check_norm_multi(A: MatrixOperator, Ds: Sequence[MultiplicationOperator], p=2,
                     side: str = LEFT, tol: float = DEFAULT_TOL, unchecked: bool = False,
                     name: str = "norm-multi") -> InequalityReport:
    """||A||^m <= prod ||D_i A|| (left) or prod ||A D_i|| (right) on L^p, D_1...D_m = I.

    The symbols may be arbitrary complex functions.
    """
    Ds = list(Ds)
    if not Ds:
        raise InputError("need at least one multiplication operator")
    _check_side(side)
    _same_space(A, Ds)
    p = Exponent.parse(p)
    if not unchecked:
        _require(product_of_symbols(Ds).equals_identity(IDENTITY_TOL), "D_1 ... D_m = I")
    lhs = operator_norm(A, p) ** len(Ds)
    factors = [operator_norm(B, p) for B in _products(A, Ds, side)]
    return InequalityReport.build(name, lhs, factors, tol,
                                  _witness(A, Ds, p=str(p), side=side),
                                  [operator_norm_method(p)] * len(Ds), not unchecked)


def check_norm_corollary(A: MatrixOperator, D: MultiplicationOperator, p=2, side: str = LEFT,
                         tol: float = DEFAULT_TOL, unchecked: bool = False) -> InequalityReport:
    """||A||^2 <= ||DA|| ||D^-1 A|| (left) or ||AD|| ||AD^-1|| (right)."""
    if not unchecked:
        _require(D.is_invertible(INVERTIBILITY_EPS), "D is invertible")
    elif not D.is_invertible():
        raise InputError("D has a zero in its symbol and cannot be inverted")
    return check_norm_multi(A, [D, D.inverse()], p, side, tol, unchecked=True,
                            name="norm-corollary")._rechecked(not unchecked)


# -- numerical radius -----------------------------------------------------------

def _numrad(B: MatrixOperator) -> float:
    return numerical_radius(B).value


def check_numrad_multi(A: MatrixOperator, Ds: Sequence[MultiplicationOperator], side: str = LEFT,
                       tol: float = DEFAULT_TOL, unchecked: bool = False,
                       name: str = "numrad-multi") -> InequalityReport:
    """w(A)^m <= prod w(D_i A) (left) or prod w(A D_i) (right).

    Needs A positive, each D_i with a nonnegative symbol and D_1...D_m >= I
    pointwise.  Zero entries in an individual symbol are allowed (the product
    condition keeps them off the support) and are flagged in ``notes``.
    """
    Ds = list(Ds)
    if not Ds:
        raise InputError("need at least one multiplication operator")
    _check_side(side)
    _same_space(A, Ds)
    notes = []
    if not unchecked:
        _require(is_positive_operator(A), "A is a positive operator")
        for i, D in enumerate(Ds):
            _require(D.is_positive_symbol(), f"D_{i + 1} has a positive symbol")
        _require(product_of_symbols(Ds).dominates_identity(IDENTITY_TOL), "D_1 ... D_m >= I")
    for i, D in enumerate(Ds):
        zeros = np.flatnonzero(D.symbol == 0)
        if zeros.size:
            notes.append(f"D_{i + 1} vanishes at atoms {zeros.tolist()}")
    lhs = _numrad(A) ** len(Ds)
    factors = [_numrad(B) for B in _products(A, Ds, side)]
    return InequalityReport.build(name, lhs, factors, tol, _witness(A, Ds, side=side),
                                  ["theta-sweep"] * len(Ds), not unchecked, notes)


def check_numrad_corollary(A: MatrixOperator, D: MultiplicationOperator, side: str = LEFT,
                           tol: float = DEFAULT_TOL, unchecked: bool = False) -> InequalityReport:
    """w(A)^2 <= w(DA) w(D^-1 A) (left) or w(AD) w(AD^-1) (right)."""
    if not unchecked:
        _require(is_positive_operator(A), "A is a positive operator")
        _require(D.is_positive_symbol(), "D has a positive symbol")
        _require(D.is_invertible(INVERTIBILITY_EPS), "D is invertible")
    elif not D.is_invertible():
        raise InputError("D has a zero in its symbol and cannot be inverted")
    return check_numrad_multi(A, [D, D.inverse()], side, tol, unchecked=True,
                              name="numrad-corollary")._rechecked(not unchecked)


def check_mixed_numrad(A: MatrixOperator, D: MultiplicationOperator, tol: float = DEFAULT_TOL,
                       unchecked: bool = False) -> InequalityReport:
    """w(A)^2 vs w(DA) w(AD^-1).  This mixed form is false in general."""
    _same_space(A, [D])
    if not unchecked:
        _require(is_positive_operator(A), "A is a positive operator")
        _require(D.is_positive_symbol(), "D has a positive symbol")
        _require(D.is_invertible(INVERTIBILITY_EPS), "D is invertible")
    elif not D.is_invertible():
        raise InputError("D has a zero in its symbol and cannot be inverted")
    Dinv = D.inverse()
    DA = _products(A, [D], LEFT)[0]
    ADinv = _products(A, [Dinv], RIGHT)[0]
    lhs = _numrad(A) ** 2
    factors = [_numrad(DA), _numrad(ADinv)]
    return InequalityReport.build("mixed", lhs, factors, tol,
                                  _witness(A, [D]), ["theta-sweep"] * 2, not unchecked)


# -- rank one -----------------------------------------------------------------

def rank_one_matrix(u: MeasurableFunction, v: MeasurableFunction) -> MatrixOperator:
    """Kernel of f -> <f, v> u under the weighted pairing: a_ij = u_i conj(v_j) w_j."""
    w = u.space.weights
    return MatrixOperator(u.space, np.outer(u.values, np.conj(v.values) * w))


def rank_one_cohen(u: MeasurableFunction, v: MeasurableFunction, phi: MeasurableFunction,
                   tol: float = DEFAULT_TOL, cross_tol: float = 1e-8,
                   cross_validate: bool = True) -> InequalityReport:
    """Cohen's inequality for A = u (x) v via closed-form integrals.

    r(A) = int uv, r(DA) = int phi uv, r(D^-1 A) = int uv/phi; unless
    ``cross_validate`` is off, each is also compared with the Gelfand spectral
    radius of the materialized kernel.
    """
    if u.space != v.space or u.space != phi.space:
        raise InputError("u, v and phi must live on the same space")
    if not (u.is_nonnegative() and v.is_nonnegative()):
        raise InputError("u and v must be nonnegative real functions")
    ph = phi.values
    if np.any(ph.imag != 0) or np.any(ph.real <= 0):
        raise InputError("phi must be strictly positive")
    w = u.space.weights
    uv = (u.values * v.values).real
    ph = ph.real
    r_a = float(np.dot(w, uv))
    r_da = float(np.dot(w, ph * uv))
    r_dinv_a = float(np.dot(w, uv / ph))

    witnesses = {
        "weights": w.tolist(),
        "u": _cpx(u.values),
        "v": _cpx(v.values),
        "phi": _cpx(phi.values),
    }
    if not cross_validate:
        return InequalityReport.build("rank-one", r_a ** 2, [r_da, r_dinv_a], tol, witnesses,
                                      ["closed-form", "closed-form"])
    A = rank_one_matrix(u, v)
    checks = {}
    for key, closed, sym in (("rA", r_a, np.ones_like(ph)), ("rDA", r_da, ph), ("rDinvA", r_dinv_a, 1.0 / ph)):
        mat = spectral_radius(MatrixOperator(A.space, sym[:, None] * A.entries)).value
        checks[key] = {"closedForm": closed, "materialized": mat}
    dev = max(abs(c["closedForm"] - c["materialized"]) for c in checks.values())
    return InequalityReport.build(
        "rank-one", r_a ** 2, [r_da, r_dinv_a], tol, witnesses,
        ["closed-form", "closed-form"],
        extra={
            "crossCheck": checks,
            "crossCheckMaxDeviation": dev,
            "crossCheckOk": bool(dev <= cross_tol),
        },
    )


# -- worked examples ----------------------------------------------------------

GOLDEN_TOL = 1e-8
GOLDEN_TOL_RADIUS = 1e-6


@dataclass
class Replication:
    target: str
    params: dict
    constants: list
    reports: list

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.constants)

    def mismatches(self) -> list:
        return [c for c in self.constants if not c["ok"]]

    def add(self, name: str, value, expected, tol: float):
        if isinstance(value, np.ndarray):
            ok = bool(np.abs(value - np.asarray(expected)).max() <= tol)
            value, expected = _cpx(value), _cpx(expected)
        else:
            value = float(value)
            ok = abs(value - expected) <= tol
        self.constants.append({"name": name, "value": value, "expected": expected,
                               "tol": tol, "ok": ok})

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "params": self.params,
            "ok": self.ok,
            "constants": self.constants,
            "reports": [r.to_dict() for r in self.reports],
        }


def replicate_example1(tol: float = DEFAULT_TOL) -> Replication:
    """A = [[1,1],[1,1]], D = diag(1,-1): the positivity of D cannot be dropped."""
    A = MatrixOperator.from_array([[1.0, 1.0], [1.0, 1.0]])
    D = MultiplicationOperator(A.space, [1.0, -1.0])
    DA = _products(A, [D], LEFT)[0]
    DinvA = _products(A, [D.inverse()], LEFT)[0]
    rep = Replication("example1", {}, [], [])
    rep.add("r(A)", spectral_radius(A).value, 2.0, GOLDEN_TOL)
    rep.add("w(A)", numerical_radius(A).value, 2.0, GOLDEN_TOL)
    rep.add("||A||_2", operator_norm(A, 2), 2.0, GOLDEN_TOL)
    rep.add("DA = D^-1 A", np.stack([DA.entries, DinvA.entries]),
            np.array([[[1, 1], [-1, -1]]] * 2, dtype=complex), 0.0)
    rep.add("||DA||_2", operator_norm(DA, 2), 2.0, GOLDEN_TOL)
    rep.add("w(DA)", numerical_radius(DA).value, 1.0, GOLDEN_TOL)
    rep.add("r(DA)", spectral_radius(DA).value, 0.0, GOLDEN_TOL_RADIUS)
    rep.reports.append(check_numrad_corollary(A, D, tol=tol, unchecked=True))
    rep.reports.append(check_cohen_spectral(A, D, tol=tol, unchecked=True))
    rep.reports.append(check_norm_corollary(A, D, p=2, tol=tol))
    # both counterexample reports must come out violated, the norm analogue must hold
    expected_verdicts = [False, False, True]
    for r, want in zip(rep.reports, expected_verdicts):
        rep.constants.append({"name": f"{r.name} satisfied", "value": r.satisfied,
                              "expected": want, "tol": 0.0, "ok": r.satisfied == want})
    return rep


def replicate_example2(d: float = 0.5, tol: float = DEFAULT_TOL) -> Replication:
    """A = [[0,1],[0,0]], D = diag(d,1), 0 < d < 1: the mixed inequality fails."""
    d = float(d)
    if not 0.0 < d < 1.0:
        raise InputError(f"d must lie in (0, 1), got {d}")
    A = MatrixOperator.from_array([[0.0, 1.0], [0.0, 0.0]])
    D = MultiplicationOperator(A.space, [d, 1.0])
    rep = Replication("example2", {"d": d}, [], [])
    rep.add("AD^-1", _products(A, [D.inverse()], RIGHT)[0].entries,
            np.array([[0, 1], [0, 0]], dtype=complex), 0.0)
    rep.add("w(A)", numerical_radius(A).value, 0.5, GOLDEN_TOL)
    rep.add("w(AD^-1)", numerical_radius(_products(A, [D.inverse()], RIGHT)[0]).value, 0.5,
            GOLDEN_TOL)
    rep.add("w(DA)", numerical_radius(_products(A, [D], LEFT)[0]).value, d / 2.0, GOLDEN_TOL)
    report = check_mixed_numrad(A, D, tol=tol)
    rep.reports.append(report)
    rep.add("mixed marginRatio", report.margin_ratio, d, GOLDEN_TOL)
    rep.constants.append({"name": "mixed satisfied", "value": report.satisfied,
                          "expected": False, "tol": 0.0, "ok": not report.satisfied})
    return rep


def replicate_rank_one(u=None, v=None, phi=None, weights=None,
                       tol: float = DEFAULT_TOL) -> Replication:
    """Rank-one case; defaults u = v = (1,1), phi = (2, 1/2) on the counting measure."""
    u = [1.0, 1.0] if u is None else u
    v = [1.0, 1.0] if v is None else v
    phi = [2.0, 0.5] if phi is None else phi
    space = MeasureSpace(np.ones(len(u)) if weights is None else weights)
    uf, vf, pf = (MeasurableFunction(space, x) for x in (u, v, phi))
    report = rank_one_cohen(uf, vf, pf, tol)
    rep = Replication("rank-one", {"u": _cpx(uf.values), "v": _cpx(vf.values),
                                   "phi": _cpx(pf.values), "weights": space.weights.tolist()},
                      [], [report])
    for key, c in report.extra["crossCheck"].items():
        rep.add(f"{key} closed form vs spectral radius", c["materialized"], c["closedForm"],
                GOLDEN_TOL)
    phi_const = bool(np.ptp(pf.values.real) == 0)
    if phi_const:
        rep.add("marginRatio (constant phi)", report.margin_ratio, 1.0, 1e-10)
    rep.constants.append({"name": "rank-one satisfied", "value": report.satisfied,
                          "expected": True, "tol": 0.0, "ok": report.satisfied})
    return rep
