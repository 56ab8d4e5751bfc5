"""Seeded randomized exploration of the inequalities.

Every trial draws its randomness from a stream derived only from
``(config.seed, trial_index)``::

    np.random.default_rng(np.random.SeedSequence(seed % 2**64, spawn_key=(index,)))

so results do not depend on worker count, chunking or which trials ran before.
Aggregation is a fold in trial-index order.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InputError
from .inequalities import (
    LEFT,
    RIGHT,
    InequalityReport,
    check_cohen_spectral,
    check_cohen_spectral_multi,
    check_mixed_numrad,
    check_norm_multi,
    check_numrad_multi,
    rank_one_cohen,
)
from .measure import Exponent, MeasurableFunction, MeasureSpace
from .operators import MatrixOperator, MultiplicationOperator
from .spectral import spectral_radius_array

TARGETS = ("normLeft", "normRight", "numradLeft", "numradRight", "cohenMulti")
SUITES = {
    "norm-left": "normLeft",
    "norm-right": "normRight",
    "numrad-left": "numradLeft",
    "numrad-right": "numradRight",
    "cohen-multi": "cohenMulti",
    "open-question": "openQuestion",
    "mixed-region": "mixedRegion",
}
DEFAULT_TOLERANCE = {
    "normLeft": 1e-9,
    "normRight": 1e-9,
    "numradLeft": 1e-6,
    "numradRight": 1e-6,
    "cohenMulti": 1e-9,
    "openQuestion": 1e-7,
    "mixedRegion": 1e-9,
}
CONSTRAINTS = ("productIdentity", "productDominatesIdentity", "unconstrained")
OPEN_QUESTION_SKIP = 1e-8
OPEN_QUESTION_NOTE = (
    "finite-dimensional evidence only: on a finite discrete space a positive operator is a "
    "nonnegative matrix, where r(A)^2 <= r(DA) r(D^-1 A) is already a theorem; no run of "
    "this suite can settle the question for general L^2 spaces"
)
# shape mix for nonnegative operators, indexed by trial % 20 (40/30/15/15)
_SHAPES = ["dense"] * 8 + ["sparse"] * 6 + ["rank-one"] * 3 + ["near-nilpotent"] * 3
SPARSE_DENSITY = 0.2
CROSS_CHECK_EVERY = 25


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    trials: int = 1000
    n_min: int = 2
    n_max: int = 6
    entry_scale: float = 1.0
    diagonal_log_range: float = 2.0
    density: float = 1.0
    m: int = 2
    m_min: Optional[int] = None
    p: str = "2"
    tolerance: Optional[float] = None
    weighted: bool = True
    identity_family: bool = False
    max_witnesses: int = 100

    def __post_init__(self):
        if self.trials < 1:
            raise InputError("trials must be a positive integer")
        if not 1 <= self.n_min <= self.n_max:
            raise InputError("dimension range must satisfy 1 <= n_min <= n_max")
        if self.m < 1 or (self.m_min is not None and not 1 <= self.m_min <= self.m):
            raise InputError("factor count range must satisfy 1 <= m_min <= m")
        if not 0.0 < self.density <= 1.0:
            raise InputError("density must lie in (0, 1]")
        if self.entry_scale <= 0 or self.diagonal_log_range <= 0:
            raise InputError("entry scale and diagonal log range must be positive")
        if self.tolerance is not None and self.tolerance < 0:
            raise InputError("tolerance must be nonnegative")
        object.__setattr__(self, "p", str(Exponent.parse(self.p)))

    def tolerance_for(self, target: str) -> float:
        return DEFAULT_TOLERANCE[target] if self.tolerance is None else self.tolerance

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "dimRange": [self.n_min, self.n_max],
            "entryScale": self.entry_scale,
            "diagonalLogRange": self.diagonal_log_range,
            "density": self.density,
            "m": self.m,
            "mMin": self.m_min,
            "p": self.p,
            "tolerance": self.tolerance,
            "weighted": self.weighted,
            "identityFamily": self.identity_family,
            "maxWitnesses": self.max_witnesses,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FuzzConfig":
        d = dict(d)
        if "dimRange" in d:
            d["n_min"], d["n_max"] = d.pop("dimRange")
        renames = {"entryScale": "entry_scale", "diagonalLogRange": "diagonal_log_range",
                   "mMin": "m_min", "identityFamily": "identity_family",
                   "maxWitnesses": "max_witnesses"}
        for old, new in renames.items():
            if old in d:
                d[new] = d.pop(old)
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed % 2 ** 64, spawn_key=(index,)))


def _rng(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return np.random.default_rng(stream)


def _open_unit(rng, size) -> np.ndarray:
    return 1.0 - rng.random(size)  # uniform on (0, 1]


def generate_nonnegative_operator(stream_seed, n: int, density: float = 1.0, scale: float = 1.0,
                                  space: Optional[MeasureSpace] = None) -> MatrixOperator:
    """Entries are 0 with probability 1 - density, else uniform on (0, scale]."""
    if n < 1:
        raise InputError("n must be at least 1")
    rng = _rng(stream_seed)
    mask = rng.random((n, n)) < density
    vals = scale * _open_unit(rng, (n, n))
    space = MeasureSpace.counting(n) if space is None else space
    return MatrixOperator(space, np.where(mask, vals, 0.0))


def generate_positive_diagonal_family(stream_seed, n: int, m: int, log_range: float = 2.0,
                                      constraint: str = "productIdentity",
                                      space: Optional[MeasureSpace] = None
                                      ) -> list[MultiplicationOperator]:
    """m positive symbols drawn log-uniform in [e^-range, e^range], then constrained."""
    if m < 1:
        raise InputError("m must be at least 1")
    if constraint not in CONSTRAINTS:
        raise InputError(f"unknown constraint {constraint!r}")
    rng = _rng(stream_seed)
    space = MeasureSpace.counting(n) if space is None else space
    syms = np.exp(rng.uniform(-log_range, log_range, (m, n)))
    if constraint == "productIdentity":
        syms[-1] = 1.0 / np.prod(syms[:-1], axis=0)
    elif constraint == "productDominatesIdentity":
        syms[-1] = syms[-1] * np.maximum(1.0, 1.0 / np.prod(syms, axis=0))
    return [MultiplicationOperator(space, s) for s in syms]


def _space(config: FuzzConfig, rng, n: int) -> MeasureSpace:
    if not config.weighted:
        return MeasureSpace.counting(n)
    return MeasureSpace(np.exp(rng.uniform(-1.0, 1.0, n)))


def _shaped_nonnegative(config: FuzzConfig, rng, index: int, n: int, space: MeasureSpace):
    shape = _SHAPES[index % len(_SHAPES)]
    s = config.entry_scale
    if shape == "dense":
        A = generate_nonnegative_operator(rng, n, config.density, s, space)
    elif shape == "sparse":
        A = generate_nonnegative_operator(rng, n, SPARSE_DENSITY, s, space)
    elif shape == "rank-one":
        u = s * _open_unit(rng, n)
        v = _open_unit(rng, n)
        A = MatrixOperator(space, np.outer(u, v))
    else:
        eps = 10.0 ** rng.uniform(-6.0, -2.0)
        upper = np.triu(s * _open_unit(rng, (n, n)), 1)
        lower = np.tril(s * eps * _open_unit(rng, (n, n)))
        A = MatrixOperator(space, upper + lower)
    return shape, A


def _family(config, rng, n, m, constraint, space):
    if config.identity_family:
        return [MultiplicationOperator.identity(space) for _ in range(m)]
    return generate_positive_diagonal_family(rng, n, m, config.diagonal_log_range, constraint, space)


def _m(config: FuzzConfig, rng) -> int:
    lo = config.m if config.m_min is None else config.m_min
    return int(rng.integers(lo, config.m + 1))


class TrialOutcome(NamedTuple):
    index: int
    margin: Optional[float]  # None: infinite margin or skipped
    violated: bool
    skipped: bool
    family: str
    checks: dict


def _trial(config: FuzzConfig, target: str, index: int):
    """Run one trial; returns (TrialOutcome, InequalityReport or None)."""
    rng = trial_rng(config.seed, index)
    n = int(rng.integers(config.n_min, config.n_max + 1))
    tol = config.tolerance_for(target)
    checks: dict = {}
    family = "default"

    if target in ("normLeft", "normRight"):
        m = _m(config, rng)
        space = _space(config, rng, n)
        s = config.entry_scale
        A = MatrixOperator(space, s * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))))
        if config.identity_family:
            Ds = [MultiplicationOperator.identity(space) for _ in range(m)]
        else:
            moduli = generate_positive_diagonal_family(rng, n, m, config.diagonal_log_range,
                                                       "productIdentity", space)
            phases = rng.uniform(0.0, 2.0 * math.pi, (m, n))
            phases[-1] = -phases[:-1].sum(axis=0)
            Ds = [MultiplicationOperator(space, D.symbol * np.exp(1j * ph))
                  for D, ph in zip(moduli, phases)]
        side = LEFT if target == "normLeft" else RIGHT
        report = check_norm_multi(A, Ds, config.p, side, tol)

    elif target in ("numradLeft", "numradRight"):
        m = _m(config, rng)
        space = _space(config, rng, n)
        family, A = _shaped_nonnegative(config, rng, index, n, space)
        Ds = _family(config, rng, n, m, "productDominatesIdentity", space)
        side = LEFT if target == "numradLeft" else RIGHT
        report = check_numrad_multi(A, Ds, side, tol)

    elif target == "cohenMulti":
        m = _m(config, rng)
        space = _space(config, rng, n)
        family, A = _shaped_nonnegative(config, rng, index, n, space)
        Ds = _family(config, rng, n, m, "productIdentity", space)
        report = check_cohen_spectral_multi(A, Ds, tol)

    elif target == "openQuestion":
        space = _space(config, rng, n)
        family, A = _shaped_nonnegative(config, rng, index, n, space)
        (D,) = _family(config, rng, n, 1, "unconstrained", space)
        report = check_cohen_spectral(A, D, tol, method="perron")
        if report.lhs <= OPEN_QUESTION_SKIP ** 2:
            return TrialOutcome(index, None, False, True, family, checks), report
        if index % CROSS_CHECK_EVERY == 0:
            mats = [A.entries, D.symbol[:, None] * A.entries, A.entries / D.symbol[:, None]]
            perron = [math.sqrt(report.lhs)] + report.rhs_factors
            gel = [spectral_radius_array(a)[0] for a in mats]
            checks["perronVsGelfand"] = max(
                abs(x - y) / max(abs(y), 1e-300) for x, y in zip(perron, gel))
        if family == "rank-one":
            u, v = _rank_one_factors(A)
            closed = rank_one_cohen(MeasurableFunction(space, u),
                                    MeasurableFunction(space, v / space.weights),
                                    MeasurableFunction(space, D.symbol), cross_validate=False)
            checks["rankOneClosedForm"] = abs(closed.margin_ratio - report.margin_ratio)

    elif target == "mixedRegion":
        sub = index % 10
        if sub == 0:
            family = "example2"
            d = float(_open_unit(rng, 1)[0]) * 0.999999
            A = MatrixOperator.from_array([[0.0, 1.0], [0.0, 0.0]])
            D = MultiplicationOperator(A.space, [d, 1.0])
        else:
            space = _space(config, rng, n)
            shape, A = _shaped_nonnegative(config, rng, index, n, space)
            if sub == 1:
                family = "identity"
                D = MultiplicationOperator.identity(space)
            else:
                family = "general-" + shape
                (D,) = _family(config, rng, n, 1, "unconstrained", space)
        report = check_mixed_numrad(A, D, tol)

    else:
        raise InputError(f"unknown fuzz target {target!r}")

    margin = None if report.infinite_margin else report.margin_ratio
    return TrialOutcome(index, margin, not report.satisfied, False, family, checks), report


def _rank_one_factors(A: MatrixOperator):
    # rank-one shape is outer(u, v); recover factors up to scale from a nonzero column/row
    a = A.entries.real
    i, j = np.unravel_index(int(np.argmax(a)), a.shape)
    return a[:, j], a[i, :] / a[i, j]


def _run_chunk(args):
    config, target, indices = args
    return [_trial(config, target, i)[0] for i in indices]


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("COHENLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"COHENLAB_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _outcomes(config: FuzzConfig, target: str, workers: int) -> list[TrialOutcome]:
    indices = range(config.trials)
    if workers <= 1 or config.trials < 2 * workers:
        return [_trial(config, target, i)[0] for i in indices]
    size = math.ceil(config.trials / (workers * 4))
    chunks = [(config, target, list(indices[k:k + size])) for k in range(0, config.trials, size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out = []
        for part in pool.map(_run_chunk, chunks):
            out.extend(part)
    return out


@dataclass
class FuzzResult:
    suite: str
    config: FuzzConfig
    trials_run: int
    skipped: int
    violation_count: int
    violations: list
    min_margin_ratio: Optional[float]
    arg_min: Optional[dict]
    expectation: str
    outcome_matches_expectation: bool
    families: dict = field(default_factory=dict)
    cross_checks: dict = field(default_factory=dict)
    note: str = ""
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "config": self.config.to_dict(),
            "tolerance": self.config.tolerance_for(self.suite),
            "trialsRun": self.trials_run,
            "skipped": self.skipped,
            "violationCount": self.violation_count,
            "violations": self.violations,
            "minMarginRatio": self.min_margin_ratio,
            "argMin": self.arg_min,
            "expectation": self.expectation,
            "outcomeMatchesExpectation": self.outcome_matches_expectation,
            "families": self.families,
            "crossChecks": self.cross_checks,
            "note": self.note,
            "wallTime": self.wall_time,
        }


def _entry(index: int, report: InequalityReport) -> dict:
    return {"trial": index, "report": report.to_dict()}


def _aggregate(config: FuzzConfig, target: str, outcomes: Sequence[TrialOutcome],
               expect_violations: bool, note: str, t0: float) -> FuzzResult:
    skipped = sum(o.skipped for o in outcomes)
    violating = [o.index for o in outcomes if o.violated]
    best = None
    for o in outcomes:
        if o.margin is not None and (best is None or o.margin < best.margin):
            best = o
    families: dict = {}
    for o in outcomes:
        fam = families.setdefault(o.family, {"trials": 0, "violations": 0, "skipped": 0})
        fam["trials"] += 1
        fam["violations"] += int(o.violated)
        fam["skipped"] += int(o.skipped)
    cross: dict = {}
    for o in outcomes:
        for k, v in o.checks.items():
            c = cross.setdefault(k, {"count": 0, "maxDeviation": 0.0})
            c["count"] += 1
            c["maxDeviation"] = max(c["maxDeviation"], v)
    # witnesses are rebuilt by replaying the trial: each trial depends only on its index
    violations = [_entry(i, _trial(config, target, i)[1]) for i in violating[:config.max_witnesses]]
    arg_min = None
    if best is not None:
        arg_min = {"trial": best.index, "marginRatio": best.margin,
                   "report": _trial(config, target, best.index)[1].to_dict()}
    found = len(violating) > 0
    return FuzzResult(
        suite=target,
        config=config,
        trials_run=len(outcomes),
        skipped=skipped,
        violation_count=len(violating),
        violations=violations,
        min_margin_ratio=None if best is None else best.margin,
        arg_min=arg_min,
        expectation="violations" if expect_violations else "no-violations",
        outcome_matches_expectation=found if expect_violations else not found,
        families=families,
        cross_checks=cross,
        note=note,
        wall_time=time.perf_counter() - t0,
    )


def fuzz_theorem_suite(config: FuzzConfig, target: str, workers: Optional[int] = None) -> FuzzResult:
    if target not in TARGETS:
        raise InputError(f"unknown theorem target {target!r}; choose from {TARGETS}")
    t0 = time.perf_counter()
    outcomes = _outcomes(config, target, resolve_workers(workers))
    return _aggregate(config, target, outcomes, False, "", t0)


def fuzz_open_question(config: FuzzConfig, workers: Optional[int] = None) -> FuzzResult:
    """r(A)^2 vs r(DA) r(D^-1 A) for random nonnegative A and positive diagonal D.

    Trials with r(A) <= 1e-8 are skipped.  Every 25th trial recomputes the three
    spectral radii by the Gelfand route; rank-one trials are compared with the
    closed-form integrals.
    """
    t0 = time.perf_counter()
    outcomes = _outcomes(config, "openQuestion", resolve_workers(workers))
    return _aggregate(config, "openQuestion", outcomes, False, OPEN_QUESTION_NOTE, t0)


def fuzz_mixed_violation_region(config: FuzzConfig, workers: Optional[int] = None) -> FuzzResult:
    """Sample w(A)^2 vs w(DA) w(AD^-1); violations are expected.

    One trial in ten is drawn from the two-by-two nilpotent family
    A = [[0,1],[0,0]], D = diag(d,1), one in ten uses D = I, the rest are general.
    """
    t0 = time.perf_counter()
    outcomes = _outcomes(config, "mixedRegion", resolve_workers(workers))
    return _aggregate(config, "mixedRegion", outcomes, True, "", t0)


def run_suite(name: str, config: FuzzConfig, workers: Optional[int] = None) -> FuzzResult:
    if name not in SUITES:
        raise InputError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    target = SUITES[name]
    if target == "openQuestion":
        return fuzz_open_question(config, workers)
    if target == "mixedRegion":
        return fuzz_mixed_violation_region(config, workers)
    return fuzz_theorem_suite(config, target, workers)


def replay(suite: str, report: dict) -> InequalityReport:
    """Re-run a stored report's checker from its serialized witness."""
    from .serialize import matrix_from_json, complex_vector

    target = SUITES.get(suite, suite)
    w = report["witnesses"]
    A = matrix_from_json(w["A"])
    Ds = [MultiplicationOperator(A.space, complex_vector(s)) for s in w.get("symbols", [])]
    tol = report["tolerance"]
    if target in ("normLeft", "normRight"):
        return check_norm_multi(A, Ds, w["p"], w["side"], tol)
    if target in ("numradLeft", "numradRight"):
        return check_numrad_multi(A, Ds, w["side"], tol)
    if target == "cohenMulti":
        return check_cohen_spectral_multi(A, Ds, tol)
    if target == "openQuestion":
        return check_cohen_spectral(A, Ds[0], tol, method="perron")
    if target == "mixedRegion":
        return check_mixed_numrad(A, Ds[0], tol)
    raise InputError(f"cannot replay suite {suite!r}")
