"""Spectral radius and operator norms on weighted L^p spaces.

No general-purpose eigensolver is used: the 2-norm comes from power iteration
on A^H A, the spectral radius from the Gelfand formula evaluated by repeated
squaring, and the Perron root from a shifted power iteration.
"""
from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError, UnsupportedExponentError
from .measure import Exponent
from .operators import MatrixOperator, is_positive_operator, unweighted_entries

NORM_TOL = 1e-12
NORM_MAX_ITER = 100_000
MAX_SQUARINGS = 60


@dataclass(frozen=True)
class ConvergenceReport:
    value: float
    iterations: int
    residual: float
    converged: bool
    method: str = ""
    lower_bound: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lowerBound"] = d.pop("lower_bound")
        return d


@functools.lru_cache(maxsize=64)
def _start_vector(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    v = np.ones(n) + 1e-2 * k / n + 1e-2j * np.cos(k)
    v = v / np.linalg.norm(v)
    v.setflags(write=False)
    return v


def start_vector(n: int) -> np.ndarray:
    """Deterministic start: all-ones plus a fixed small complex perturbation."""
    return _start_vector(n)


def _vnorm(v: np.ndarray) -> float:
    return math.sqrt(np.vdot(v, v).real)


def top_eigen_psd(m: np.ndarray, tol: float = NORM_TOL, max_iter: int = NORM_MAX_ITER):
    """Largest eigenvalue of a Hermitian PSD matrix by power iteration.

    Stops when the relative Rayleigh residual drops below ``tol`` or when a
    geometric extrapolation of the remaining Rayleigh-quotient increase does;
    the reported residual is whichever of the two triggered the stop.
    Returns (eigenvalue, eigenvector, iterations, relative residual, converged).
    """
    n = m.shape[0]
    if not np.any(m):
        return 0.0, start_vector(n), 0, 0.0, True
    v = start_vector(n)
    lam_prev = None
    step_prev = None
    resid = math.inf
    for it in range(1, max_iter + 1):
        y = m @ v
        lam = float(np.vdot(v, y).real)
        ynorm = _vnorm(y)
        if ynorm == 0.0:
            # start vector fell in the kernel; restart on the heaviest column
            v = np.zeros(n, dtype=complex)
            v[int(np.argmax(np.abs(m).sum(axis=0)))] = 1.0
            continue
        resid = _vnorm(y - lam * v) / max(lam, 1e-300)
        if resid <= tol:
            return lam, y / ynorm, it, resid, True
        if lam_prev is not None:
            step = lam - lam_prev
            if step_prev is not None and step_prev > 0 and 0 <= step < step_prev:
                q = step / step_prev
                remaining = step * q / (1.0 - q) / lam
                if remaining <= tol:
                    return lam, y / ynorm, it, remaining, True
            step_prev = step
        lam_prev = lam
        v = y / ynorm
    return lam, v, max_iter, resid, False


def _norm2_array(a: np.ndarray, tol: float = NORM_TOL):
    lam, _, it, resid, ok = top_eigen_psd(a.conj().T @ a, tol)
    return math.sqrt(max(lam, 0.0)), it, resid, ok


def norm2_report(A: MatrixOperator, tol: float = NORM_TOL) -> ConvergenceReport:
    a = unweighted_entries(A.entries, np.sqrt(A.space.weights))
    val, it, resid, ok = _norm2_array(a, tol)
    return ConvergenceReport(val, it, resid, ok, "power-iteration")


def norm1_weighted(a: np.ndarray, w: np.ndarray) -> float:
    return float(np.max((w @ np.abs(a)) / w))


def norm_inf(a: np.ndarray) -> float:
    return float(np.max(np.abs(a).sum(axis=1)))


def operator_norm(A: MatrixOperator, p) -> float:
    """Exact operator norm of A on L^p(mu) for p in {1, 2, inf}."""
    p = Exponent.parse(p)
    if p.is_infinite:
        return norm_inf(A.entries)
    if p.value == 1.0:
        return norm1_weighted(A.entries, A.space.weights)
    if p.value == 2.0:
        return norm2_report(A).value
    raise UnsupportedExponentError(
        f"no exact operator norm for p={p}; use operator_norm_estimate for 1 < p < inf"
    )


def operator_norm_method(p) -> str:
    p = Exponent.parse(p)
    return "power-iteration" if p.value == 2.0 else "closed-form"


def _dual(y: np.ndarray, p: float) -> np.ndarray:
    """Unit vector in l^q pairing with y to give ||y||_p."""
    mod = np.abs(y)
    top = mod.max()
    if top == 0:
        return np.zeros_like(y)
    scaled = mod / top
    phase = np.where(mod > 0, y / np.where(mod > 0, mod, 1), 0)
    u = scaled ** (p - 1) * phase
    nrm = np.sum(scaled ** p) ** ((p - 1) / p)
    return u / nrm


def _lp(y: np.ndarray, p: float) -> float:
    mod = np.abs(y)
    top = mod.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((mod / top) ** p) ** (1 / p))


def _boyd(ahat: np.ndarray, p: float, x: np.ndarray, tol: float, max_iter: int):
    q = p / (p - 1)
    x = x / _lp(x, p)
    best = _lp(ahat @ x, p)
    for it in range(1, max_iter + 1):
        y = ahat @ x
        if not np.any(y):
            return best, it, False
        z = ahat.conj().T @ _dual(y, p)
        if not np.any(z):
            return best, it, False
        x = _dual(z, q)
        val = _lp(ahat @ x, p)
        if abs(val - best) <= tol * max(val, 1e-300):
            return max(val, best), it, True
        best = max(best, val)
    return best, max_iter, False


def operator_norm_estimate(A: MatrixOperator, p, restarts: int = 8, seed: int = 0,
                           tol: float = 1e-13, max_iter: int = 2000) -> ConvergenceReport:
    """Lower bound on ||A||_p for 1 < p < inf by nonlinear power iteration.

    Alternates A with the duality maps of l^p and l^q (Boyd's method) from the
    deterministic start and ``restarts`` seeded random starts; the best value
    is reported and is only ever a lower bound.
    """
    p = Exponent.parse(p)
    if p.is_infinite or p.value <= 1.0:
        raise InputError("operator_norm_estimate needs 1 < p < inf")
    scale = A.space.weights ** (1.0 / p.value)
    ahat = A.entries * scale[:, None] / scale[None, :]
    rng = np.random.default_rng(seed)
    starts = [start_vector(A.n)]
    for _ in range(restarts):
        starts.append(rng.standard_normal(A.n) + 1j * rng.standard_normal(A.n))
    best, best_it, best_ok, total = -1.0, 0, False, 0
    for x0 in starts:
        val, it, ok = _boyd(ahat, p.value, x0, tol, max_iter)
        total += it
        if val > best:
            best, best_it, best_ok = val, it, ok
    return ConvergenceReport(best, total, 0.0, best_ok, "boyd-power-iteration", lower_bound=True)


def spectral_radius_array(a: np.ndarray, tol: float = 1e-12):
    """Gelfand formula by repeated squaring on a raw matrix.

    B_0 = A, B_{k+1} = (B_k / s_k)^2 with s_k = ||B_k||_2, so that
    ||A^(2^k)||^(2^-k) = exp(sum_j 2^-j log s_j).  The residual is the last
    change in the estimate relative to max(1, r).
    """
    b = np.array(a, dtype=complex)
    log_acc = 0.0
    r_prev = None
    r = 0.0
    for k in range(MAX_SQUARINGS + 1):
        s, _, _, _ = _norm2_array(b)
        if s == 0.0:
            return 0.0, k, 0.0, True
        log_acc += math.log(s) / 2.0 ** k
        r = math.exp(log_acc)
        if r_prev is not None:
            diff = abs(r - r_prev) / max(1.0, r_prev)
            if diff <= tol:
                return r, k, diff, True
        r_prev = r
        b = b / s
        b = b @ b
    return r, MAX_SQUARINGS, abs(r - r_prev) / max(1.0, r_prev), False


def spectral_radius(A: MatrixOperator, tol: float = 1e-12) -> ConvergenceReport:
    if tol <= 0:
        raise InputError("tolerance must be positive")
    # the spectrum ignores the weights; the similarity only balances the norms
    a = unweighted_entries(A.entries, np.sqrt(A.space.weights))
    val, it, resid, ok = spectral_radius_array(a, tol)
    return ConvergenceReport(val, it, resid, ok, "gelfand-squaring")


def perron_radius_array(a: np.ndarray, tol: float = 1e-12, max_steps: int = 100):
    """Perron root of a nonnegative real matrix.

    Power iteration on A + delta*I from the all-ones vector; the shift breaks
    periodicity.  Each round advances the iterate by the current power of the
    shifted matrix and then squares that power, so round k has applied
    (A + delta*I)^(2^k - 1).  Convergence is declared when the Collatz-Wielandt
    bracket min_i (Mx)_i/x_i <= r <= max_i (Mx)_i/x_i closes to ``tol``
    relative.  If the iterate reaches a floating-point fixed point first the
    best estimate is returned with converged=False; the bracket width (the
    residual) is then typically near eps/delta, about 1e-8 relative.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    top = float(a.max()) if a.size else 0.0
    if top <= 0.0:
        return 0.0, 0, 0.0, True
    delta = 1e-8 * top
    m0 = a + delta * np.eye(n)
    m = m0 / top
    x = np.full(n, 1.0 / n)
    lam = 0.0
    gap = math.inf
    for k in range(1, max_steps + 1):
        y = m0 @ x
        lam = float(y.sum() / x.sum())
        # coordinates this small belong to dominated blocks
        pos = x > 1e-13 * x.max()
        ratios = y[pos] / x[pos]
        gap = float(ratios.max() - ratios.min()) / lam
        if gap <= tol:
            return max(lam - delta, 0.0), k, gap, True
        x_next = m @ x
        x_next = x_next / x_next.sum()
        if np.abs(x_next - x).max() <= 1e-15:
            # floating-point fixed point: the bracket cannot close any further
            return max(lam - delta, 0.0), k, gap, gap <= tol
        x = x_next
        m = m @ m
        m = m / m.max()
    return max(lam - delta, 0.0), max_steps, gap, False


def perron_radius(A: MatrixOperator, tol: float = 1e-12) -> ConvergenceReport:
    if not is_positive_operator(A):
        raise InputError("perron_radius needs an entrywise nonnegative operator")
    val, it, resid, ok = perron_radius_array(A.entries.real, tol)
    return ConvergenceReport(val, it, resid, ok, "perron-power-iteration")
