"""Numerical radius on weighted L^2.

The general route uses w(A) = max_theta lambda_max(H(theta)), where
H(theta) = (e^{i theta} A + (e^{i theta} A)^*)/2 is taken after moving A to
the unweighted coordinates W^{1/2} A W^{-1/2}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .measure import MeasurableFunction, MeasureSpace
from .operators import (
    MatrixOperator,
    is_positive_operator,
    similarity_to_unweighted,
    unweighted_entries,
)
from .spectral import _norm2_array, start_vector

GRID_POINTS = 720
THETA_TOL = 1e-10
LAMBDA_TOL = 1e-15
MAX_ROUNDS = 64
SHIFT_FACTOR = 1.0 + 2.0 ** -10
TWO_PI = 2.0 * math.pi
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RadiusResult:
    value: float
    arg_theta: float
    witness: MeasurableFunction
    method: str
    miss_bound: Optional[float] = None
    witness_value: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argTheta": self.arg_theta,
            "witness": [[z.real, z.imag] for z in self.witness.values],
            "witnessValue": self.witness_value,
            "method": self.method,
            "lipschitzMissBound": self.miss_bound,
        }


def hermitian_part(A: MatrixOperator, theta: float) -> MatrixOperator:
    """H(theta) of the unweighted similarity of A, on the counting measure."""
    at = similarity_to_unweighted(A).entries
    z = np.exp(1j * theta) * at
    return MatrixOperator(MeasureSpace.counting(A.n), (z + z.conj().T) / 2.0)


def _lambda_max_batch(h: np.ndarray, tol: float = LAMBDA_TOL, x0: Optional[np.ndarray] = None):
    """Top eigenpairs of a stack of Hermitian matrices, shape (..., n, n).

    Power iteration on H + s*I with s = (1 + 2^-10) ||H||_inf, which makes the
    shifted matrix positive definite (s = ||H||_inf alone leaves it zero when
    H = -||H|| I, and the iterate would vanish).  Each round advances the iterate by the
    current power of the shifted matrix and then squares that power, so the
    number of rounds grows only logarithmically in the eigenvalue gap.
    ``x0`` overrides the deterministic start vector (warm starts).
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim == 2:
        lam, x = _lambda_max_single(h, tol, x0)
        return np.array(lam), x
    n = h.shape[-1]
    shift = SHIFT_FACTOR * np.abs(h).sum(axis=-1).max(axis=-1)
    if not np.all(shift > 0):
        # zero matrices would stall the normalization; solve the rest and patch
        lam = np.zeros(h.shape[:-2])
        x = np.broadcast_to(start_vector(n), h.shape[:-1]).copy()
        nz = shift > 0
        if np.any(nz):
            lam[nz], x[nz] = _lambda_max_batch(h[nz], tol, x0)
        return lam, x
    m0 = h + shift[..., None, None] * np.eye(n)
    scale = np.where(shift > 0, 2.0 * shift, 1.0)
    m = m0 / scale[..., None, None]
    start = start_vector(n) if x0 is None else x0
    x = np.broadcast_to(start, h.shape[:-1]).copy()
    rho_prev = None
    for _ in range(MAX_ROUNDS):
        y = np.einsum("...ij,...j->...i", m0, x)
        rho = np.einsum("...i,...i->...", x.conj(), y).real
        if rho_prev is not None and np.all(
            np.abs(rho - rho_prev) <= tol * np.maximum(np.abs(rho), shift)
        ):
            break
        rho_prev = rho
        x = np.einsum("...ij,...j->...i", m, x)
        x = x / np.linalg.norm(x, axis=-1, keepdims=True)
        m = m @ m
        m = m / np.abs(m).max(axis=(-2, -1), keepdims=True)
    return rho - shift, x


def _lambda_max_single(h: np.ndarray, tol: float, x0: Optional[np.ndarray]):
    n = h.shape[0]
    shift = SHIFT_FACTOR * float(np.abs(h).sum(axis=1).max())
    if shift == 0.0:
        return 0.0, start_vector(n)
    m0 = h + shift * np.eye(n)
    m = m0 / (2.0 * shift)
    x = start_vector(n) if x0 is None else x0 / np.linalg.norm(x0)
    rho_prev = None
    rho = 0.0
    for _ in range(MAX_ROUNDS):
        y = m0 @ x
        rho = float(np.vdot(x, y).real)
        if rho_prev is not None and abs(rho - rho_prev) <= tol * max(abs(rho), shift):
            break
        rho_prev = rho
        x = m @ x
        x = x / np.linalg.norm(x)
        m = m @ m
        m = m / np.abs(m).max()
    return rho - shift, x


def lambda_max_hermitian(H, tol: float = LAMBDA_TOL) -> float:
    h = H.entries if isinstance(H, MatrixOperator) else np.asarray(H, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InputError("expected a square matrix")
    if np.abs(h - h.conj().T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(h).max(initial=0.0)):
        raise InputError("matrix is not Hermitian to 1e-12")
    lam, _ = _lambda_max_batch(h, tol)
    return float(lam)


class _ThetaProfile:
    """g(theta) = lambda_max(cos(theta) Re + sin(theta) Im) for a fixed matrix."""

    def __init__(self, at: np.ndarray):
        self.re = (at + at.conj().T) / 2.0
        self.im = 1j * (at - at.conj().T) / 2.0
        self.warm = None

    def stack(self, thetas: np.ndarray) -> np.ndarray:
        c = np.cos(thetas)[:, None, None]
        s = np.sin(thetas)[:, None, None]
        return c * self.re + s * self.im

    def values(self, thetas: np.ndarray):
        return _lambda_max_batch(self.stack(np.asarray(thetas, dtype=float)))

    def at(self, theta: float) -> float:
        h = math.cos(theta) * self.re + math.sin(theta) * self.im
        lam, self.warm = _lambda_max_single(h, LAMBDA_TOL, self.warm)
        return lam


def _golden_max(g, lo: float, hi: float, tol: float):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - _GOLDEN * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _GOLDEN * (b - a)
            gd = g(d)
    return (c, gc) if gc >= gd else (d, gd)


def numerical_radius(A: MatrixOperator, tol: float = THETA_TOL) -> RadiusResult:
    """w(A) by a 720-point theta sweep followed by golden-section refinement.

    The grid step bounds how far the sweep alone can miss the maximum by
    ||A||_2 * pi / 720; that bound is returned as ``miss_bound``.
    """
    if tol <= 0:
        raise InputError("tolerance must be positive")
    sw = np.sqrt(A.space.weights)
    at = unweighted_entries(A.entries, sw)
    prof = _ThetaProfile(at)
    step = TWO_PI / GRID_POINTS
    grid = np.arange(GRID_POINTS) * step
    gvals, gvecs = prof.values(grid)
    j = int(np.argmax(gvals))  # first maximum: deterministic tie-break on smaller theta
    best_theta, best_val = float(grid[j]), float(gvals[j])
    prof.warm = gvecs[j]

    lo, hi = best_theta - step, best_theta + step
    for _ in range(3):
        theta, val = _golden_max(prof.at, lo, hi, tol)
        if val > best_val:
            best_theta, best_val = theta, val
        # optimum pinned to a bracket end: the bracket was not unimodal there
        if theta - lo <= 10 * tol:
            lo -= step
        elif hi - theta <= 10 * tol:
            hi += step
        else:
            break

    best_theta = best_theta % TWO_PI
    lam, vec = _lambda_max_single(prof.stack(np.array([best_theta]))[0], LAMBDA_TOL, prof.warm)
    value = max(lam, 0.0)
    witness = MeasurableFunction(A.space, vec / sw)
    miss = _norm2_array(at)[0] * step / 2.0
    return RadiusResult(value, best_theta, witness, "theta-sweep", miss, _witness_value(A, witness))


def _witness_value(A: MatrixOperator, f: MeasurableFunction) -> float:
    af = A.entries @ f.values
    return float(abs(np.sum(A.space.weights * af * np.conj(f.values))))


def numerical_radius_positive_cone(A: MatrixOperator, restarts: int = 4, seed: int = 0,
                                   tol: float = 1e-15, max_iter: int = 20_000) -> RadiusResult:
    """Maximize <Af, f> over nonnegative unit f by projected gradient ascent.

    Valid for positive A, where the supremum over the cone equals w(A).
    """
    if not is_positive_operator(A):
        raise InputError("positive-cone characterization needs a positive operator")
    sw = np.sqrt(A.space.weights)
    at = unweighted_entries(A.entries.real, sw)
    sym = (at + at.T) / 2.0
    n = A.n
    scale = float(np.abs(sym).sum(axis=1).max())
    if scale == 0.0:
        v = np.full(n, 1.0 / math.sqrt(n))
        return RadiusResult(0.0, 0.0, MeasurableFunction(A.space, v / sw), "cone-ascent", None, 0.0)

    rng = np.random.default_rng(seed)
    starts = [np.ones(n)] + [rng.random(n) for _ in range(restarts)]
    best_q, best_v = -math.inf, None
    for v in starts:
        v = v / np.linalg.norm(v)
        q = float(v @ sym @ v)
        eta = 1.0 / scale
        inc_prev = None
        for _ in range(max_iter):
            grad = 2.0 * (sym @ v)
            while True:
                cand = np.maximum(v + eta * grad, 0.0)
                nrm = np.linalg.norm(cand)
                if nrm > 0:
                    cand = cand / nrm
                    q_new = float(cand @ sym @ cand)
                    if q_new >= q:
                        break
                eta /= 2.0
                if eta * scale < 1e-12:
                    cand, q_new = v, q
                    break
            inc = q_new - q
            v, q = cand, q_new
            eta = min(eta * 2.0, 1e6 / scale)
            if inc <= 1e-16 * max(q, 1e-300):
                break
            if inc_prev is not None and 0 < inc < inc_prev:
                ratio = inc / inc_prev
                if inc * ratio / (1.0 - ratio) <= tol * q:
                    break
            inc_prev = inc
        if q > best_q:
            best_q, best_v = q, v
    witness = MeasurableFunction(A.space, best_v / sw)
    return RadiusResult(max(best_q, 0.0), 0.0, witness, "cone-ascent", None, _witness_value(A, witness))


def numerical_radius_sampled(A: MatrixOperator, trials: int = 10_000, seed: int = 0,
                             chunk: int = 20_000) -> RadiusResult:
    """max |<Af, f>| over seeded random complex unit vectors: a lower bound on w(A)."""
    if trials < 1:
        raise InputError("need at least one trial")
    sw = np.sqrt(A.space.weights)
    at = unweighted_entries(A.entries, sw)
    rng = np.random.default_rng(seed)
    best, best_z, best_v = -1.0, 0j, None
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        v = rng.standard_normal((k, A.n)) + 1j * rng.standard_normal((k, A.n))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        z = np.einsum("ki,ij,kj->k", v.conj(), at, v)
        i = int(np.argmax(np.abs(z)))
        if abs(z[i]) > best:
            best, best_z, best_v = float(abs(z[i])), complex(z[i]), v[i]
        done += k
    theta = (-math.atan2(best_z.imag, best_z.real)) % TWO_PI
    witness = MeasurableFunction(A.space, best_v / sw)
    return RadiusResult(best, theta, witness, "random-sample", None, best)
