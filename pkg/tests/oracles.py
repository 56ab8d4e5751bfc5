"""Independent reference computations used only by the tests.

None of these share code with the package: singular values come from one-sided
Jacobi rotations, spectral radii from the characteristic polynomial, Hermitian
top eigenvalues from Sturm-sequence bisection, and numerical radii from a dense
theta grid evaluated with LAPACK.
"""
from __future__ import annotations

import numpy as np


# -- singular values -------------------------------------------------------------

def jacobi_singular_values(a, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Singular values (descending) by Hestenes one-sided Jacobi orthogonalization."""
    u = np.array(a, dtype=complex, copy=True)
    n = u.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = np.vdot(u[:, i], u[:, i]).real
                beta = np.vdot(u[:, j], u[:, j]).real
                gamma = np.vdot(u[:, i], u[:, j])
                g = abs(gamma)
                if g <= tol * np.sqrt(alpha * beta) or g == 0.0:
                    continue
                rotated = True
                uj = u[:, j] * (np.conj(gamma) / g)  # make the pair's inner product real
                zeta = (beta - alpha) / (2.0 * g)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                ui = u[:, i].copy()
                u[:, i] = c * ui - s * uj
                u[:, j] = s * ui + c * uj
        if not rotated:
            break
    return np.sort(np.linalg.norm(u, axis=0))[::-1]


def weighted_norm2_oracle(a, weights) -> float:
    """sup ||Af||_w / ||f||_w via the Jacobi SVD of W^1/2 A W^-1/2."""
    s = np.sqrt(np.asarray(weights, dtype=float))
    return float(jacobi_singular_values(s[:, None] * np.asarray(a) / s[None, :])[0])


# -- spectral radius ---------------------------------------------------------------

def charpoly_faddeev_leverrier(a) -> np.ndarray:
    """Coefficients c[0..n] (c[i] multiplies lambda^i) of det(lambda I - A)."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + c[n - k + 1] * eye
        c[n - k] = -np.trace(a @ m) / k
    return c


def _all_roots_inside_unit_disk(coeffs) -> bool:
    """Schur-Cohn test; coeffs[i] multiplies z^i."""
    a = np.array(coeffs, dtype=complex)
    while len(a) > 1:
        lead, const = a[-1], a[0]
        if abs(lead) <= abs(const):
            return False
        reverse = np.conj(a[::-1])
        a = (np.conj(lead) * a - const * reverse)[1:]
        a = a / np.max(np.abs(a))
    return True


def spectral_radius_oracle(a, rel_tol: float = 1e-13) -> float:
    """Largest root modulus of the characteristic polynomial, by bisection on |lambda|.

    R bounds every root iff p(Rz) has all zeros in the unit disk (Schur-Cohn).
    Accurate for simple dominant roots; a root of multiplicity k loses roughly
    a factor k in significant digits, so tests feed it random matrices only.
    """
    c = charpoly_faddeev_leverrier(a)
    c = c[np.argmax(c != 0):]  # zero roots lie inside every disk; factor them out
    n = len(c) - 1
    hi = 1.0 + float(np.max(np.abs(c[:-1]))) if n else 0.0  # Cauchy bound
    lo = 0.0
    powers = np.arange(n + 1)
    for _ in range(200):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        scaled = c * mid ** powers
        if _all_roots_inside_unit_disk(scaled / np.max(np.abs(scaled))):
            hi = mid
        else:
            lo = mid
    return hi


# -- Hermitian top eigenvalue -------------------------------------------------------------

def _realify(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def _tridiagonalize(s) -> tuple[np.ndarray, np.ndarray]:
    s = np.array(s, dtype=float, copy=True)
    n = s.shape[0]
    for k in range(n - 2):
        x = s[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        p = np.eye(n)
        p[k + 1:, k + 1:] -= 2.0 * np.outer(v, v)
        s = p @ s @ p
    return np.diag(s).copy(), np.diag(s, 1).copy()


def _count_below(diag, off, x) -> int:
    count = 0
    d = 1.0
    for i in range(len(diag)):
        d = diag[i] - x - (off[i - 1] ** 2 / d if i else 0.0)
        if d == 0.0:
            d = -1e-300
        count += d < 0
    return count


def hermitian_lambda_max_sturm(h, tol: float = 1e-14) -> float:
    """Largest eigenvalue by Sturm bisection on the tridiagonal form.

    A complex Hermitian matrix is embedded as the real symmetric block matrix
    [[Re, -Im], [Im, Re]], whose spectrum is that of h with doubled multiplicity.
    """
    s = _realify(h)
    diag, off = _tridiagonalize(s)
    bound = float(np.max(np.sum(np.abs(s), axis=1))) + 1e-300
    lo, hi = -bound, bound
    size = len(diag)
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if _count_below(diag, off, mid) == size:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- numerical radius ----------------------------------------------------------------

def numerical_radius_grid(a, weights=None, points: int = 100_000, chunk: int = 20_000) -> float:
    """max over a uniform theta grid of lambda_max(Re(e^{i theta} A~)) using eigvalsh."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    s = np.ones(n) if weights is None else np.sqrt(np.asarray(weights, dtype=float))
    at = s[:, None] * a / s[None, :]
    best = -np.inf
    thetas = np.arange(points) * (2.0 * np.pi / points)
    for k in range(0, points, chunk):
        rot = np.exp(1j * thetas[k:k + chunk])[:, None, None] * at
        herm = 0.5 * (rot + np.conj(np.swapaxes(rot, 1, 2)))
        best = max(best, float(np.linalg.eigvalsh(herm)[:, -1].max()))
    return best
