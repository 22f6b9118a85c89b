"""All roots of a complex polynomial by Aberth-Ehrlich simultaneous iteration.

The iteration is Jacobi style (every root is corrected from the previous
sweep) in both backends, followed by one guarded Newton polish.  Roots closer
than :data:`CLUSTER_TOL` are snapped to their centroid and reported as a
repeated root.  Anything that has not reached the residual contract after the
iteration cap raises :class:`~lyapjulia.errors.RootFindingFailed`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit
from .errors import RootFindingFailed, ValidationError

MAX_ITER = 500
CLUSTER_TOL = 1e-8
RESIDUAL_TOL = 1e-10
_EPS = np.finfo(float).eps
_STEP_TOL = 1e-15
# arguments this close below 2*pi are rounding noise on the positive real axis
BRANCH_CUT_TOL = 1e-14
# symmetry-breaking rotation of the starting circle
_ROT = complex(0.4, 0.9) / abs(complex(0.4, 0.9))


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residuals: np.ndarray
    iterations: int

    def __len__(self) -> int:
        return len(self.roots)


def _as_coeffs(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or c.size < 2:
        raise ValidationError("need at least two coefficients (degree >= 1)")
    if not np.all(np.isfinite(c)):
        raise ValidationError("coefficients must be finite")
    if c[-1] == 0:
        raise ValidationError("leading coefficient must be nonzero")
    return c


def initial_guesses(monic: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Starting points on the Cauchy-bound circle for each row of ``monic``.

    Returns the guesses, shape ``(m, n)``, and the radii, shape ``(m,)``.
    """
    n = monic.shape[1] - 1
    rho = 1.0 + np.max(np.abs(monic[:, :n]), axis=1)
    ring = np.exp(2j * np.pi * np.arange(n) / n) * _ROT
    return rho[:, None] * ring[None, :], rho


# numba kernels ------------------------------------------------------------


@njit
def horner_nb(a, x):
    n = a.shape[0] - 1
    p = a[n]
    dp = 0j
    for k in range(n - 1, -1, -1):
        dp = dp * x + p
        p = p * x + a[k]
    return p, dp


@njit
def _abs_bound_nb(a, x):
    n = a.shape[0] - 1
    ax = abs(x)
    s = 0.0
    for k in range(n, -1, -1):
        s = s * ax + abs(a[k])
    return s


@njit
def aberth_one_nb(a, z, max_iter, tol):
    """Refine ``z`` in place toward the roots of monic ``a``.

    Returns the number of sweeps, or ``max_iter + 1`` when the cap was hit.
    """
    return aberth_ws_nb(a, z, np.zeros(z.shape[0], dtype=np.complex128), max_iter, tol)


@njit
def aberth_ws_nb(a, z, corr, max_iter, tol):
    """:func:`aberth_one_nb` with a caller-owned correction buffer."""
    n = z.shape[0]
    coef_sum = 0.0
    for k in range(n + 1):
        coef_sum += abs(a[k])
    for it in range(1, max_iter + 1):
        done = True
        for k in range(n):
            p, dp = horner_nb(a, z[k])
            ap = abs(p)
            # cheap over-estimate first; the exact bound only near convergence
            if ap <= 8.0 * _EPS * coef_sum * max(1.0, abs(z[k])) ** n:
                if ap <= 8.0 * _EPS * _abs_bound_nb(a, z[k]):
                    corr[k] = 0j
                    continue
            if dp == 0j:
                corr[k] = tol * 1e3 * (1.0 + 0.5j)
                done = False
                continue
            s = 0j
            for j in range(n):
                if j != k:
                    s += 1.0 / (z[k] - z[j])
            ratio = p / dp
            c = ratio / (1.0 - ratio * s)
            corr[k] = c
            if abs(c) > tol:
                done = False
        for k in range(n):
            z[k] -= corr[k]
        if done:
            return it
    return max_iter + 1


@njit
def polish_one_nb(a, z):
    for k in range(z.shape[0]):
        p, dp = horner_nb(a, z[k])
        if dp != 0j:
            w = z[k] - p / dp
            q, _ = horner_nb(a, w)
            if abs(q) < abs(p):
                z[k] = w


@njit
def _aberth_batch_nb(monic, z, max_iter, tol):
    m = monic.shape[0]
    iters = np.empty(m, dtype=np.int64)
    for i in range(m):
        iters[i] = aberth_one_nb(monic[i], z[i], max_iter, tol[i])
        polish_one_nb(monic[i], z[i])
    return iters


# numpy twin ---------------------------------------------------------------


def _horner_np(a: np.ndarray, x: np.ndarray):
    """Row-wise value and derivative; ``a`` is (m, n+1), ``x`` is (m, k)."""
    n = a.shape[1] - 1
    p = np.broadcast_to(a[:, n : n + 1], x.shape).astype(np.complex128)
    dp = np.zeros_like(p)
    for k in range(n - 1, -1, -1):
        dp = dp * x + p
        p = p * x + a[:, k : k + 1]
    return p, dp


def _abs_bound_np(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = a.shape[1] - 1
    ax = np.abs(x)
    absa = np.abs(a)
    s = np.zeros(x.shape)
    for k in range(n, -1, -1):
        s = s * ax + absa[:, k : k + 1]
    return s


def _aberth_batch_np(monic, z, max_iter, tol):
    m, n = z.shape
    iters = np.full(m, max_iter + 1, dtype=np.int64)
    active = np.arange(m)
    eye = np.eye(n, dtype=bool)
    for it in range(1, max_iter + 1):
        a = monic[active]
        za = z[active]
        p, dp = _horner_np(a, za)
        small = np.abs(p) <= 8.0 * _EPS * _abs_bound_np(a, za)
        diff = za[:, :, None] - za[:, None, :]
        diff[:, eye] = np.inf
        s = (1.0 / diff).sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            corr = ratio / (1.0 - ratio * s)
        zero_dp = dp == 0
        corr = np.where(zero_dp, tol[active, None] * 1e3 * (1.0 + 0.5j), corr)
        corr = np.where(small, 0j, corr)
        z[active] = za - corr
        done = np.all(small | (~zero_dp & (np.abs(corr) <= tol[active, None])), axis=1)
        iters[active[done]] = it
        active = active[~done]
        if active.size == 0:
            break
    p, dp = _horner_np(monic, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = z - p / dp
    q, _ = _horner_np(monic, np.where(np.isfinite(w), w, z))
    better = np.isfinite(w) & (np.abs(q) < np.abs(p))
    z[...] = np.where(better, w, z)
    return iters


# shared post-processing ---------------------------------------------------


def residual_bound(coeffs: np.ndarray) -> np.ndarray:
    """Residual contract per row: ``1e-10 * max(1, max |c_k|)``."""
    return RESIDUAL_TOL * np.maximum(1.0, np.max(np.abs(coeffs), axis=-1))


def _snap_clusters(z: np.ndarray) -> None:
    n = z.shape[1]
    if n < 2:
        return
    diff = np.abs(z[:, :, None] - z[:, None, :])
    diff[:, np.eye(n, dtype=bool)] = np.inf
    for i in np.flatnonzero(diff.min(axis=(1, 2)) < CLUSTER_TOL):
        row = z[i]
        label = np.arange(n)
        for k in range(n):
            for j in range(k + 1, n):
                if abs(row[k] - row[j]) < CLUSTER_TOL:
                    label[label == label[j]] = label[k]
        for lab in np.unique(label):
            members = label == lab
            if members.sum() > 1:
                row[members] = row[members].mean()


def roots_batch(coeffs, max_iter: int = MAX_ITER, backend: str | None = None):
    """Roots of many polynomials of one degree.

    Parameters
    ----------
    coeffs : array_like, shape (m, n+1)
        Ascending coefficients, one polynomial per row, leading entries nonzero.
    max_iter : int
        Aberth sweep cap.
    backend : {"numba", "numpy"}, optional
        Force one kernel; defaults to the process-wide choice.

    Returns
    -------
    roots : ndarray, shape (m, n)
    residuals : ndarray, shape (m, n)
        ``|p(root)|`` with the coefficients as given.
    iterations : ndarray, shape (m,)
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
    monic = c / c[:, -1:]
    z, rho = initial_guesses(monic)
    tol = _STEP_TOL * rho
    if backend is None:
        backend = _accel.get_backend()
    if backend == "numba":
        iters = _aberth_batch_nb(monic, z, max_iter, tol)
    else:
        iters = _aberth_batch_np(monic, z, max_iter, tol)
    _snap_clusters(z)
    res = np.abs(_horner_np(c, z)[0])
    bound = residual_bound(c)
    bad = np.flatnonzero((iters > max_iter) & np.any(res > bound[:, None], axis=1))
    if bad.size:
        raise RootFindingFailed(
            f"no residual convergence after {max_iter} sweeps", index=int(bad[0])
        )
    return z, res, iters


def roots(coeffs, max_iter: int = MAX_ITER) -> RootSet:
    """All roots, with multiplicity, of ``sum(coeffs[k] z**k)``."""
    c = _as_coeffs(coeffs)
    z, res, iters = roots_batch(c[None, :], max_iter=max_iter)
    return RootSet(roots=z[0], residuals=res[0], iterations=int(iters[0]))


def verify_vieta(rootset: RootSet, coeffs) -> float:
    """Largest deviation of the root sum and product from Vieta's formulas."""
    c = _as_coeffs(coeffs)
    n = c.size - 1
    z = np.asarray(rootset.roots)
    dev_sum = abs(z.sum() - (-c[n - 1] / c[n]))
    dev_prod = abs(np.prod(z) - (-1) ** n * c[0] / c[n])
    return float(max(dev_sum, dev_prod))


# argument ordering --------------------------------------------------------


def principal_argument(z):
    """Argument in [0, 2*pi) used for branch labels.

    Angles within :data:`BRANCH_CUT_TOL` below the cut are returned as tiny
    negative numbers so that a real positive root carrying imaginary noise
    still sorts first.
    """
    a = np.angle(z)
    a = np.where(a < 0, a + 2 * np.pi, a)
    return np.where(a >= 2 * np.pi - BRANCH_CUT_TOL, a - 2 * np.pi, a)


def sort_by_argument(z: np.ndarray) -> np.ndarray:
    """Sort each row by principal argument, ties by modulus ascending."""
    z = np.atleast_2d(z)
    order = np.lexsort((np.abs(z), principal_argument(z)), axis=1)
    return np.take_along_axis(z, order, axis=1)


@njit
def sort_by_argument_nb(z):
    """In-place insertion sort of a short root vector by (argument, modulus)."""
    sort_by_argument_ws_nb(z, np.empty(z.shape[0]), np.empty(z.shape[0]))


@njit
def sort_by_argument_ws_nb(z, key, mod):
    n = z.shape[0]
    for k in range(n):
        a = np.arctan2(z[k].imag, z[k].real)
        if a < 0.0:
            a += 2.0 * np.pi
        if a >= 2.0 * np.pi - BRANCH_CUT_TOL:
            a -= 2.0 * np.pi
        key[k] = a
        mod[k] = abs(z[k])
    for i in range(1, n):
        kz = z[i]
        ka = key[i]
        km = mod[i]
        j = i - 1
        while j >= 0 and (key[j] > ka or (key[j] == ka and mod[j] > km)):
            z[j + 1] = z[j]
            key[j + 1] = key[j]
            mod[j + 1] = mod[j]
            j -= 1
        z[j + 1] = kz
        key[j + 1] = ka
        mod[j + 1] = km
