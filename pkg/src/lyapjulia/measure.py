"""Weighted Lyubich measure approximants and integration against them.

Two faces of the same finite-stage measure are provided.  The Monte Carlo
sampler runs independent backward orbits that pick inverse branch ``j`` with
probability ``p_j`` at every step and keeps the endpoints with uniform
weights.  The full preimage tree enumerates every branch word of a given
length and carries the product of branch probabilities as an explicit
weight, so it has no sampling error.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _accel, rootfinder
from ._accel import njit
from .backward import default_start, preimages_batch
from .errors import (
    NonFiniteObservable,
    RootFindingFailed,
    TreeTooLarge,
    ValidationError,
)
from .polynomial import PolynomialSpec, evaluate
from .rng import uniform_array, uniform_nb
from .rootfinder import aberth_ws_nb, horner_nb, polish_one_nb, sort_by_argument_ws_nb

DEFAULT_BURN_IN = 60
TREE_GUARD = 2**20
CHAIN_BLOCK = 2048


@dataclass(frozen=True)
class ProbabilityVector:
    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if len(p) < 2:
            raise ValidationError("probability vector needs at least two entries")
        if any(not math.isfinite(x) or x <= 0 for x in p):
            raise ValidationError(f"probabilities must be strictly positive, got {p}")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValidationError(f"probabilities sum to {math.fsum(p)!r}, not 1")
        object.__setattr__(self, "p", p)

    def __len__(self) -> int:
        return len(self.p)

    def as_array(self) -> np.ndarray:
        return np.array(self.p)

    @classmethod
    def uniform(cls, d: int) -> "ProbabilityVector":
        return cls((1.0 / d,) * d)

    @classmethod
    def concentrated(cls, d: int, j: int, pj: float) -> "ProbabilityVector":
        """``p_j = pj`` on branch ``j`` (1-based), the rest shared equally."""
        rest = (1.0 - pj) / (d - 1)
        return cls(tuple(pj if k == j - 1 else rest for k in range(d)))


@dataclass
class EmpiricalMeasure:
    points: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.complex128)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.points.shape != self.weights.shape:
            raise ValidationError("points and weights differ in shape")
        if np.any(self.weights <= 0):
            raise ValidationError("weights must be positive")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValidationError("weights must sum to 1")

    @property
    def mode(self) -> str:
        return self.meta.get("mode", "monte_carlo")

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class IntegralEstimate:
    mean: float | complex
    stderr: float
    n: int


def _check_spec_pvec(spec: PolynomialSpec, pvec: ProbabilityVector) -> None:
    if len(pvec) != spec.degree:
        raise ValidationError(
            f"probability vector has {len(pvec)} entries, degree is {spec.degree}"
        )


# chain kernels ------------------------------------------------------------


@njit
def _chains_nb(full, cum_p, zeta0, seed, first, count, burn_in, max_iter):
    d = full.shape[0] - 1
    out = np.empty(count, dtype=np.complex128)
    status = np.zeros(count, dtype=np.int64)
    a = full.copy()
    z = np.empty(d, dtype=np.complex128)
    ring = np.empty(d, dtype=np.complex128)
    corr = np.empty(d, dtype=np.complex128)
    key = np.empty(d)
    mod = np.empty(d)
    rot = complex(0.4, 0.9) / abs(complex(0.4, 0.9))
    for k in range(d):
        ring[k] = np.exp(2j * np.pi * k / d) * rot
    useed = np.uint64(seed)
    for c in range(count):
        chain = np.uint64(first + c)
        cur = zeta0
        for step in range(burn_in):
            a[0] = full[0] - cur
            rho = 0.0
            big = 1.0
            for k in range(d + 1):
                m = abs(a[k])
                if k < d and m > rho:
                    rho = m
                if m > big:
                    big = m
            rho += 1.0
            for k in range(d):
                z[k] = rho * ring[k]
            it = aberth_ws_nb(a, z, corr, max_iter, 1e-15 * rho)
            polish_one_nb(a, z)
            if it > max_iter:
                worst = 0.0
                for k in range(d):
                    p, _ = horner_nb(a, z[k])
                    if abs(p) > worst:
                        worst = abs(p)
                if worst > 1e-10 * big:
                    status[c] = step + 1
                    break
            sort_by_argument_ws_nb(z, key, mod)
            u = uniform_nb(useed, chain, np.uint64(step))
            j = 0
            while j < d - 1 and u >= cum_p[j]:
                j += 1
            cur = z[j]
        out[c] = cur
    return out, status


def _chains_np(full, cum_p, zeta0, seed, first, count, burn_in, max_iter):
    d = full.size - 1
    chains = np.arange(first, first + count, dtype=np.uint64)
    cur = np.full(count, zeta0, dtype=np.complex128)
    status = np.zeros(count, dtype=np.int64)
    coeffs = np.tile(full, (count, 1))
    for step in range(burn_in):
        coeffs[:, 0] = full[0] - cur
        try:
            z, _, _ = rootfinder.roots_batch(coeffs, max_iter=max_iter, backend="numpy")
        except RootFindingFailed as exc:
            status[exc.index] = step + 1
            return cur, status
        z = rootfinder.sort_by_argument(z)
        u = uniform_array(seed, chains, step)
        j = np.minimum(np.searchsorted(cum_p, u, side="right"), d - 1)
        cur = z[np.arange(count), j]
    return cur, status


def _run_chains(spec, pvec, n_samples, burn_in, seed, zeta0, threads):
    full = spec.full_coeffs()
    cum_p = np.cumsum(pvec.as_array())
    kernel = _chains_nb if _accel.use_numba() else _chains_np
    blocks = [(s, min(CHAIN_BLOCK, n_samples - s)) for s in range(0, n_samples, CHAIN_BLOCK)]

    def run(block):
        first, count = block
        return kernel(full, cum_p, complex(zeta0), int(seed), first, count, burn_in,
                      rootfinder.MAX_ITER)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    for (first, _), (_, status) in zip(blocks, parts):
        bad = np.flatnonzero(status)
        if bad.size:
            raise RootFindingFailed(
                f"root finding failed at step {int(status[bad[0]])}", index=first + int(bad[0])
            )
    return np.concatenate([pts for pts, _ in parts])


def sample_weighted_lyubich(
    spec: PolynomialSpec,
    pvec: ProbabilityVector,
    n_samples: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    zeta: complex | None = None,
    threads: int = 1,
) -> EmpiricalMeasure:
    """Endpoints of ``n_samples`` independent random backward orbits.

    Branch choices come from the counter-based generator keyed by
    ``(seed, orbit index, step)``, so the point list is identical for any
    ``threads`` value and any batching.
    """
    _check_spec_pvec(spec, pvec)
    if n_samples < 1 or burn_in < 1:
        raise ValidationError("n_samples and burn_in must be >= 1")
    if seed < 0:
        raise ValidationError("seed must be non-negative")
    zeta0 = default_start(spec) if zeta is None else complex(zeta)
    points = _run_chains(spec, pvec, int(n_samples), int(burn_in), int(seed), zeta0, max(1, int(threads)))
    weights = np.full(points.size, 1.0 / points.size)
    meta = {
        "mode": "monte_carlo",
        "seed": int(seed),
        "burn_in": int(burn_in),
        "n_samples": int(n_samples),
        "zeta": [zeta0.real, zeta0.imag],
        "degree": spec.degree,
        "coeffs": [[c.real, c.imag] for c in spec.coeffs],
        "p": list(pvec.p),
    }
    return EmpiricalMeasure(points, weights, meta)


def full_preimage_measure(
    spec: PolynomialSpec,
    pvec: ProbabilityVector,
    zeta: complex | None = None,
    depth: int = 10,
) -> EmpiricalMeasure:
    """Exact depth-``n`` weighted preimage measure.

    Points are ordered with the first branch letter most significant, so the
    children of a depth-``n`` point occupy ``d`` consecutive slots at depth
    ``n + 1``.
    """
    _check_spec_pvec(spec, pvec)
    d = spec.degree
    if depth < 0:
        raise ValidationError("depth must be >= 0")
    if d**depth > TREE_GUARD:
        raise TreeTooLarge(f"{d}^{depth} preimages exceed the 2^20 guard")
    zeta0 = default_start(spec) if zeta is None else complex(zeta)
    pts = np.array([zeta0], dtype=np.complex128)
    w = np.ones(1)
    p = pvec.as_array()
    for _ in range(depth):
        pts = preimages_batch(spec, pts).ravel()
        w = np.outer(w, p).ravel()
    meta = {
        "mode": "full_tree",
        "depth": int(depth),
        "zeta": [zeta0.real, zeta0.imag],
        "degree": d,
        "coeffs": [[c.real, c.imag] for c in spec.coeffs],
        "p": list(pvec.p),
    }
    # renormalise the product weights against accumulated rounding
    return EmpiricalMeasure(pts, w / math.fsum(w), meta)


def _observe(measure: EmpiricalMeasure, observable: Callable) -> np.ndarray:
    z = measure.points
    try:
        vals = np.asarray(observable(z))
    except Exception:
        vals = None
    if vals is None or vals.shape != z.shape:
        vals = np.array([observable(complex(x)) for x in z])
    finite = np.isfinite(vals)
    if not np.all(finite):
        k = int(np.flatnonzero(~finite)[0])
        raise NonFiniteObservable("observable is not finite", point=complex(z[k]))
    return vals


def _estimate(measure: EmpiricalMeasure, vals: np.ndarray) -> IntegralEstimate:
    w = measure.weights
    n = vals.size
    if n and np.all(vals == vals.flat[0]):
        # a constant integrates to itself; summing n rounded copies would not
        return IntegralEstimate(vals.flat[0].item(), 0.0, n)
    if np.iscomplexobj(vals):
        mean = complex(np.sum(w * vals))
    else:
        mean = float(np.sum(w * vals))
    if measure.mode == "full_tree" or n < 2:
        return IntegralEstimate(mean, 0.0, n)
    dev = np.abs(vals - mean) ** 2
    var = float(np.sum(w * dev)) * n / (n - 1)
    return IntegralEstimate(mean, math.sqrt(var / n), n)


def integrate(measure: EmpiricalMeasure, observable: Callable) -> IntegralEstimate:
    """Weighted mean of ``observable`` over the points.

    ``observable`` is called once on the whole point array; if that fails or
    returns the wrong shape it is called point by point.  In Monte Carlo mode
    the standard error is the sample standard deviation over ``sqrt(n)``; it
    is 0 for full trees.
    """
    return _estimate(measure, _observe(measure, observable))


@dataclass(frozen=True)
class InvarianceCheck:
    deviation: float
    tolerance: float
    per_observable: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def check_invariance(
    spec: PolynomialSpec,
    measure: EmpiricalMeasure,
    observables: Sequence[Callable],
) -> InvarianceCheck:
    """Compare ``int f o P`` with ``int f`` for each test observable.

    The tolerance is ``3 * (stderr(f o P) + stderr(f))`` for the worst
    observable; it is 0 for full trees, where the stderrs vanish.
    """
    devs = []
    tol = 0.0
    for f in observables:
        lhs = integrate(measure, lambda z, f=f: f(evaluate(spec, z)))
        rhs = integrate(measure, f)
        dev = abs(lhs.mean - rhs.mean)
        devs.append(dev)
        tol = max(tol, 3.0 * (lhs.stderr + rhs.stderr))
    return InvarianceCheck(max(devs), tol, tuple(devs))


# serialisation ------------------------------------------------------------

_HEADER = "# lyapjulia-measure "


def save_measure(measure: EmpiricalMeasure, path) -> None:
    """Columnar text: one JSON meta header, then ``re im weight`` rows."""
    path = Path(path)
    lines = [_HEADER + json.dumps(measure.meta, sort_keys=True)]
    for z, w in zip(measure.points, measure.weights):
        lines.append(f"{z.real:.17g} {z.imag:.17g} {w:.17g}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def load_measure(path) -> EmpiricalMeasure:
    text = Path(path).read_text(encoding="ascii").splitlines()
    if not text or not text[0].startswith(_HEADER):
        raise ValidationError(f"{path}: missing measure header")
    meta = json.loads(text[0][len(_HEADER):])
    rows = np.loadtxt(text[1:], ndmin=2) if len(text) > 1 else np.empty((0, 3))
    return EmpiricalMeasure(rows[:, 0] + 1j * rows[:, 1], rows[:, 2], meta)
