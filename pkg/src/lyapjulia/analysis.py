"""Lyapunov exponents by several independent routes, and their comparison.

Sign convention throughout: ``Lambda_mu(P) = -int log|P'| dmu``, so the
monomial ``z**d`` has exponent ``-log d`` under every method.

Routes:

* :func:`lyapunov_mc` and :func:`lyapunov_tree` integrate ``-log|P'|``
  against the sampled or exact weighted preimage measure.
* :func:`closed_form_real` and :func:`closed_form_complex` are the
  second-order formulas in the coefficients, valid as one branch weight
  tends to 1.
* :func:`fixed_point_exponent` evaluates ``-log|P'|`` at the repelling fixed
  point that the concentrated measure collapses onto.
* :func:`expansion_terms` integrates the individual terms of the log-conjugacy
  expansion against a measure on the circle.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .backward import branch_fixed_point, monomial_branch_fixed_point
from .errors import DomainError, NonFiniteObservable, ValidationError
from .measure import (
    DEFAULT_BURN_IN,
    EmpiricalMeasure,
    IntegralEstimate,
    ProbabilityVector,
    _estimate,
    full_preimage_measure,
    sample_weighted_lyubich,
)
from .polynomial import PolynomialSpec, critical_orbit_bounded, derivative_at, evaluate
from .rng import derive_seed
from .series import CoefficientTable, SeriesTruncation

DERIVATIVE_FLOOR = 1e-300
CIRCLE_SNAP = 1e-10
DEFAULT_STEP = 1e-3

METHODS = (
    "closed_form_real",
    "closed_form_complex",
    "monte_carlo",
    "full_tree",
    "fixed_point_oracle",
    "expansion",
)


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    n: int
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}")
        if self.method != "monte_carlo" and self.stderr != 0.0:
            raise ValidationError("only Monte Carlo estimates carry a standard error")


# the observable -log|P'| ----------------------------------------------------


def neg_log_derivative(spec: PolynomialSpec, points) -> np.ndarray:
    """``-log|P'(w)|`` at each point.

    For ``z**d`` the Julia set is the unit circle, where ``|Q'| = d``
    identically; points within ``1e-10`` of the circle get exactly
    ``-log d`` rather than a value perturbed by root-finding rounding.
    """
    w = np.asarray(points, dtype=np.complex128)
    if spec.is_monomial:
        off = np.abs(np.abs(w) - 1.0) > CIRCLE_SNAP
        if not np.any(off):
            return np.full(w.shape, -math.log(spec.degree))
    dp = np.abs(derivative_at(spec, w))
    bad = ~(dp >= DERIVATIVE_FLOOR) | ~np.isfinite(dp)
    if np.any(bad):
        k = int(np.flatnonzero(bad.ravel())[0])
        raise NonFiniteObservable("|P'| vanishes at a sample point", point=complex(w.ravel()[k]))
    return -np.log(dp)


def _require_screened(spec: PolynomialSpec) -> None:
    if not critical_orbit_bounded(spec).bounded:
        raise DomainError("a critical orbit escapes; the Julia set is not connected")


def lyapunov_on(spec: PolynomialSpec, measure: EmpiricalMeasure) -> IntegralEstimate:
    """Integral of ``-log|P'|`` against an arbitrary point measure."""
    return _estimate(measure, neg_log_derivative(spec, measure.points))


def lyapunov_mc(
    spec: PolynomialSpec,
    pvec: ProbabilityVector,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    threads: int = 1,
    screen: bool = True,
) -> LyapunovEstimate:
    """Monte Carlo estimate over independent random backward orbits."""
    if screen:
        _require_screened(spec)
    mu = sample_weighted_lyubich(spec, pvec, n, burn_in=burn_in, seed=seed, threads=threads)
    est = lyapunov_on(spec, mu)
    return LyapunovEstimate(float(est.mean), float(est.stderr), est.n, "monte_carlo")


def lyapunov_tree(
    spec: PolynomialSpec,
    pvec: ProbabilityVector,
    zeta: complex | None = None,
    depth: int = 10,
) -> LyapunovEstimate:
    """Exact expectation under the depth-``depth`` weighted preimage measure."""
    mu = full_preimage_measure(spec, pvec, zeta=zeta, depth=depth)
    est = lyapunov_on(spec, mu)
    return LyapunovEstimate(float(est.mean), 0.0, est.n, "full_tree")


# closed forms --------------------------------------------------------------


def _diag_coeff(d: int, r: int) -> float:
    return (d - 2 * r + 1) / (2.0 * (d - 1) ** 2)


def _cross_coeff(d: int, r: int, s: int) -> float:
    return (d - r - s + 1) / float((d - 1) ** 2)


def _pairs(d: int):
    return itertools.combinations(range(d - 1), 2)


def eq_real(d: int, alpha, offset: bool = True) -> float:
    """Limit formula for real coefficients, evaluated on raw parameters.

    ``offset=False`` drops the constant ``-log d``; derivatives are unchanged
    and finite differences lose far less to cancellation.
    """
    a = [float(x) for x in alpha]
    acc = -math.log(d) if offset else 0.0
    for r in range(d - 1):
        acc += a[r] / (d - 1)
    for r in range(d - 1):
        acc += _diag_coeff(d, r) * a[r] ** 2
    for r, s in _pairs(d):
        acc += _cross_coeff(d, r, s) * a[r] * a[s]
    return acc


def eq_complex(d: int, alpha, beta, offset: bool = True) -> float:
    """Limit formula for complex coefficients.

    The accumulation order matches :func:`eq_real` term for term, so with
    ``beta = 0`` the two agree bit for bit.
    """
    a = [float(x) for x in alpha]
    b = [float(x) for x in beta]
    acc = -math.log(d) if offset else 0.0
    for r in range(d - 1):
        acc += a[r] / (d - 1)
    for r in range(d - 1):
        acc += _diag_coeff(d, r) * a[r] ** 2
    for r in range(d - 1):
        acc -= _diag_coeff(d, r) * b[r] ** 2
    for r, s in _pairs(d):
        acc += _cross_coeff(d, r, s) * a[r] * a[s]
    for r, s in _pairs(d):
        acc -= _cross_coeff(d, r, s) * b[r] * b[s]
    return acc


def closed_form_real(spec: PolynomialSpec) -> LyapunovEstimate:
    if not spec.is_real:
        raise DomainError("closed_form_real needs every beta_r = 0")
    return LyapunovEstimate(eq_real(spec.degree, spec.alpha), 0.0, 0, "closed_form_real")


def closed_form_complex(spec: PolynomialSpec) -> LyapunovEstimate:
    return LyapunovEstimate(
        eq_complex(spec.degree, spec.alpha, spec.beta), 0.0, 0, "closed_form_complex"
    )


# finite-difference derivatives --------------------------------------------


def _fd_gradient(f, x: np.ndarray, h: float) -> np.ndarray:
    g = np.empty(x.size)
    for r in range(x.size):
        e = np.zeros(x.size)
        e[r] = h
        g[r] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _fd_hessian(f, x: np.ndarray, h: float) -> np.ndarray:
    n = x.size
    H = np.empty((n, n))
    f0 = f(x)
    for r in range(n):
        er = np.zeros(n)
        er[r] = h
        H[r, r] = (f(x + er) - 2 * f0 + f(x - er)) / h**2
        for s in range(r + 1, n):
            es = np.zeros(n)
            es[s] = h
            v = (f(x + er + es) - f(x + er - es) - f(x - er + es) + f(x - er - es)) / (4 * h * h)
            H[r, s] = H[s, r] = v
    return H


def _check_step(h: float) -> None:
    if not 1e-4 <= h <= 1e-2:
        raise ValidationError(f"finite-difference step {h} outside [1e-4, 1e-2]")


def _base_parts(d: int, base_spec: PolynomialSpec | None):
    if base_spec is None:
        return np.zeros(d - 1), np.zeros(d - 1)
    if base_spec.degree != d:
        raise ValidationError(f"base spec has degree {base_spec.degree}, expected {d}")
    return base_spec.alpha, base_spec.beta


@dataclass(frozen=True)
class DerivativeReport:
    degree: int
    grad_alpha: np.ndarray
    grad_beta: np.ndarray
    H_alpha_alpha: np.ndarray
    H_beta_beta: np.ndarray
    h: float
    max_antisymmetry_defect: float
    stated_diagonal: np.ndarray
    diagonal_ratio: np.ndarray

    @property
    def diagonal_matches_stated(self) -> bool:
        """Whether the numerical diagonal equals the textbook value
        ``(d-2r+1)/(2(d-1)**2)``; it comes out twice that."""
        ratio = self.diagonal_ratio[np.isfinite(self.diagonal_ratio)]
        return bool(np.allclose(ratio, 1.0, atol=1e-6))

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "h": self.h,
            "grad_alpha": self.grad_alpha.tolist(),
            "grad_beta": self.grad_beta.tolist(),
            "H_alpha_alpha": self.H_alpha_alpha.tolist(),
            "H_beta_beta": self.H_beta_beta.tolist(),
            "max_antisymmetry_defect": self.max_antisymmetry_defect,
            "stated_diagonal": self.stated_diagonal.tolist(),
            "diagonal_ratio": self.diagonal_ratio.tolist(),
            "diagonal_matches_stated": self.diagonal_matches_stated,
        }


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Elementwise ratio, NaN where the denominator vanishes."""
    out = np.full(num.shape, np.nan)
    nz = den != 0
    out[nz] = num[nz] / den[nz]
    return out


def derivative_report(
    d: int, base_spec: PolynomialSpec | None = None, h: float = DEFAULT_STEP
) -> DerivativeReport:
    """Central differences of the complex limit formula in every ``alpha_r``
    and ``beta_r``.

    The formula is quadratic, so these are exact up to cancellation error.
    """
    _check_step(h)
    a0, b0 = _base_parts(d, base_spec)
    fa = lambda a: eq_complex(d, a, b0, offset=False)  # noqa: E731
    fb = lambda b: eq_complex(d, a0, b, offset=False)  # noqa: E731
    Ha = _fd_hessian(fa, a0, h)
    Hb = _fd_hessian(fb, b0, h)
    stated = np.array([_diag_coeff(d, r) for r in range(d - 1)])
    return DerivativeReport(
        degree=d,
        grad_alpha=_fd_gradient(fa, a0, h),
        grad_beta=_fd_gradient(fb, b0, h),
        H_alpha_alpha=Ha,
        H_beta_beta=Hb,
        h=h,
        max_antisymmetry_defect=float(np.max(np.abs(Ha + Hb))),
        stated_diagonal=stated,
        diagonal_ratio=_ratio(np.diag(Ha), stated),
    )


def verify_theorem2(
    d: int, base_spec: PolynomialSpec | None = None, h: float = DEFAULT_STEP
) -> float:
    """Largest gap between the alpha-derivatives (first and second) of the
    real and complex limit formulas, at a base point with ``beta = 0``."""
    _check_step(h)
    a0, b0 = _base_parts(d, base_spec)
    if np.any(b0 != 0):
        raise DomainError("the real-vs-complex comparison needs a real base point")
    fr = lambda a: eq_real(d, a, offset=False)  # noqa: E731
    fc = lambda a: eq_complex(d, a, b0, offset=False)  # noqa: E731
    dg = np.max(np.abs(_fd_gradient(fr, a0, h) - _fd_gradient(fc, a0, h)))
    dh = np.max(np.abs(_fd_hessian(fr, a0, h) - _fd_hessian(fc, a0, h)))
    return float(max(dg, dh))


def exact_gradient_alpha(d: int, alpha) -> np.ndarray:
    """Analytic alpha-gradient of the limit formula (reference for tests)."""
    a = np.asarray(alpha, dtype=float)
    g = np.full(d - 1, 1.0 / (d - 1))
    for r in range(d - 1):
        g[r] += 2 * _diag_coeff(d, r) * a[r]
        for s in range(d - 1):
            if s != r:
                g[r] += _cross_coeff(d, min(r, s), max(r, s)) * a[s]
    return g


# the seven integrals -------------------------------------------------------


@dataclass
class ExpansionTable:
    """Integrals of the individual expansion terms against one measure.

    ``terms`` uses the polynomial's coefficients; ``raw`` drops them (the
    real-coefficient table with every ``A_r`` set to 1).  Keys look like
    ``re_phi[r]``, ``re_phi2[r]``, ``half_re_sq[r]``, ``half_im_sq[r]``,
    ``re_phi_rs[r,s]``, ``re_re[r,s]`` and ``im_im[r,s]``.
    """

    degree: int
    terms: dict[str, IntegralEstimate]
    raw: dict[str, IntegralEstimate]
    caps: tuple[int, int, int]
    mode: str

    def bracket_diag(self, r: int) -> float:
        t = self.terms
        return t[f"re_phi2[{r}]"].mean - t[f"half_re_sq[{r}]"].mean + t[f"half_im_sq[{r}]"].mean

    def bracket_cross(self, r: int, s: int) -> float:
        t = self.terms
        k = f"[{r},{s}]"
        return t["re_phi_rs" + k].mean - t["re_re" + k].mean + t["im_im" + k].mean

    @property
    def estimate(self) -> float:
        """``-log d`` minus the sum of all first- and second-order integrals."""
        d = self.degree
        acc = -math.log(d)
        for r in range(d - 1):
            acc -= self.terms[f"re_phi[{r}]"].mean
        for r in range(d - 1):
            acc -= self.bracket_diag(r)
        for r, s in _pairs(d):
            acc -= self.bracket_cross(r, s)
        return acc

    def to_dict(self) -> dict:
        pack = lambda tab: {k: [v.mean, v.stderr] for k, v in tab.items()}  # noqa: E731
        return {
            "degree": self.degree,
            "caps": list(self.caps),
            "mode": self.mode,
            "terms": pack(self.terms),
            "raw": pack(self.raw),
            "brackets_diag": [self.bracket_diag(r) for r in range(self.degree - 1)],
            "brackets_cross": {f"{r},{s}": self.bracket_cross(r, s) for r, s in _pairs(self.degree)},
            "estimate": self.estimate,
        }


def expansion_terms(
    spec: PolynomialSpec,
    measure: EmpiricalMeasure,
    trunc: SeriesTruncation | None = None,
) -> ExpansionTable:
    """Integrate every first- and second-order term of ``log|Phi(z)|``.

    ``measure`` must live on the unit circle, i.e. be built for ``z**d``.
    """
    d = spec.degree
    tab = CoefficientTable(d, measure.points, trunc)
    zbar = np.conj(tab.z)
    A = spec.coeffs
    w = [zbar * f for f in tab.first]
    aw = [A[r] * w[r] for r in range(d - 1)]
    terms: dict[str, IntegralEstimate] = {}
    raw: dict[str, IntegralEstimate] = {}
    est = lambda v: _estimate(measure, v)  # noqa: E731
    for r in range(d - 1):
        w2 = zbar * tab.diagonal[r]
        terms[f"re_phi[{r}]"] = est(aw[r].real)
        terms[f"re_phi2[{r}]"] = est((A[r] ** 2 * w2).real)
        terms[f"half_re_sq[{r}]"] = est(0.5 * aw[r].real ** 2)
        terms[f"half_im_sq[{r}]"] = est(0.5 * aw[r].imag ** 2)
        raw[f"re_phi[{r}]"] = est(w[r].real)
        raw[f"re_phi2[{r}]"] = est(w2.real)
        raw[f"half_re_sq[{r}]"] = est(0.5 * w[r].real ** 2)
    for (r, s), f in tab.cross.items():
        wrs = zbar * f
        k = f"[{r},{s}]"
        terms["re_phi_rs" + k] = est((A[r] * A[s] * wrs).real)
        terms["re_re" + k] = est(aw[r].real * aw[s].real)
        terms["im_im" + k] = est(aw[r].imag * aw[s].imag)
        raw["re_phi_rs" + k] = est(wrs.real)
        raw["re_re" + k] = est(w[r].real * w[s].real)
    return ExpansionTable(d, terms, raw, tab.trunc.caps, measure.mode)


def concentrated_limits(spec: PolynomialSpec) -> tuple[dict[str, float], dict[str, float]]:
    """Values of the expansion integrals when the measure is a point mass at 1.

    Returns ``(terms, raw)`` keyed as in :class:`ExpansionTable`.
    """
    d = spec.degree
    a, b = spec.alpha, spec.beta
    q = float((d - 1) ** 2)
    terms: dict[str, float] = {}
    raw: dict[str, float] = {}
    for r in range(d - 1):
        terms[f"re_phi[{r}]"] = -a[r] / (d - 1)
        terms[f"re_phi2[{r}]"] = -(d - 2 * r) / (2 * q) * (a[r] ** 2 - b[r] ** 2)
        terms[f"half_re_sq[{r}]"] = 0.5 * a[r] ** 2 / q
        terms[f"half_im_sq[{r}]"] = 0.5 * b[r] ** 2 / q
        raw[f"re_phi[{r}]"] = -1.0 / (d - 1)
        raw[f"re_phi2[{r}]"] = -(d - 2 * r) / (2 * q)
        raw[f"half_re_sq[{r}]"] = 0.5 / q
    for r, s in _pairs(d):
        k = f"[{r},{s}]"
        terms["re_phi_rs" + k] = -(d - r - s) / q * (a[r] * a[s] - b[r] * b[s])
        terms["re_re" + k] = a[r] * a[s] / q
        terms["im_im" + k] = b[r] * b[s] / q
        raw["re_phi_rs" + k] = -(d - r - s) / q
        raw["re_re" + k] = 1.0 / q
    return terms, raw


# fixed-point oracle --------------------------------------------------------


def fixed_point_exponent(spec: PolynomialSpec, j: int) -> LyapunovEstimate:
    """``-log|P'|`` at the fixed point of inverse branch ``j``."""
    z = branch_fixed_point(spec, j)
    v = float(neg_log_derivative(spec, np.array([z]))[0])
    return LyapunovEstimate(v, 0.0, 1, "fixed_point_oracle")


def fixed_point_oracle_numpy(spec: PolynomialSpec, j: int) -> tuple[complex, float]:
    """Independent recomputation with :func:`numpy.roots`.

    Picks the root of ``P(z) - z`` nearest the branch-``j`` fixed point of
    ``z**d`` and returns it with ``-log|P'|`` there.
    """
    c = spec.full_coeffs().copy()
    c[1] -= 1.0
    cand = np.roots(c[::-1])
    target = monomial_branch_fixed_point(spec.degree, j)
    z = complex(cand[np.argmin(np.abs(cand - target))])
    # one Newton step on P(z) - z for a last digit
    g = evaluate(spec, z) - z
    dg = derivative_at(spec, z) - 1.0
    if dg != 0:
        z = z - g / dg
    return z, -math.log(abs(derivative_at(spec, z)))


# comparison report ---------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    p: float
    branch: int
    mc: float
    mc_stderr: float
    closed_form: float
    fixed_point: float
    seed: int

    @property
    def gap_mc_fixed(self) -> float:
        return self.mc - self.fixed_point

    @property
    def gap_closed_fixed(self) -> float:
        return self.closed_form - self.fixed_point

    @property
    def gap_mc_closed(self) -> float:
        return self.mc - self.closed_form

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "branch": self.branch,
            "mc": self.mc,
            "mc_stderr": self.mc_stderr,
            "closed_form": self.closed_form,
            "fixed_point": self.fixed_point,
            "gap_mc_fixed": self.gap_mc_fixed,
            "gap_closed_fixed": self.gap_closed_fixed,
            "gap_mc_closed": self.gap_mc_closed,
            "seed": self.seed,
        }


TABLE_COLUMNS = (
    "p", "branch", "mc", "mc_stderr", "closed_form", "fixed_point",
    "gap_mc_fixed", "gap_closed_fixed", "gap_mc_closed", "seed",
)


@dataclass(frozen=True)
class ComparisonReport:
    degree: int
    coeffs: tuple[complex, ...]
    rows: tuple[ComparisonRow, ...]
    n: int
    burn_in: int
    seed: int

    def for_branch(self, j: int) -> list[ComparisonRow]:
        return [r for r in self.rows if r.branch == j]


def comparison_report(
    spec: PolynomialSpec,
    schedule,
    branches=None,
    n: int = 10_000,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    threads: int = 1,
) -> ComparisonReport:
    """Monte Carlo, limit formula and fixed-point oracle side by side.

    For each branch ``j`` and each ``p`` in ``schedule`` the measure puts
    weight ``p`` on branch ``j``.  Gaps are reported, never asserted.  Row
    ``k`` of branch ``j`` uses seed ``derive_seed(seed, k)`` where ``k`` counts
    rows in output order.
    """
    d = spec.degree
    sched = [float(x) for x in schedule]
    if not sched or any(not 0.0 < p < 1.0 for p in sched):
        raise ValidationError("schedule entries must lie in (0, 1)")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValidationError("schedule must be strictly increasing")
    if branches is None:
        branches = range(1, d + 1)
    branches = [int(j) for j in branches]
    for j in branches:
        if not 1 <= j <= d:
            raise ValidationError(f"branch {j} outside 1..{d}")
    _require_screened(spec)
    cf = closed_form_complex(spec).value
    rows = []
    k = 0
    for j in branches:
        fp = fixed_point_exponent(spec, j).value
        for p in sched:
            s = derive_seed(seed, k)
            mc = lyapunov_mc(spec, ProbabilityVector.concentrated(d, j, p), n, burn_in, s,
                             threads=threads, screen=False)
            rows.append(ComparisonRow(p, j, mc.value, mc.stderr, cf, fp, s))
            k += 1
    return ComparisonReport(d, spec.coeffs, tuple(rows), int(n), int(burn_in), int(seed))


# pressure ------------------------------------------------------------------


def simplex_grid(d: int, m: int) -> list[tuple[int, ...]]:
    """All compositions ``k_1 + ... + k_d = m`` with every ``k_j >= 1``, in
    lexicographic order."""
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for k in range(1, left - slots + 2):
            rec(prefix + (k,), left - k, slots - 1)

    rec((), m, d)
    return out


def grid_entropy(k: tuple[int, ...], m: int) -> float:
    """``-sum p_j log p_j`` for ``p_j = k_j / m``.

    Written as ``sum (c k / m) log(m / k)`` over distinct ``k`` with
    multiplicity ``c``, so the uniform cell gives exactly ``log d``.
    """
    counts: dict[int, int] = {}
    for x in k:
        counts[x] = counts.get(x, 0) + 1
    return math.fsum((c * x) / m * math.log(m / x) for x, c in sorted(counts.items()))


@dataclass(frozen=True)
class PressureCell:
    k: tuple[int, ...]
    p: tuple[float, ...]
    entropy: float
    lyapunov: float
    stderr: float
    seed: int

    @property
    def value(self) -> float:
        return self.entropy + self.lyapunov

    def to_dict(self) -> dict:
        return {
            "p": list(self.p),
            "entropy": self.entropy,
            "lyapunov": self.lyapunov,
            "stderr": self.stderr,
            "value": self.value,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PressureScanResult:
    """Best ``h(p) + Lambda(p)`` over a simplex grid: a lower bound for the
    pressure of ``-log|P'|`` restricted to branch-Bernoulli measures."""

    best_p: ProbabilityVector
    best_value: float
    best_stderr: float
    grid_resolution: int
    cells: tuple[PressureCell, ...]


def pressure_scan(
    spec: PolynomialSpec,
    m: int,
    n: int = 10_000,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    threads: int = 1,
) -> PressureScanResult:
    d = spec.degree
    if m < d:
        raise ValidationError(f"grid resolution {m} leaves no strictly positive cell for d={d}")
    _require_screened(spec)
    grid = simplex_grid(d, m)

    def cell(idx):
        k = grid[idx]
        p = ProbabilityVector(tuple(x / m for x in k))
        s = derive_seed(seed, idx)
        est = lyapunov_mc(spec, p, n, burn_in, s, screen=False)
        return PressureCell(k, p.p, grid_entropy(k, m), est.value, est.stderr, s)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(cell, range(len(grid))))
    else:
        cells = [cell(i) for i in range(len(grid))]
    best = max(range(len(cells)), key=lambda i: (cells[i].value, -i))
    c = cells[best]
    return PressureScanResult(ProbabilityVector(c.p), c.value, c.stderr, m, tuple(cells))
