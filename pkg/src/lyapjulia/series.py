"""First- and second-order coefficient functions of the circle conjugacy.

On the unit circle ``Phi_P(z) = z + sum_r phi_r(z) A_r + sum_r phi_{r^2}(z) A_r^2
+ sum_{r<s} phi_{rs}(z) A_r A_s + O(|A|^3)`` where every coefficient function
is a lacunary series of monomials ``z**(1 - E)`` with exponents growing like
``d**kappa``.

Evaluation never forms ``E``.  Writing ``g_k = exp(-i (d - r) d**k theta)``,
every monomial is a product of at most two ``g`` values, and ``g_{k+1}`` comes
from ``g_k`` by multiplying the angle by ``d`` modulo ``2 pi``.  The double sum
over ``kappa_1 <= kappa_2`` becomes a prefix-sum convolution, so a point costs
``O(K3 * K2)`` instead of ``O(K3 * K2**2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _accel
from ._accel import njit
from .errors import DomainError, ValidationError
from .polynomial import PolynomialSpec, evaluate

CIRCLE_TOL = 1e-9
DEFAULT_TAIL_TOL = 1e-12
TWO_PI = 2.0 * math.pi


# tail bounds --------------------------------------------------------------


def _geom_tail(d: int, K: int) -> float:
    """``sum_{k > K} d**-k``."""
    return d ** (-K) / (d - 1)


def _weighted_tail(d: int, K: int) -> float:
    """``sum_{k > K} k d**(-k-1)``."""
    x = 1.0 / d
    return x ** (K + 1) * ((K + 1) - K * x) / (1 - x) ** 2 / d


def _product_tail(head_a: float, tail_a: float, head_b: float, tail_b: float) -> float:
    """Tail of a product of two sums truncated independently."""
    return (head_a + tail_a) * tail_b + tail_a * head_b


def phi_r_tail(d: int, K1: int) -> float:
    return _geom_tail(d, K1)


def _second_order_tail(d: int, lead: float, low: float, K1: int, K2: int, K3: int) -> float:
    s_inf = 1.0 / (d - 1)
    t_inf = 1.0 / (d - 1) ** 2
    s3_tail = _geom_tail(d, K3)
    t2_tail = _weighted_tail(d, K2)
    s1_tail = _geom_tail(d, K1)
    a_tail = _product_tail(s_inf - s3_tail, s3_tail, t_inf - t2_tail, t2_tail)
    b_tail = _product_tail(s_inf - s3_tail, s3_tail, s_inf - s1_tail, s1_tail)
    return lead * a_tail + low * b_tail


def phi_r2_tail(d: int, r: int, K1: int, K2: int, K3: int) -> float:
    return _second_order_tail(d, d * (d - 1) / 2.0, float(r), K1, K2, K3)


def phi_rs_tail(d: int, r: int, s: int, K1: int, K2: int, K3: int) -> float:
    return _second_order_tail(d, float(d * (d - 1)), float(r + s), K1, K2, K3)


def _worst_tail(d: int, K1: int, K2: int, K3: int) -> float:
    worst = phi_r_tail(d, K1)
    worst = max(worst, phi_r2_tail(d, d - 2, K1, K2, K3))
    if d >= 3:
        worst = max(worst, phi_rs_tail(d, d - 3, d - 2, K1, K2, K3))
    return worst


@dataclass(frozen=True)
class SeriesTruncation:
    """Summation caps ``K1, K2, K3`` and the tail bound they guarantee."""

    degree: int
    K1: int
    K2: int
    K3: int
    tail_tol: float

    def __post_init__(self):
        if self.degree < 2:
            raise ValidationError("degree must be >= 2")
        if min(self.K1, self.K2, self.K3) < 1:
            raise ValidationError("summation caps must be >= 1")
        bound = _worst_tail(self.degree, self.K1, self.K2, self.K3)
        if bound > self.tail_tol * (1 + 1e-9):
            raise ValidationError(
                f"caps {self.caps} leave a tail of {bound:.3g} > tail_tol {self.tail_tol:.3g}"
            )

    @property
    def caps(self) -> tuple[int, int, int]:
        return (self.K1, self.K2, self.K3)

    @classmethod
    def for_tolerance(cls, d: int, tail_tol: float = DEFAULT_TAIL_TOL) -> "SeriesTruncation":
        """Smallest common cap ``K1 = K2 = K3`` whose tails are all below ``tail_tol``."""
        if not tail_tol > 0:
            raise ValidationError("tail_tol must be positive")
        K = 1
        while _worst_tail(d, K, K, K) > tail_tol:
            K += 1
        return cls(d, K, K, K, tail_tol)

    @classmethod
    def from_caps(cls, d: int, K1: int, K2: int | None = None, K3: int | None = None):
        K2 = K1 if K2 is None else K2
        K3 = K1 if K3 is None else K3
        return cls(d, K1, K2, K3, _worst_tail(d, K1, K2, K3))

    @classmethod
    def below_tree_depth(cls, d: int, depth: int) -> "SeriesTruncation":
        """Largest common cap whose monomials (and pairwise products) have
        exponents strictly between 0 and ``d**depth``.

        Such truncations integrate to exactly zero against the equidistributed
        depth-``depth`` tree of ``Q``.
        """
        K = 1
        if max_exponent(d, 1, 1, 1) >= d**depth:
            raise ValidationError(f"depth {depth} is too shallow for any truncation")
        while max_exponent(d, K + 1, K + 1, K + 1) < d**depth:
            K += 1
        return cls.from_caps(d, K)

    def tail_r(self) -> float:
        return phi_r_tail(self.degree, self.K1)

    def tail_r2(self, r: int) -> float:
        return phi_r2_tail(self.degree, r, self.K1, self.K2, self.K3)

    def tail_rs(self, r: int, s: int) -> float:
        return phi_rs_tail(self.degree, r, s, self.K1, self.K2, self.K3)


def max_exponent(d: int, K1: int, K2: int, K3: int) -> int:
    """Largest ``|exponent|`` of ``z`` in ``conj(z) * phi`` over all first and
    second order functions, including squares of first-order ones."""
    first = 2 * d**K1
    a_part = d ** (K3 - 1) * (d * d ** (K2 - 1) + d)
    b_part = d ** (K3 - 1) * (d * d ** (K1 - 1) + d)
    return max(first, a_part, b_part)


def _resolve(d: int, trunc: SeriesTruncation | None) -> SeriesTruncation:
    if trunc is None:
        return SeriesTruncation.for_tolerance(d)
    if trunc.degree != d:
        raise ValidationError(f"truncation built for degree {trunc.degree}, not {d}")
    return trunc


def circle_angles(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    dev = np.abs(np.abs(z) - 1.0)
    if np.any(dev > CIRCLE_TOL):
        raise DomainError(
            f"coefficient functions are evaluated on |z| = 1; got |z| off by {dev.max():.3g}"
        )
    return np.angle(z)


# power tables -------------------------------------------------------------


@njit
def _powers_nb(theta, m, d, L):
    n = theta.shape[0]
    g = np.empty((n, L), dtype=np.complex128)
    for p in range(n):
        x = m * theta[p]
        psi = x - TWO_PI * np.floor(x / TWO_PI)
        for k in range(L):
            g[p, k] = complex(np.cos(psi), -np.sin(psi))
            x = d * psi
            psi = x - TWO_PI * np.floor(x / TWO_PI)
    return g


def _powers_np(theta, m, d, L):
    g = np.empty((theta.size, L), dtype=np.complex128)
    x = m * theta
    psi = x - TWO_PI * np.floor(x / TWO_PI)
    for k in range(L):
        g[:, k] = np.cos(psi) - 1j * np.sin(psi)
        x = d * psi
        psi = x - TWO_PI * np.floor(x / TWO_PI)
    return g


def circle_powers(theta: np.ndarray, m: int, d: int, L: int) -> np.ndarray:
    """``g[:, k] = exp(-1j * m * d**k * theta)`` for ``k < L``."""
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    if _accel.use_numba():
        return _powers_nb(theta, float(m), float(d), L)
    return _powers_np(theta, float(m), float(d), L)


# first/second-order sums --------------------------------------------------


def _first_order_sum(g: np.ndarray, d: int, K1: int) -> np.ndarray:
    w = float(d) ** -np.arange(1, K1 + 1)
    return g[:, :K1] @ w


@njit
def _second_order_nb(gx, gy, d, K1, K2, K3):
    n = gx.shape[0]
    A = np.zeros(n, dtype=np.complex128)
    B = np.zeros(n, dtype=np.complex128)
    K = max(K1, K2) + 1
    w = np.empty(K)
    for i in range(K):
        w[i] = d ** (-float(i))
    cy = np.empty(K2, dtype=np.complex128)
    for p in range(n):
        acc_a = 0j
        acc_b = 0j
        for k3 in range(1, K3 + 1):
            c = k3 - 1
            run = 0j
            for j in range(K2):
                run += w[j] * gy[p, c + j]
                cy[j] = run
            inner = 0j
            for i in range(K2):
                inner += w[i] * gx[p, c + i] * cy[K2 - 1 - i]
            acc_a += d ** (-float(k3) - 2.0) * inner
            sb = 0j
            for k1 in range(1, K1 + 1):
                sb += w[k1] * gx[p, c + k1 - 1]
            acc_b += d ** (-float(k3)) * gy[p, c] * sb
        A[p] = acc_a
        B[p] = acc_b
    return A, B


def _second_order_np(gx, gy, d, K1, K2, K3):
    n = gx.shape[0]
    A = np.zeros(n, dtype=np.complex128)
    B = np.zeros(n, dtype=np.complex128)
    w = float(d) ** -np.arange(max(K1, K2) + 1)
    for k3 in range(1, K3 + 1):
        c = k3 - 1
        x = gx[:, c : c + K2] * w[:K2]
        cy = np.cumsum(gy[:, c : c + K2] * w[:K2], axis=1)
        A += float(d) ** (-k3 - 2.0) * np.sum(x * cy[:, ::-1], axis=1)
        sb = gx[:, c : c + K1] @ w[1 : K1 + 1]
        B += float(d) ** (-float(k3)) * gy[:, c] * sb
    return A, B


def second_order_sums(gx, gy, d, K1, K2, K3):
    """The two lacunary sums shared by the second-order functions.

    ``A = sum_{k3} d^-k3 sum_{k2} d^-(k2+1) sum_{k1<=k2} gx[k3+k1-2] gy[k3+k2-k1-1]``
    and ``B = sum_{k3} d^-k3 gy[k3-1] sum_{k1<=K1} d^-k1 gx[k3+k1-2]``.
    """
    if _accel.use_numba():
        return _second_order_nb(gx, gy, float(d), K1, K2, K3)
    return _second_order_np(gx, gy, d, K1, K2, K3)


# public evaluators --------------------------------------------------------


def _table_length(t: SeriesTruncation) -> int:
    return t.K3 + max(t.K1, t.K2)


class CoefficientTable:
    """All coefficient functions of one degree at a fixed set of circle points.

    Power tables are shared across functions, which is what makes integrating
    the full second-order expansion over large point clouds affordable.
    """

    def __init__(self, d: int, z, trunc: SeriesTruncation | None = None):
        if d < 2:
            raise ValidationError("degree must be >= 2")
        self.d = d
        self.trunc = _resolve(d, trunc)
        self.z = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
        self.theta = circle_angles(self.z)
        self._g: dict[int, np.ndarray] = {}

    def _powers(self, r: int) -> np.ndarray:
        if r not in self._g:
            self._g[r] = circle_powers(self.theta, self.d - r, self.d, _table_length(self.trunc))
        return self._g[r]

    def _check_r(self, r: int) -> None:
        if not 0 <= r <= self.d - 2:
            raise DomainError(f"index r={r} outside 0..{self.d - 2}")

    def phi_r(self, r: int) -> np.ndarray:
        self._check_r(r)
        return -self.z * _first_order_sum(self._powers(r), self.d, self.trunc.K1)

    def phi_r2(self, r: int) -> np.ndarray:
        self._check_r(r)
        d, t = self.d, self.trunc
        g = self._powers(r)
        A, B = second_order_sums(g, g, d, t.K1, t.K2, t.K3)
        return -self.z * (d * (d - 1) / 2.0 * A - r * B)

    def phi_rs(self, r: int, s: int) -> np.ndarray:
        self._check_r(r)
        self._check_r(s)
        if not r < s:
            raise DomainError(f"phi_rs needs r < s, got r={r}, s={s}")
        d, t = self.d, self.trunc
        gr, gs = self._powers(r), self._powers(s)
        A, _ = second_order_sums(gr, gs, d, t.K1, t.K2, t.K3)
        _, B_r = second_order_sums(gs, gr, d, t.K1, 1, t.K3)
        _, B_s = second_order_sums(gr, gs, d, t.K1, 1, t.K3)
        return -self.z * (d * (d - 1) * A - r * B_r - s * B_s)

    @cached_property
    def first(self) -> list[np.ndarray]:
        return [self.phi_r(r) for r in range(self.d - 1)]

    @cached_property
    def diagonal(self) -> list[np.ndarray]:
        return [self.phi_r2(r) for r in range(self.d - 1)]

    @cached_property
    def cross(self) -> dict[tuple[int, int], np.ndarray]:
        return {
            (r, s): self.phi_rs(r, s)
            for r in range(self.d - 1)
            for s in range(r + 1, self.d - 1)
        }


def _shape_like(z, values: np.ndarray):
    if np.ndim(z) == 0:
        return complex(values[0])
    return values.reshape(np.shape(z))


def phi_r(d: int, r: int, z, trunc: SeriesTruncation | None = None):
    """Truncated ``phi_r(z)``; the error is at most ``d**-K1 / (d - 1)``."""
    return _shape_like(z, CoefficientTable(d, z, trunc).phi_r(r))


def phi_r2(d: int, r: int, z, trunc: SeriesTruncation | None = None):
    """Truncated ``phi_{r^2}(z)``; error bounded by :meth:`SeriesTruncation.tail_r2`."""
    return _shape_like(z, CoefficientTable(d, z, trunc).phi_r2(r))


def phi_rs(d: int, r: int, s: int, z, trunc: SeriesTruncation | None = None):
    """Truncated ``phi_{rs}(z)`` for ``r < s``; error bounded by :meth:`SeriesTruncation.tail_rs`."""
    return _shape_like(z, CoefficientTable(d, z, trunc).phi_rs(r, s))


@dataclass(frozen=True)
class ConjugacyApprox:
    """Low-order expansion of the conjugacy from the circle to the Julia set."""

    spec: PolynomialSpec
    order: int
    trunc: SeriesTruncation | None = None

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValidationError("order must be 1 or 2")

    def __call__(self, z):
        d = self.spec.degree
        A = self.spec.coeffs
        tab = CoefficientTable(d, z, self.trunc)
        out = tab.z.copy()
        for r in range(d - 1):
            if A[r] != 0:
                out += tab.first[r] * A[r]
        if self.order == 2:
            for r in range(d - 1):
                if A[r] != 0:
                    out += tab.diagonal[r] * A[r] ** 2
            for (r, s), v in tab.cross.items():
                if A[r] != 0 and A[s] != 0:
                    out += v * (A[r] * A[s])
        return _shape_like(z, out)


def conjugacy_approx(spec: PolynomialSpec, z, order: int = 1, trunc: SeriesTruncation | None = None):
    return ConjugacyApprox(spec, order, trunc)(z)


def conjugacy_residual(spec: PolynomialSpec, z, order: int = 1, trunc: SeriesTruncation | None = None):
    """``|Phi(z**d) - P(Phi(z))|`` for the truncated expansion."""
    phi = ConjugacyApprox(spec, order, trunc)
    zz = np.asarray(z, dtype=np.complex128)
    res = np.abs(phi(zz**spec.degree) - evaluate(spec, phi(zz)))
    return float(res) if np.ndim(z) == 0 else res
