"""Monic centred polynomials ``z**d + A_{d-2} z**(d-2) + ... + A_1 z + A_0``.

Coefficients are stored densely for indices ``0..d-2``; the leading 1 and
the vanishing degree ``d-1`` coefficient are implicit, so every
:class:`PolynomialSpec` is monic and centred by construction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rootfinder
from .errors import DegenerateInput, ValidationError

DEFAULT_MAX_ITER = 1000


@dataclass(frozen=True)
class PolynomialSpec:
    degree: int
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        d = self.degree
        if not isinstance(d, (int, np.integer)) or d < 2:
            raise ValidationError(f"degree must be an integer >= 2, got {d!r}")
        coeffs = tuple(complex(c) for c in self.coeffs)
        if len(coeffs) != d - 1:
            raise ValidationError(
                f"degree {d} needs {d - 1} coefficients A_0..A_{d - 2}, got {len(coeffs)}"
            )
        for r, c in enumerate(coeffs):
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValidationError(f"coefficient A_{r} is not finite")
            if c.real**2 + c.imag**2 >= 1.0:
                raise ValidationError(
                    f"coefficient A_{r}={c} violates alpha^2 + beta^2 < 1"
                )
        object.__setattr__(self, "degree", int(d))
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def monomial(cls, d: int) -> "PolynomialSpec":
        """The reference map ``Q(z) = z**d``."""
        return cls(d, (0j,) * (d - 1))

    @classmethod
    def from_parts(
        cls, d: int, alpha: Sequence[float], beta: Sequence[float] | None = None
    ) -> "PolynomialSpec":
        alpha = list(alpha)
        beta = [0.0] * len(alpha) if beta is None else list(beta)
        if len(beta) != len(alpha):
            raise ValidationError("alpha and beta lists differ in length")
        return cls(d, tuple(complex(a, b) for a, b in zip(alpha, beta)))

    @property
    def alpha(self) -> np.ndarray:
        return np.array([c.real for c in self.coeffs])

    @property
    def beta(self) -> np.ndarray:
        return np.array([c.imag for c in self.coeffs])

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.coeffs)

    @property
    def is_monomial(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def full_coeffs(self) -> np.ndarray:
        """Ascending coefficients of length ``d + 1``, zeros made explicit."""
        return np.array(list(self.coeffs) + [0j, 1 + 0j], dtype=np.complex128)

    def __call__(self, z):
        return evaluate(self, z)


@dataclass(frozen=True)
class OrbitClassification:
    bounded: bool
    iterations_used: int
    max_modulus_seen: float


def _ones_like(z):
    if isinstance(z, np.ndarray):
        return np.ones(z.shape, dtype=np.complex128)
    return 1 + 0j


def evaluate(spec: PolynomialSpec, z):
    """``P(z)`` by Horner's rule; works on scalars and arrays."""
    full = spec.full_coeffs()
    acc = _ones_like(z)
    for k in range(spec.degree - 1, -1, -1):
        acc = acc * z + full[k]
    return acc


def derivative_at(spec: PolynomialSpec, z):
    """``P'(z) = d z**(d-1) + sum_r r A_r z**(r-1)``."""
    dc = derivative_coeffs(spec)
    acc = dc[-1] * _ones_like(z)
    for k in range(spec.degree - 2, -1, -1):
        acc = acc * z + dc[k]
    return acc


def escape_radius(spec: PolynomialSpec) -> float:
    """``1 + sum |A_r|``; beyond it every orbit grows strictly to infinity."""
    return 1.0 + float(sum(abs(c) for c in spec.coeffs))


def derivative_coeffs(spec: PolynomialSpec) -> np.ndarray:
    full = spec.full_coeffs()
    return full[1:] * np.arange(1, spec.degree + 1)


def critical_points(spec: PolynomialSpec) -> np.ndarray:
    return rootfinder.roots(derivative_coeffs(spec)).roots


def critical_orbit_bounded(
    spec: PolynomialSpec, max_iter: int = DEFAULT_MAX_ITER
) -> OrbitClassification:
    """Screen for a bounded critical orbit by forward iteration.

    This is a heuristic certificate: "bounded" only means no critical orbit
    left the escape disk within ``max_iter`` steps.
    """
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1")
    radius = escape_radius(spec)
    z = critical_points(spec).astype(np.complex128)
    seen = float(np.max(np.abs(z)))
    for n in range(1, max_iter + 1):
        z = evaluate(spec, z)
        m = float(np.max(np.abs(z)))
        seen = max(seen, m)
        if m > radius:
            return OrbitClassification(False, n, seen)
    return OrbitClassification(True, max_iter, seen)


def normalize_affine(general_coeffs: Sequence[complex], degree: int | None = None):
    """Conjugate an arbitrary degree-d polynomial to monic centred form.

    Parameters
    ----------
    general_coeffs : sequence of complex
        Ascending coefficients ``B_0..B_d``.
    degree : int, optional
        Expected degree; checked against the coefficient count.

    Returns
    -------
    spec : PolynomialSpec
        Coefficients of ``psi^{-1} o P o psi``.
    a, b : complex
        The affine map ``psi(z) = a z + b``; ``a`` is the principal
        ``(d-1)``-th root of ``1 / B_d`` and ``b = -B_{d-1} / (d B_d)``.
    """
    B = np.asarray(general_coeffs, dtype=np.complex128)
    d = B.size - 1 if degree is None else int(degree)
    if B.size != d + 1:
        raise ValidationError(f"degree {d} needs {d + 1} coefficients, got {B.size}")
    if d < 2:
        raise ValidationError("degree must be >= 2")
    if B[d] == 0:
        raise DegenerateInput("leading coefficient B_d is zero")
    a = complex(cmath.exp(-cmath.log(complex(B[d])) / (d - 1)))
    b = complex(-B[d - 1] / (d * B[d]))
    # coefficients of P(a z + b) via Horner on polynomials
    lin = np.array([b, a], dtype=np.complex128)
    comp = np.array([B[d]], dtype=np.complex128)
    for k in range(d - 1, -1, -1):
        comp = np.polynomial.polynomial.polymul(comp, lin)
        comp[0] += B[k]
    comp[0] -= b
    comp /= a
    comp = comp[: d + 1]
    comp[d] = 1.0
    comp[d - 1] = 0.0
    return PolynomialSpec(d, tuple(complex(x) for x in comp[: d - 1])), a, b
