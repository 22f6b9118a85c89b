"""Labelled inverse branches and backward orbits.

The ``d`` preimages of a point are labelled ``1..d`` by principal argument in
``[0, 2*pi)``, ties broken by modulus.  Near ``Q(z) = z**d`` this labels the
``d`` arcs of the circle in counter-clockwise order starting at angle 0, so a
probability vector indexes arcs.  Labels can swap when two preimages have
arguments within ~1e-8 of each other; nothing here tracks branches by
continuation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rootfinder
from .errors import NoConvergence, NotRepelling, ValidationError
from .polynomial import PolynomialSpec, derivative_at, escape_radius, evaluate

FIXED_POINT_TOL = 1e-13
MAX_FIXED_POINT_STEPS = 10_000


@dataclass(frozen=True)
class BranchLabeling:
    zeta: complex
    labeled_points: np.ndarray

    def __getitem__(self, j: int) -> complex:
        """Preimage on branch ``j`` (1-based)."""
        if not 1 <= j <= len(self.labeled_points):
            raise IndexError(f"branch {j} outside 1..{len(self.labeled_points)}")
        return complex(self.labeled_points[j - 1])


@dataclass(frozen=True)
class BackwardOrbitState:
    start: complex
    current: complex
    word: tuple[int, ...] = field(default=())

    @property
    def depth(self) -> int:
        return len(self.word)

    @classmethod
    def at(cls, zeta: complex) -> "BackwardOrbitState":
        return cls(start=complex(zeta), current=complex(zeta))


def default_start(spec: PolynomialSpec) -> complex:
    """Real point on the escape circle; burn-in makes the choice immaterial."""
    return complex(escape_radius(spec), 0.0)


def preimage_coeffs(spec: PolynomialSpec, zetas) -> np.ndarray:
    """Rows of ascending coefficients of ``P(z) - zeta``."""
    zetas = np.atleast_1d(np.asarray(zetas, dtype=np.complex128))
    c = np.tile(spec.full_coeffs(), (zetas.size, 1))
    c[:, 0] -= zetas
    return c


def preimages_batch(spec: PolynomialSpec, zetas) -> np.ndarray:
    """Labelled preimages of many points, shape ``(len(zetas), d)``."""
    z, _, _ = rootfinder.roots_batch(preimage_coeffs(spec, zetas))
    return rootfinder.sort_by_argument(z)


def preimages(spec: PolynomialSpec, zeta: complex) -> BranchLabeling:
    zeta = complex(zeta)
    if not np.isfinite(zeta):
        raise ValidationError("zeta must be finite")
    return BranchLabeling(zeta, preimages_batch(spec, [zeta])[0])


def step_backward(spec: PolynomialSpec, state: BackwardOrbitState, j: int) -> BackwardOrbitState:
    d = spec.degree
    if not 1 <= j <= d:
        raise ValidationError(f"branch {j} outside 1..{d}")
    nxt = preimages(spec, state.current)[j]
    return BackwardOrbitState(state.start, nxt, state.word + (j,))


def backward_orbit(spec: PolynomialSpec, zeta: complex, word) -> BackwardOrbitState:
    """Apply the branches of ``word`` in order, first letter first."""
    state = BackwardOrbitState.at(zeta)
    for j in word:
        state = step_backward(spec, state, int(j))
    return state


def branch_fixed_point(
    spec: PolynomialSpec,
    j: int,
    tol: float = FIXED_POINT_TOL,
    max_steps: int = MAX_FIXED_POINT_STEPS,
) -> complex:
    """Limit of iterating inverse branch ``j`` from the default start.

    The limit is a repelling fixed point of ``P``.  Raises
    :class:`NoConvergence` if successive points do not settle within
    ``max_steps`` and :class:`NotRepelling` if ``|P'| <= 1`` there.
    """
    d = spec.degree
    if not 1 <= j <= d:
        raise ValidationError(f"branch {j} outside 1..{d}")
    z = default_start(spec)
    for _ in range(max_steps):
        nxt = complex(preimages_batch(spec, [z])[0, j - 1])
        if abs(nxt - z) < tol:
            z = nxt
            break
        z = nxt
    else:
        raise NoConvergence(f"branch {j} iteration did not settle in {max_steps} steps")
    if abs(evaluate(spec, z) - z) > 1e-10:
        raise NoConvergence(f"branch {j} limit {z} is not a fixed point")
    if abs(derivative_at(spec, z)) <= 1.0:
        raise NotRepelling(f"branch {j} limit {z} has |P'| <= 1")
    return z


def monomial_branch_fixed_point(d: int, j: int) -> complex:
    """Closed form for ``Q``: branch ``j`` of ``z**d`` settles at ``exp(2 pi i (j-1)/(d-1))``."""
    return complex(np.exp(2j * np.pi * (j - 1) / (d - 1)))
