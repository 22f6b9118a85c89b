import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapjulia.backward import (
    BackwardOrbitState,
    backward_orbit,
    branch_fixed_point,
    monomial_branch_fixed_point,
    preimages,
    preimages_batch,
    step_backward,
)
from lyapjulia.errors import ValidationError
from lyapjulia.polynomial import PolynomialSpec, derivative_at, evaluate

Q2, Q3, Q4 = (PolynomialSpec.monomial(d) for d in (2, 3, 4))


def test_preimage_examples():
    lab = preimages(Q2, 1)
    assert lab[1] == pytest.approx(1) and lab[2] == pytest.approx(-1)
    lab = preimages(Q3, 1)
    want = [1, cmath.exp(2j * np.pi / 3), cmath.exp(4j * np.pi / 3)]
    assert np.allclose(lab.labeled_points, want, atol=1e-14)
    lab = preimages(PolynomialSpec(2, (0.1,)), 1)
    assert lab[1] == pytest.approx(np.sqrt(0.9), abs=1e-14)
    assert lab[2] == pytest.approx(-np.sqrt(0.9), abs=1e-14)
    with pytest.raises(IndexError):
        lab[3]


def test_step_examples():
    s = step_backward(Q2, BackwardOrbitState.at(1), 2)
    assert s.current == pytest.approx(-1) and s.word == (2,) and s.depth == 1
    s = step_backward(Q2, BackwardOrbitState.at(-1), 1)
    assert s.current == pytest.approx(1j)
    s = step_backward(Q4, BackwardOrbitState.at(1), 3)
    assert s.current == pytest.approx(-1)
    with pytest.raises(ValidationError):
        step_backward(Q2, BackwardOrbitState.at(1), 3)


def test_fixed_point_examples():
    assert branch_fixed_point(Q2, 1) == pytest.approx(1, abs=1e-12)
    assert branch_fixed_point(Q3, 2) == pytest.approx(-1, abs=1e-12)
    assert branch_fixed_point(PolynomialSpec(2, (0.1,)), 1) == pytest.approx((1 + np.sqrt(0.6)) / 2, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_monomial_fixed_points_are_roots_of_unity(d):
    Q = PolynomialSpec.monomial(d)
    for j in range(1, d + 1):
        z = branch_fixed_point(Q, j)
        assert z == pytest.approx(monomial_branch_fixed_point(d, j), abs=1e-12)
        assert abs(z ** (d - 1) - 1) < 1e-12
        assert abs(derivative_at(Q, z)) == pytest.approx(d, abs=1e-12)


def test_orbit_state_round_trip():
    spec = PolynomialSpec(3, (0.2 - 0.1j, 0.3j))
    word = [1, 3, 2, 2, 1, 3, 3, 1]
    st_ = backward_orbit(spec, 0.7 + 0.2j, word)
    z = st_.current
    for _ in word:
        z = evaluate(spec, z)
    assert abs(z - st_.start) <= len(word) * 1e-8


def test_round_trip_batch():
    # 1000 random targets, random words of length 20
    rng = np.random.default_rng(4)
    spec = PolynomialSpec(2, (0.1 + 0.2j,))
    zeta = 2 * np.sqrt(rng.uniform(size=1000)) * np.exp(2j * np.pi * rng.uniform(size=1000))
    z = zeta.copy()
    for _ in range(20):
        pre = preimages_batch(spec, z)
        z = pre[np.arange(z.size), rng.integers(0, 2, size=z.size)]
    for _ in range(20):
        z = evaluate(spec, z)
    assert np.max(np.abs(z - zeta)) <= 1e-6


def test_labels_sorted_by_argument_and_solve():
    spec = PolynomialSpec(4, (0.1, 0.2j, -0.15))
    rng = np.random.default_rng(0)
    zetas = rng.normal(size=300) + 1j * rng.normal(size=300)
    pre = preimages_batch(spec, zetas)
    ang = np.mod(np.angle(pre), 2 * np.pi)
    assert np.all(np.diff(ang, axis=1) >= -1e-14)
    assert np.max(np.abs(evaluate(spec, pre) - zetas[:, None])) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(t=st.floats(0, 2 * np.pi), r=st.floats(0.2, 2.0), u=st.floats(0, 2 * np.pi))
def test_label_stability(t, r, u):
    spec = PolynomialSpec(3, (0.1, -0.05j))
    zeta = cmath.rect(r, t)
    a = preimages(spec, zeta).labeled_points
    b = preimages(spec, zeta + 1e-9 * cmath.exp(1j * u)).labeled_points
    args = np.mod(np.angle(a), 2 * np.pi)
    gaps = np.abs(np.diff(np.sort(np.concatenate([args, [args.min() + 2 * np.pi]]))))
    if gaps.min() < 1e-8 or min(args.min(), 2 * np.pi - args.max()) < 1e-8:
        return  # documented tie zone
    assert np.max(np.abs(a - b)) < 1e-6
