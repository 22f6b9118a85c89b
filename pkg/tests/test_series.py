import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapjulia._accel import HAVE_NUMBA, use_backend
from lyapjulia.errors import DomainError, ValidationError
from lyapjulia.polynomial import PolynomialSpec
from lyapjulia.series import (
    SeriesTruncation,
    conjugacy_approx,
    conjugacy_residual,
    phi_r,
    phi_r2,
    phi_rs,
)


# literal transcription with integer exponents, evaluated at roots of unity
def _root(p, q, e):
    return cmath.exp(2j * math.pi * ((p * e) % q) / q)


def _lit_phi_r(d, r, p, q, K1):
    z = _root(p, q, 1)
    tot = sum(d ** (-k) * _root(p, q, -(d**k - r * d ** (k - 1))) for k in range(1, K1 + 1))
    return -z * tot


def _lit_a(d, r, s, p, q, K2, K3):
    tot = 0j
    for k3 in range(1, K3 + 1):
        for k2 in range(1, K2 + 1):
            for k1 in range(1, k2 + 1):
                e = d**k3 - d ** (k3 - 1) + d ** (k3 - 1) * (
                    d**k1 - r * d ** (k1 - 1) + d ** (k2 - k1 + 1) - s * d ** (k2 - k1) - d + 1
                )
                tot += d ** (-k3) * d ** (-(k2 + 1)) * _root(p, q, -e)
    return tot


def _lit_b(d, r, s, p, q, K1, K3):
    # sum d^-k3 d^-k1 z^-(d^k3 - d^(k3-1) + d^(k3-1)(d^k1 - r d^(k1-1) - s + 1))
    tot = 0j
    for k3 in range(1, K3 + 1):
        for k1 in range(1, K1 + 1):
            e = d**k3 - d ** (k3 - 1) + d ** (k3 - 1) * (d**k1 - r * d ** (k1 - 1) - s + 1)
            tot += d ** (-k3) * d ** (-k1) * _root(p, q, -e)
    return tot


def _lit_phi_r2(d, r, p, q, K1, K2, K3):
    z = _root(p, q, 1)
    return -z * (d * (d - 1) / 2 * _lit_a(d, r, r, p, q, K2, K3) - r * _lit_b(d, r, r, p, q, K1, K3))


def _lit_phi_rs(d, r, s, p, q, K1, K2, K3):
    z = _root(p, q, 1)
    return -z * (
        d * (d - 1) * _lit_a(d, r, s, p, q, K2, K3)
        - r * _lit_b(d, s, r, p, q, K1, K3)
        - s * _lit_b(d, r, s, p, q, K1, K3)
    )


CASES = [(2, 0, 3, 7), (3, 1, 5, 11), (3, 0, 2, 13), (4, 2, 7, 17), (5, 1, 4, 9)]


@pytest.mark.parametrize("d,r,p,q", CASES)
def test_matches_literal_transcription(d, r, p, q, backend):
    K1, K2, K3 = 7, 6, 5
    tr = SeriesTruncation.from_caps(d, K1, K2, K3)
    z = cmath.exp(2j * math.pi * p / q)
    assert phi_r(d, r, z, tr) == pytest.approx(_lit_phi_r(d, r, p, q, K1), abs=1e-13)
    assert phi_r2(d, r, z, tr) == pytest.approx(_lit_phi_r2(d, r, p, q, K1, K2, K3), abs=1e-13)
    if d >= 3:
        for s in range(r + 1, d - 1):
            assert phi_rs(d, r, s, z, tr) == pytest.approx(_lit_phi_rs(d, r, s, p, q, K1, K2, K3), abs=1e-13)


@pytest.mark.parametrize("d", range(2, 9))
def test_closed_forms_at_one(d):
    for r in range(d - 1):
        assert phi_r(d, r, 1) == pytest.approx(-1 / (d - 1), abs=1e-12)
        assert phi_r2(d, r, 1) == pytest.approx(-(d - 2 * r) / (2 * (d - 1) ** 2), abs=1e-11)
        for s in range(r + 1, d - 1):
            assert phi_rs(d, r, s, 1) == pytest.approx(-(d - r - s) / (d - 1) ** 2, abs=1e-11)


def test_documented_examples():
    assert phi_r(2, 0, -1) == pytest.approx(1, abs=1e-12)
    assert phi_r(2, 0, 1j) == pytest.approx(0, abs=1e-12)
    assert phi_r2(2, 0, 1) == pytest.approx(-1, abs=1e-11)
    assert phi_r2(3, 1, 1) == pytest.approx(-1 / 8, abs=1e-11)
    assert phi_rs(3, 0, 1, 1) == pytest.approx(-1 / 2, abs=1e-11)
    assert phi_rs(4, 0, 2, 1) == pytest.approx(-2 / 9, abs=1e-11)


def test_domain_errors():
    with pytest.raises(DomainError):
        phi_r(2, 0, 1.01)
    with pytest.raises(DomainError):
        phi_r(3, 2, 1)
    with pytest.raises(DomainError):
        phi_rs(3, 1, 0, 1)
    with pytest.raises(DomainError):
        phi_rs(3, 1, 1, 1)
    with pytest.raises(ValidationError):
        SeriesTruncation(2, 3, 3, 3, 1e-12)
    with pytest.raises(ValidationError):
        SeriesTruncation.from_caps(3, 0)


def test_default_caps_meet_tolerance():
    for d, K in {2: 45, 3: 28, 4: 22, 5: 19}.items():
        t = SeriesTruncation.for_tolerance(d)
        assert t.caps == (K, K, K)
        assert max(t.tail_r(), t.tail_r2(d - 2)) <= 1e-12


def test_below_tree_depth_caps():
    assert SeriesTruncation.below_tree_depth(2, 14).K1 == 7
    assert SeriesTruncation.below_tree_depth(3, 9).K1 == 4


@settings(max_examples=60, deadline=None)
@given(d=st.integers(2, 6), K=st.integers(2, 8), t=st.floats(0, 2 * math.pi), data=st.data())
def test_tail_bound_honesty(d, K, t, data):
    r = data.draw(st.integers(0, d - 2))
    z = cmath.exp(1j * t)
    lo, hi = SeriesTruncation.from_caps(d, K), SeriesTruncation.from_caps(d, K + 10)
    assert abs(phi_r(d, r, z, lo) - phi_r(d, r, z, hi)) <= lo.tail_r() * (1 + 1e-9) + 1e-15
    assert abs(phi_r2(d, r, z, lo) - phi_r2(d, r, z, hi)) <= lo.tail_r2(r) * (1 + 1e-9) + 1e-14
    if r < d - 2:
        s = d - 2
        assert abs(phi_rs(d, r, s, z, lo) - phi_rs(d, r, s, z, hi)) <= lo.tail_rs(r, s) * (1 + 1e-9) + 1e-14


def test_conjugacy_examples():
    Q = PolynomialSpec.monomial(3)
    z = cmath.exp(0.7j)
    assert conjugacy_approx(Q, z, 2) == z
    assert conjugacy_residual(Q, z, 2) <= 1e-14
    assert conjugacy_approx(PolynomialSpec(2, (0.1,)), 1, 1) == pytest.approx(0.9, abs=1e-12)
    assert conjugacy_approx(PolynomialSpec(3, (0.1, 0.1)), 1, 1) == pytest.approx(0.9, abs=1e-12)
    with pytest.raises(ValidationError):
        conjugacy_approx(Q, z, 3)


def test_residual_scaling_examples():
    z = cmath.exp(1j)
    r1 = [conjugacy_residual(PolynomialSpec(2, (t * 0.2,)), z, 1) for t in (1, 0.5)]
    r2 = [conjugacy_residual(PolynomialSpec(2, (t * 0.2,)), z, 2) for t in (1, 0.5)]
    assert 0.2 <= r1[1] / r1[0] <= 0.3
    assert 0.1 <= r2[1] / r2[0] <= 0.16


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba missing")
def test_backends_agree():
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 257))
    out = {}
    for name in ("numba", "numpy"):
        with use_backend(name):
            out[name] = np.concatenate([phi_r2(4, 1, z), phi_rs(4, 0, 2, z), phi_r(4, 2, z)])
    assert np.max(np.abs(out["numba"] - out["numpy"])) <= 1e-13
