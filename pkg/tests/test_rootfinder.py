import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapjulia import rootfinder
from lyapjulia.errors import RootFindingFailed, ValidationError
from lyapjulia.rootfinder import roots, roots_batch, sort_by_argument, verify_vieta


def _sorted(z):
    return np.sort_complex(np.round(np.asarray(z), 12))


def test_examples():
    assert np.allclose(_sorted(roots([-1, 0, 1]).roots), [-1, 1])
    cube = roots([-1, 0, 0, 1]).roots
    assert np.allclose(_sorted(cube), _sorted([1, cmath.exp(2j * np.pi / 3), cmath.exp(-2j * np.pi / 3)]))
    fp = np.sort(roots([0.1, -1, 1]).roots.real)
    assert np.allclose(fp, [(1 - np.sqrt(0.6)) / 2, (1 + np.sqrt(0.6)) / 2], atol=1e-14)


def test_vieta_examples():
    c = [-1, 0, 1]
    assert verify_vieta(roots(c), c) <= 1e-15
    c = [-1, 0, 0, 1]
    assert verify_vieta(roots(c), c) <= 1e-12


def test_multiple_root_is_snapped():
    rs = roots([0, 0, 0, 0, 5])
    assert np.all(rs.roots == rs.roots[0]) and abs(rs.roots[0]) < 1e-8


def test_invalid_input():
    with pytest.raises(ValidationError):
        roots([1])
    with pytest.raises(ValidationError):
        roots([1, 2, 0])
    with pytest.raises(ValidationError):
        roots([1, np.inf, 1])


def test_failure_is_loud():
    # one sweep cannot reach the residual contract from the starting circle
    with pytest.raises(RootFindingFailed) as info:
        roots_batch(np.array([[0.3 + 0.1j, -1.2, 0.5j, 0.7, 1.0]]), max_iter=1)
    assert info.value.index == 0


def test_against_numpy_roots_oracle():
    rng = np.random.default_rng(5)
    for _ in range(200):
        d = rng.integers(2, 9)
        c = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        ours = roots(c).roots
        ref = np.roots(c[::-1])
        # every oracle root has a partner among ours
        dist = np.abs(ours[:, None] - ref[None, :]).min(axis=0)
        assert dist.max() < 1e-7


@st.composite
def monic(draw, dmin=2, dmax=8):
    d = draw(st.integers(dmin, dmax))
    c = [cmath.rect(draw(st.floats(0, 0.999)), draw(st.floats(0, 2 * np.pi))) for _ in range(d)]
    return np.array(c + [1.0], dtype=complex)


@settings(max_examples=300, deadline=None)
@given(c=monic())
def test_residual_and_vieta_contract(c):
    rs = roots(c)
    assert np.all(rs.residuals <= 1e-10 * max(1.0, np.abs(c).max()))
    assert verify_vieta(rs, c) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(c=monic(2, 6), t=st.floats(0, 2 * np.pi), u=st.floats(0, 2 * np.pi))
def test_preimages_move_continuously(c, t, u):
    # P(z) - zeta with zeta outside the filled Julia set, so no critical value nearby
    c = c.copy()
    c[:-1] *= 0.5
    c[-2] = 0.0
    zeta = (1.5 + np.abs(c[:-1]).sum()) * cmath.exp(1j * u)
    q = c.copy()
    q[0] -= zeta
    base = roots(q).roots
    q[0] -= 1e-6 * cmath.exp(1j * t)
    moved = roots(q).roots
    assert np.abs(base[:, None] - moved[None, :]).min(axis=1).max() <= 1e-3


def test_backends_agree(backend):
    rng = np.random.default_rng(9)
    c = rng.normal(size=(300, 6)) + 1j * rng.normal(size=(300, 6))
    z, res, _ = roots_batch(c)
    with rootfinder._accel.use_backend("numpy"):
        zr, _, _ = roots_batch(c)
    assert np.max(np.abs(sort_by_argument(z) - sort_by_argument(zr))) < 1e-12
    assert np.all(res <= 1e-10 * np.maximum(1, np.abs(c).max(axis=1))[:, None])


def test_sort_by_argument_rules():
    z = np.array([[-1, 1 - 1e-20j, 2j, 1j]])
    out = sort_by_argument(z)[0]
    # the tiny negative imaginary part sits at the cut and is treated as angle 0
    assert out[0] == 1 - 1e-20j
    assert list(out[1:]) == [1j, 2j, -1]


@pytest.mark.skipif(not rootfinder._accel.HAVE_NUMBA, reason="numba missing")
def test_numba_sort_matches_numpy():
    rng = np.random.default_rng(2)
    for _ in range(200):
        z = rng.normal(size=5) + 1j * rng.normal(size=5)
        z[rng.integers(5)] = z[0] * 2  # equal arguments, different moduli
        w = z.copy()
        rootfinder.sort_by_argument_nb(w)
        assert np.array_equal(w, sort_by_argument(z[None, :])[0])
