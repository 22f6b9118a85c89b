import math

import numpy as np
import pytest

from lyapjulia import analysis
from lyapjulia.errors import NonFiniteObservable, TreeTooLarge, ValidationError
from lyapjulia.measure import (
    EmpiricalMeasure,
    ProbabilityVector,
    check_invariance,
    full_preimage_measure,
    integrate,
    load_measure,
    sample_weighted_lyubich,
    save_measure,
)
from lyapjulia.polynomial import PolynomialSpec, evaluate

Q2 = PolynomialSpec.monomial(2)
P01 = PolynomialSpec(2, (0.1,))


def test_probability_vector_validation():
    with pytest.raises(ValidationError):
        ProbabilityVector((0.5, 0.6))
    with pytest.raises(ValidationError):
        ProbabilityVector((1.0, 0.0))
    with pytest.raises(ValidationError):
        ProbabilityVector((1.0,))
    p = ProbabilityVector.concentrated(3, 2, 0.9)
    assert p.p == pytest.approx((0.05, 0.9, 0.05))


def test_mc_monomial_on_circle(backend):
    mu = sample_weighted_lyubich(Q2, ProbabilityVector.uniform(2), 1000, burn_in=60, seed=1)
    assert np.max(np.abs(np.abs(mu.points) - 1)) <= 1e-10
    assert mu.mode == "monte_carlo" and math.fsum(mu.weights) == pytest.approx(1, abs=1e-12)


def test_mc_degenerate_weight_hits_fixed_point(backend):
    mu = sample_weighted_lyubich(P01, ProbabilityVector((1 - 1e-9, 1e-9)), 100, burn_in=200, seed=2)
    assert np.max(np.abs(mu.points - (1 + math.sqrt(0.6)) / 2)) <= 1e-6


def test_mc_deterministic_across_runs_and_threads():
    p = ProbabilityVector((0.3, 0.7))
    a = sample_weighted_lyubich(P01, p, 5000, seed=9)
    b = sample_weighted_lyubich(P01, p, 5000, seed=9)
    c = sample_weighted_lyubich(P01, p, 5000, seed=9, threads=4)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.points, c.points)
    d = sample_weighted_lyubich(P01, p, 5000, seed=10)
    assert not np.array_equal(a.points, d.points)


def test_mc_prefix_stable():
    # chain k depends only on (seed, k), so a longer run extends a shorter one
    p = ProbabilityVector((0.4, 0.6))
    a = sample_weighted_lyubich(P01, p, 3000, seed=4)
    b = sample_weighted_lyubich(P01, p, 5000, seed=4)
    assert np.array_equal(a.points, b.points[:3000])


def test_backends_choose_same_branches():
    from lyapjulia._accel import HAVE_NUMBA, use_backend

    if not HAVE_NUMBA:
        pytest.skip("numba missing")
    spec = PolynomialSpec(3, (0.1, 0.1j))
    p = ProbabilityVector((0.2, 0.5, 0.3))
    with use_backend("numba"):
        a = sample_weighted_lyubich(spec, p, 3000, burn_in=40, seed=5)
    with use_backend("numpy"):
        b = sample_weighted_lyubich(spec, p, 3000, burn_in=40, seed=5)
    assert np.max(np.abs(a.points - b.points)) < 1e-12


def test_mc_input_validation():
    with pytest.raises(ValidationError):
        sample_weighted_lyubich(P01, ProbabilityVector.uniform(3), 10)
    with pytest.raises(ValidationError):
        sample_weighted_lyubich(P01, ProbabilityVector.uniform(2), 0)
    with pytest.raises(ValidationError):
        sample_weighted_lyubich(P01, ProbabilityVector.uniform(2), 10, burn_in=0)


def test_tree_examples():
    mu = full_preimage_measure(Q2, ProbabilityVector((0.3, 0.7)), zeta=1, depth=1)
    assert np.allclose(mu.points, [1, -1]) and np.allclose(mu.weights, [0.3, 0.7])
    mu = full_preimage_measure(Q2, ProbabilityVector.uniform(2), zeta=1, depth=10)
    assert mu.points.size == 1024 and np.all(mu.weights == 1 / 1024)
    assert np.max(np.abs(mu.points**1024 - 1)) < 1e-10
    mu = full_preimage_measure(P01, ProbabilityVector.uniform(2), zeta=1, depth=2)
    assert mu.points.size == 4
    assert np.max(np.abs(evaluate(P01, evaluate(P01, mu.points)) - 1)) <= 1e-9
    with pytest.raises(TreeTooLarge):
        full_preimage_measure(P01, ProbabilityVector.uniform(2), depth=21)


def test_tree_pushforward_is_parent_measure():
    spec = PolynomialSpec(3, (0.1, 0.05j))
    p = ProbabilityVector((0.5, 0.2, 0.3))
    child = full_preimage_measure(spec, p, depth=5)
    parent = full_preimage_measure(spec, p, depth=4)
    fwd = evaluate(spec, child.points).reshape(-1, 3)
    assert np.max(np.abs(fwd - parent.points[:, None])) < 1e-9
    assert np.allclose(child.weights.reshape(-1, 3).sum(axis=1), parent.weights, atol=1e-15)


def test_integrate_examples():
    mu = full_preimage_measure(Q2, ProbabilityVector.uniform(2), zeta=1, depth=10)
    one = integrate(mu, lambda z: np.ones(z.shape))
    assert one.mean == 1 and one.stderr == 0
    assert abs(integrate(mu, lambda z: z).mean) < 1e-12
    val = integrate(mu, lambda z: -analysis.neg_log_derivative(Q2, z))
    assert val.mean == math.log(2) and val.stderr == 0


def test_integrate_scalar_fallback_and_nonfinite():
    mu = full_preimage_measure(Q2, ProbabilityVector.uniform(2), zeta=1, depth=3)
    est = integrate(mu, lambda z: abs(z) if np.isscalar(z) else None)
    assert est.mean == pytest.approx(1)
    with pytest.raises(NonFiniteObservable) as info, np.errstate(divide="ignore", invalid="ignore"):
        integrate(mu, lambda z: 1 / (z - mu.points[2]))
    assert info.value.point == mu.points[2]


def test_mc_stderr_scales_like_sqrt_n():
    p = ProbabilityVector.uniform(2)
    ratios = []
    for seed in range(4):
        a = integrate(sample_weighted_lyubich(P01, p, 4000, burn_in=30, seed=seed), lambda z: z.real)
        b = integrate(sample_weighted_lyubich(P01, p, 8000, burn_in=30, seed=seed + 50), lambda z: z.real)
        ratios.append(a.stderr / b.stderr)
    assert abs(np.mean(ratios) / math.sqrt(2) - 1) <= 0.15


def test_equidistributed_moments_vanish():
    n = 8
    mu = full_preimage_measure(Q2, ProbabilityVector.uniform(2), zeta=1, depth=n)
    m = np.arange(1, 2**n)
    moments = (mu.weights[None, :] * mu.points[None, :] ** m[:, None]).sum(axis=1)
    assert np.max(np.abs(moments)) < 1e-12


def test_invariance_examples():
    tree = full_preimage_measure(Q2, ProbabilityVector.uniform(2), zeta=1, depth=10)
    chk = check_invariance(Q2, tree, [lambda z: z.real])
    assert chk.deviation <= 1e-12 and chk.tolerance == 0
    mc = sample_weighted_lyubich(P01, ProbabilityVector.uniform(2), 10_000, seed=3)
    assert check_invariance(P01, mc, [lambda z: z.real]).passed
    spec = PolynomialSpec(3, (0.1, 0.1))
    mc = sample_weighted_lyubich(spec, ProbabilityVector((0.6, 0.3, 0.1)), 10_000, seed=3)
    assert check_invariance(spec, mc, [np.abs]).passed


def test_save_load_round_trip(tmp_path):
    mu = sample_weighted_lyubich(P01, ProbabilityVector((0.25, 0.75)), 300, seed=8)
    path = tmp_path / "mu.txt"
    save_measure(mu, path)
    back = load_measure(path)
    assert np.array_equal(back.points, mu.points)
    assert np.array_equal(back.weights, mu.weights)
    assert back.meta == mu.meta


def test_empirical_measure_validation():
    with pytest.raises(ValidationError):
        EmpiricalMeasure(np.zeros(2), np.array([0.5, 0.4]))
    with pytest.raises(ValidationError):
        EmpiricalMeasure(np.zeros(2), np.array([1.5, -0.5]))
