import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfspace_concentration.analytic import GaussianSpec
from halfspace_concentration.core import ConcentrationProblem, Dataset, DomainError, HalfSpace, LpMetric
from halfspace_concentration.data import sample_gaussian
from halfspace_concentration.geometry import empirical_measure
from halfspace_concentration.search import (AXIS, SearchConfig, adv_risk, order_statistic_index,
                                            quantile_bias, search_halfspace)
from halfspace_concentration.spectral import axis_limit, eigendecompose, pow_transform, sample_covariance

LINF = LpMetric("inf")


def line(values):
    return Dataset(np.asarray(values, dtype=float).reshape(-1, 1))


def test_quantile_bias_examples():
    data = line([3, 1, 4, 2])
    w = [1.0]
    assert quantile_bias(data, w, 0.5) == -2.0
    assert empirical_measure(data, HalfSpace(w, -2.0)) == 0.5
    assert quantile_bias(data, w, 0.01) == -1.0
    assert empirical_measure(data, HalfSpace(w, -1.0)) == 0.25
    flat = line([1.5] * 7)
    for a in (0.1, 0.5, 0.9):
        b = quantile_bias(flat, w, a)
        assert b == -1.5 and empirical_measure(flat, HalfSpace(w, b)) == 1.0
    with pytest.raises(DomainError):
        quantile_bias(data, w, 1.0)


def test_order_statistic_guards_round_off():
    assert order_statistic_index(0.07, 100) == 7
    assert order_statistic_index(0.5, 4) == 2
    assert order_statistic_index(0.01, 4) == 1
    assert order_statistic_index(0.999, 10) == 10
    # one ulp above 0.05: 3/60 would fall short of alpha
    assert order_statistic_index(0.05000000000000001, 60) == 4
    assert order_statistic_index(0.05, 60) == 3


def test_adv_risk_examples():
    data = line([-1.0, 0.05, 0.2])
    h = HalfSpace([1.0], 0.0)
    assert adv_risk(data, h, ConcentrationProblem(0.3, 0.0, LINF)) == empirical_measure(data, h)
    assert adv_risk(data, h, ConcentrationProblem(0.3, 0.1, LINF)) == pytest.approx(2 / 3)
    assert adv_risk(data, h, ConcentrationProblem(0.3, 10.0, LINF)) == 1.0


def test_config_validation():
    p = ConcentrationProblem(0.5, 1.0)
    for bad in ((), (2, 4), (1, 1, 2), (1, 4, 2)):
        with pytest.raises(ValueError):
            SearchConfig(p, bad)
    assert SearchConfig(p, [1, 3]).exponent_schedule == (1, 3)


def test_alpha_near_one_gives_whole_space(small_data):
    cfg = SearchConfig(ConcentrationProblem(0.999, 0.5, LINF))
    r = search_halfspace(small_data, cfg)
    assert r.train_risk == 1.0 and r.train_adv_risk == 1.0


def test_zero_epsilon_hits_constraint_floor(small_data):
    cfg = SearchConfig(ConcentrationProblem(0.3, 0.0, LINF))
    r = search_halfspace(small_data, cfg)
    assert r.train_adv_risk == r.train_risk == 60 / 200
    # every candidate ties, so the tie-break picks the smallest l1 norm, which is 1 (axis-like)
    assert np.abs(r.half_space.w).sum() == 1.0
    assert r.component == 0 and r.sign == 1


def _brute_force_search(train, cfg):
    """Score every candidate one at a time through the public helpers."""
    pcs = eigendecompose(sample_covariance(train))
    best = None
    for c in range(len(pcs)):
        v = pcs[c]
        cands = [(s, v if s == 1 else pow_transform(v, s)) for s in cfg.exponent_schedule]
        if cfg.include_axis_limit:
            cands.append((AXIS, axis_limit(v)))
        for rank, (s, w) in enumerate(cands):
            for sign_rank, sign in enumerate((1, -1)):
                ws = sign * w
                h = HalfSpace(ws, quantile_bias(train, ws, cfg.problem.alpha))
                key = (adv_risk(train, h, cfg.problem), cfg.problem.metric.dual_norm(ws), c, rank, sign_rank)
                if best is None or key < best[0]:
                    best = (key, h, s, sign)
    return best


@pytest.mark.parametrize("metric", [LpMetric(1), LpMetric(2), LpMetric(4), LINF])
def test_batched_search_matches_candidate_loop(metric):
    rng = np.random.default_rng(9)
    train = Dataset(rng.normal(size=(150, 6)) * [3, 1, 1, 0.5, 2, 1])
    cfg = SearchConfig(ConcentrationProblem(0.2, 0.4, metric), (1, 2, 4, 8))
    r = search_halfspace(train, cfg)
    key, h, s, sign = _brute_force_search(train, cfg)
    assert r.train_adv_risk == key[0]
    assert (r.component, r.exponent, r.sign) == (key[2], s, sign)
    np.testing.assert_array_equal(r.half_space.w, h.w)
    assert r.half_space.b == h.b
    assert r.candidates == 6 * 5 * 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.95), st.floats(0.0, 2.0))
def test_feasible_and_deterministic(seed, alpha, eps):
    train = Dataset(np.random.default_rng(seed).normal(size=(60, 4)))
    cfg = SearchConfig(ConcentrationProblem(alpha, eps, LINF))
    r1 = search_halfspace(train, cfg)
    r2 = search_halfspace(train, cfg)
    assert r1.train_risk >= alpha
    assert r1.train_adv_risk >= r1.train_risk
    np.testing.assert_array_equal(r1.half_space.w, r2.half_space.w)
    assert r1.half_space.b == r2.half_space.b


def test_train_adv_risk_bounds_any_feasible_candidate(small_data):
    cfg = SearchConfig(ConcentrationProblem(0.2, 0.5, LINF))
    r = search_halfspace(small_data, cfg)
    rng = np.random.default_rng(1)
    for _ in range(50):
        w = rng.normal(size=small_data.n)
        w /= np.linalg.norm(w)
        h = HalfSpace(w, quantile_bias(small_data, w, 0.2))
        # random feasible candidates are not expected to beat the search by a wide margin
        assert adv_risk(small_data, h, cfg.problem) >= r.train_adv_risk - 0.1


@pytest.mark.slow
def test_spherical_gaussian_winner_is_near_axis():
    train = sample_gaussian(GaussianSpec.standard(784), 30000, seed=0)
    r = search_halfspace(train, SearchConfig(ConcentrationProblem(0.5, 1.0, LINF)))
    assert np.abs(r.half_space.w).sum() <= 1.5
    assert r.train_adv_risk == pytest.approx(0.8418, abs=0.01)
