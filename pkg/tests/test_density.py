import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randbeta.core import GOLDEN, BetaContext
from randbeta.density import (
    build_density,
    measure_of,
    mu_S,
    parry_density,
    partial_sum,
    symmetry_defect,
    tail_bounds,
)
from randbeta.errors import DomainError
from randbeta.simulate import SimConfig, histogram_l1, run_orbit
from randbeta.stepfn import StepFunction, l1_distance, sup_distance

SQ5 = math.sqrt(5)


def golden_markov_density():
    """Fixed point of the transfer operator on the partition [0,1/b), [1/b,1), [1,b]."""
    b = GOLDEN
    M = np.array([[1, 0.5, 0], [1, 0, 1], [0, 0.5, 1]]) / b
    w, v = np.linalg.eig(M)
    vec = np.real(v[:, np.argmin(np.abs(w - 1))])
    lengths = np.array([1 / b, 1 - 1 / b, b - 1])
    return vec / np.dot(vec, lengths)


def test_depth_zero_is_two_indicators():
    for beta in (1.6, GOLDEN, 1.8):
        ctx = BetaContext(beta)
        raw = partial_sum(ctx, 0)
        assert raw.integrate() == pytest.approx(2.0)
        assert raw(0.5 * ctx.mirror_of_one) == 1
        assert raw(0.5 * (ctx.mirror_of_one + 1)) == 2
        assert raw(0.5 * (1 + ctx.right_end)) == 1


def test_depth_zero_disjoint_indicators_below_three_halves():
    # for beta < 3/2 the mirror of 1 lies right of 1, so the two indicators do not overlap
    ctx = BetaContext(1.3)
    raw = partial_sum(ctx, 0)
    assert raw.to_rows() == [(0.0, 1.0, 1.0), (1.0, ctx.mirror_of_one, 0.0), (ctx.mirror_of_one, ctx.right_end, 1.0)]


def test_evaluate_depth_zero_golden():
    raw = partial_sum(BetaContext.golden(), 0)
    assert raw.evaluate(0.8) == 2 and raw.evaluate(0.1) == 1 and raw.evaluate(1.3) == 1
    with pytest.raises(DomainError):
        raw.evaluate(2.0)
    assert measure_of(raw, 0, raw.domain_right) == pytest.approx(2.0)


def test_golden_density_matches_markov_oracle():
    g = BetaContext.golden()
    res = build_density(g, 40)
    expect = golden_markov_density()
    np.testing.assert_allclose(res.f.breakpoints, [0, 1 / GOLDEN, 1, GOLDEN], atol=1e-12)
    np.testing.assert_allclose(res.f.values, expect, atol=1e-8)
    assert res.f.integrate() == pytest.approx(1, abs=1e-12)
    assert mu_S(g, res) == pytest.approx(expect[1] * (1 - 1 / GOLDEN), abs=1e-8)


def test_parry_golden_exact():
    for depth in (2, 5, 40):
        res = parry_density(BetaContext.golden(), depth)
        np.testing.assert_allclose(res.f.values, [(5 + 3 * SQ5) / 10, (5 + SQ5) / 10], atol=1e-12)
        np.testing.assert_allclose(res.f.breakpoints, [0, 1 / GOLDEN, 1], atol=1e-15)


def test_parry_trivial_and_limits():
    assert parry_density(BetaContext(1.3), 0).f.values.tolist() == [1.0]
    # close to uniform, at distance ~0.0331 (checked with a 50-digit orbit on a fine grid)
    near_two = parry_density(BetaContext(1.99), 60)
    assert l1_distance(near_two.f, StepFunction.constant(1.0, 1.0)) == pytest.approx(0.033121, abs=1e-5)


def test_symmetry_defect_examples():
    assert symmetry_defect(StepFunction([0, 1, 2], [1.0, 0.0])) == 1
    assert symmetry_defect(StepFunction.constant(0.3, 2.0)) == 0
    for beta in (1.2, 1.45, 1.9):
        assert symmetry_defect(build_density(BetaContext(beta), 25).f) <= 1e-10


def test_beta_125_positive_and_matches_simulation():
    ctx = BetaContext(1.25)
    res = build_density(ctx, 30)
    assert np.all(res.f.values > 0)
    hist, _ = run_orbit(SimConfig(1.25, steps=300_000, bins=50, seed=1))
    assert histogram_l1(hist, res.f) <= 0.1


def test_json_export():
    import json

    res = build_density(BetaContext(1.7), 10)
    data = json.loads(res.to_json({"k": 1}))
    assert set(data) == {"meta", "beta", "depth", "C", "sup_error", "l1_error", "breakpoints", "values"}
    assert len(data["breakpoints"]) == len(data["values"]) + 1


@settings(max_examples=25, deadline=None)
@given(st.floats(1.05, 1.95), st.integers(0, 12), st.integers(1, 10))
def test_monotone_truncation_and_tail_bound(beta, n, extra):
    ctx = BetaContext(beta)
    m = min(n + extra, 20)
    lo, hi = partial_sum(ctx, n), partial_sum(ctx, m)
    grid = np.union1d(lo.breakpoints, hi.breakpoints)
    mid = 0.5 * (grid[:-1] + grid[1:])
    assert np.all(hi(mid) >= lo(mid) - 1e-12)
    sup, l1 = tail_bounds(ctx, n)
    assert sup_distance(lo, hi) <= sup + 1e-12
    assert l1_distance(lo, hi) <= l1 + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(1.05, 1.95))
def test_normalized_and_symmetric(beta):
    ctx = BetaContext(beta)
    res = build_density(ctx, 18)
    assert res.f.integrate() == pytest.approx(1, abs=1e-12)
    assert symmetry_defect(res.f) <= 2 * res.sup_error * res.C + 1e-10
    assert 0 < mu_S(ctx, res) < 1
