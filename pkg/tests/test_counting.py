import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randbeta.core import BetaContext
from randbeta.counting import (
    CountQuery,
    count_brute,
    count_dp,
    count_monte_carlo,
    growth_estimate,
    to_csv_row,
)
from randbeta.density import build_density
from randbeta.errors import ContractError, DomainError, ResourceError


def dfs_count(beta, x, n):
    """Plain recursive enumeration, independent of the package code."""
    re = 1 / (beta - 1)

    def go(y, k):
        if y < 0 or y > re:
            return 0
        if k == 0:
            return 1
        return go(beta * y, k - 1) + go(beta * y - 1, k - 1)

    return go(x, n)


def test_single_step_by_region():
    ctx = BetaContext(1.7)
    for x, expect in ((0.2, 1), (0.8, 2), (1.3, 1)):
        assert count_brute(ctx, CountQuery(x, 1)) == expect
        assert count_dp(ctx, CountQuery(x, 1)) == expect


def test_golden_n_plus_one():
    g = BetaContext.golden()
    assert [count_brute(g, CountQuery(1.0, n)) for n in (1, 2, 3)] == [2, 3, 4]
    assert all(count_brute(g, CountQuery(1.0, n)) == n + 1 for n in range(19))
    assert count_dp(g, CountQuery(1.0, 30)) == 31
    assert count_dp(g, CountQuery(1.0, 200), exact=True) == 201
    assert count_dp(g, CountQuery(g.field.element(1), 30), exact=True) == 31


def test_zero_has_one_prefix():
    ctx = BetaContext(1.4)
    for n in (0, 5, 25):
        assert count_brute(ctx, CountQuery(0.0, n)) == 1
        assert count_dp(ctx, CountQuery(0.0, n)) == 1
    assert count_monte_carlo(ctx, CountQuery(0.0, 12), 1000, 1) == (1.0, 0.0)
    assert count_monte_carlo(ctx, CountQuery(0.7, 0), 1000, 1) == (1.0, 0.0)


def test_validation_and_caps():
    ctx = BetaContext(1.5)
    with pytest.raises(DomainError):
        count_dp(ctx, CountQuery(2.5, 3))
    with pytest.raises(ContractError):
        count_dp(ctx, CountQuery(0.5, -1))
    with pytest.raises(ResourceError):
        count_brute(ctx, CountQuery(0.5, 41))
    with pytest.raises(ResourceError):
        count_dp(BetaContext(1.31), CountQuery(1.0, 40), max_states=50)


def test_brute_matches_independent_dfs():
    rng = np.random.default_rng(7)
    for _ in range(40):
        beta = rng.uniform(1.05, 1.95)
        x = rng.uniform(0, 1 / (beta - 1))
        n = int(rng.integers(0, 13))
        assert count_brute(BetaContext(beta), CountQuery(x, n)) == dfs_count(beta, x, n)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.05, 1.95), st.floats(0, 1), st.integers(0, 18))
def test_dp_equals_brute_and_bounds(beta, u, n):
    ctx = BetaContext(beta)
    q = CountQuery(u * ctx.right_end, n)
    c = count_dp(ctx, q)
    assert c == count_brute(ctx, q)
    assert 1 <= c <= 2**n
    if n > 0:
        assert count_dp(ctx, CountQuery(q.x, n - 1)) <= c


def test_monte_carlo_golden():
    g = BetaContext.golden()
    mean, se = count_monte_carlo(g, CountQuery(1.0, 10), 100_000, 42)
    assert abs(mean - 11) <= 3 * se
    assert count_monte_carlo(g, CountQuery(1.0, 10), 1000, 5) == count_monte_carlo(g, CountQuery(1.0, 10), 1000, 5)


def test_growth_estimate_at_atypical_point():
    g = BetaContext.golden()
    dens = build_density(g, 40)
    est = growth_estimate(g, 1.0, 40, dens)
    assert est.count == 41
    assert est.log_count_over_n == pytest.approx(math.log(41) / 40)
    # x = 1 is atypical: the almost-everywhere bound fails here and must not be enforced
    assert not est.exceeds_bound and est.lower_bound > 0
    assert est.log_count_over_n <= math.log(2)
    row = to_csv_row(g, 1.0, 40, est)
    assert row[3] == 41 and len(row) == 7
    with pytest.raises(ContractError):
        growth_estimate(BetaContext(1.5), 1.0, 10, dens)
