import json

import numpy as np
import pytest

from randbeta.core import GOLDEN, BetaContext, Region, classify, step_random
from randbeta.density import partial_sum
from randbeta.errors import ContractError, ResourceError, TruncationError
from randbeta.stepfn import sup_distance
from randbeta.tower import (
    REFLECTED,
    TowerPoint,
    defect_set,
    in_swap_image,
    index_prefix,
    layout,
    mass_identity,
    natural_extension_step,
    psi_step,
    swap,
    verify_measure_preservation,
)

B = GOLDEN


@pytest.fixture(scope="module")
def golden_tower():
    return layout(BetaContext.golden(), 12)


def test_golden_first_level(golden_tower):
    s0, s1 = golden_tower.sublevels(1)
    assert s0.prefix == (0,) and s0.width == pytest.approx(B) and s0.base_height == 1.0 and s0.rank == 1
    assert s0.thickness == pytest.approx(0.309017, abs=1e-6)
    assert s1.width == pytest.approx(1 / B) and s1.base_height == pytest.approx(1.309017, abs=1e-6) and s1.rank == 2


def test_base_level():
    base = layout(BetaContext(1.37), 0).sublevel(())
    assert (base.width, base.base_height, base.thickness, base.rank) == (1.0, 0.0, 1.0, 1)


def test_beta_125_widths_follow_greedy_orbit():
    tower = layout(BetaContext(1.25), 4)
    widths = [tower.sublevel((1, 0, 0, 0)[:k]).width for k in range(1, 5)]
    # the fourth width is T0(0.390625) since 0.390625 lies in L
    np.testing.assert_allclose(widths, [0.25, 0.3125, 0.390625, 0.48828125])


def test_depth_cap():
    with pytest.raises(ResourceError):
        layout(BetaContext(1.5), 23)
    with pytest.raises(ContractError):
        layout(BetaContext(1.5), 2).sublevel((0, 0, 0))


@pytest.mark.parametrize("beta", [1.2, 1.5, GOLDEN, 1.85])
def test_tiling_and_widths(beta):
    ctx = BetaContext(beta)
    tower = layout(ctx, 8)
    for n in range(9):
        subs = list(tower.sublevels(n))
        lo = sum(beta**-k for k in range(n))
        np.testing.assert_allclose([s.base_height for s in subs], lo + np.arange(2**n) * (2 * beta) ** -n, rtol=1e-14)
        assert sum(s.thickness for s in subs) == pytest.approx(beta**-n)
        assert sorted(s.rank for s in subs) == list(range(1, 2**n + 1))
        assert all(0 <= s.width <= ctx.right_end for s in subs)
    # going up with coin c sends [0, r] (or its S∪R part) onto [0, r(wc)]
    for s in tower.sublevels(7):
        reg = classify(ctx, s.width)
        for c in (0, 1):
            d = 0 if reg is Region.L else 1 if reg is Region.R else c
            assert tower.sublevel(s.prefix + (c,)).width == pytest.approx(beta * s.width - d, abs=1e-12)


def test_down_strips_stack_without_gaps():
    ctx = BetaContext(1.43)
    tower = layout(ctx, 10)
    starts = np.concatenate([s[~np.isnan(s)] for s in tower.down_start])
    assert starts[0] == 0 and np.all(np.diff(starts) > 0)
    assert tower.total_down == pytest.approx(mass_identity(ctx, 10).partial_sum, abs=1e-14)


def test_golden_base_point_drops_to_bottom_strip(golden_tower):
    p = TowerPoint((), 0.3, 0.5)
    q = psi_step(golden_tower, p, 1)
    assert q.prefix == () and q.x == pytest.approx(0.3 * B) and q.y == pytest.approx(0.5 / (2 * B))
    up = psi_step(golden_tower, TowerPoint((), 0.8, 0.5), 1)
    assert up.prefix == (1,) and up.y == pytest.approx(golden_tower.sublevel((1,)).base_height + 0.5 / (2 * B))
    # the first strip dropped from depth 1 sits on top of the base's own strip
    s = golden_tower.sublevel((0,))
    y = s.base_height + 0.1 * s.thickness
    q = psi_step(golden_tower, TowerPoint((0,), 0.2, y), 0)
    assert q.prefix == () and q.y == pytest.approx(1 / (2 * B) + 0.1 * s.thickness / (2 * B))


def test_psi_rejects_outside_points(golden_tower):
    with pytest.raises(ContractError):
        psi_step(golden_tower, TowerPoint((1,), 0.9, 1.4), 0)  # width of "1" is 1/beta
    with pytest.raises(ContractError):
        psi_step(golden_tower, TowerPoint((), 0.5, 0.5), 2)


def test_truncation_error():
    tower = layout(BetaContext(1.9), 2)
    s = tower.sublevel((1, 1))
    with pytest.raises(TruncationError):
        natural_extension_step(tower, TowerPoint((1, 1), 0.5 * s.width + 0.3, s.base_height + 1e-3), 0)


def test_defect_set_examples():
    g = BetaContext.golden()
    tower = layout(g, 3)
    flag, rng = defect_set(g, tower.sublevel((0,)), 0)
    assert flag and rng == pytest.approx((1 / B, 1.0))
    assert defect_set(g, tower.sublevel((0,)), 1) == (False, None)
    assert defect_set(g, tower.sublevel(()), 0) == (False, None)
    assert defect_set(g, tower.sublevel((1,)), 0) == (False, None)  # 1/beta lies in S


def test_swap_on_defect_image(golden_tower):
    g = BetaContext.golden()
    s = golden_tower.sublevel((0,))
    p = TowerPoint((0,), 0.8, s.base_height + 0.1)  # x in S, endpoint beta in R, coin 0
    image = psi_step(golden_tower, p, 0)
    assert image.prefix == (0, 0) and image.x <= g.right_end - 1
    q = natural_extension_step(golden_tower, p, 0)
    assert q.side == REFLECTED and 1 <= q.x <= g.right_end
    assert q.x == step_random(g, p.x, 0)[0]
    assert swap(golden_tower, image).x == pytest.approx(q.x) and swap(golden_tower, image).y == pytest.approx(q.y)


def test_swap_identity_off_image(golden_tower):
    p = TowerPoint((1,), 0.3, golden_tower.sublevel((1,)).base_height + 0.01)
    assert not in_swap_image(golden_tower, p) and swap(golden_tower, p) == p


@pytest.mark.parametrize("beta", [1.3, GOLDEN, 1.9])
def test_natural_extension_agrees_with_random_map_and_swap(beta):
    ctx = BetaContext(beta)
    tower = layout(ctx, 12)
    side, n, idx, x, y, coin = tower.sample(3000, np.random.default_rng(11))
    vec = tower.step_arrays(side, n, idx, x, y, coin)
    for i in range(3000):
        p = TowerPoint(index_prefix(idx[i], n[i]), x[i], y[i], REFLECTED if side[i] else "plain")
        c = int(coin[i])
        try:
            q = natural_extension_step(tower, p, c)
        except TruncationError:
            assert not vec[6][i]
            continue
        assert q.x == step_random(ctx, x[i], c)[0] == vec[3][i]
        assert q.y == pytest.approx(vec[4][i], abs=1e-15)
        # Q after psi reproduces the natural extension, and Q is an involution
        r = swap(tower, psi_step(tower, p, c))
        assert (r.prefix, r.side) == (q.prefix, q.side) and r.x == pytest.approx(q.x, abs=1e-12)
        back = swap(tower, r)
        assert back.prefix == psi_step(tower, p, c).prefix


def test_context_accepted_in_place_of_layout():
    g = BetaContext.golden()
    p = TowerPoint((), 0.8, 0.5)
    assert natural_extension_step(g, p, 1) == natural_extension_step(layout(g, 20), p, 1)


def test_mass_identity_examples():
    g = BetaContext.golden()
    ledger = mass_identity(g, 30)
    assert abs(ledger.partial_sum - 1) <= 1e-6
    assert 1 - ledger.partial_sum <= ledger.gap_bound
    assert np.all(np.diff(ledger.partial_sums) >= 0) and ledger.partial_sum <= 1 + 1e-15
    for beta in (1.1, 1.5, 1.9):
        ctx = BetaContext(beta)
        assert mass_identity(ctx, 0).partial_sum >= 1 / (2 * beta)
        tower = layout(ctx, 14)
        assert mass_identity(ctx, 14).partial_sum == pytest.approx(tower.total_down, abs=1e-14)


@pytest.mark.parametrize("beta", [1.15, 1.6, 1.9])
def test_fiber_measure_is_partial_sum(beta):
    ctx = BetaContext(beta)
    fiber = layout(ctx, 12).fiber_measure()
    raw = partial_sum(ctx, 12)
    assert sup_distance(fiber, raw) <= 1e-12


def test_measure_preservation_report():
    g = BetaContext.golden()
    rep = verify_measure_preservation(g, 20, 10**6, 42)
    assert rep.natural_extension_mismatches == 0
    assert rep.injectivity_failures == 0
    assert rep.max_stretch_error <= 1e-6
    assert rep.occupancy_l1 <= 0.02 and rep.image_occupancy_l1 <= 0.02
    assert json.loads(rep.to_json())["samples"] == 10**6


def test_layout_json():
    data = json.loads(layout(BetaContext.golden(), 2).to_json())
    assert len(data["sublevels"]) == 7
    row = data["sublevels"][1]
    assert set(row) == {"prefix", "width", "base_height", "thickness", "defect"}
    assert row["prefix"] == "0" and row["defect"] == [True, False]
