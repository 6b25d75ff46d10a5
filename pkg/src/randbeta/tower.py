"""Natural-extension tower geometry and dynamics.

The tower is a stack of rectangles ("sublevels"), one per coin word
``w = w_1...w_n``: width ``r(w) = R^n_w(1)``, thickness ``(2 beta)^-n`` and
base height ``v(w)``. Words of length ``n`` are ranked by
``rank = 1 + sum w_i 2^(i-1)``; the depth-0 sublevel is the base ``[0,1]x[0,1)``.

A point ``(x, y)`` of sublevel ``w`` moves under the next coin ``c`` according
to what the coin does to the *endpoint* ``r(w)``:

* endpoint maps by ``T0``: the point goes up to sublevel ``wc`` with ``T0``;
* endpoint maps by ``T1``: points with ``x`` in S or R go up with ``T1``,
  points with ``x`` in L drop to a horizontal strip of the base with ``T0``.

Dropped strips are stacked in the order (depth, rank, coin), so each strip
sits directly on top of all earlier ones. Vertically every branch contracts
by ``1/(2 beta)``, horizontally it stretches by ``beta``.

Where the endpoint lies in R but ``x`` lies in S and the coin is 0, this map
applies ``T1`` to ``x`` although the random map applies ``T0``. A reflected
copy of the tower (``x -> 1/(beta-1) - x``, ``y -> -y``, coins complemented)
has the opposite defect, and the swap ``Q`` exchanges the two defect images
by a unit translation. ``Q`` composed with the tower map moves the ``x``
coordinate exactly as the random map does.

Indexing: a word ``w`` of length ``n`` is stored at index ``rank - 1``, so
appending coin ``c`` sends index ``i`` to ``i + c * 2**n``. Reflected
sublevels are labelled by the complemented word.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import BetaContext, Region, apply_branch, classify, classify_array, snap_array
from .errors import ContractError, ResourceError, TruncationError
from .orbit_tree import build_tree
from .stepfn import StepFunction

MAX_LAYOUT_DEPTH = 22
DEFAULT_DEPTH = 20
PLAIN, REFLECTED = "plain", "reflected"


@dataclass(frozen=True)
class Sublevel:
    prefix: tuple[int, ...]
    depth: int
    width: float
    base_height: float
    thickness: float
    rank: int


@dataclass(frozen=True)
class TowerPoint:
    prefix: tuple[int, ...]
    x: float
    y: float
    side: str = PLAIN


@dataclass(frozen=True)
class MassLedger:
    """Mass dropped back to the base, per depth, and its running total."""

    beta: float
    down_mass: np.ndarray
    partial_sums: np.ndarray
    gap_bound: float

    @property
    def partial_sum(self) -> float:
        return float(self.partial_sums[-1])


def prefix_index(prefix) -> int:
    return sum(int(d) << i for i, d in enumerate(prefix))


def index_prefix(idx: int, depth: int) -> tuple[int, ...]:
    return tuple((idx >> i) & 1 for i in range(depth))


class TowerLayout:
    """All sublevels down to ``depth`` with the stacking data the map needs."""

    def __init__(self, ctx: BetaContext, depth: int):
        if not 0 <= depth <= MAX_LAYOUT_DEPTH:
            raise ResourceError(f"layout depth must lie in [0, {MAX_LAYOUT_DEPTH}], got {depth}")
        self.ctx = ctx
        self.depth = depth
        b = ctx.beta
        widths = [np.array([1.0])]
        for n in range(depth):
            r = widths[-1]
            codes = classify_array(ctx, r)
            kids = []
            for c in (0, 1):
                d = np.where(codes == 0, 0, np.where(codes == 2, 1, c))
                kids.append(b * r - d)
            widths.append(snap_array(ctx, np.concatenate(kids)))
        self.widths = widths
        self.regions = [classify_array(ctx, r) for r in widths]
        self.thickness = (2 * b) ** -np.arange(depth + 1, dtype=float)
        self.level_base = np.concatenate([[0.0], np.cumsum(b ** -np.arange(depth, dtype=float))])

        # stacking of the strips dropped into the base, ordered by (depth, rank, coin)
        self.down_start = []
        acc = 0.0
        for n in range(depth + 1):
            reg = self.regions[n]
            down = np.stack([reg == 2, reg != 0], axis=1).reshape(-1)  # coin 0: endpoint in R; coin 1: S or R
            h = self.thickness[n] / (2 * b)
            k = np.cumsum(down) - down
            start = np.where(down, acc + k * h, np.nan)
            self.down_start.append(start)
            acc += down.sum() * h
        self.total_down = acc

    def __len__(self):
        return 2 ** (self.depth + 1) - 1

    def base_height(self, n: int, idx: int) -> float:
        return float(self.level_base[n] + idx * self.thickness[n])

    def sublevel(self, prefix) -> Sublevel:
        n = len(prefix)
        if n > self.depth:
            raise ContractError(f"prefix of length {n} is deeper than the layout ({self.depth})")
        idx = prefix_index(prefix)
        return Sublevel(tuple(prefix), n, float(self.widths[n][idx]), self.base_height(n, idx),
                        float(self.thickness[n]), idx + 1)

    def sublevels(self, n: int):
        for idx in range(2**n):
            yield self.sublevel(index_prefix(idx, n))

    def __iter__(self):
        for n in range(self.depth + 1):
            yield from self.sublevels(n)

    def fiber_measure(self, depth: int | None = None) -> StepFunction:
        """Length of the vertical fibre of both towers above each ``x``.

        Sums ``thickness * (indicator[0, r] + indicator[D - r, D])`` over every
        sublevel up to ``depth``, one term per word (no merging).
        """
        depth = self.depth if depth is None else depth
        re = self.ctx.right_end
        r = np.concatenate(self.widths[: depth + 1])
        t = np.concatenate([np.full(2**n, self.thickness[n]) for n in range(depth + 1)])
        mirror = snap_array(self.ctx, re - r)
        lefts = np.concatenate([np.zeros_like(r), mirror])
        rights = np.concatenate([r, np.full_like(r, re)])
        return StepFunction.from_indicators(lefts, rights, np.concatenate([t, t]), re)

    def to_json(self, depth: int | None = None) -> str:
        depth = self.depth if depth is None else depth
        rows = []
        for n in range(depth + 1):
            for s in self.sublevels(n):
                rows.append({
                    "prefix": "".join(map(str, s.prefix)),
                    "width": s.width,
                    "base_height": s.base_height,
                    "thickness": s.thickness,
                    "defect": [defect_set(self.ctx, s, c)[0] for c in (0, 1)],
                })
        return json.dumps({"beta": self.ctx.beta, "depth": depth, "sublevels": rows})

    # -- vectorised geometry -------------------------------------------------

    def _flat(self, arrs, n, idx):
        flat = np.concatenate(arrs)
        return flat[(2**n - 1) + idx]

    def sample(self, size: int, rng: np.random.Generator):
        """Uniform points on both towers truncated at ``depth``, with coins.

        Returns arrays ``(side, n, idx, x, y, coin)``; ``side`` is 0 for the
        plain tower and 1 for the reflected one, ``idx`` the sublevel label.
        """
        r = np.concatenate(self.widths)
        n_of = np.concatenate([np.full(2**n, n) for n in range(self.depth + 1)])
        w = r * self.thickness[n_of]
        flat = rng.choice(len(r), size=size, p=w / w.sum())
        n = n_of[flat]
        idx = flat - (2**n - 1)
        x = rng.random(size) * r[flat]
        y = self.level_base[n] + idx * self.thickness[n] + rng.random(size) * self.thickness[n]
        side = rng.integers(0, 2, size=size)
        coin = rng.integers(0, 2, size=size)
        refl = side == 1
        x = np.where(refl, self.ctx.right_end - x, x)
        y = np.where(refl, -y, y)
        idx = np.where(refl, (2**n - 1) - idx, idx)
        return side, n, idx, x, y, coin

    def step_arrays(self, side, n, idx, x, y, coin, *, swap: bool = True):
        """Vectorised tower map (with ``Q`` when ``swap``).

        Returns ``(side, n, idx, x, y, digit, ok)``; ``ok`` is False where the
        point left the truncated tower.
        """
        ctx = self.ctx
        b = ctx.beta
        side, n, idx, coin = (np.asarray(a, dtype=np.int64) for a in (side, n, idx, coin))
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        refl = side == 1
        # pull reflected points back to the plain tower
        pidx = np.where(refl, (2**n - 1) - idx, idx)
        pc = np.where(refl, 1 - coin, coin)
        py = np.where(refl, -y, y)
        reg_x = classify_array(ctx, x)
        reg_x = np.where(refl, 2 - reg_x, reg_x)

        reg_r = self._flat(self.regions, n, pidx)
        d_r = np.where(reg_r == 0, 0, np.where(reg_r == 2, 1, pc))
        go_down = (d_r == 1) & (reg_x == 0)
        digit = np.where(go_down, 0, d_r)
        defect = (reg_r == 2) & (pc == 0) & (reg_x == 1)

        v = self.level_base[n] + pidx * self.thickness[n]
        up_n = n + 1
        ok = ~((~go_down) & (up_n > self.depth))
        up_n_c = np.minimum(up_n, self.depth)
        up_idx = pidx + pc * (2**n)
        v_up = self.level_base[up_n_c] + up_idx * self.thickness[up_n_c]
        starts = np.concatenate(self.down_start)
        # flat offset of depth n in the concatenated (idx, coin) arrays is 2*(2**n - 1)
        dstart = starts[np.where(go_down, 2 * (2**n - 1) + 2 * pidx + pc, 0)]
        shift = np.where(go_down, dstart, v_up) - v / (2 * b)
        new_py = py / (2 * b) + shift
        new_n = np.where(go_down, 0, up_n_c)
        new_pidx = np.where(go_down, 0, up_idx)

        if swap:
            digit = np.where(defect, 0, digit)
        out_refl = refl ^ (defect if swap else np.zeros_like(defect))
        # actual digit applied to x: reflection turns T_d into T_{1-d}
        act = np.where(refl, 1 - digit, digit)
        new_x = b * x - act
        new_y = np.where(out_refl, -new_py, new_py)
        new_idx = np.where(out_refl, (2**new_n - 1) - new_pidx, new_pidx)
        return out_refl.astype(np.int64), new_n, new_idx, new_x, new_y, act, ok


def layout(ctx: BetaContext, depth: int) -> TowerLayout:
    return TowerLayout(ctx, depth)


@lru_cache(maxsize=8)
def _default_layout(ctx: BetaContext) -> TowerLayout:
    return TowerLayout(ctx, DEFAULT_DEPTH)


def _as_layout(tower) -> TowerLayout:
    # a bare context gets a cached layout at the default working depth
    return tower if isinstance(tower, TowerLayout) else _default_layout(tower)


# -- single-point dynamics ---------------------------------------------------

def _check_inside(tower: TowerLayout, n: int, idx: int, x: float, y: float) -> None:
    r = float(tower.widths[n][idx])
    v = tower.base_height(n, idx)
    t = float(tower.thickness[n])
    tol = 1e-12 * max(1.0, tower.ctx.right_end)
    if not (-tol <= x <= r + tol and v - tol <= y <= v + t + tol):
        raise ContractError(f"point ({x!r}, {y!r}) is not inside sublevel depth={n} index={idx}")


def _psi_plain(tower: TowerLayout, n: int, idx: int, y: float, coin: int, reg_x: Region):
    """ψ on a plain-tower point; returns (digit, n', idx', y', defect)."""
    ctx = tower.ctx
    b = ctx.beta
    reg_r = int(tower.regions[n][idx])
    d_r = 0 if reg_r == 0 else 1 if reg_r == 2 else coin
    v = tower.base_height(n, idx)
    if d_r == 1 and reg_x is Region.L:
        start = float(tower.down_start[n][2 * idx + coin])
        return 0, 0, 0, y / (2 * b) + (start - v / (2 * b)), False
    if n >= tower.depth:
        raise TruncationError(f"point leaves the tower truncated at depth {tower.depth}")
    new_idx = idx + coin * 2**n
    c1 = tower.base_height(n + 1, new_idx) - v / (2 * b)
    defect = reg_r == 2 and coin == 0 and reg_x is Region.S
    return d_r, n + 1, new_idx, y / (2 * b) + c1, defect


def _unpack(tower: TowerLayout, p: TowerPoint, coin: int):
    if coin not in (0, 1):
        raise ContractError(f"coin must be 0 or 1, got {coin!r}")
    n = len(p.prefix)
    if n > tower.depth:
        raise ContractError(f"point lies above the layout depth {tower.depth}")
    idx = prefix_index(p.prefix)
    if p.side == PLAIN:
        _check_inside(tower, n, idx, p.x, p.y)
        return False, n, idx, p.y, coin, classify(tower.ctx, p.x)
    if p.side != REFLECTED:
        raise ContractError(f"unknown side {p.side!r}")
    pidx = 2**n - 1 - idx
    _check_inside(tower, n, pidx, tower.ctx.right_end - p.x, -p.y)
    return True, n, pidx, -p.y, 1 - coin, classify(tower.ctx, p.x).mirror()


def psi_step(tower: TowerLayout | BetaContext, p: TowerPoint, coin: int) -> TowerPoint:
    """The tower map without the swap; reflected points move by conjugation."""
    tower = _as_layout(tower)
    refl, n, pidx, py, pc, reg_x = _unpack(tower, p, coin)
    digit, n2, idx2, y2, _ = _psi_plain(tower, n, pidx, py, pc, reg_x)
    if not refl:
        return TowerPoint(index_prefix(idx2, n2), apply_branch(tower.ctx, digit, p.x), y2, PLAIN)
    x2 = apply_branch(tower.ctx, 1 - digit, p.x)
    return TowerPoint(index_prefix(2**n2 - 1 - idx2, n2), x2, -y2, REFLECTED)


def natural_extension_step(tower: TowerLayout | BetaContext, p: TowerPoint, coin: int) -> TowerPoint:
    """The natural extension: the tower map followed by the swap ``Q``.

    The ``x`` coordinate of the result equals the random map applied to
    ``p.x`` with this coin. The swap's unit translation is folded into the
    branch digit, so ``x`` goes through the same arithmetic as the random map.
    """
    tower = _as_layout(tower)
    refl, n, pidx, py, pc, reg_x = _unpack(tower, p, coin)
    digit, n2, idx2, y2, defect = _psi_plain(tower, n, pidx, py, pc, reg_x)
    if defect:
        # Q: (x, y) -> (x + 1, -y) on the plain side, i.e. T1 becomes T0 and the side flips
        digit = 0
    out_refl = refl != defect
    act = 1 - digit if refl else digit
    x2 = apply_branch(tower.ctx, act, p.x)
    if out_refl:
        return TowerPoint(index_prefix(2**n2 - 1 - idx2, n2), x2, -y2, REFLECTED)
    return TowerPoint(index_prefix(idx2, n2), x2, y2, PLAIN)


def in_swap_image(tower: TowerLayout | BetaContext, p: TowerPoint) -> bool:
    """Whether ``p`` lies in the image of a defect set (either tower)."""
    tower = _as_layout(tower)
    n = len(p.prefix)
    if n == 0:
        return False
    re = tower.ctx.right_end
    if p.side == PLAIN:
        if p.prefix[-1] != 0:
            return False
        parent = prefix_index(p.prefix[:-1])
        return int(tower.regions[n - 1][parent]) == 2 and p.x <= re - 1
    plain_prefix = tuple(1 - d for d in p.prefix)
    if plain_prefix[-1] != 0:
        return False
    parent = prefix_index(plain_prefix[:-1])
    return int(tower.regions[n - 1][parent]) == 2 and p.x >= 1


def swap(tower: TowerLayout | BetaContext, p: TowerPoint) -> TowerPoint:
    """``Q``: exchange the two defect images by ``x -> x +- 1``, ``y -> -y``."""
    tower = _as_layout(tower)
    if not in_swap_image(tower, p):
        return p
    flipped = tuple(1 - d for d in p.prefix)
    if p.side == PLAIN:
        return TowerPoint(flipped, p.x + 1, -p.y, REFLECTED)
    return TowerPoint(flipped, p.x - 1, -p.y, PLAIN)


def defect_set(ctx: BetaContext, s: Sublevel, coin: int):
    """Where the tower map disagrees with the random map on sublevel ``s``.

    Returns ``(True, (s_left, s_right))`` when the coin is 0 and the endpoint
    lies in R, otherwise ``(False, None)``.
    """
    if coin not in (0, 1):
        raise ContractError(f"coin must be 0 or 1, got {coin!r}")
    if coin == 0 and classify(ctx, s.width) is Region.R:
        return True, (ctx.s_left, ctx.s_right)
    return False, None


def mass_identity(ctx: BetaContext, depth: int, **tree_kw) -> MassLedger:
    """Mass dropped into the base by all sublevels up to ``depth``.

    A pair (word ``w`` of length ``n``, coin ``c``) drops a strip of mass
    ``(2 beta)^-(n+1)`` when ``c`` maps ``r(w)`` by ``T1``. Grouping words by
    their endpoint, depth ``n`` drops ``beta^-(n+1) * (m_R + m_S / 2)`` where
    ``m_R``, ``m_S`` are the orbit-tree masses in R and S. The partial sums
    converge to 1 with gap at most ``beta^-(depth+1) * right_end``.
    """
    if depth < 0:
        raise ContractError("depth must be >= 0")
    tree = build_tree(ctx, 1.0, depth, **tree_kw)
    b = ctx.beta
    down = np.empty(depth + 1)
    for lv in tree.levels:
        reg = lv.regions(ctx)
        down[lv.depth] = b ** -(lv.depth + 1) * (lv.masses[reg == 2].sum() + 0.5 * lv.masses[reg == 1].sum())
    return MassLedger(b, down, np.cumsum(down), b ** -(depth + 1) * ctx.right_end)


@dataclass
class VerificationReport:
    beta: float
    depth: int
    samples: int
    truncated: int
    natural_extension_mismatches: int
    injectivity_failures: int
    max_stretch_error: float
    occupancy_l1: float
    image_occupancy_l1: float
    bins: int

    def to_json(self, meta: dict | None = None) -> str:
        data = dict(self.__dict__)
        if meta is not None:
            data = {"meta": meta, **data}
        return json.dumps(data)


def verify_measure_preservation(
    ctx: BetaContext,
    depth: int,
    samples: int,
    seed: int,
    *,
    bins: int = 100,
    density=None,
    density_depth: int = 40,
) -> VerificationReport:
    """Sample both towers uniformly, apply the natural extension and audit it.

    Checks that the ``x`` coordinate follows the random map, that no two
    samples collide (injectivity at 1e-9 resolution), that every branch
    stretches ``x`` by ``beta`` and ``y`` by ``1/(2 beta)``, and that the
    ``x``-marginals before and after the step match the invariant density.
    """
    from scipy.spatial import cKDTree

    from .density import build_density
    from .simulate import histogram_l1, make_histogram

    tower = TowerLayout(ctx, depth)
    rng = np.random.default_rng(seed)
    side, n, idx, x, y, coin = tower.sample(samples, rng)
    s2, n2, i2, x2, y2, act, ok = tower.step_arrays(side, n, idx, x, y, coin)

    expected = ctx.beta * x - np.where(
        classify_array(ctx, x) == 0, 0, np.where(classify_array(ctx, x) == 2, 1, coin)
    )
    mismatches = int(np.sum(x2[ok] != expected[ok]))

    out = np.column_stack([x2[ok], y2[ok]])
    inp = np.column_stack([x[ok], y[ok]])
    failures = 0
    for i, j in cKDTree(out).query_pairs(1e-9):
        if np.hypot(*(inp[i] - inp[j])) > 1e-9:
            failures += 1

    # finite-difference stretch factors, skipping perturbations that change branch
    h = 1e-7
    worst = 0.0
    for dx, dy, expect in ((h, 0.0, ctx.beta), (0.0, h, 1 / (2 * ctx.beta))):
        xs, ys = x + dx, np.where(side == 1, y - dy, y + dy)
        t = tower.step_arrays(side, n, idx, xs, ys, coin)
        same = ok & t[6] & (t[0] == s2) & (t[1] == n2) & (t[2] == i2) & (t[5] == act)
        same &= (xs <= np.where(side == 1, ctx.right_end, tower._flat(tower.widths, n, idx)))
        same &= np.abs(ys - np.where(side == 1, -1, 1) * (tower.level_base[n] + np.where(
            side == 1, 2**n - 1 - idx, idx) * tower.thickness[n])) < tower.thickness[n]
        if not same.any():
            continue
        moved = (t[3] - x2) / h if dx else np.abs(t[4] - y2) / h
        worst = max(worst, float(np.max(np.abs(moved[same] - expect) / expect)))

    if density is None:
        # the tree cap can bite for small beta; fall back to shallower truncations
        for d in range(density_depth, depth - 1, -5):
            try:
                density = build_density(ctx, d).f
                break
            except ResourceError:
                continue
        else:
            density = build_density(ctx, depth).f
    before = histogram_l1(make_histogram(x, ctx.right_end, bins), density)
    after = histogram_l1(make_histogram(x2[ok], ctx.right_end, bins), density)
    return VerificationReport(ctx.beta, depth, samples, int((~ok).sum()), mismatches, failures, worst,
                              before, after, bins)
