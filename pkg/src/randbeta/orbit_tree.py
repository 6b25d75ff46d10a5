"""Mass-weighted orbit trees of 1 and of ``1/(beta-1) - 1``.

Level ``n`` of the tree holds the points ``R^n_w(seed)`` over all coin words
``w`` of length ``n``, each with mass ``2**-n``. Words that lead to the same
point are merged and their masses added, which is what keeps the tree small
for algebraic beta: any sum over words of a quantity depending only on the
endpoint becomes a mass-weighted sum over the deduplicated points.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import BetaContext, classify_array, snap_array
from .errors import ConsistencyError, ContractError, ResourceError

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-11
MAX_POINTS = 2**22


@dataclass(frozen=True)
class OrbitLevel:
    depth: int
    values: np.ndarray
    masses: np.ndarray
    exact_values: tuple | None = None

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.masses.tolist()))

    def regions(self, ctx: BetaContext) -> np.ndarray:
        return classify_array(ctx, self.values)

    def __len__(self):
        return len(self.values)


@dataclass
class OrbitTree:
    beta: float
    seed: float
    levels: list[OrbitLevel]
    is_eventually_finite: bool = False
    boundary_hits: list[int] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def support_size_per_level(self) -> list[int]:
        return [len(lv) for lv in self.levels]

    def to_json(self) -> str:
        return json.dumps(
            {
                "beta": self.beta,
                "seed": self.seed,
                "depth": self.depth,
                "levels": [
                    {"n": lv.depth, "points": [{"value": v, "mass": m} for v, m in lv.points]}
                    for lv in self.levels
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> OrbitTree:
        data = json.loads(text)
        levels = [
            OrbitLevel(
                lv["n"],
                np.array([p["value"] for p in lv["points"]], dtype=float),
                np.array([p["mass"] for p in lv["points"]], dtype=float),
            )
            for lv in data["levels"]
        ]
        return cls(data["beta"], data["seed"], levels)


def _merge_sorted(values, masses, merge_tol):
    order = np.argsort(values, kind="stable")
    values, masses = values[order], masses[order]
    if len(values) == 0:
        return values, masses
    start = np.concatenate([[True], np.diff(values) > merge_tol])
    idx = np.flatnonzero(start)
    return values[idx], np.add.reduceat(masses, idx)


def _children(ctx: BetaContext, values, masses):
    codes = classify_array(ctx, values)
    L, S, R = codes == 0, codes == 1, codes == 2
    b = ctx.beta
    child_v = np.concatenate([b * values[L], b * values[R] - 1, b * values[S], b * values[S] - 1])
    child_m = np.concatenate([masses[L], masses[R], masses[S] / 2, masses[S] / 2])
    return snap_array(ctx, child_v), child_m


def extend_level(ctx: BetaContext, level: OrbitLevel, merge_tol: float = MERGE_TOL) -> OrbitLevel:
    """Push every point of ``level`` one step down the tree.

    L and R points move deterministically; S points split into their ``T0``
    and ``T1`` images with half the mass each. Children closer than
    ``merge_tol`` are merged.
    """
    child_v, child_m = _children(ctx, level.values, level.masses)
    tol = ctx.boundary_tol
    if child_v.size and (child_v.min() < -tol or child_v.max() > ctx.right_end + tol):
        raise ConsistencyError(
            f"orbit escaped [0, {ctx.right_end!r}] at depth {level.depth + 1}: "
            f"range [{child_v.min()!r}, {child_v.max()!r}]"
        )
    values, masses = _merge_sorted(child_v, child_m, merge_tol)
    return OrbitLevel(level.depth + 1, values, masses)


def _exact_seed(ctx: BetaContext, seed: float):
    fld = ctx.field
    one = fld.element(1)
    if abs(seed - 1.0) <= ctx.boundary_tol:
        return one
    # 1/(beta - 1) - 1
    return (fld.beta - 1).inverse() - 1


def _exact_levels(ctx: BetaContext, seed: float, depth: int, max_points: int):
    fld = ctx.field
    beta = fld.beta
    s_left = beta.inverse()
    s_right = (beta * (beta - 1)).inverse()
    pts = {_exact_seed(ctx, seed): Fraction(1)}
    out = [pts]
    for _ in range(depth):
        nxt: dict = {}
        for p, m in pts.items():
            if p < s_left:
                kids = [(beta * p, m)]
            elif p > s_right:
                kids = [(beta * p - 1, m)]
            else:
                kids = [(beta * p, m / 2), (beta * p - 1, m / 2)]
            for k, km in kids:
                nxt[k] = nxt.get(k, 0) + km
        if len(nxt) > max_points:
            raise ResourceError(f"orbit tree exceeds {max_points} points")
        pts = nxt
        out.append(pts)
    levels = []
    for n, pts in enumerate(out):
        items = sorted(pts.items(), key=lambda kv: float(kv[0]))
        levels.append(
            OrbitLevel(
                n,
                np.array([float(k) for k, _ in items]),
                np.array([float(m) for _, m in items]),
                exact_values=tuple(k for k, _ in items),
            )
        )
    return levels


def _count_boundary_hits(ctx: BetaContext, values: np.ndarray) -> int:
    tol = ctx.boundary_tol
    return int(np.sum((np.abs(values - ctx.s_left) <= tol) | (np.abs(values - ctx.s_right) <= tol)))


def build_tree(
    ctx: BetaContext,
    seed: float,
    depth: int,
    *,
    merge_tol: float = MERGE_TOL,
    max_points: int = MAX_POINTS,
    exact: bool = False,
) -> OrbitTree:
    """Orbit tree of ``seed`` (1 or ``mirror_of_one``) down to ``depth``.

    The closure is reported finite once a level adds no point that has not
    been seen at an earlier level; from then on the visited set is closed
    under both branches.
    """
    if depth < 0:
        raise ContractError("depth must be >= 0")
    tol = ctx.boundary_tol
    if abs(seed - 1.0) > tol and abs(seed - ctx.mirror_of_one) > tol:
        raise ContractError(f"seed must be 1 or {ctx.mirror_of_one!r}, got {seed!r}")

    if exact:
        levels = _exact_levels(ctx, seed, depth, max_points)
    else:
        levels = [OrbitLevel(0, np.array([float(seed)]), np.array([1.0]))]
        for n in range(depth):
            nxt = extend_level(ctx, levels[-1], merge_tol)
            if len(nxt) > max_points:
                raise ResourceError(
                    f"orbit tree for beta={ctx.beta!r} exceeds {max_points} points at depth {n + 1}; "
                    "use exact mode for quadratic beta or a smaller depth"
                )
            levels.append(nxt)

    hits = [_count_boundary_hits(ctx, lv.values) for lv in levels]
    if any(hits):
        logger.debug("orbit of %r touches a discontinuity at %d levels", seed, sum(h > 0 for h in hits))

    finite = False
    seen = levels[0].values
    for lv in levels[1:]:
        pos = np.searchsorted(seen, lv.values)
        lo = np.abs(lv.values - seen[np.clip(pos - 1, 0, len(seen) - 1)])
        hi = np.abs(lv.values - seen[np.clip(pos, 0, len(seen) - 1)])
        if np.all(np.minimum(lo, hi) <= merge_tol):
            finite = True
            break
        seen = np.union1d(seen, lv.values)
    return OrbitTree(ctx.beta, float(seed), levels, finite, hits)


def mirror_tree(ctx: BetaContext, tree: OrbitTree) -> OrbitTree:
    """Reflect every level through ``x -> right_end - x``.

    The system is symmetric under the reflection combined with swapping the
    coins, so this is the tree of ``mirror_of_one`` with identical masses.
    """
    if abs(tree.seed - 1.0) > ctx.boundary_tol:
        raise ContractError("mirror_tree expects the tree of the seed 1")
    levels = [
        OrbitLevel(lv.depth, snap_array(ctx, ctx.right_end - lv.values[::-1]), lv.masses[::-1].copy())
        for lv in tree.levels
    ]
    return OrbitTree(ctx.beta, ctx.mirror_of_one, levels, tree.is_eventually_finite, list(tree.boundary_hits))

