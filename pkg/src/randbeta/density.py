"""Invariant densities as exact step functions with truncation bounds.

The random-map density is the normalized sum over ``n`` of ``(2*beta)**-n``
times, for every coin word of length ``n``, the indicator of ``[0, R^n_w(1)]``
plus the indicator of ``[R^n_w(1/(beta-1) - 1), 1/(beta-1)]``. Summing
``2**n`` words with weight ``(2*beta)**-n`` equals summing the deduplicated
orbit points with weight ``mass * beta**-n``, which is how it is evaluated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import BetaContext, step_greedy
from .orbit_tree import MAX_POINTS, MERGE_TOL, build_tree, mirror_tree
from .stepfn import StepFunction


@dataclass(frozen=True)
class DensityResult:
    """A normalized density and the data needed to bound its truncation error.

    ``sup_error`` and ``l1_error`` bound the distance between the depth-``N``
    unnormalized partial sum and the full series.
    """

    beta: float
    f: StepFunction
    C: float
    depth: int
    sup_error: float
    l1_error: float
    unnormalized: StepFunction

    def to_json(self, meta: dict | None = None) -> str:
        data = {
            "beta": self.beta,
            "depth": self.depth,
            "C": self.C,
            "sup_error": self.sup_error,
            "l1_error": self.l1_error,
            "breakpoints": self.f.breakpoints.tolist(),
            "values": self.f.values.tolist(),
        }
        if meta is not None:
            data = {"meta": meta, **data}
        return json.dumps(data)


def tail_bounds(ctx: BetaContext, depth: int) -> tuple[float, float]:
    """Sup and L1 bounds on the unnormalized tail beyond ``depth``."""
    b = ctx.beta
    sup = 2 * b ** (-depth) / (b - 1)
    return sup, sup * ctx.right_end


def partial_sum(
    ctx: BetaContext,
    depth: int,
    *,
    merge_tol: float = MERGE_TOL,
    max_points: int = MAX_POINTS,
    exact: bool = False,
) -> StepFunction:
    """Unnormalized density truncated after level ``depth``."""
    tree = build_tree(ctx, 1.0, depth, merge_tol=merge_tol, max_points=max_points, exact=exact)
    mirror = mirror_tree(ctx, tree)
    re = ctx.right_end
    lefts, rights, weights = [], [], []
    for lv, mv in zip(tree.levels, mirror.levels):
        w = lv.masses * ctx.beta ** (-lv.depth)
        lefts += [np.zeros(len(lv)), mv.values]
        rights += [lv.values, np.full(len(mv), re)]
        weights += [w, mv.masses * ctx.beta ** (-mv.depth)]
    return StepFunction.from_indicators(
        np.concatenate(lefts), np.concatenate(rights), np.concatenate(weights), re
    )


def build_density(ctx: BetaContext, depth: int, **tree_kw) -> DensityResult:
    """The random-map invariant density truncated at ``depth``.

    Keyword arguments are passed to :func:`~randbeta.orbit_tree.build_tree`.
    """
    raw = partial_sum(ctx, depth, **tree_kw)
    total = raw.integrate()
    sup, l1 = tail_bounds(ctx, depth)
    return DensityResult(ctx.beta, raw.scaled(1.0 / total), 1.0 / total, depth, sup, l1, raw)


def greedy_orbit(ctx: BetaContext, depth: int) -> list[float]:
    """``T^n(1)`` for ``n = 0..depth``, stopping early once the orbit reaches 0."""
    orbit = [1.0]
    x = 1.0
    for _ in range(depth):
        x, _ = step_greedy(ctx, x)
        if x == 0.0:
            break
        orbit.append(x)
    return orbit


def parry_density(ctx: BetaContext, depth: int) -> DensityResult:
    """Invariant density of ``x -> beta*x mod 1`` on ``[0, 1]``.

    Proportional to the sum of ``beta**-n`` times the indicator of
    ``[0, T^n(1)]``. The tail bounds are those of a single family on an
    interval of length 1, and zero when the orbit of 1 reaches 0 within
    ``depth`` steps (the sum is then finite).
    """
    orbit = np.array(greedy_orbit(ctx, depth))
    weights = ctx.beta ** -np.arange(len(orbit), dtype=float)
    raw = StepFunction.from_indicators(np.zeros(len(orbit)), orbit, weights, 1.0)
    total = raw.integrate()
    b = ctx.beta
    tail = 0.0 if len(orbit) <= depth else b ** (-depth) / (b - 1)
    return DensityResult(b, raw.scaled(1.0 / total), 1.0 / total, depth, tail, tail, raw)


def evaluate(f: StepFunction, x: float) -> float:
    return f.evaluate(x)


def measure_of(f: StepFunction, a: float, b: float) -> float:
    return f.measure_of(a, b)


def mu_S(ctx: BetaContext, result: DensityResult) -> float:
    """Mass the density gives to the switch region."""
    return result.f.measure_of(ctx.s_left, ctx.s_right)


def symmetry_defect(f: StepFunction, tol: float = 1e-12) -> float:
    """Largest ``|f(x) - f(D - x)|`` over a breakpoint-refined grid."""
    d = f.domain_right
    grid = np.union1d(f.breakpoints, d - f.breakpoints)
    grid = grid[(grid >= 0) & (grid <= d)]
    grid = grid[np.concatenate([[True], np.diff(grid) > tol * max(1.0, d)])]
    mid = 0.5 * (grid[:-1] + grid[1:])
    return float(np.max(np.abs(f(mid) - f(d - mid))))
