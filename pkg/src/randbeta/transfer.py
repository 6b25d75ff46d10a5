"""Transfer (Perron-Frobenius) operators acting on step functions.

Used as an oracle that is independent of the orbit-tree construction: the
invariant density is a fixed point, so applying the operator to a candidate
density and measuring the L1 residual tests it directly.

For the random map with fair coins, a density ``f`` on ``[0, D]`` is sent to

    (Lf)(x) = (w0(y0) f(y0) + w1(y1) f(y1)) / beta,   y_a = (x + a) / beta,

where ``w0`` is 1 on L, 1/2 on S, 0 on R and ``w1`` is 0 on L, 1/2 on S, 1 on
R. The greedy variant on ``[0, 1]`` uses weight 1 on each branch domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BetaContext, classify_array
from .errors import ContractError
from .stepfn import BREAK_TOL, StepFunction, l1_distance

VARIANTS = ("random", "greedy")


@dataclass(frozen=True)
class TransferConfig:
    max_iters: int = 500
    fixed_point_tol: float = 1e-10
    variant: str = "random"
    #: once an iterate has more pieces than this, iterates are averaged onto a
    #: uniform grid of this many cells (Ulam projection)
    max_pieces: int = 20000

    def __post_init__(self):
        if self.max_iters < 1:
            raise ContractError("max_iters must be >= 1")
        if not self.fixed_point_tol > 0:
            raise ContractError("fixed_point_tol must be > 0")
        if self.variant not in VARIANTS:
            raise ContractError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.max_pieces < 2:
            raise ContractError("max_pieces must be >= 2")


@dataclass(frozen=True)
class FixedPointResult:
    density: StepFunction
    iterations: int
    residual: float
    converged: bool
    #: False once the Ulam projection has been used
    exact: bool


def _domain(ctx: BetaContext, variant: str) -> float:
    return ctx.right_end if variant == "random" else 1.0


def apply_transfer(ctx: BetaContext, f: StepFunction, variant: str = "random") -> StepFunction:
    """Push the density ``f`` forward one step. Preserves the integral."""
    if variant not in VARIANTS:
        raise ContractError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if np.any(f.values < 0):
        raise ContractError("transfer operator is applied to non-negative functions only")
    D = _domain(ctx, variant)
    if abs(f.domain_right - D) > BREAK_TOL:
        raise ContractError(f"{variant} operator acts on [0, {D!r}], got [0, {f.domain_right!r}]")
    b = ctx.beta
    if variant == "random":
        cuts = np.concatenate([f.breakpoints, [ctx.s_left, ctx.s_right]])
    else:
        cuts = np.concatenate([f.breakpoints, [ctx.s_left, 1.0]])
    grid = np.concatenate([b * cuts, b * cuts - 1, [0.0, D]])
    grid = np.clip(grid, 0.0, D)
    # pin images of special points so rounding cannot walk them off repelling fixed points
    special = ctx.special_points if variant == "random" else np.array([0.0, ctx.s_left, 1.0])
    for p in special:
        grid[np.abs(grid - p) <= ctx.boundary_tol] = p
    grid = np.unique(grid)
    grid = grid[np.concatenate([[True], np.diff(grid) > BREAK_TOL])]
    grid[-1] = D

    mid = 0.5 * (grid[:-1] + grid[1:])
    y0, y1 = mid / b, (mid + 1) / b
    if variant == "random":
        r0, r1 = classify_array(ctx, y0), classify_array(ctx, y1)
        w0 = np.choose(r0, [1.0, 0.5, 0.0])
        w1 = np.choose(r1, [0.0, 0.5, 1.0])
        w1 = np.where(y1 <= D, w1, 0.0)
    else:
        w0 = np.where(y0 < ctx.s_left, 1.0, 0.0)
        w1 = np.where((y1 >= ctx.s_left) & (y1 <= 1.0), 1.0, 0.0)
    values = (w0 * f(np.minimum(y0, D)) + w1 * f(np.minimum(y1, D))) / b
    return StepFunction(grid, values, break_tol=0.0)


def ulam_project(f: StepFunction, cells: int) -> StepFunction:
    """Average ``f`` over ``cells`` equal cells; preserves the integral."""
    D = f.domain_right
    edges = np.linspace(0.0, D, cells + 1)
    cum = f.cumulative(edges)
    return StepFunction(edges, np.diff(cum) / np.diff(edges), break_tol=0.0)


def fixed_point(ctx: BetaContext, cfg: TransferConfig = TransferConfig()) -> FixedPointResult:
    """Iterate the operator from the uniform density until the L1 change is small.

    Non-convergence is reported through ``converged``; it is not an error.
    """
    D = _domain(ctx, cfg.variant)
    f = StepFunction.constant(1.0 / D, D)
    exact = True
    residual = np.inf
    for it in range(1, cfg.max_iters + 1):
        g = apply_transfer(ctx, f, cfg.variant).normalized()
        if len(g) > cfg.max_pieces:
            g = ulam_project(g, cfg.max_pieces)
            exact = False
        residual = l1_distance(f, g)
        f = g
        if residual <= cfg.fixed_point_tol:
            return FixedPointResult(f, it, residual, True, exact)
    return FixedPointResult(f, cfg.max_iters, residual, False, exact)


__all__ = [
    "TransferConfig",
    "FixedPointResult",
    "apply_transfer",
    "fixed_point",
    "l1_distance",
    "ulam_project",
]
