"""Parameter context, the L/S/R partition and single steps of the maps.

For ``1 < beta < 2`` the interval ``[0, 1/(beta-1)]`` splits into

* ``L = [0, 1/beta)`` where only ``T0(x) = beta*x`` keeps the orbit inside,
* ``S = [1/beta, 1/(beta*(beta-1))]`` where both branches are admissible,
* ``R = (1/(beta*(beta-1)), 1/(beta-1)]`` where only ``T1(x) = beta*x - 1`` is.

The random map applies ``T0`` on L, ``T1`` on R and lets a fair coin decide on
S. The skew product consumes one coin every step; the random map only on S.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError
from .quadratic import QuadraticField

GOLDEN = (1 + math.sqrt(5)) / 2


class Region(enum.IntEnum):
    L = 0
    S = 1
    R = 2

    def mirror(self) -> Region:
        """Region of ``right_end - x`` given the region of ``x``."""
        return Region(2 - self.value)


@dataclass(frozen=True)
class BetaContext:
    """``beta`` together with the boundary constants of the system.

    :param beta: parameter in the open interval (1, 2)
    :param boundary_tol: absolute distance within which a point is snapped to
        a partition boundary before it is classified
    :param quadratic: optional ``(a, b)`` with ``beta**2 = a*beta + b``; enables
        exact orbit arithmetic in Q(beta)
    """

    beta: float
    boundary_tol: float = 1e-12
    quadratic: tuple[int, int] | None = None
    right_end: float = field(init=False)
    s_left: float = field(init=False)
    s_right: float = field(init=False)
    mirror_of_one: float = field(init=False)

    def __post_init__(self):
        beta = float(self.beta)
        if not 1.0 < beta < 2.0:
            raise DomainError(f"beta={beta!r} must lie in the open interval (1, 2)")
        if self.boundary_tol < 0:
            raise ContractError("boundary_tol must be non-negative")
        if self.quadratic is not None:
            fld = QuadraticField(*self.quadratic)
            if abs(fld.beta_float - beta) > 1e-12:
                raise ContractError(
                    f"beta={beta!r} is not the root {fld.beta_float!r} of x^2 = {fld.a}x + {fld.b}"
                )
        right_end = 1.0 / (beta - 1.0)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "right_end", right_end)
        object.__setattr__(self, "s_left", 1.0 / beta)
        object.__setattr__(self, "s_right", 1.0 / (beta * (beta - 1.0)))
        object.__setattr__(self, "mirror_of_one", right_end - 1.0)

    @classmethod
    def golden(cls, boundary_tol: float = 1e-12) -> BetaContext:
        return cls(GOLDEN, boundary_tol=boundary_tol, quadratic=(1, 1))

    @property
    def field(self) -> QuadraticField:
        if self.quadratic is None:
            raise ContractError("exact arithmetic needs a quadratic beta (pass quadratic=(a, b))")
        return QuadraticField(*self.quadratic)

    @property
    def special_points(self) -> np.ndarray:
        """Points orbit values are snapped to: 0, the two S boundaries, right_end."""
        return np.array([0.0, self.s_left, self.s_right, self.right_end])


def _check_domain(ctx: BetaContext, x: float, hi: float | None = None) -> None:
    hi = ctx.right_end if hi is None else hi
    if not (-ctx.boundary_tol <= x <= hi + ctx.boundary_tol):
        raise DomainError(f"x={x!r} lies outside [0, {hi!r}]")


def classify(ctx: BetaContext, x: float) -> Region:
    """Return the region of ``x``; both S boundaries belong to S."""
    _check_domain(ctx, x)
    tol = ctx.boundary_tol
    if abs(x - ctx.s_left) <= tol or abs(x - ctx.s_right) <= tol:
        return Region.S
    if x < ctx.s_left:
        return Region.L
    if x <= ctx.s_right:
        return Region.S
    return Region.R


def classify_array(ctx: BetaContext, xs: np.ndarray) -> np.ndarray:
    """Vectorised :func:`classify` returning integer region codes (no domain check)."""
    xs = np.asarray(xs, dtype=float)
    tol = ctx.boundary_tol
    codes = np.where(xs < ctx.s_left, 0, np.where(xs <= ctx.s_right, 1, 2))
    near = (np.abs(xs - ctx.s_left) <= tol) | (np.abs(xs - ctx.s_right) <= tol)
    codes[near] = 1
    return codes


def snap(ctx: BetaContext, x: float) -> float:
    """Replace ``x`` by a special point of the system if within ``boundary_tol``.

    Orbit enumerations call this after every branch application so that
    orbits which land exactly on 0, a partition boundary, or the fixed point
    ``right_end`` stay there instead of drifting away by rounding.
    """
    tol = ctx.boundary_tol
    for p in (0.0, ctx.s_left, ctx.s_right, ctx.right_end):
        if abs(x - p) <= tol:
            return p
    return x


def snap_array(ctx: BetaContext, xs: np.ndarray) -> np.ndarray:
    xs = np.array(xs, dtype=float, copy=True)
    for p in ctx.special_points:
        xs[np.abs(xs - p) <= ctx.boundary_tol] = p
    return xs


def _check_digit(d) -> int:
    if d not in (0, 1):
        raise ContractError(f"digit must be 0 or 1, got {d!r}")
    return int(d)


def apply_branch(ctx: BetaContext, d: int, x: float) -> float:
    """``T_d(x) = beta*x - d``."""
    return ctx.beta * x - _check_digit(d)


def step_random(ctx: BetaContext, x: float, next_coin: int) -> tuple[float, bool]:
    """One step of the random map.

    Returns the image of ``x`` and whether the coin was consumed (``x`` in S).
    The skew product consumes the coin regardless; the caller decides.
    """
    region = classify(ctx, x)
    if region is Region.L:
        return ctx.beta * x, False
    if region is Region.R:
        return ctx.beta * x - 1, False
    return ctx.beta * x - _check_digit(next_coin), True


def step_random_array(ctx: BetaContext, xs: np.ndarray, coins: np.ndarray) -> np.ndarray:
    """Skew-product step applied elementwise; coins are used only on S."""
    codes = classify_array(ctx, xs)
    digits = np.where(codes == 0, 0, np.where(codes == 2, 1, coins))
    return ctx.beta * np.asarray(xs, dtype=float) - digits


def step_greedy(ctx: BetaContext, x: float) -> tuple[float, int]:
    """``T(x) = beta*x mod 1`` with its digit, using ``T(1) = beta - 1``."""
    _check_domain(ctx, x, hi=1.0)
    if x >= 1.0 - ctx.boundary_tol:
        return ctx.beta - 1.0, 1
    y = ctx.beta * x
    if abs(y - 1.0) <= ctx.boundary_tol:
        return 0.0, 1
    d = 1 if y >= 1.0 else 0
    return y - d, d
