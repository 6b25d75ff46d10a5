"""Counting extendable prefixes of beta-expansions.

``N_n(x)`` is the number of 0/1 words of length ``n`` that begin some
beta-expansion of ``x``. A word survives exactly when its remainder
``beta*y - a`` stays inside ``[0, 1/(beta-1)]`` after every digit, so

* :func:`count_brute` enumerates all surviving words without merging,
* :func:`count_dp` pushes (remainder, multiplicity) pairs forward and merges
  equal remainders, which is the region recursion ``V_k`` in disguise,
* :func:`count_monte_carlo` averages ``2**h`` over random coin sequences,
  ``h`` being the number of visits to S among the first ``n`` orbit points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BetaContext, classify_array, snap, snap_array
from .density import DensityResult, mu_S
from .errors import ContractError, DomainError, ResourceError
from .orbit_tree import MERGE_TOL

BRUTE_MAX_N = 40
MAX_STATES = 2**22


@dataclass(frozen=True)
class CountQuery:
    x: float
    n: int

    def validate(self, ctx: BetaContext) -> None:
        if not -ctx.boundary_tol <= self.x <= ctx.right_end + ctx.boundary_tol:
            raise DomainError(f"x={self.x!r} outside [0, {ctx.right_end!r}]")
        if self.n < 0:
            raise ContractError("n must be >= 0")


@dataclass(frozen=True)
class GrowthEstimate:
    n: int
    count: int
    log_count_over_n: float
    lower_bound: float
    mu_S: float

    @property
    def exceeds_bound(self) -> bool:
        """Only meaningful for typical x; the bound holds almost everywhere, not pointwise."""
        return self.log_count_over_n >= self.lower_bound


def count_brute(ctx: BetaContext, q: CountQuery, max_nodes: int = 2**26) -> int:
    """Enumerate every surviving prefix, one array slot per word."""
    q.validate(ctx)
    if q.n > BRUTE_MAX_N:
        raise ResourceError(f"brute force is capped at n={BRUTE_MAX_N}")
    ys = np.array([snap(ctx, float(q.x))])
    re = ctx.right_end
    for _ in range(q.n):
        kids = snap_array(ctx, np.concatenate([ctx.beta * ys, ctx.beta * ys - 1]))
        # escape is permanent: nothing outside [0, re] can come back
        ys = kids[(kids >= 0) & (kids <= re)]
        if len(ys) > max_nodes:
            raise ResourceError(f"brute force enumeration exceeds {max_nodes} live prefixes")
    return len(ys)


def _count_dp_exact(ctx: BetaContext, x, n: int) -> int:
    fld = ctx.field
    beta = fld.beta
    s_left = beta.inverse()
    s_right = (beta * (beta - 1)).inverse()
    states = {x if not isinstance(x, float) else _exact_from_float(ctx, x): 1}
    for _ in range(n):
        nxt: dict = {}
        for y, c in states.items():
            if y < s_left:
                kids = (beta * y,)
            elif y > s_right:
                kids = (beta * y - 1,)
            else:
                kids = (beta * y, beta * y - 1)
            for k in kids:
                nxt[k] = nxt.get(k, 0) + c
        if len(nxt) > MAX_STATES:
            raise ResourceError(f"DP exceeds {MAX_STATES} states")
        states = nxt
    return sum(states.values())


def _exact_from_float(ctx: BetaContext, x: float):
    fld = ctx.field
    for cand in (fld.element(0), fld.element(1), fld.beta.inverse(), (fld.beta * (fld.beta - 1)).inverse(),
                 (fld.beta - 1).inverse(), (fld.beta - 1).inverse() - 1):
        if abs(float(cand) - x) <= ctx.boundary_tol:
            return cand
    raise ContractError(f"x={x!r} is not a recognised element of Q(beta); pass a QuadraticNumber")


def count_dp(
    ctx: BetaContext,
    q: CountQuery,
    *,
    merge_tol: float = MERGE_TOL,
    max_states: int = MAX_STATES,
    exact: bool = False,
) -> int:
    """``N_n(x)`` by forward dynamic programming on merged remainders.

    Each state carries how many prefixes reach it. L states have one child,
    R states one, S states two; after ``n`` steps the multiplicities sum to
    the number of surviving words. With ``exact=True`` (quadratic beta only)
    remainders are kept in Q(beta) and ``q.x`` may be a ``QuadraticNumber``.
    """
    if exact:
        if q.n < 0:
            raise ContractError("n must be >= 0")
        return _count_dp_exact(ctx, q.x, q.n)
    q.validate(ctx)
    ys = np.array([snap(ctx, float(q.x))])
    counts = np.array([1], dtype=np.int64 if q.n < 62 else object)
    b = ctx.beta
    for _ in range(q.n):
        codes = classify_array(ctx, ys)
        L, S, R = codes == 0, codes == 1, codes == 2
        kids = snap_array(ctx, np.concatenate([b * ys[L], b * ys[R] - 1, b * ys[S], b * ys[S] - 1]))
        kc = np.concatenate([counts[L], counts[R], counts[S], counts[S]])
        order = np.argsort(kids, kind="stable")
        kids, kc = kids[order], kc[order]
        idx = np.flatnonzero(np.concatenate([[True], np.diff(kids) > merge_tol]))
        ys, counts = kids[idx], np.add.reduceat(kc, idx)
        if len(ys) > max_states:
            raise ResourceError(f"DP exceeds {max_states} states; try exact mode or a smaller n")
    return int(counts.sum())


def count_monte_carlo(ctx: BetaContext, q: CountQuery, samples: int, seed: int) -> tuple[float, float]:
    """Average of ``2**h`` over ``samples`` random coin sequences.

    Returns the sample mean and its standard error. Visits are counted at
    times ``0..n-1``, the times at which a digit is chosen.
    """
    q.validate(ctx)
    if samples < 1:
        raise ContractError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    xs = np.full(samples, float(q.x))
    h = np.zeros(samples, dtype=np.int64)
    b = ctx.beta
    for _ in range(q.n):
        codes = classify_array(ctx, xs)
        in_s = codes == 1
        h += in_s
        coins = rng.integers(0, 2, size=samples)
        digits = np.where(codes == 0, 0, np.where(codes == 2, 1, coins))
        xs = np.clip(b * xs - digits, 0.0, ctx.right_end)
    w = np.ldexp(1.0, h)
    mean = float(w.mean())
    se = float(w.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, se


def growth_estimate(ctx: BetaContext, x: float, n: int, density: DensityResult) -> GrowthEstimate:
    """``log N_n(x) / n`` next to the almost-everywhere lower bound ``log 2 * mu(S)``."""
    if abs(density.beta - ctx.beta) > 1e-15:
        raise ContractError("density was built for a different beta")
    if n < 1:
        raise ContractError("n must be >= 1")
    count = count_dp(ctx, CountQuery(x, n))
    m = mu_S(ctx, density)
    return GrowthEstimate(n, count, math.log(count) / n, math.log(2) * m, m)


def to_csv_row(ctx: BetaContext, x: float, n: int, est: GrowthEstimate) -> tuple:
    """``(beta, x, n, count, log_count_over_n, mu_S, lower_bound)``."""
    return (ctx.beta, x, n, est.count, est.log_count_over_n, est.mu_S, est.lower_bound)
