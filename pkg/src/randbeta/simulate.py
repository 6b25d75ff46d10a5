"""Monte Carlo orbits of the random map and their empirical x-marginals.

The random map is ergodic for the product of the fair coin measure and its
absolutely continuous invariant measure, so a long orbit's histogram
converges to the invariant density and the fraction of time spent in S to
its mass on S.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .core import BetaContext
from .errors import ContractError
from .stepfn import StepFunction, l1_distance


@dataclass(frozen=True)
class SimConfig:
    beta: float
    steps: int = 10**6
    burn_in: int = 1000
    bins: int = 100
    seed: int = 42
    x0: float | None = None

    def __post_init__(self):
        if not self.steps > self.burn_in >= 0:
            raise ContractError("need steps > burn_in >= 0")
        if self.bins < 2:
            raise ContractError("bins must be >= 2")


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    normalized_density: np.ndarray

    def as_step_function(self) -> StepFunction:
        return StepFunction(self.bin_edges, self.normalized_density, break_tol=0.0)

    def to_csv(self, header_lines: list[str] = ()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "count", "density"])
        e = self.bin_edges
        for i, (c, d) in enumerate(zip(self.counts, self.normalized_density)):
            w.writerow([repr(float(e[i])), repr(float(e[i + 1])), int(c), repr(float(d))])
        return buf.getvalue()


def make_histogram(xs: np.ndarray, domain_right: float, bins: int) -> Histogram:
    edges = np.linspace(0.0, domain_right, bins + 1)
    counts, _ = np.histogram(np.clip(xs, 0.0, domain_right), bins=edges)
    density = counts / (counts.sum() * np.diff(edges))
    return Histogram(edges, counts, density)


def run_orbit(cfg: SimConfig) -> tuple[Histogram, float]:
    """Iterate the random map from ``x0`` with seeded fair coins.

    Returns the histogram of the post-burn-in orbit and the fraction of those
    points that lie in S.
    """
    ctx = BetaContext(cfg.beta)
    x = 0.5 * ctx.right_end if cfg.x0 is None else float(cfg.x0)
    if not 0.0 <= x <= ctx.right_end:
        raise ContractError(f"x0={x!r} outside [0, {ctx.right_end!r}]")
    rng = np.random.default_rng(cfg.seed)
    coins = rng.integers(0, 2, size=cfg.steps).tolist()
    b, sl, sr, re = ctx.beta, ctx.s_left, ctx.s_right, ctx.right_end
    tol = ctx.boundary_tol
    kept = np.empty(cfg.steps - cfg.burn_in)
    in_s = 0
    for i in range(cfg.steps):
        if i >= cfg.burn_in:
            kept[i - cfg.burn_in] = x
        if x < sl - tol:
            x = b * x
        elif x <= sr + tol:
            if i >= cfg.burn_in:
                in_s += 1
            x = b * x - coins[i]
        else:
            x = b * x - 1
        # rounding can push an orbit a hair outside the interval
        if x < 0.0:
            x = 0.0
        elif x > re:
            x = re
    hist = make_histogram(kept, re, cfg.bins)
    return hist, in_s / len(kept)


def histogram_l1(h: Histogram, f: StepFunction) -> float:
    """L1 distance between the histogram density and ``f``."""
    return l1_distance(h.as_step_function(), f)
