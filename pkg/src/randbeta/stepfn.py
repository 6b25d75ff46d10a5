"""Piecewise-constant functions on ``[0, domain_right]``.

Every density in this package is exactly piecewise constant at finite
truncation depth, so they are stored as sorted breakpoints plus one value per
piece rather than on a grid.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, DomainError

#: breakpoints closer than this are treated as one
BREAK_TOL = 1e-13


def _coalesce(breakpoints, values, break_tol, value_tol):
    b = np.asarray(breakpoints, dtype=float)
    v = np.asarray(values, dtype=float)
    if break_tol > 0 and len(v) > 1:
        # slivers are absorbed into the next kept piece (the last kept piece absorbs trailing ones)
        kept = np.flatnonzero(np.diff(b) > break_tol)
        if kept.size == 0:
            kept = np.array([int(np.argmax(np.diff(b)))])
        if kept.size < len(v):
            b = np.concatenate([[b[0]], b[kept[:-1] + 1], [b[-1]]])
            v = v[kept]
    if len(v) > 1:
        scale = max(1.0, float(np.max(np.abs(v))))
        jump = np.abs(np.diff(v)) > value_tol * scale
        keep_b = np.concatenate([[True], jump, [True]])
        b = b[keep_b]
        v = v[np.concatenate([[True], jump])]
    return b, v


class StepFunction:
    """A canonical piecewise-constant function.

    ``values[i]`` is the value on ``[breakpoints[i], breakpoints[i+1])``;
    the right end of the domain takes the value of the last piece.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints, values, *, break_tol: float = BREAK_TOL, value_tol: float = 1e-13):
        b = np.asarray(breakpoints, dtype=float)
        v = np.asarray(values, dtype=float)
        if b.ndim != 1 or v.ndim != 1 or len(b) != len(v) + 1 or len(v) == 0:
            raise ContractError("need k+1 breakpoints for k >= 1 values")
        if b[0] != 0.0:
            raise ContractError(f"domain must start at 0, got {b[0]!r}")
        if np.any(np.diff(b) <= 0):
            raise ContractError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ContractError("values must be finite")
        b, v = _coalesce(b, v, break_tol, value_tol)
        b.setflags(write=False)
        v.setflags(write=False)
        self.breakpoints = b
        self.values = v

    @classmethod
    def constant(cls, value: float, domain_right: float) -> StepFunction:
        return cls([0.0, domain_right], [value])

    @classmethod
    def from_indicators(cls, lefts, rights, weights, domain_right: float, *, break_tol: float = BREAK_TOL):
        """Sum of ``weights[j] * indicator([lefts[j], rights[j]])``.

        Intervals are clipped to the domain; empty ones contribute nothing.
        """
        lefts = np.clip(np.asarray(lefts, dtype=float), 0.0, domain_right)
        rights = np.clip(np.asarray(rights, dtype=float), 0.0, domain_right)
        weights = np.asarray(weights, dtype=float)
        ok = rights > lefts
        lefts, rights, weights = lefts[ok], rights[ok], weights[ok]
        pos = np.concatenate([[0.0, domain_right], lefts, rights])
        delta = np.concatenate([[0.0, 0.0], weights, -weights])
        order = np.argsort(pos, kind="stable")
        pos, delta = pos[order], delta[order]
        start = np.concatenate([[True], np.diff(pos) > break_tol])
        idx = np.flatnonzero(start)
        bps = pos[idx]
        # 0 and domain_right are the extreme positions, so the first and last groups sit there
        bps[0], bps[-1] = 0.0, domain_right
        level = np.cumsum(np.add.reduceat(delta, idx))[:-1]
        return cls(bps, level, break_tol=0.0)

    @property
    def domain_right(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"StepFunction(pieces={len(self)}, domain=[0, {self.domain_right:.6g}])"

    def __call__(self, x):
        """Evaluate at scalar or array ``x`` (no domain check)."""
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]

    def evaluate(self, x: float) -> float:
        if not 0.0 <= x <= self.domain_right:
            raise DomainError(f"x={x!r} outside [0, {self.domain_right!r}]")
        return float(self(x))

    def integrate(self) -> float:
        return float(np.dot(self.values, self.widths))

    def cumulative(self, x):
        """Integral of the function over ``[0, x]``; vectorised, x is clipped to the domain."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, self.domain_right)
        cum = np.concatenate([[0.0], np.cumsum(self.values * self.widths)])
        idx = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, len(self.values) - 1)
        return cum[idx] + self.values[idx] * (x - self.breakpoints[idx])

    def measure_of(self, a: float, b: float) -> float:
        if not 0.0 <= a <= b <= self.domain_right:
            raise DomainError(f"need 0 <= a <= b <= {self.domain_right!r}, got a={a!r}, b={b!r}")
        return float(self.cumulative(b) - self.cumulative(a))

    def scaled(self, c: float) -> StepFunction:
        return StepFunction(self.breakpoints, self.values * c, break_tol=0.0)

    def normalized(self) -> StepFunction:
        total = self.integrate()
        if total <= 0:
            raise ContractError("cannot normalize a function with non-positive integral")
        return self.scaled(1.0 / total)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw from the normalized function by inverse-CDF (requires values >= 0)."""
        if np.any(self.values < 0):
            raise ContractError("sampling needs a non-negative function")
        mass = self.values * self.widths
        cum = np.cumsum(mass)
        u = rng.random(size) * cum[-1]
        piece = np.minimum(np.searchsorted(cum, u, side="right"), len(mass) - 1)
        # uniform position within the chosen piece
        return self.breakpoints[piece] + rng.random(size) * self.widths[piece]

    def to_rows(self):
        """``(x_left, x_right, value)`` triples for CSV export."""
        b = self.breakpoints
        return [(float(b[i]), float(b[i + 1]), float(v)) for i, v in enumerate(self.values)]


def common_grid(f: StepFunction, g: StepFunction, tol: float = BREAK_TOL) -> np.ndarray:
    if abs(f.domain_right - g.domain_right) > tol:
        raise ContractError(f"domains differ: {f.domain_right!r} vs {g.domain_right!r}")
    grid = np.union1d(f.breakpoints, g.breakpoints)
    grid = grid[np.concatenate([[True], np.diff(grid) > tol])]
    grid[-1] = min(f.domain_right, g.domain_right)
    return grid


def l1_distance(f: StepFunction, g: StepFunction) -> float:
    """Exact L1 distance on the merged breakpoint grid."""
    grid = common_grid(f, g)
    mid = 0.5 * (grid[:-1] + grid[1:])
    return float(np.sum(np.abs(f(mid) - g(mid)) * np.diff(grid)))


def sup_distance(f: StepFunction, g: StepFunction, tol: float = BREAK_TOL) -> float:
    """Largest pointwise difference, ignoring pieces narrower than ``tol``."""
    grid = common_grid(f, g, tol)
    mid = 0.5 * (grid[:-1] + grid[1:])
    return float(np.max(np.abs(f(mid) - g(mid))))
