"""Command-line entry point: ``randbeta <command> [options]``.

Every artifact starts with a metadata block (tool version, echoed arguments,
error bounds) and contains no timestamps, so reruns are byte-identical.
Exit codes: 0 success, 1 contract or domain error, 2 resource cap hit,
64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .core import GOLDEN, BetaContext
from .counting import CountQuery, count_brute, count_dp, count_monte_carlo, growth_estimate, to_csv_row
from .density import build_density, mu_S, parry_density, symmetry_defect
from .errors import ConsistencyError, ContractError, DomainError, ResourceError
from .simulate import SimConfig, run_orbit
from .stepfn import l1_distance
from .tower import DEFAULT_DEPTH, mass_identity, verify_measure_preservation
from .transfer import TransferConfig, apply_transfer, fixed_point

EX_USAGE = 64
#: decimal inputs this close to the golden ratio are read as the golden ratio itself
GOLDEN_TOL = 1e-9
COMMANDS = ("density", "parry", "transfer-check", "count", "growth", "tower-check", "simulate", "sweep")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", required=True, help="base in (1, 2); sweep takes start:end:steps")
    common.add_argument("--depth", type=int, default=None,
                        help=f"truncation depth (default 30; tower-check {DEFAULT_DEPTH})")
    common.add_argument("--n", type=int, default=None, help="prefix length for count/growth")
    common.add_argument("--x", type=float, default=None, help="point in [0, 1/(beta-1)]")
    common.add_argument("--samples", type=int, default=10**6)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--bins", type=int, default=100)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", default=None, help="file to write (default: stdout)")

    p = _Parser(prog="randbeta", description="Random beta-transformation toolkit.")
    p.add_argument("--version", action="version", version=f"randbeta {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("density", parents=[common], help="invariant density of the random map")
    sub.add_parser("parry", parents=[common], help="Parry density of the greedy map")
    tc = sub.add_parser("transfer-check", parents=[common], help="transfer-operator residual of the density")
    tc.add_argument("--variant", choices=("random", "greedy"), default="random")
    cnt = sub.add_parser("count", parents=[common], help="number of extendable prefixes N_n(x)")
    cnt.add_argument("--method", choices=("brute", "dp", "mc"), default="dp")
    sub.add_parser("growth", parents=[common], help="log N_n(x)/n against log 2 * mu(S)")
    sub.add_parser("tower-check", parents=[common], help="audit the natural-extension tower")
    sub.add_parser("simulate", parents=[common], help="orbit histogram of the random map")
    sw = sub.add_parser("sweep", parents=[common], help="mu(S) or C over a grid of beta")
    sw.add_argument("--emit", choices=("muS", "C"), default="muS")
    sw.add_argument("--jobs", type=int, default=1)
    return p


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"malformed grid {text!r}; expected start:end:steps") from None
    if k < 1 or not (math.isfinite(a) and math.isfinite(b)):
        raise UsageError(f"malformed grid {text!r}; steps must be >= 1")
    return np.linspace(a, b, k)


def _parse_beta(text: str) -> float:
    if ":" in text:
        raise UsageError("grid specs are only valid for sweep")
    if text.strip().lower() == "golden":
        return GOLDEN
    try:
        beta = float(text)
    except ValueError:
        raise UsageError(f"--beta must be a number or 'golden', got {text!r}") from None
    # a truncated decimal of the golden ratio would otherwise lose its finite orbit
    return GOLDEN if abs(beta - GOLDEN) <= GOLDEN_TOL else beta


def _require(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} requires {', '.join(missing)}")


def _meta(args, bounds: dict) -> dict:
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("output",)}
    meta = {"tool": "randbeta", "version": __version__, "args": echo, "error_bounds": bounds}
    if args.command != "sweep":
        meta["beta_resolved"] = _parse_beta(args.beta)
    return meta


def _csv(meta: dict, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# tool=randbeta version={meta['version']}\n")
    buf.write(f"# args={json.dumps(meta['args'], sort_keys=True)}\n")
    buf.write(f"# error_bounds={json.dumps(meta['error_bounds'], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _json(meta: dict, payload: dict) -> str:
    return json.dumps({"meta": meta, **payload}) + "\n"


def _emit(args, meta, header, rows, payload) -> str:
    if args.format == "json":
        return _json(meta, payload)
    return _csv(meta, header, rows)


# -- commands ------------------------------------------------------------------

def _density_like(args, result) -> str:
    meta = _meta(args, {"sup_error": result.sup_error, "l1_error": result.l1_error})
    if args.format == "json":
        return result.to_json(meta) + "\n"
    return _csv(meta, ["x_left", "x_right", "density"], result.f.to_rows())


def cmd_density(args):
    ctx = BetaContext(_parse_beta(args.beta))
    return _density_like(args, build_density(ctx, args.depth))


def cmd_parry(args):
    ctx = BetaContext(_parse_beta(args.beta))
    return _density_like(args, parry_density(ctx, args.depth))


def cmd_transfer_check(args):
    ctx = BetaContext(_parse_beta(args.beta))
    if args.variant == "random":
        res = build_density(ctx, args.depth)
        residual = l1_distance(apply_transfer(ctx, res.f), res.f)
        bound = 3 * res.C * 2 / (ctx.beta - 1) ** 2 * ctx.beta ** -args.depth
        record = {"beta": ctx.beta, "depth": args.depth, "variant": "random", "residual": residual,
                  "bound": bound, "symmetry_defect": symmetry_defect(res.f)}
        bounds = {"sup_error": res.sup_error, "l1_error": res.l1_error, "residual_bound": bound}
    else:
        parry = parry_density(ctx, args.depth)
        fp = fixed_point(ctx, TransferConfig(variant="greedy", max_iters=5000, fixed_point_tol=1e-12))
        record = {"beta": ctx.beta, "depth": args.depth, "variant": "greedy",
                  "residual": l1_distance(apply_transfer(ctx, parry.f, "greedy"), parry.f),
                  "fixed_point_l1": l1_distance(fp.density, parry.f), "iterations": fp.iterations,
                  "converged": fp.converged}
        bounds = {"sup_error": parry.sup_error, "l1_error": parry.l1_error}
    meta = _meta(args, bounds)
    return _emit(args, meta, list(record), [list(record.values())], record)


def cmd_count(args):
    _require(args, "x", "n")
    ctx = BetaContext(_parse_beta(args.beta))
    q = CountQuery(args.x, args.n)
    se = None
    if args.method == "brute":
        count = count_brute(ctx, q)
    elif args.method == "dp":
        count = count_dp(ctx, q)
    else:
        count, se = count_monte_carlo(ctx, q, args.samples, args.seed)
    record = {"beta": ctx.beta, "x": args.x, "n": args.n, "method": args.method, "count": count}
    bounds = {}
    if se is not None:
        record["standard_error"] = se
        bounds["standard_error"] = se
    return _emit(args, _meta(args, bounds), list(record), [list(record.values())], record)


def cmd_growth(args):
    _require(args, "x", "n")
    ctx = BetaContext(_parse_beta(args.beta))
    dens = build_density(ctx, args.depth)
    est = growth_estimate(ctx, args.x, args.n, dens)
    header = ["beta", "x", "n", "count", "log_count_over_n", "mu_S", "lower_bound"]
    row = list(to_csv_row(ctx, args.x, args.n, est))
    meta = _meta(args, {"sup_error": dens.sup_error, "l1_error": dens.l1_error})
    return _emit(args, meta, header, [row], dict(zip(header, row)))


def cmd_tower_check(args):
    ctx = BetaContext(_parse_beta(args.beta))
    rep = verify_measure_preservation(ctx, args.depth, args.samples, args.seed, bins=args.bins)
    ledger = mass_identity(ctx, args.depth)
    record = dict(rep.__dict__)
    record["mass_partial_sum"] = ledger.partial_sum
    record["mass_gap_bound"] = ledger.gap_bound
    meta = _meta(args, {"mass_gap_bound": ledger.gap_bound})
    return _emit(args, meta, list(record), [list(record.values())], record)


def cmd_simulate(args):
    beta = _parse_beta(args.beta)
    cfg = SimConfig(beta, steps=args.samples, bins=args.bins, seed=args.seed, x0=args.x)
    hist, s_frac = run_orbit(cfg)
    meta = _meta(args, {"monte_carlo_bin_se": float(1 / math.sqrt(cfg.steps - cfg.burn_in))})
    meta["s_fraction"] = s_frac
    if args.format == "json":
        return _json(meta, {"bin_edges": hist.bin_edges.tolist(), "counts": hist.counts.tolist(),
                            "density": hist.normalized_density.tolist(), "s_fraction": s_frac})
    lines = [f"tool=randbeta version={__version__}",
             f"args={json.dumps(meta['args'], sort_keys=True)}",
             f"error_bounds={json.dumps(meta['error_bounds'], sort_keys=True)}",
             f"s_fraction={s_frac!r}"]
    return hist.to_csv(lines)


def _sweep_entry(beta: float, depth: int, emit: str):
    ctx = BetaContext(float(beta))
    res = build_density(ctx, depth)
    value = mu_S(ctx, res) if emit == "muS" else res.C
    return float(beta), value, res.sup_error


def cmd_sweep(args):
    grid = _parse_grid(args.beta)
    for b in grid:
        BetaContext(float(b))  # fail fast on out-of-range grids
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_entry, grid, [args.depth] * len(grid), [args.emit] * len(grid)))
    else:
        rows = [_sweep_entry(b, args.depth, args.emit) for b in grid]
    header = ["beta", args.emit, "sup_error"]
    meta = _meta(args, {"max_sup_error": max(r[2] for r in rows)})
    return _emit(args, meta, header, rows, {"rows": [dict(zip(header, r)) for r in rows]})


HANDLERS = {
    "density": cmd_density,
    "parry": cmd_parry,
    "transfer-check": cmd_transfer_check,
    "count": cmd_count,
    "growth": cmd_growth,
    "tower-check": cmd_tower_check,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    # write-then-rename so a failed run never leaves a half-written artifact
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".randbeta-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # usage errors (64), --help and --version (0)
        return int(e.code or 0)
    if args.depth is None:
        args.depth = DEFAULT_DEPTH if args.command == "tower-check" else 30
    try:
        text = HANDLERS[args.command](args)
        _write(text, args.output)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"randbeta: error: {e}", file=sys.stderr)
        return EX_USAGE
    except (ContractError, DomainError, ConsistencyError) as e:
        print(f"randbeta: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except ResourceError as e:
        print(f"randbeta: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
