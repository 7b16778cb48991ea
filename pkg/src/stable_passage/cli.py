"""Command-line front end: ``stable-passage <command> [options]``.

Every command reads an optional JSON config and command-line overrides,
runs deterministically from ``--seed`` and writes CSV and/or JSON.  Exit
status is 0 on success, 2 for configuration errors and 3 when a numerical
guard aborts the run.
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
import time
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .asymptotics import (
    FUNCTIONALS,
    classify_limit,
    meander_compare,
    ratio_curve,
    tail_exponent,
)
from .boundaries import BoundarySpec, boundary_from_config
from .exact_dp import dp_positive_curve, dp_sweep, kill_levels
from .models import (
    InadmissibleParams,
    Lattice,
    StableParams,
    density_at_zero,
    model_from_config,
    positivity_index,
    scaling_sequence,
)
from .renewal import RenewalEstimate, estimate_renewal, srw_V
from .streams import WORKERS_ENV, child_seed
from .walk_sim import LADDER_KINDS, RareEventAbort, sample_endpoints, survival_sweep
from .wiener_hopf import SeriesError, delta_sequence, sparre_andersen_survival, wh_upper_bound

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

COMMANDS = (
    "rho",
    "scaling",
    "simulate",
    "dp-exact",
    "estimate-tail",
    "estimate-ug",
    "wh-bound",
    "renewal-estimate",
    "meander",
)
SURVIVAL_COLUMNS = ["n", "p_hat", "ci_low", "ci_high", "replicas", "censored_fraction", "seed"]


class ConfigError(ValueError):
    pass


# -- formatting ----------------------------------------------------------------------


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def to_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- config helpers ------------------------------------------------------------------


def _model(cfg):
    if "model" not in cfg:
        raise ConfigError("config needs a 'model' entry")
    return model_from_config(cfg["model"])


def _boundary(cfg, default: Optional[dict] = None) -> BoundarySpec:
    spec = cfg.get("boundary", default)
    if spec is None:
        raise ConfigError("config needs a 'boundary' entry")
    return boundary_from_config(spec)


def _grid(cfg, key="n_grid") -> list[int]:
    if key in cfg:
        vals = cfg[key]
    elif "n" in cfg:
        vals = cfg["n"]
    else:
        raise ConfigError(f"config needs '{key}' or 'n'")
    vals = [int(v) for v in (vals if isinstance(vals, (list, tuple)) else [vals])]
    if not vals or min(vals) < 1:
        raise ConfigError("horizons must be positive integers")
    return sorted(set(vals))


def _int(cfg, key, default=None) -> int:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"config needs '{key}'")
        return default
    v = cfg[key]
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"'{key}' must be an integer")
    return v


def _v_function(cfg, model) -> Callable:
    spec = cfg.get("V", {"source": "srw_exact"})
    src = spec.get("source")
    if src == "srw_exact":
        if not (isinstance(model, Lattice) and model.offsets == (-1, 1)):
            raise ConfigError("V source 'srw_exact' is only valid for the simple walk")
        return srw_V
    if src == "table":
        return RenewalEstimate.from_table(spec["grid"], spec["values"])
    if src == "renewal":
        return ("renewal", spec)
    raise ConfigError(f"unknown V source {src!r}")


# -- commands ------------------------------------------------------------------------
# each returns (columns, rows, summary)


def cmd_rho(cfg, seed, workers):
    p = StableParams(float(cfg["alpha"]), float(cfg["beta"]), float(cfg.get("scale_c", 1.0)))
    rho = positivity_index(p)
    row = {"alpha": p.alpha, "beta": p.beta, "rho": rho, "density_at_zero": density_at_zero(p)}
    return ["alpha", "beta", "rho", "density_at_zero"], [row], {"rho": rho}


def cmd_scaling(cfg, seed, workers):
    model = _model(cfg)
    c = scaling_sequence(model, _grid(cfg))
    rows = [{"n": n, "c_n": v} for n, v in zip(c.n.tolist(), c.values.tolist())]
    return ["n", "c_n"], rows, {}


def cmd_simulate(cfg, seed, workers):
    model, b = _model(cfg), _boundary(cfg)
    sw = survival_sweep(model, b, _grid(cfg), _int(cfg, "replicas"), seed, workers,
                        start=float(cfg.get("start", 0.0)))
    return SURVIVAL_COLUMNS, sw.rows(), {"censored_fraction": sw.censored_fraction}


def cmd_dp_exact(cfg, seed, workers):
    model, b = _model(cfg), _boundary(cfg)
    if not isinstance(model, Lattice):
        raise ConfigError("dp-exact needs a lattice model")
    grid = _grid(cfg)
    sw = dp_sweep(model, b, grid)
    last = float(sw.survival[-1])
    rows = [
        {"n": n, "p_hat": p, "ci_low": p, "ci_high": p, "replicas": 0,
         "censored_fraction": last, "seed": seed}
        for n, p in zip(grid, sw.survival.tolist())
    ]
    kill = kill_levels(b, max(grid), model=model)
    effective = {str(n): int(kill[n]) for n in grid}
    return SURVIVAL_COLUMNS, rows, {"effective_kill_level": effective}


def cmd_estimate_tail(cfg, seed, workers):
    model = _model(cfg)
    b = _boundary(cfg, {"variant": "constant", "level": 0.0})
    grid = _grid(cfg)
    method = cfg.get("method", "dp_exact" if isinstance(model, Lattice) else "monte_carlo")
    if method == "dp_exact":
        if not isinstance(model, Lattice):
            raise ConfigError("dp_exact needs a lattice model")
        p = dp_sweep(model, b, grid).survival
        rows = [{"n": n, "p_hat": v, "ci_low": v, "ci_high": v, "replicas": 0,
                 "censored_fraction": float(p[-1]), "seed": seed}
                for n, v in zip(grid, p.tolist())]
    elif method == "monte_carlo":
        sw = survival_sweep(model, b, grid, _int(cfg, "replicas"), seed, workers)
        rows = sw.rows()
        p = sw.p_hat
    else:
        raise ConfigError(f"unknown method {method!r}")
    if np.any(np.asarray(p) <= 0):
        raise RareEventAbort("zero survival on the grid; tail fit impossible")
    fit = tail_exponent(grid, p)
    summary = {"exponent": fit.exponent, "stderr": fit.stderr, "method": method,
               "expected_exponent": positivity_index(model.attracting_law) - 1}
    return SURVIVAL_COLUMNS, rows, summary


def _resolve_V(V, model, seed, workers):
    if isinstance(V, tuple):
        spec = V[1]
        cap = int(spec["step_cap"]) if "step_cap" in spec else None
        return estimate_renewal(model, "weak_descending", float(spec["x_max"]),
                                int(spec["chains"]), cap, child_seed(seed, 20), workers)
    return V


def cmd_estimate_ug(cfg, seed, workers):
    model, b = _model(cfg), _boundary(cfg)
    grid = _grid(cfg)
    method = cfg.get("method", "dp_exact" if isinstance(model, Lattice) else "monte_carlo")
    V = _resolve_V(_v_function(cfg, model), model, seed, workers)
    c_seq = scaling_sequence(model, range(1, max(max(grid), 2**8) + 1))
    rc = ratio_curve(model, b, grid, V, method, _int(cfg, "replicas", 100_000), seed, workers,
                     c_seq)
    columns = ["n", "u_g", "u_0", "p_g", "p_0", "r", "r_raw", "flagged"]
    summary: dict[str, Any] = {"method": method}
    if len(grid) >= 2:
        cl = classify_limit(b, c_seq, rc.ug)
        summary.update(classification=cl.label, monotonicity=cl.monotonicity,
                       summability=cl.summability.label, summand_exponent=cl.summability.exponent,
                       u_trend=cl.u_trend)
    return columns, rc.rows(), summary


def cmd_wh_bound(cfg, seed, workers):
    model, b = _model(cfg), _boundary(cfg)
    N = _int(cfg, "N")
    if isinstance(model, Lattice) and cfg.get("method", "dp_exact") == "dp_exact":
        pos = dp_positive_curve(model, b.zero_like(), N)[1:]
        delta = delta_sequence(model, b, N)
        exact = np.concatenate([[1.0], dp_sweep(model, b, range(1, N + 1)).survival])
        method = "dp_exact"
    else:
        reps = _int(cfg, "replicas", 100_000)
        ends = [sample_endpoints(model, n, reps, child_seed(seed, 30 + n), workers)
                for n in range(1, N + 1)]
        zero_ok = (lambda s: s >= 0) if b.strict else (lambda s: s > 0)
        pos = np.array([np.mean(zero_ok(e)) for e in ends])
        delta = delta_sequence(model, b, N, "monte_carlo", reps, child_seed(seed, 1), workers)
        sw = survival_sweep(model, b, range(1, N + 1), reps, child_seed(seed, 2), workers)
        exact = np.concatenate([[1.0], sw.p_hat])
        method = "monte_carlo"
    tau0 = sparre_andersen_survival(pos)
    q = wh_upper_bound(tau0, delta, N).coeffs
    rows = [{"n": n, "q_n": q[n], "p_exact_or_mc": exact[n], "dominance_margin": q[n] - exact[n]}
            for n in range(N + 1)]
    return ["n", "q_n", "p_exact_or_mc", "dominance_margin"], rows, {
        "method": method, "min_margin": float(np.min(q - exact))}


def cmd_renewal(cfg, seed, workers):
    model = _model(cfg)
    kind = cfg.get("kind", "weak_descending")
    if kind not in LADDER_KINDS:
        raise ConfigError(f"kind must be one of {LADDER_KINDS}")
    cap = _int(cfg, "step_cap") if "step_cap" in cfg else None
    est = estimate_renewal(model, kind, float(cfg["x_max"]), _int(cfg, "chains"), cap, seed,
                           workers)
    cols = ["x", "value", "stderr", "kind", "chains", "censored_fraction"]
    return cols, est.rows(), {"censored_fraction": est.censored_fraction}


def cmd_meander(cfg, seed, workers):
    model, b = _model(cfg), _boundary(cfg)
    functional = cfg.get("functional", "endpoint")
    if functional not in FUNCTIONALS:
        raise ConfigError(f"functional must be one of {FUNCTIONALS}")
    m = meander_compare(model, b, _int(cfg, "n"), _int(cfg, "count"), functional, seed, workers,
                        permutations=_int(cfg, "permutations", 200))
    row = {"functional": functional, "n": m.n, "count": len(m.sample_g), "ks": m.ks,
           "null_band": m.null_band, "acceptance_g": m.acceptance_g,
           "acceptance_0": m.acceptance_0}
    return list(row), [row], {"inside_null_band": m.inside_band}


HANDLERS = {
    "rho": cmd_rho,
    "scaling": cmd_scaling,
    "simulate": cmd_simulate,
    "dp-exact": cmd_dp_exact,
    "estimate-tail": cmd_estimate_tail,
    "estimate-ug": cmd_estimate_ug,
    "wh-bound": cmd_wh_bound,
    "renewal-estimate": cmd_renewal,
    "meander": cmd_meander,
}


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stable-passage", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--workers", type=int, help=f"worker threads (env {WORKERS_ENV})")
        p.add_argument("--out", help="output directory; CSV goes to stdout when omitted")
        p.add_argument("--format", choices=("csv", "json", "both"), default="csv")
        p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                       help="override a config entry, value parsed as JSON")
        if name == "rho":
            p.add_argument("--alpha", type=float)
            p.add_argument("--beta", type=float)
    return ap


def load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=JSON, got {item!r}")
        try:
            cfg[key] = json.loads(raw)
        except json.JSONDecodeError:
            cfg[key] = raw
    for key in ("alpha", "beta"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    return cfg


def resolve_workers(args, cfg) -> int:
    if args.workers is not None:
        return max(args.workers, 1)
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            return max(int(env), 1)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
    return max(int(cfg.get("workers", 1)), 1)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        workers = resolve_workers(args, cfg)
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        columns, rows, summary = HANDLERS[args.command](cfg, args.seed, workers)
    except (RareEventAbort, SeriesError, ArithmeticError, RuntimeError) as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InadmissibleParams as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError, KeyError, TypeError) as e:
        print(f"config error: {e!s}", file=sys.stderr)
        return EXIT_CONFIG
    elapsed = time.perf_counter() - t0

    text = to_csv(columns, rows)
    doc = {
        "command": args.command,
        "config": cfg,
        "seed": args.seed,
        "workers": workers,
        "version": __version__,
        "wall_clock_seconds": elapsed,
        "summary": summary,
        "columns": columns,
        "rows": rows,
    }
    blob = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if args.out is None:
        if args.command == "rho":
            print(fmt(summary["rho"]))
        elif args.format == "json":
            sys.stdout.write(blob)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    stem = os.path.join(args.out, args.command)
    if args.format in ("csv", "both"):
        write_atomic(stem + ".csv", text)
    if args.format in ("json", "both"):
        write_atomic(stem + ".json", blob)
    if args.command == "rho":
        print(fmt(summary["rho"]))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
