"""Command-line entry point: ``plancherel <subcommand> [options]``.

Every subcommand writes a table (CSV by default, JSON on request) whose
header echoes the effective configuration, so an output file is enough to
reproduce itself.  Options may also come from a flat ``key = value`` file
given with ``--config``; explicit flags win over the file, the file wins
over built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import linalg

from . import combinat, detform, fredholm, painleve, rsk
from .verify import run_verify

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (
    fredholm.DiscretizationError,
    painleve.PainleveIntegrationError,
    painleve.UnresolvedTailError,
    linalg.LinAlgError,
    FloatingPointError,
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- output

def format_value(value: Any) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (int, np.integer)):
        value = int(value)
        return value if abs(value) < 2**53 else str(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_value(value)
    return value


def render_table(
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: dict[str, Any],
    fmt: str,
    meta: dict[str, Any] | None = None,
) -> str:
    meta = meta or {}
    rows = list(rows)
    if fmt == "json":
        doc = {
            "config": {k: _json_value(v) for k, v in config.items()},
            "meta": {k: _json_value(v) for k, v in meta.items()},
            "columns": list(columns),
            "rows": [[_json_value(v) for v in row] for row in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    lines = [f"# {k}={format_value(v)}" for k, v in config.items()]
    lines += [f"# result.{k}={format_value(v)}" for k, v in meta.items()]
    lines.append(",".join(columns))
    lines += [",".join(format_value(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------- parsing

def _bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _add_globals(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global options")
    g.add_argument("--out", default=None, help="output path (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
    g.add_argument("--threads", type=int, default=1, help="worker threads for sampling")
    g.add_argument("--tol", type=float, default=None, help="tolerance override")
    g.add_argument("--config", default=None, help="flat key = value file of option defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plancherel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("exact", help="exact rational CDF of the first or second row length")
    p.add_argument("--k", type=int, choices=(1, 2), default=1, help="row index")
    p.add_argument("--n", type=int, default=None, help="row-length bound (default: all 0..N)")
    p.add_argument("--N", type=int, default=None, help="partition size")
    p.add_argument("--table", type=_bool, nargs="?", const=True, default=False, help="emit every size 0..N")

    p = sub.add_parser("phi", help="Poissonized row-length CDFs by determinant route")
    p.add_argument("--k", choices=("1", "2", "both"), default="both")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-max", dest="n_max", type=int, default=None, help="emit rows n..n_max")
    p.add_argument("--lambda", dest="lambda", type=float, default=None)
    p.add_argument("--route", choices=("series", "toeplitz", "intermediate", "fredholm", "all"), default="all")
    p.add_argument("--nodes", type=int, default=None, help="quadrature nodes for the Fredholm route")

    p = sub.add_parser("mc", help="Monte Carlo scaled row lengths against the limit law")
    p.add_argument("--n", "--N", dest="N", type=int, default=None, help="permutation size")
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--row", type=int, choices=(1, 2), default=1)
    p.add_argument("--samples", default=None, help="also write the scaled samples to this path")
    p.add_argument("--xmin", type=float, default=-7.0)
    p.add_argument("--xmax", type=float, default=4.0)
    p.add_argument("--dx", type=float, default=0.05)

    p = sub.add_parser("fredholm", help="Fredholm determinant and resolvent trace of the kernel")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--lambda", dest="lambda", type=float, default=None)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--nodes", type=int, default=None)

    p = sub.add_parser("tw", help="Tracy-Widom type limit CDFs from Painleve II")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--xmin", type=float, default=-8.0)
    p.add_argument("--xmax", type=float, default=6.0)
    p.add_argument("--dx", type=float, default=0.01)
    p.add_argument("--second", type=_bool, nargs="?", const=True, default=False, help="add the second-row CDF F2")
    p.add_argument("--moments", type=int, default=None, help="emit raw moments up to this order instead")

    p = sub.add_parser("verify", help="run the cross-route identity grid")
    p.add_argument("--perturb", type=float, default=0.0, help="scale the kernel by 1+perturb (sensitivity test)")

    for action in sub.choices.values():
        _add_globals(action)
    return parser


def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _apply_config(sub: argparse.ArgumentParser, name: str, values: dict[str, str]) -> None:
    actions = {}
    for action in sub._actions:
        if not action.option_strings or action.dest == "help":
            continue
        for opt in action.option_strings:
            actions[opt.lstrip("-").replace("-", "_")] = action
    defaults = {}
    for key, raw in values.items():
        if key == "subcommand":
            if raw != name:
                raise ConfigError(f"config file is for subcommand {raw!r}, not {name!r}")
            continue
        if key == "config":
            raise ConfigError("config files cannot include other config files")
        action = actions.get(key)
        if action is None:
            raise ConfigError(f"unknown config key {key!r} for {name}")
        try:
            value = action.type(raw) if action.type is not None else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
        if action.choices is not None and value not in action.choices:
            raise ConfigError(f"{key!r} must be one of {sorted(action.choices)}")
        defaults[action.dest] = value
    sub.set_defaults(**defaults)


def parse_config(argv: Sequence[str] | None) -> dict[str, Any]:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("subcommand", nargs="?")
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if known.config is not None and known.subcommand in subparsers.choices:
        _apply_config(subparsers.choices[known.subcommand], known.subcommand, read_config_file(known.config))
    args = parser.parse_args(argv)
    config = {"subcommand": args.subcommand}
    config.update({k: v for k, v in sorted(vars(args).items()) if k != "subcommand"})
    _validate(config)
    return config


def _require(config: dict[str, Any], *keys: str) -> None:
    missing = [k for k in keys if config.get(k) is None]
    if missing:
        raise ConfigError(f"{config['subcommand']}: missing value for {', '.join(missing)}")


def _validate(c: dict[str, Any]) -> None:
    name = c["subcommand"]
    if c.get("threads", 1) < 1:
        raise ConfigError("threads must be positive")
    if c.get("tol") is not None and not c["tol"] > 0:
        raise ConfigError("tol must be positive")
    if c.get("nodes") is not None and c["nodes"] < 8:
        raise ConfigError("nodes must be at least 8")
    if name == "exact":
        _require(c, "N")
        if c["N"] < 0:
            raise ConfigError("N must be nonnegative")
        if c["N"] > combinat.ENUMERATION_CAP:
            raise ConfigError(f"N exceeds the enumeration cap {combinat.ENUMERATION_CAP}")
        if c["n"] is not None and c["n"] < 0:
            raise ConfigError("n must be nonnegative")
    elif name == "phi":
        _require(c, "n", "lambda")
        if c["n"] < 0 or c["lambda"] < 0:
            raise ConfigError("n and lambda must be nonnegative")
        if c["n_max"] is not None and c["n_max"] < c["n"]:
            raise ConfigError("n_max must be at least n")
        if c["route"] == "intermediate" and c["k"] != "2":
            raise ConfigError("the intermediate route computes the second row only; use k = 2")
    elif name == "mc":
        _require(c, "N", "count", "seed")
        if c["N"] < 1 or c["count"] < 1:
            raise ConfigError("N and count must be positive")
        if c["seed"] < 0:
            raise ConfigError("seed must be nonnegative")
        _check_grid(c, lo=-10.0, hi=painleve.X_START)
    elif name == "fredholm":
        _require(c, "n", "lambda")
        if c["n"] < 0 or c["lambda"] < 0:
            raise ConfigError("n and lambda must be nonnegative")
        if not 0 < c["t"] <= 1:
            raise ConfigError("t must lie in (0, 1]")
    elif name == "tw":
        if not 0 < c["t"] <= 1:
            raise ConfigError("t must lie in (0, 1]")
        _check_grid(c, lo=-10.0 if c["t"] == 1 else -40.0, hi=painleve.X_START)
        if c["second"] and c["t"] != 1:
            raise ConfigError("second is only defined at t = 1")
        if c["moments"] is not None and c["moments"] < 1:
            raise ConfigError("moments must be a positive order")
    elif name == "verify":
        if not c["perturb"] > -1:
            raise ConfigError("perturb must exceed -1")


def _check_grid(c: dict[str, Any], lo: float, hi: float) -> None:
    if not c["dx"] > 0 or not c["xmin"] < c["xmax"]:
        raise ConfigError("need dx > 0 and xmin < xmax")
    if c["xmin"] < lo or c["xmax"] > hi:
        raise ConfigError(f"grid must lie inside [{lo:g}, {hi:g}]")


# ---------------------------------------------------------------- commands

def cmd_exact(c: dict[str, Any]):
    k, N = c["k"], c["N"]
    sizes = range(N + 1) if c["table"] else [N]
    rows = []
    for size in sizes:
        bounds = [c["n"]] if c["n"] is not None else range(size + 1)
        for n in bounds:
            q = combinat.exact_row_cdf(k, n, size)
            rows.append((k, n, size, q.numerator, q.denominator, q))
    return ["k", "n", "N", "numerator", "denominator", "q"], rows, {}


PHI_ROUTES = ("series", "toeplitz", "intermediate", "fredholm")


def _phi_value(route: str, k: int, n: int, lam: float, c: dict[str, Any]) -> float | None:
    tol = c["tol"] if c["tol"] is not None else detform.SERIES_TAIL_TOL
    if route == "series":
        return detform.phi_series(k, n, lam, tol=tol).value
    if k == 1:
        if route == "toeplitz":
            return detform.phi1_toeplitz(n, lam)
        if route == "fredholm":
            return 2.0**-n * _det(n, lam, 1.0, c).value
        return None
    # the closed forms for the second row are indexed by n + 1 >= 1
    if n == 0:
        return None
    if route == "intermediate":
        return detform.phi2_intermediate(n, lam)
    if route == "fredholm":
        return fredholm.phi2_fredholm(n, lam, c["nodes"])
    return None


def cmd_phi(c: dict[str, Any]):
    routes = PHI_ROUTES if c["route"] == "all" else (c["route"],)
    ks = (1, 2) if c["k"] == "both" else (int(c["k"]),)
    lam = c["lambda"]
    n_hi = c["n"] if c["n_max"] is None else c["n_max"]
    rows = []
    worst = 0.0
    for k in ks:
        for n in range(c["n"], n_hi + 1):
            values = [_phi_value(r, k, n, lam, c) for r in routes]
            row: list[Any] = [k, n, lam, *values]
            if c["route"] == "all":
                present = [v for v in values if v is not None]
                dev = max(present) - min(present) if present else 0.0
                worst = max(worst, dev)
                row.append(dev)
            rows.append(row)
    columns = ["k", "n", "lambda", *routes]
    meta = {}
    if c["route"] == "all":
        columns.append("max_deviation")
        meta["max_deviation"] = worst
    return columns, rows, meta


def _det(n: int, lam: float, t: float, c: dict[str, Any]) -> fredholm.DetResult:
    tol = fredholm.CONVERGENCE_TOL if c["tol"] is None else c["tol"]
    return fredholm.fredholm_det_report(fredholm.KernelSpec(n, lam, t), c["nodes"], tol=tol)


def cmd_fredholm(c: dict[str, Any]):
    n, lam, t = c["n"], c["lambda"], c["t"]
    res = _det(n, lam, t, c)
    spec = fredholm.KernelSpec(n, lam, t)
    trace = fredholm.resolvent_trace(spec, res.m)
    sp = fredholm.spectrum(spec, res.m)
    meta = {
        "det": res.value,
        "scaled_det": (1 + math.sqrt(t)) ** -n * res.value,
        "trace": trace,
        "nodes": res.m,
        "det_refined": res.refined,
        "refinement_change": res.change,
        "imag_part": res.imag,
        "eig_min": sp.min,
        "eig_max": sp.max,
        "eig_near_minus_one": sp.near_minus_one,
    }
    if t == 1.0:
        meta["phi1_n"] = 2.0**-n * res.value
        meta["phi2_n_plus_1"] = meta["phi1_n"] * (1 + n / 4 + 0.5 * trace)
    return list(meta), [list(meta.values())], {}


def _limit_cdf(row: int):
    grid = painleve.default_grid()
    table = painleve.f2_cdf(grid)
    values = table.F1 if row == 1 else table.F2
    return painleve.cdf_interpolator(grid, values), painleve.mean_variance(grid, values)[0]


def cmd_mc(c: dict[str, Any]):
    sset = rsk.sample_scaled(c["row"], c["N"], c["count"], c["seed"], c["threads"])
    limit, limit_mean = _limit_cdf(c["row"])
    grid = painleve.default_grid(c["xmin"], c["xmax"], c["dx"])
    ecdf = rsk.empirical_cdf(sset, grid)
    rows = list(zip(grid, ecdf, limit(grid)))
    meta = {
        "ks_distance": rsk.ks_distance(sset, limit),
        "sample_mean": sset.mean(),
        "limit_mean": limit_mean,
    }
    if c["samples"] is not None:
        text = render_table(["x"], [(x,) for x in sset.samples], c, "csv")
        _emit(text, c["samples"])
    return ["x", "ecdf", "limit"], rows, meta


def cmd_tw(c: dict[str, Any]):
    grid = painleve.default_grid(c["xmin"], c["xmax"], c["dx"])
    sol = painleve.solve_pii(c["t"], x_end=min(painleve.X_END, float(grid[0])))
    F = painleve.tw_cdf(c["t"], grid, sol)
    curves = {"F": F}
    if c["second"]:
        curves["F2"] = painleve.f2_cdf(grid, sol).F2
    if c["moments"] is None:
        return ["x", *curves], list(zip(grid, *curves.values())), {}
    rows = []
    for order in range(1, c["moments"] + 1):
        rows.append([order, *(painleve.distribution_moments(grid, v, order) for v in curves.values())])
    meta = {}
    for name, values in curves.items():
        mean, var = painleve.mean_variance(grid, values)
        meta[f"{name}_mean"], meta[f"{name}_variance"] = mean, var
    return ["order", *curves], rows, meta


def cmd_verify(c: dict[str, Any]):
    report = run_verify(scale=1.0 + c["perturb"], tol_override=c["tol"])
    rows = [(x.name, x.params, x.lhs, x.rhs, x.residual, x.tolerance, x.passed) for x in report.checks]
    return ["name", "params", "lhs", "rhs", "residual", "tolerance", "pass"], rows, report.summary()


COMMANDS = {
    "exact": cmd_exact,
    "phi": cmd_phi,
    "mc": cmd_mc,
    "fredholm": cmd_fredholm,
    "tw": cmd_tw,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"plancherel: error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except SystemExit as exc:
        # argparse exits 2 on bad flags, matching the invalid-config status
        return int(exc.code) if exc.code is not None else EXIT_OK
    name = config["subcommand"]
    fmt = config["format"] or ("json" if name == "fredholm" else "csv")
    config["format"] = fmt
    try:
        columns, rows, meta = COMMANDS[name](config)
    except NUMERICAL_ERRORS as exc:
        print(f"plancherel: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (combinat.EnumerationLimitError, ValueError) as exc:
        print(f"plancherel: error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    _emit(render_table(columns, rows, config, fmt, meta), config["out"])
    if name == "verify" and meta["failed"]:
        return EXIT_VERIFY_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
