"""Command-line front end.

Subcommands: simulate | exact | verify | clt | converge.  Global flags:
--seed, --threads, --format json|csv, --out PATH, --config PATH.  Exit
codes: 0 ok, 1 runtime failure, 2 usage or config error, 3 verification
failure.

Every run prints its fully resolved configuration, including the effective
seed, as one JSON line on stderr; re-running with that configuration
reproduces the output byte for byte.  Data goes to --out when given,
stdout otherwise.  CSV column sets are fixed per subcommand and never vary
with flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import secrets
import sys
from fractions import Fraction
from pathlib import Path

from .analytics import moment_catalog, oracle_moment
from .indices import NAMED_INDICES, index_name, parse_index
from .montecarlo import (
    SimConfig,
    convergence_probe,
    ks_normal,
    model_probability,
    run_experiment,
    standardize,
)
from .tree import Preferential, UniformLeaf
from .verify import run_level

__all__ = ["main", "entrypoint"]

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_VERIFY = 3

DIAG_HEADER = ["index", "n", "p", "mean", "var", "ks", "exceedance", "r_mean_error", "limit"]
SIMULATE_HEADER = ["index", "n", "p", "replicates", "mean", "variance"]
EXACT_HEADER = ["index", "n", "p", "mean", "variance", "oracle_mean", "oracle_variance", "match"]

DEFAULT_INDICES = ",".join(index_name(spec) for spec in NAMED_INDICES)


class ConfigError(ValueError):
    """Bad or missing configuration; maps to exit code 2."""


def _parse_probability(text: str):
    text = text.strip()
    try:
        value = Fraction(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"field 'p' must be a probability, got {text!r}") from None
    if not 0 < value < 1:
        raise ConfigError(f"field 'p' must lie strictly between 0 and 1, got {text!r}")
    return value


def _parse_model(text: str):
    text = text.strip().lower()
    if text == "preferential":
        return Preferential()
    if text.startswith("uniform:"):
        return UniformLeaf(float(_parse_probability(text.split(":", 1)[1])))
    raise ConfigError(f"field 'model' must be 'uniform:<p>' or 'preferential', got {text!r}")


def _parse_indices(text: str):
    names = [part for part in text.split(",") if part.strip()]
    if not names:
        raise ConfigError("field 'indices' is empty")
    return tuple(parse_index(name) for name in names)


def _parse_int_list(text: str, field: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"field {field!r} must be a comma-separated integer list, got {text!r}") from None
    if not values:
        raise ConfigError(f"field {field!r} is empty")
    return values


def _parse_n_values(args) -> list[int]:
    if args.n is not None and args.n_range is not None:
        raise ConfigError("give either field 'n' or 'n-range', not both")
    if args.n is not None:
        return [args.n]
    if args.n_range is not None:
        parts = args.n_range.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"field 'n-range' must be 'start:stop[:step]', got {args.n_range!r}")
        try:
            start, stop = int(parts[0]), int(parts[1])
            step = int(parts[2]) if len(parts) == 3 else 1
        except ValueError:
            raise ConfigError(f"field 'n-range' must be integers, got {args.n_range!r}") from None
        if step < 1 or stop < start:
            raise ConfigError(f"field 'n-range' must be increasing, got {args.n_range!r}")
        return list(range(start, stop + 1, step))
    raise ConfigError("missing required field 'n' (or 'n-range')")


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _resolve(args, file_config: dict, flag: str, file_key: str, default=None):
    value = getattr(args, flag, None)
    if value is not None:
        return value
    if file_key in file_config:
        return file_config[file_key]
    return default


def _effective_seed(args, file_config: dict) -> int:
    seed = _resolve(args, file_config, "seed", "master_seed")
    if seed is None:
        seed = secrets.randbits(63)
    return int(seed)


def _echo_config(resolved: dict) -> None:
    print("resolved config: " + json.dumps(resolved, sort_keys=True, default=str),
          file=sys.stderr)


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def _csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(cell) for cell in row])
    return buffer.getvalue()


def _json_text(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n"


def _emit(text: str, out_path) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommand handlers -------------------------------------------------------

def _cmd_simulate(args) -> int:
    file_config = _load_config_file(args.config)
    model_text = _resolve(args, file_config, "model", "model")
    if model_text is None:
        raise ConfigError("missing required field 'model'")
    model = model_text if not isinstance(model_text, str) else _parse_model(model_text)
    horizon = _resolve(args, file_config, "n", "horizon")
    if horizon is None:
        raise ConfigError("missing required field 'n' (horizon)")
    replicates = int(_resolve(args, file_config, "replicates", "replicates", 10_000))
    indices_text = _resolve(args, file_config, "indices", "indices", DEFAULT_INDICES)
    if isinstance(indices_text, (list, tuple)):
        indices_text = ",".join(indices_text)
    indices = _parse_indices(indices_text)
    clt_shift = float(_resolve(args, file_config, "clt_shift", "clt_shift", 0.0))
    seed = _effective_seed(args, file_config)

    config = SimConfig(model=model, horizon=int(horizon), replicates=replicates,
                       master_seed=seed, indices=indices, clt_shift=clt_shift)
    resolved = {"command": "simulate", "threads": args.threads, "format": args.format,
                **config.to_json()}
    _echo_config(resolved)

    summary = run_experiment(config, threads=args.threads)
    if args.format == "csv":
        p = model_probability(model)
        rows = [
            [key, config.horizon, p, config.replicates, stats.mean, stats.variance]
            for key, stats in summary.stats.items()
        ]
        _emit(_csv_text(SIMULATE_HEADER, rows), args.out)
    else:
        _emit(summary.to_json_str(), args.out)
    return EXIT_OK


def _cmd_exact(args) -> int:
    file_config = _load_config_file(args.config)
    if args.index is None:
        raise ConfigError("missing required field 'index'")
    if args.p is None:
        raise ConfigError("missing required field 'p'")
    index = parse_index(args.index)
    entry = moment_catalog(index)
    if entry.mean is None or entry.variance is None:
        raise ConfigError(
            f"index {entry.key!r} has no exact catalog formulas (asymptotics only)")
    p = _parse_probability(args.p)
    n_values = _parse_n_values(args)
    seed = _effective_seed(args, file_config)
    resolved = {"command": "exact", "index": entry.key, "p": str(p),
                "n_values": n_values, "oracle": bool(args.oracle),
                "master_seed": seed, "format": args.format}
    _echo_config(resolved)

    rows = []
    exact_mode = isinstance(p, Fraction)
    for n in n_values:
        mean = entry.mean(n, p)
        variance = entry.variance(n, p)
        oracle_mean = oracle_variance = None
        match = None
        if args.oracle:
            oracle_mean = oracle_moment(index, n, p, 1)
            oracle_variance = oracle_moment(index, n, p, 2) - oracle_mean ** 2
            if exact_mode:
                match = mean == oracle_mean and variance == oracle_variance
            else:
                match = (
                    abs(mean - oracle_mean) <= 1e-12 * max(1.0, abs(oracle_mean))
                    and abs(variance - oracle_variance) <= 1e-12 * max(1.0, abs(oracle_variance))
                )
        rows.append([entry.key, n, p, mean, variance, oracle_mean, oracle_variance, match])

    if args.format == "csv":
        _emit(_csv_text(EXACT_HEADER, rows), args.out)
    else:
        payload = {"rows": [dict(zip(EXACT_HEADER, (_fmt(c) for c in row))) for row in rows]}
        _emit(_json_text(payload), args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    file_config = _load_config_file(args.config)
    seed = _effective_seed(args, file_config)
    resolved = {"command": "verify", "level": args.level, "master_seed": seed}
    _echo_config(resolved)
    failures, counts = run_level(args.level, master_seed=seed)
    lines = [f"verification level={args.level}"]
    lines += [f"  {key}: {value}" for key, value in counts.items() if key != "level"]
    if failures:
        lines.append(f"FAILURES ({len(failures)}):")
        lines += [f"  {failure}" for failure in failures]
    else:
        lines.append("all suites passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_VERIFY if failures else EXIT_OK


def _diag_output(args, rows) -> None:
    if args.format == "csv":
        _emit(_csv_text(DIAG_HEADER, rows), args.out)
    else:
        payload = {"rows": [dict(zip(DIAG_HEADER, (_fmt(c) for c in row))) for row in rows]}
        _emit(_json_text(payload), args.out)


def _cmd_clt(args) -> int:
    file_config = _load_config_file(args.config)
    if args.index is None:
        raise ConfigError("missing required field 'index'")
    index = parse_index(args.index)
    entry = moment_catalog(index)
    if entry.clt is None:
        raise ConfigError(f"index {entry.key!r} has no cataloged CLT normalizer")
    if args.model is not None:
        model = _parse_model(args.model)
    elif args.p is not None:
        model = UniformLeaf(float(_parse_probability(args.p)))
    else:
        raise ConfigError("missing required field 'p' (or 'model')")
    p = model_probability(model)
    if args.n is None:
        raise ConfigError("missing required field 'n'")
    n_values = _parse_int_list(args.n, "n")
    replicates = int(_resolve(args, file_config, "replicates", "replicates", 20_000))
    k = float(args.k)
    seed = _effective_seed(args, file_config)
    resolved = {"command": "clt", "index": entry.key, "model": model.name,
                "n_values": n_values, "replicates": replicates, "clt_shift": k,
                "master_seed": seed, "threads": args.threads, "format": args.format}
    _echo_config(resolved)

    rows = []
    for n in n_values:
        config = SimConfig(model=model, horizon=n, replicates=replicates,
                           master_seed=seed, indices=(index,), clt_shift=k)
        summary = run_experiment(config, threads=args.threads, keep_samples=True)
        z = standardize(summary.samples[entry.key], index, n, p, k)
        rows.append([entry.key, n, p, float(z.mean()), float(z.var(ddof=1)),
                     ks_normal(z), None, None, None])
    _diag_output(args, rows)
    return EXIT_OK


def _cmd_converge(args) -> int:
    file_config = _load_config_file(args.config)
    if args.index is None:
        raise ConfigError("missing required field 'index'")
    index = parse_index(args.index)
    entry = moment_catalog(index)
    if entry.limit is None:
        raise ConfigError(f"index {entry.key!r} has no cataloged limit constant")
    if args.model is not None:
        model = _parse_model(args.model)
    elif args.p is not None:
        model = UniformLeaf(float(_parse_probability(args.p)))
    else:
        raise ConfigError("missing required field 'p' (or 'model')")
    n_grid = _parse_int_list(args.n_grid, "n-grid")
    replicates = int(_resolve(args, file_config, "replicates", "replicates", 10_000))
    seed = _effective_seed(args, file_config)
    resolved = {"command": "converge", "index": entry.key, "model": model.name,
                "n_grid": n_grid, "replicates": replicates, "epsilon": args.eps,
                "r": args.r, "master_seed": seed, "threads": args.threads,
                "format": args.format}
    _echo_config(resolved)

    probe = convergence_probe(index, model, n_grid, args.eps, args.r,
                              replicates, seed, threads=args.threads)
    rows = [
        [row.index, row.n, row.p, row.mean, row.variance, None,
         row.exceedance, row.r_mean_error, row.limit]
        for row in probe
    ]
    _diag_output(args, rows)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiderlab",
        description="Random spider tree simulator, exact index analytics, and diagnostics",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (drawn from system entropy and echoed when omitted)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for replicates")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output file (stdout when omitted)")
    common.add_argument("--config", default=None, help="JSON config file; flags override its values")

    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="run a Monte Carlo experiment")
    sim.add_argument("--model", default=None, help="uniform:<p> or preferential")
    sim.add_argument("--n", type=int, default=None, help="growth horizon")
    sim.add_argument("--replicates", type=int, default=None)
    sim.add_argument("--indices", default=None, help=f"comma list (default {DEFAULT_INDICES})")
    sim.add_argument("--clt-shift", dest="clt_shift", type=float, default=None)

    exact = sub.add_parser("exact", parents=[common], help="print catalog mean/variance tables")
    exact.add_argument("--index", default=None)
    exact.add_argument("--n", type=int, default=None)
    exact.add_argument("--n-range", dest="n_range", default=None, help="start:stop[:step]")
    exact.add_argument("--p", default=None, help="probability; use a ratio like 2/5 for exact mode")
    exact.add_argument("--oracle", action="store_true",
                       help="also compute the summation oracle and a match column")

    ver = sub.add_parser("verify", parents=[common], help="run the verification suites")
    ver.add_argument("--level", choices=("quick", "full"), default="quick")

    clt = sub.add_parser("clt", parents=[common], help="KS-vs-normal table for standardized indices")
    clt.add_argument("--index", default=None)
    clt.add_argument("--model", default=None)
    clt.add_argument("--p", default=None)
    clt.add_argument("--n", default=None, help="comma list of horizons")
    clt.add_argument("--replicates", type=int, default=None)
    clt.add_argument("--k", type=float, default=0.0, help="free shift in the CLT scale")

    conv = sub.add_parser("converge", parents=[common],
                          help="exceedance and r-mean error toward the cataloged limit")
    conv.add_argument("--index", default=None)
    conv.add_argument("--model", default=None)
    conv.add_argument("--p", default=None)
    conv.add_argument("--n-grid", dest="n_grid", default="100,1000,10000")
    conv.add_argument("--eps", type=float, default=0.05)
    conv.add_argument("--r", type=float, default=2.0)
    conv.add_argument("--replicates", type=int, default=None)

    return parser


_HANDLERS = {
    "simulate": _cmd_simulate,
    "exact": _cmd_exact,
    "verify": _cmd_verify,
    "clt": _cmd_clt,
    "converge": _cmd_converge,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _HANDLERS[args.command](args)
    except ValueError as exc:
        # ConfigError, bad probabilities, unknown indices, bad SimConfig fields.
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
