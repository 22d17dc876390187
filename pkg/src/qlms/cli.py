"""Command-line front end.

Commands:

* ``run`` -- one experiment (algorithm, SNR, iterations, runs) -> curve + row
* ``suite`` -- a full protocol preset table (one row per algorithm per SNR)
* ``compare`` -- chosen algorithms under preset step sizes at one SNR
* ``estimate-lambda`` -- dominant eigenvalue of the input autocorrelation

Exit codes: 0 success, 2 usage/config error, 3 divergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, presets, signals
from .exceptions import ConfigError, DivergenceError, ParameterError, QlmsError
from .filters import KINDS, estimate_lambda_max

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so error paths are testable and uniform
    def error(self, message):
        raise _UsageError(message)


def _lambda_max_arg(value: str):
    if value == "estimate":
        return value
    try:
        return float(value)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected a number or 'estimate', got {value!r}") from err


def build_parser() -> _Parser:
    parser = _Parser(prog="qlms", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default=None, help="output directory for CSVs and manifest (default: no export)")
        p.add_argument("--workers", type=int, default=None, help="max concurrent runs (default: machine parallelism)")
        p.add_argument("--seed", type=int, default=presets.DEFAULT_BASE_SEED, help="base seed (default %(default)s)")
        p.add_argument("--runs", type=int, default=None, help="independent runs (default: 200 desk scale)")
        p.add_argument("--full-scale", action="store_true", help="use the full published run count (1000)")
        p.add_argument("--config", default=None, help="JSON config file; command-line flags override it")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field, e.g. --set n_iterations=5000")

    # run flags default to None so explicit values can override a --config file
    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("--algo", choices=KINDS, help="algorithm kind")
    p_run.add_argument("--mu", type=float, help="learning rate (> 0)")
    p_run.add_argument("--q", type=float, action="append", default=None,
                       help="fixed q (repeat per tap, or give once for all taps)")
    p_run.add_argument("--beta", type=float, default=None, help="time-varying-q memory (0 < beta < 1)")
    p_run.add_argument("--gamma", type=float, default=None, help="time-varying-q error gain (> 0)")
    p_run.add_argument("--zeta", type=float, default=None, help="normalized-update regularizer (default 1e-3)")
    p_run.add_argument("--lambda-max", type=_lambda_max_arg, default=None,
                       help="autocorrelation eigenvalue bound: a number or 'estimate'")
    p_run.add_argument("--snr", type=float, default=None, help="SNR in dB (default 10)")
    p_run.add_argument("--iters", type=int, default=None, help="iterations per run (default 10000)")
    p_run.add_argument("--q-init", choices=bench.Q_INIT_POLICIES, default=None)
    p_run.add_argument("--snr-ref", choices=bench.SNR_REFERENCES, default=None)
    add_common(p_run)

    p_suite = sub.add_parser("suite", help="run a protocol preset table")
    p_suite.add_argument("--protocol", type=int, choices=presets.PROTOCOLS, help="protocol number")
    p_suite.add_argument("--mode", choices=("convergence", "steady-state"), default="convergence")
    p_suite.add_argument("--snr", type=float, action="append", default=None,
                         help="SNR column(s); default 10, 20, 30")
    p_suite.add_argument("--iters", type=int, default=None, help="override protocol iteration count")
    p_suite.add_argument("--skip-suspect", action="store_true", help="drop preset cells flagged as suspect")
    add_common(p_suite)

    p_cmp = sub.add_parser("compare", help="compare algorithms under preset step sizes")
    p_cmp.add_argument("--algos", default=",".join(presets.ALGORITHMS),
                       help="comma-separated subset of %s" % (presets.ALGORITHMS,))
    p_cmp.add_argument("--protocol", type=int, choices=presets.PROTOCOLS, default=1)
    p_cmp.add_argument("--mode", choices=("convergence", "steady-state"), default="convergence")
    p_cmp.add_argument("--snr", type=float, default=10.0)
    p_cmp.add_argument("--iters", type=int, default=None)
    add_common(p_cmp)

    p_lam = sub.add_parser("estimate-lambda", help="estimate the dominant autocorrelation eigenvalue")
    p_lam.add_argument("--taps", type=int, default=5, help="matrix order M (default %(default)s)")
    p_lam.add_argument("--n-samples", type=int, default=100_000, help="samples to analyze (default %(default)s)")
    p_lam.add_argument("--seed", type=int, default=presets.DEFAULT_BASE_SEED)
    p_lam.add_argument("--input", default=None, help="read samples from a float64 dump instead of generating")
    p_lam.add_argument("--dump-out", default=None, help="also write the analyzed samples as a signal dump")

    return parser


def _print_table(rows) -> None:
    header = ("algorithm", "mu", "snr_db", "steady_state_db", "se_db", "convergence_point")
    table = [header]
    for row in rows:
        conv = "not-converged" if row.convergence_point is None else str(row.convergence_point)
        table.append(
            (row.label, f"{row.mu:g}", f"{row.snr_db:g}",
             f"{row.steady_state_db:.2f}", f"{row.steady_state_se_db:.3f}", conv)
        )
    widths = [max(len(r[c]) for r in table) for c in range(len(header))]
    for i, row in enumerate(table):
        print("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)))
        if i == 0:
            print("  ".join("-" * widths[c] for c in range(len(header))))


def _apply_overrides(data: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        key, value = item.split("=", 1)
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"override key {key!r} does not match the config layout")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"override key {key!r} does not match the config layout")
        try:
            node[parts[-1]] = json.loads(value)
        except json.JSONDecodeError:
            node[parts[-1]] = value
    return data


def _load_config(path: str | None) -> dict | None:
    if path is None:
        return None
    try:
        return json.loads(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err


def _n_runs(args) -> int:
    if args.runs is not None:
        return args.runs
    return presets.FULL_SCALE_RUNS if args.full_scale else presets.DESK_SCALE_RUNS


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    if config is not None:
        data = _apply_overrides(config, args.overrides)
        data = dict(data.get("experiment", data))
    else:
        if args.algo is None or args.mu is None:
            raise ConfigError("run requires --algo and --mu (or --config)")
        data = {
            "algorithm": {"kind": args.algo, "mu": args.mu},
            "channel": {"h": [float(v) for v in signals.DEFAULT_CHANNEL_H], "snr_db": 10.0},
            "n_iterations": 10_000,
            "n_runs": _n_runs(args),
            "base_seed": args.seed,
        }
    # explicit command-line values win over the config file
    algo_data = dict(data.get("algorithm", {}))
    if args.algo is not None:
        algo_data["kind"] = args.algo
    if args.mu is not None:
        algo_data["mu"] = args.mu
    if args.q is not None:
        algo_data["q_fixed"] = args.q[0] if len(args.q) == 1 else list(map(float, args.q))
    if args.beta is not None:
        algo_data["beta"] = args.beta
    if args.gamma is not None:
        algo_data["gamma"] = args.gamma
    if args.zeta is not None:
        algo_data["zeta"] = args.zeta
    elif "zeta" not in algo_data and algo_data.get("kind") in ("nlms", "qnlms"):
        algo_data["zeta"] = 1e-3
    if args.lambda_max is not None:
        algo_data["lambda_max"] = args.lambda_max
    elif "lambda_max" not in algo_data and algo_data.get("kind") in ("tvqlms", "eqlms"):
        algo_data["lambda_max"] = "estimate"
    data["algorithm"] = algo_data
    if args.snr is not None:
        data["channel"] = dict(data.get("channel", {}), snr_db=args.snr)
    if args.iters is not None:
        data["n_iterations"] = args.iters
    if args.runs is not None or args.full_scale:
        data["n_runs"] = _n_runs(args)
    if args.q_init is not None:
        data["q_init_policy"] = args.q_init
    if args.snr_ref is not None:
        data["snr_reference"] = args.snr_ref
    spec = bench.experiment_from_dict(data)
    label = f"{spec.algorithm.kind}_snr{int(spec.channel.snr_db)}"
    suite = bench.ProtocolSuite(entries=((label, spec),), mode="equal-convergence")
    result = bench.run_protocol_suite(suite, workers=args.workers)
    _print_table(result.rows)
    if args.out:
        bench.export_results(result, args.out)
        print(f"results written to {args.out}")
    return EXIT_OK


def _cmd_suite(args) -> int:
    config = _load_config(args.config)
    if config is not None:
        config = _apply_overrides(config, args.overrides)
        suites = [bench.suite_from_dict(item) for item in config["suites"]] \
            if "suites" in config else [bench.suite_from_dict(config["suite"])]
    else:
        if args.protocol is None:
            raise ConfigError("suite requires --protocol (or --config)")
        mode = "equal-" + args.mode
        snrs = tuple(args.snr) if args.snr else presets.SNRS
        suites = presets.protocol_suites(
            args.protocol, mode, snrs=snrs,
            n_runs=_n_runs(args), n_iterations=args.iters,
            base_seed=args.seed, include_suspect=not args.skip_suspect,
        )
    results = [bench.run_protocol_suite(suite, workers=args.workers) for suite in suites]
    _print_table([row for result in results for row in result.rows])
    if args.out:
        bench.export_results(results, args.out)
        print(f"results written to {args.out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    algos = tuple(name.strip() for name in args.algos.split(",") if name.strip())
    unknown = set(algos) - set(presets.ALGORITHMS)
    if unknown:
        raise ConfigError(f"unknown algorithm(s) {sorted(unknown)}; choose from {presets.ALGORITHMS}")
    mode = "equal-" + args.mode
    suite = presets.protocol_suite(
        args.protocol, mode, args.snr, algorithms=algos,
        n_runs=_n_runs(args), n_iterations=args.iters, base_seed=args.seed,
    )
    result = bench.run_protocol_suite(suite, workers=args.workers)
    _print_table(result.rows)
    if args.out:
        bench.export_results(result, args.out)
        print(f"results written to {args.out}")
    return EXIT_OK


def _cmd_estimate_lambda(args) -> int:
    if args.input:
        try:
            samples, _ = signals.load_signal(args.input)
        except OSError as err:
            raise ConfigError(f"cannot read {args.input}: {err}") from err
    else:
        source = signals.SignalSource(n_samples=args.n_samples, seed=args.seed)
        samples = signals.generate_input(source)
    if args.dump_out:
        signals.dump_signal(samples, args.dump_out, seed=args.seed)
    value = estimate_lambda_max(samples, args.taps)
    print(f"lambda_max ({args.taps} taps, {samples.size} samples): {value:.6f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "suite":
            return _cmd_suite(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "estimate-lambda":
            return _cmd_estimate_lambda(args)
        raise ConfigError(f"unknown command {args.command!r}")  # pragma: no cover
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as err:
        print(f"divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except (ParameterError, QlmsError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
