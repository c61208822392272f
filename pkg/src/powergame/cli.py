"""Command line entry point: ``powergame {run,sweep,verify,report}``.

Exit codes: 0 success, 2 bad config or arguments, 3 runtime failure,
4 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import (
    ALGORITHMS, ConfigError, ExperimentConfig, bundled_config, emit_outputs, fairness_table, jobs, load_config,
    plot_sum_rates, read_csv, run_job, write_job_traces,
)
from .oracle import write_report

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERIFY = 0, 2, 3, 4

log = logging.getLogger("powergame")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _list(cast):
    def parse(text):
        try:
            return [cast(x) for x in text.split(",") if x.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="powergame", description="Distributed power allocation learning on fading interference channels.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, algorithm_help):
        sp.add_argument("--config", required=True,
                        help="TOML config file, or example1/example2/example3 for a bundled one")
        sp.add_argument("--algorithm", help=algorithm_help)
        sp.add_argument("--snr-db", type=_list(float), help="comma-separated SNR values in dB")
        sp.add_argument("--seed", type=_list(int), help="comma-separated seeds")
        sp.add_argument("--iterations", type=int, help="slots per CE/CCE run")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--debug-trace", action="store_true", help="also write per-slot logs and score traces")

    common(sub.add_parser("run", help="run one algorithm"), f"one of {', '.join(ALGORITHMS)}")
    common(sub.add_parser("sweep", help="run every configured algorithm over the SNR and seed lists"),
           "comma-separated subset of the configured algorithms")
    common(sub.add_parser("verify", help="run and check the results with the exact oracle"),
           "comma-separated subset of the configured algorithms")
    rep = sub.add_parser("report", help="redraw the plot and fairness table from a results CSV")
    rep.add_argument("--out", required=True, help="directory holding results.csv")
    rep.add_argument("--config", help="config whose output names to use")
    return p


def _load(name: str) -> ExperimentConfig:
    if Path(name).exists():
        return load_config(name)
    if name in ("example1", "example2", "example3"):
        return bundled_config(name)
    raise ConfigError(f"no such config file: {name}")


def _apply_overrides(cfg: ExperimentConfig, args, single: bool) -> ExperimentConfig:
    kw = {}
    if args.algorithm:
        algs = [a.strip() for a in args.algorithm.split(",") if a.strip()]
        bad = [a for a in algs if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm {bad[0]!r}", "--algorithm")
        if single and len(algs) != 1:
            raise ConfigError("run takes exactly one algorithm", "--algorithm")
        kw["algorithms"] = tuple(algs)
    elif single:
        if len(cfg.algorithms) != 1:
            raise ConfigError("config lists several algorithms; pick one", "--algorithm")
    if args.snr_db is not None:
        if not args.snr_db:
            raise ConfigError("SNR list is empty", "--snr-db")
        kw["snr_db"] = tuple(args.snr_db)
    if args.seed is not None:
        if not args.seed or any(s < 0 for s in args.seed):
            raise ConfigError("expected nonnegative seeds", "--seed")
        kw["seeds"] = tuple(args.seed)
    if args.iterations is not None:
        if args.iterations < 1:
            raise ConfigError("must be >= 1", "--iterations")
        kw["iterations"] = args.iterations
    if args.out:
        kw["out_dir"] = args.out
    if args.debug_trace:
        kw["debug_trace"] = True
    return replace(cfg, **kw)


def _execute(cfg: ExperimentConfig, verify: bool) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    done = []
    try:
        for snr, seed, alg in jobs(cfg):
            log.info("snr=%g seed=%d algorithm=%s", snr, seed, alg)
            jr = run_job(cfg, snr, seed, alg, verify=verify)
            done.append(jr)
            if cfg.debug_trace:
                write_job_traces(jr, out)
    finally:
        # partial results still reach disk when a job fails
        if done:
            emit_outputs([jr.row for jr in done], out, cfg.csv_name, cfg.plot_name, cfg.fairness_name)
    if verify:
        checks = [c for jr in done for c in jr.checks]
        write_report(checks, out / "verification.csv")
        failed = [c for c in checks if not c.passed]
        for c in failed:
            print(f"FAIL {c.check}: violation {c.max_violation:.4g} > {c.epsilon:g}", file=sys.stderr)
        if failed:
            return EXIT_VERIFY
    return EXIT_OK


def _report(args) -> int:
    out = Path(args.out)
    names = {"csv_name": "results.csv", "plot_name": "sum_rate.svg", "fairness_name": "fairness.md"}
    if args.config:
        cfg = _load(args.config)
        names = {k: getattr(cfg, k) for k in names}
    rows = read_csv(out / names["csv_name"])
    if not rows:
        raise ConfigError(f"{out / names['csv_name']} has no rows")
    plot_sum_rates(rows, out / names["plot_name"])
    table = fairness_table(rows)
    if table is None:
        print("no SNR has both pareto and nb rows; fairness table skipped")
    else:
        (out / names["fairness_name"]).write_text(table)
        print(table, end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            return _report(args)
        cfg = _apply_overrides(_load(args.config), args, single=args.command == "run")
        return _execute(cfg, verify=args.command == "verify" or cfg.verify)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure inside a job maps to the runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
