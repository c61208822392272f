"""Experiment configs, SNR sweeps over seed batches, and result files.

Configs are TOML documents with the sections ``[model]``, ``[actions]``,
``[experiment]``, ``[ce]``, ``[cce]``, ``[search]`` and ``[output]``; the
README lists every key. Each (SNR, seed, algorithm) job draws its random
streams from ``SeedSequence([seed, snr in millidecibels, algorithm code])``,
so adding SNR points or algorithms never changes the rows of the others.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import tomli

from .actions import build_policy_sets
from .channel import FadingModel, GainAlphabet, ModelError, snr_to_budget
from .mw import run_cce_learning
from .oracle import MAX_PROFILES, CheckResult, Oracle, brute_force_nb, brute_force_pareto, exact_utility, is_epsilon_cce, is_epsilon_ce
from .regret import run_ce_learning
from .search import SearchConfig, run_nash_bargaining, run_pareto_search
from .sim import Game

log = logging.getLogger(__name__)

ALGORITHMS = ("ce", "cce", "pareto", "nb")
CSV_HEADER = ["snr_db", "seed", "algorithm", "user", "rate", "sum_rate", "iterations", "convergence", "wall_time_ms"]


class ConfigError(ValueError):
    """Bad config file; ``field`` names the offending key when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass(frozen=True)
class ModelConfig:
    users: int
    direct_gains: tuple[tuple[float, ...], ...]
    direct_pmf: tuple[tuple[float, ...], ...] | None
    cross_gains: tuple[tuple[float, ...], ...]
    cross_pmf: tuple[tuple[float, ...], ...] | None

    def build(self) -> FadingModel:
        direct = [GainAlphabet(v, None if self.direct_pmf is None else self.direct_pmf[i]) for i, v in enumerate(self.direct_gains)]
        cross = [GainAlphabet(v, None if self.cross_pmf is None else self.cross_pmf[i]) for i, v in enumerate(self.cross_gains)]
        return FadingModel.per_receiver(direct, cross)


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig
    power_levels: tuple[float, ...]
    rates: tuple[float, ...] | None
    rate_set: tuple[float, ...] | None
    algorithms: tuple[str, ...]
    snr_db: tuple[float, ...]
    seeds: tuple[int, ...]
    iterations: int = 200_000
    tail_fraction: float = 0.1
    verify: bool = False
    verify_epsilon: float = 0.05
    workers: int = 1
    record_wall_time: bool = False
    mu: float | None = None
    mw_epsilon: float = 0.1
    visit_normalized: bool = False
    search: SearchConfig = field(default_factory=SearchConfig)
    out_dir: str = "out"
    csv_name: str = "results.csv"
    plot_name: str = "sum_rate.svg"
    fairness_name: str = "fairness.md"
    debug_trace: bool = False

    @property
    def multirate(self) -> bool:
        return self.rate_set is not None

    def search_config(self) -> SearchConfig:
        """Search settings with the default weights filled in.

        Fixed rates weight user i by its rate; with a rate set the score is
        rate-weighted directly and the default weights are 1. Either way the
        default objective is the sum rate.
        """
        cfg = self.search
        if self.multirate:
            cfg = replace(cfg, rate_weighted=True)
        elif cfg.alphas is None and not cfg.rate_weighted:
            cfg = replace(cfg, alphas=tuple(self.rates))
        return cfg


@dataclass
class ResultRow:
    snr_db: float
    seed: int
    algorithm: str
    rates: tuple[float, ...]
    sum_rate: float
    iterations: int
    convergence: float
    wall_time_ms: float = 0.0
    slots: int = 0
    windows: int = 0
    profile: tuple[int, ...] | None = None

    def csv_rows(self) -> list[list[str]]:
        return [
            [_num(self.snr_db), str(self.seed), self.algorithm, str(i), _num(r), _num(self.sum_rate),
             str(self.iterations), _num(self.convergence), _num(self.wall_time_ms)]
            for i, r in enumerate(self.rates)
        ]


def _num(x: float) -> str:
    return format(float(x), ".12g")


# -- config loading -----------------------------------------------------------

_SECTIONS = {
    "model": {"users", "direct_gains", "direct_pmf", "cross_gains", "cross_pmf"},
    "actions": {"power_levels", "rates", "rate_set"},
    "experiment": {"algorithm", "algorithms", "snr_db", "seeds", "iterations", "tail_fraction", "verify",
                   "verify_epsilon", "workers", "record_wall_time"},
    "ce": {"mu"},
    "cce": {"epsilon", "visit_normalized"},
    "search": {f.name for f in fields(SearchConfig)} - {"mode"},
    "output": {"dir", "csv", "plot", "fairness", "debug_trace"},
}
_REQUIRED = ("model", "actions", "experiment")


def load_config(path) -> ExperimentConfig:
    """Read and validate a TOML experiment config."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def bundled_config(name: str) -> ExperimentConfig:
    """One of the configs shipped with the package: example1, example2, example3."""
    ref = resources.files("powergame") / "configs" / f"{name}.toml"
    if not ref.is_file():
        raise ConfigError(f"no bundled config {name!r}")
    return parse_config(ref.read_text(), source=f"{name}.toml")


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        # tomli reports "(at line L, column C)"
        raise ConfigError(f"{source}: {exc}") from exc
    for name in doc:
        if name not in _SECTIONS:
            raise ConfigError("unknown section", name)
        if not isinstance(doc[name], dict):
            raise ConfigError("expected a table", name)
        for key in doc[name]:
            if key not in _SECTIONS[name]:
                raise ConfigError("unknown key", f"{name}.{key}")
    for name in _REQUIRED:
        if name not in doc:
            raise ConfigError("missing section", name)

    m = doc["model"]
    users = _int(_need(m, "model", "users"), "model.users", lo=1)
    model = ModelConfig(
        users=users,
        direct_gains=_per_user_lists(_need(m, "model", "direct_gains"), users, "model.direct_gains"),
        direct_pmf=_per_user_lists(m["direct_pmf"], users, "model.direct_pmf") if "direct_pmf" in m else None,
        cross_gains=_per_user_lists(_need(m, "model", "cross_gains"), users, "model.cross_gains"),
        cross_pmf=_per_user_lists(m["cross_pmf"], users, "model.cross_pmf") if "cross_pmf" in m else None,
    )
    try:
        model.build()
    except ModelError as exc:
        raise ConfigError(str(exc), "model") from exc

    a = doc["actions"]
    levels = _floats(_need(a, "actions", "power_levels"), "actions.power_levels")
    if not levels or any(p < 0 for p in levels):
        raise ConfigError("power levels must be a nonempty list of nonnegative numbers", "actions.power_levels")
    if ("rates" in a) == ("rate_set" in a):
        raise ConfigError("give exactly one of rates (fixed) or rate_set (multi-rate)", "actions")
    rates = rate_set = None
    if "rates" in a:
        r = a["rates"]
        rates = tuple([_float(r, "actions.rates", lo=0.0, lo_open=True)] * users) if not isinstance(r, list) else tuple(_floats(r, "actions.rates"))
        if len(rates) != users:
            raise ConfigError(f"expected {users} rates, got {len(rates)}", "actions.rates")
        if any(x <= 0 for x in rates):
            raise ConfigError("rates must be positive", "actions.rates")
    else:
        rate_set = tuple(_floats(a["rate_set"], "actions.rate_set"))
        if not rate_set or any(x <= 0 for x in rate_set):
            raise ConfigError("rate set must be a nonempty list of positive rates", "actions.rate_set")

    e = doc["experiment"]
    if "algorithm" in e and "algorithms" in e:
        raise ConfigError("give algorithm or algorithms, not both", "experiment")
    algs = e.get("algorithms", e.get("algorithm", list(ALGORITHMS)))
    algs = [algs] if isinstance(algs, str) else algs
    if not isinstance(algs, list) or not algs:
        raise ConfigError("expected a nonempty list", "experiment.algorithms")
    for alg in algs:
        if alg not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}", "experiment.algorithms")
    snrs = _floats(_need(e, "experiment", "snr_db"), "experiment.snr_db")
    if not snrs:
        raise ConfigError("SNR list is empty", "experiment.snr_db")
    seeds = e.get("seeds", list(range(10)))
    if not isinstance(seeds, list) or not seeds or any(not isinstance(s, int) or isinstance(s, bool) or s < 0 for s in seeds):
        raise ConfigError("expected a nonempty list of nonnegative integers", "experiment.seeds")

    cfg_kw: dict[str, Any] = dict(
        model=model, power_levels=tuple(levels), rates=rates, rate_set=rate_set,
        algorithms=tuple(dict.fromkeys(algs)), snr_db=tuple(snrs), seeds=tuple(seeds),
        iterations=_int(e.get("iterations", 200_000), "experiment.iterations", lo=1),
        tail_fraction=_float(e.get("tail_fraction", 0.1), "experiment.tail_fraction", lo=0.0, hi=1.0, lo_open=True),
        verify=_bool(e.get("verify", False), "experiment.verify"),
        verify_epsilon=_float(e.get("verify_epsilon", 0.05), "experiment.verify_epsilon", lo=0.0),
        workers=_int(e.get("workers", 1), "experiment.workers", lo=1),
        record_wall_time=_bool(e.get("record_wall_time", False), "experiment.record_wall_time"),
    )

    ce = doc.get("ce", {})
    if "mu" in ce:
        cfg_kw["mu"] = _float(ce["mu"], "ce.mu", lo=0.0, lo_open=True)
    cce = doc.get("cce", {})
    cfg_kw["mw_epsilon"] = _float(cce.get("epsilon", 0.1), "cce.epsilon", lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    cfg_kw["visit_normalized"] = _bool(cce.get("visit_normalized", False), "cce.visit_normalized")

    s = dict(doc.get("search", {}))
    if "alphas" in s:
        s["alphas"] = tuple(_floats(s["alphas"], "search.alphas"))
        if len(s["alphas"]) != users:
            raise ConfigError(f"expected {users} weights, got {len(s['alphas'])}", "search.alphas")
    for key in ("window", "max_experiments", "T_d", "round_cap"):
        if key in s:
            s[key] = _int(s[key], f"search.{key}", lo=1)
    for key in ("delta", "eps_explore"):
        if key in s:
            s[key] = _float(s[key], f"search.{key}")
    for key in ("paired", "rate_weighted"):
        if key in s:
            s[key] = _bool(s[key], f"search.{key}")
    try:
        cfg_kw["search"] = SearchConfig(**s)
    except ValueError as exc:
        name = str(exc).split()[0]
        raise ConfigError(str(exc), f"search.{name}" if name in _SECTIONS["search"] else "search") from exc

    o = doc.get("output", {})
    for key, attr in (("dir", "out_dir"), ("csv", "csv_name"), ("plot", "plot_name"), ("fairness", "fairness_name")):
        if key in o:
            if not isinstance(o[key], str) or not o[key]:
                raise ConfigError("expected a nonempty string", f"output.{key}")
            cfg_kw[attr] = o[key]
    cfg_kw["debug_trace"] = _bool(o.get("debug_trace", False), "output.debug_trace")
    return ExperimentConfig(**cfg_kw)


def _need(section: dict, name: str, key: str):
    if key not in section:
        raise ConfigError("required key missing", f"{name}.{key}")
    return section[key]


def _float(x, name, lo=None, hi=None, lo_open=False, hi_open=False) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"expected a number, got {x!r}", name)
    x = float(x)
    if lo is not None and (x < lo or (lo_open and x == lo)):
        raise ConfigError(f"{x} is out of range", name)
    if hi is not None and (x > hi or (hi_open and x == hi)):
        raise ConfigError(f"{x} is out of range", name)
    return x


def _int(x, name, lo=None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"expected an integer, got {x!r}", name)
    if lo is not None and x < lo:
        raise ConfigError(f"must be >= {lo}", name)
    return x


def _bool(x, name) -> bool:
    if not isinstance(x, bool):
        raise ConfigError(f"expected true or false, got {x!r}", name)
    return x


def _floats(x, name) -> list[float]:
    if not isinstance(x, list):
        raise ConfigError("expected a list", name)
    return [_float(v, name) for v in x]


def _per_user_lists(x, users, name) -> tuple[tuple[float, ...], ...]:
    """A flat list is shared by every user; a list of lists gives one per user."""
    if not isinstance(x, list) or not x:
        raise ConfigError("expected a nonempty list", name)
    if all(isinstance(v, list) for v in x):
        if len(x) != users:
            raise ConfigError(f"expected {users} per-user lists, got {len(x)}", name)
        return tuple(tuple(_floats(v, name)) for v in x)
    return tuple([tuple(_floats(x, name))] * users)


# -- running ------------------------------------------------------------------

def job_streams(seed: int, snr_db: float, algorithm: str, n_users: int):
    """Environment generator plus one generator per user for one sweep job."""
    key = [int(seed), int(round(snr_db * 1000)) % 2**32, ALGORITHMS.index(algorithm)]
    children = np.random.SeedSequence(key).spawn(n_users + 1)
    return np.random.default_rng(children[0]), [np.random.default_rng(c) for c in children[1:]]


def build_game(config: ExperimentConfig, snr_db: float) -> Game:
    model = config.model.build()
    budget = snr_to_budget(snr_db)
    rates = config.rate_set if config.multirate else config.rates
    return Game(model, build_policy_sets(model, config.power_levels, rates, budget, multirate=config.multirate))


@dataclass
class JobResult:
    row: ResultRow
    checks: list[CheckResult] = field(default_factory=list)
    artifacts: dict[str, Any] = field(default_factory=dict)


def run_job(config: ExperimentConfig, snr_db: float, seed: int, algorithm: str, verify: bool | None = None, keep: bool = False) -> JobResult:
    """One algorithm at one SNR for one seed.

    CE and CCE report throughput over the final ``tail_fraction`` of slots;
    the searches report the exact throughput of the profile they settle on.
    ``keep`` retains the raw algorithm result in ``artifacts``.
    """
    verify = config.verify if verify is None else verify
    game = build_game(config, snr_db)
    env_rng, user_rngs = job_streams(seed, snr_db, algorithm, game.n_users)
    t0 = time.perf_counter()
    checks: list[CheckResult] = []
    artifacts: dict[str, Any] = {}
    if algorithm in ("ce", "cce"):
        if algorithm == "ce":
            res = run_ce_learning(game, config.iterations, env_rng, user_rngs, mu=config.mu, debug=config.debug_trace)
            conv = float(res.max_regret().max())
        else:
            res = run_cce_learning(game, config.iterations, env_rng, user_rngs, epsilon=config.mw_epsilon,
                                   visit_normalized=config.visit_normalized, debug=config.debug_trace)
            conv = float(res.external_regret().max())
        trace = res.trace
        if trace.tail_start != config.iterations - int(round(config.tail_fraction * config.iterations)):
            raise RuntimeError("tail window mismatch")
        rates = tuple(float(trace.tail_bits[i] / trace.tail_length) for i in range(game.n_users))
        iterations, slots, windows, profile = config.iterations, config.iterations, 0, None
        wall = time.perf_counter() - t0
        if verify:
            check = is_epsilon_ce if algorithm == "ce" else is_epsilon_cce
            checks.append(check(res.distribution, game, config.verify_epsilon))
    else:
        cfg = config.search_config()
        if algorithm == "pareto":
            res = run_pareto_search(game, cfg, env_rng, user_rngs)
        else:
            res = run_nash_bargaining(game, cfg, env_rng, user_rngs)
        wall = time.perf_counter() - t0
        profile = res.benchmark.profile
        oracle = Oracle(game)
        u = exact_utility(profile, game, oracle)
        rates = tuple(float(x) for x in u * game.rates(np.asarray(profile, dtype=np.intp)))
        conv = float(res.benchmark.score)
        iterations, slots, windows = res.final_slot, res.slots, res.windows
        if verify:
            check = _search_check(game, cfg, algorithm, res, oracle, config.verify_epsilon)
            if check is not None:
                checks.append(check)
    if keep or config.debug_trace:
        artifacts["result"] = res
    row = ResultRow(
        snr_db=float(snr_db), seed=int(seed), algorithm=algorithm, rates=rates, sum_rate=float(sum(rates)),
        iterations=int(iterations), convergence=conv, wall_time_ms=wall * 1000.0 if config.record_wall_time else 0.0,
        slots=int(slots), windows=int(windows), profile=profile,
    )
    return JobResult(row, checks, artifacts)


def _search_check(game: Game, cfg: SearchConfig, algorithm: str, res, oracle: Oracle, tol: float) -> CheckResult | None:
    """Relative gap between the search result and the exhaustive optimum.

    None when the joint action space is too large to enumerate.
    """
    total = int(np.prod(game.sizes))
    name = "pareto-gap" if algorithm == "pareto" else "nb-gap"
    if total > MAX_PROFILES:
        log.warning("%s: %d joint profiles, skipping the exhaustive comparison", name, total)
        return None
    found = np.asarray(res.benchmark.profile)
    tensors = [oracle.throughput_tensor(i) if cfg.rate_weighted else oracle.utility_tensor(i) for i in range(game.n_users)]
    if algorithm == "pareto":
        alphas = cfg.alphas if cfg.alphas is not None else (1.0,) * game.n_users
        best_k, best = brute_force_pareto(game, alphas, oracle, rate_weighted=cfg.rate_weighted)
        got = float(sum(a * t[tuple(found)] for a, t in zip(alphas, tensors)))
    else:
        d = res.benchmark.d
        best_k, best = brute_force_nb(game, d, oracle=oracle, rate_weighted=cfg.rate_weighted)
        got = float(np.prod([max(t[tuple(found)] - di, 0.0) for t, di in zip(tensors, d)]))
    gap = 0.0 if best <= 0 else max((best - got) / best, 0.0)
    return CheckResult(name, tol, gap)


def _job(args):
    config, snr, seed, alg = args
    return run_job(config, snr, seed, alg)


def jobs(config: ExperimentConfig) -> list[tuple[float, int, str]]:
    """Every (snr, seed, algorithm) triple in output order."""
    return [(snr, seed, alg) for snr in config.snr_db for seed in config.seeds for alg in config.algorithms]


def sweep(config: ExperimentConfig, results: list | None = None) -> list[ResultRow]:
    """Run every job of ``config``; rows come back ordered by (snr, seed, algorithm).

    Pass a list as ``results`` to collect the :class:`JobResult` objects as
    they finish; on failure it holds everything completed so far.
    """
    results = [] if results is None else results
    todo = jobs(config)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for jr in pool.map(_job, [(config, *j) for j in todo]):
                results.append(jr)
    else:
        for snr, seed, alg in todo:
            log.info("snr=%g seed=%d algorithm=%s", snr, seed, alg)
            results.append(run_job(config, snr, seed, alg))
    return [jr.row for jr in sorted(results, key=lambda jr: _order(jr.row))]


def _order(row: ResultRow):
    return (row.snr_db, row.seed, ALGORITHMS.index(row.algorithm))


# -- outputs ------------------------------------------------------------------

def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in sorted(rows, key=_order):
        w.writerows(row.csv_rows())
    return buf.getvalue()


def read_csv(path) -> list[ResultRow]:
    """Rebuild rows from a results CSV (one line per user)."""
    grouped: dict[tuple, dict] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for line in reader:
            key = (float(line["snr_db"]), int(line["seed"]), line["algorithm"])
            g = grouped.setdefault(key, {"rates": {}, "line": line})
            g["rates"][int(line["user"])] = float(line["rate"])
    rows = []
    for (snr, seed, alg), g in grouped.items():
        line = g["line"]
        rates = tuple(g["rates"][i] for i in sorted(g["rates"]))
        rows.append(ResultRow(snr, seed, alg, rates, float(line["sum_rate"]), int(line["iterations"]),
                              float(line["convergence"]), float(line["wall_time_ms"])))
    return sorted(rows, key=_order)


def mean_sum_rates(rows: Sequence[ResultRow]) -> dict[str, list[tuple[float, float]]]:
    """Per algorithm, (snr, mean sum rate over seeds) sorted by SNR."""
    acc: dict[str, dict[float, list[float]]] = {}
    for r in rows:
        acc.setdefault(r.algorithm, {}).setdefault(r.snr_db, []).append(r.sum_rate)
    return {alg: [(snr, float(np.mean(v))) for snr, v in sorted(by.items())] for alg, by in acc.items()}


def plot_sum_rates(rows: Sequence[ResultRow], path) -> None:
    """Static SVG: mean sum rate against SNR, one series per algorithm."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = {"ce": "CE (regret matching)", "cce": "CCE (multiplicative weights)", "pareto": "Pareto search", "nb": "Nash bargaining"}
    series = mean_sum_rates(rows)
    with matplotlib.rc_context({"svg.hashsalt": "powergame", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for alg in ALGORITHMS:
            if alg in series:
                x, y = zip(*series[alg])
                ax.plot(x, y, marker="o", label=labels[alg])
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("Sum rate (bits/channel use)")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def fairness_table(rows: Sequence[ResultRow]) -> str | None:
    """Markdown table of mean per-user rates at the Pareto and NB solutions per SNR.

    Returns None when no SNR has both kinds of rows.
    """
    means: dict[tuple[str, float], np.ndarray] = {}
    for alg in ("pareto", "nb"):
        by: dict[float, list] = {}
        for r in rows:
            if r.algorithm == alg:
                by.setdefault(r.snr_db, []).append(r.rates)
        for snr, v in by.items():
            means[(alg, snr)] = np.mean(np.array(v), axis=0)
    snrs = sorted({s for a, s in means if a == "pareto"} & {s for a, s in means if a == "nb"})
    if not snrs:
        return None

    def triple(v):
        return "(" + ", ".join(f"{x:.2f}" for x in v) + ")"

    lines = ["| SNR (dB) | Pareto point | Nash bargaining |", "|---|---|---|"]
    lines += [f"| {snr:g} | {triple(means[('pareto', snr)])} | {triple(means[('nb', snr)])} |" for snr in snrs]
    return "\n".join(lines) + "\n"


def emit_outputs(rows: Sequence[ResultRow], out_dir, csv_name="results.csv", plot_name="sum_rate.svg",
                 fairness_name="fairness.md") -> dict[str, Path]:
    """Write the CSV, the sum-rate plot and (when possible) the fairness table."""
    if not rows:
        raise ValueError("no rows to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {"csv": out / csv_name}
    written["csv"].write_text(rows_to_csv(rows))
    written["plot"] = out / plot_name
    plot_sum_rates(rows, written["plot"])
    table = fairness_table(rows)
    if table is None:
        log.info("no SNR has both pareto and nb rows; fairness table skipped")
    else:
        written["fairness"] = out / fairness_name
        written["fairness"].write_text(table)
    return written


def write_job_traces(jr: JobResult, out_dir) -> list[Path]:
    """Per-job debug files: slot log and regret trace, or the search score trace."""
    res = jr.artifacts.get("result")
    if res is None:
        return []
    r = jr.row
    stem = Path(out_dir) / f"trace_{r.algorithm}_snr{_num(r.snr_db)}_seed{r.seed}"
    paths = []
    if r.algorithm in ("ce", "cce"):
        if res.trace.log is not None:
            paths.append(stem.with_name(stem.name + "_slots.csv"))
            res.trace.write_log(paths[-1])
        paths.append(stem.with_name(stem.name + "_regret.csv"))
        res.write_regret_trace(paths[-1])
    else:
        paths.append(stem.with_name(stem.name + "_search.csv"))
        res.write_trace(paths[-1])
    return paths

