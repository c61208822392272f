"""Distributed stochastic local search for Pareto points and Nash bargaining.

All transmitters overhear every ACK/NACK, so each of them can score a joint
profile from a window of slots. Users take turns: the active user may try a
new action for one window, and the trial replaces the benchmark only if its
windowed score is strictly higher.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .actions import PolicySet
from .sim import Game, play_fixed

log = logging.getLogger(__name__)


class SingletonSetError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    alphas: tuple[float, ...] | None = None
    window: int = 1000
    delta: float = 0.5
    eps_explore: float = 0.1
    max_experiments: int = 50
    mode: str = "weighted-sum"
    T_d: int = 5000
    round_cap: int = 10_000
    max_counter: str = "reset"
    paired: bool = False
    rate_weighted: bool = False

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.max_experiments < 1:
            raise ValueError("max_experiments must be >= 1")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if not 0.0 <= self.eps_explore <= 1.0:
            raise ValueError(f"eps_explore must lie in [0, 1], got {self.eps_explore}")
        if self.mode not in ("weighted-sum", "nash-product"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_counter not in ("reset", "total"):
            raise ValueError(f"unknown max_counter {self.max_counter!r}")
        if self.T_d < 1:
            raise ValueError("T_d must be >= 1")
        if self.alphas is not None and any(a <= 0 for a in self.alphas):
            raise ValueError("alphas must be positive")


@dataclass
class Benchmark:
    profile: tuple[int, ...]
    score: float
    utilities: np.ndarray
    d: np.ndarray | None = None
    degenerate: bool = False


@dataclass
class SearchResult:
    benchmark: Benchmark
    trace: list = field(default_factory=list)
    slots: int = 0
    windows: int = 0
    rounds: int = 0
    final_slot: int = 0
    final_window: int = 0
    scores: list = field(default_factory=list)

    def write_trace(self, path) -> None:
        """Score-trace CSV: round,active_user,trial_score,benchmark_score,accepted."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round", "active_user", "trial_score", "benchmark_score", "accepted"])
            for row in self.trace:
                w.writerow([row[0], row[1], repr(row[2]), repr(row[3]), int(row[4])])


def weighted_score(ack_counts, window: int, config: SearchConfig, d=None, rates=None) -> float:
    """Windowed objective from everyone's ACK counts.

    Weighted sum of success frequencies, or the Nash product
    ``prod max(u_i - d_i, 0)`` in nash mode. Passing ``rates`` turns each
    frequency into a throughput first.
    """
    u = np.asarray(ack_counts, dtype=float) / window
    if rates is not None:
        u = u * np.asarray(rates, dtype=float)
    if config.mode == "nash-product":
        return float(np.prod(np.maximum(u - np.asarray(d, dtype=float), 0.0)))
    alphas = np.ones_like(u) if config.alphas is None else np.asarray(config.alphas, dtype=float)
    return float(alphas @ u)


def state_order(direct_values, direct_pmf) -> list[int]:
    """States by decreasing probability, ties by decreasing gain."""
    pmf = np.round(np.asarray(direct_pmf, dtype=float), 12)
    vals = np.asarray(direct_values, dtype=float)
    return sorted(range(len(pmf)), key=lambda s: (-pmf[s], -vals[s]))


def propose_local(current: int, policy_set: PolicySet, rng: np.random.Generator, eps_explore: float = 0.1) -> int:
    """Candidate action for an experimenting user.

    With probability ``eps_explore`` any other action uniformly; otherwise a
    uniform pick among actions with more power than ``current`` in the most
    likely state (highest gain on ties), falling back to the next state when
    none exists and to a uniform pick when ``current`` is maximal everywhere.
    """
    L = len(policy_set)
    if L < 2:
        raise SingletonSetError("no alternative action to propose")
    if rng.random() >= eps_explore:
        for s in state_order(policy_set.direct_values, policy_set.direct_pmf):
            up = np.flatnonzero(policy_set.powers[:, s] > policy_set.powers[current, s])
            if len(up):
                return int(up[rng.integers(len(up))])
    j = int(rng.integers(L - 1))
    return j + (j >= current)


def greedy_policy(policy_set: PolicySet) -> int:
    """Action maximizing power lexicographically along :func:`state_order`."""
    order = state_order(policy_set.direct_values, policy_set.direct_pmf)
    keys = policy_set.powers[:, order]
    # lexsort: last key is primary; lowest index wins remaining ties
    idx = np.lexsort((np.arange(len(policy_set)),) + tuple(-keys[:, c] for c in reversed(range(keys.shape[1]))))
    return int(idx[0])


def disagreement_point(
    game: Game,
    T_d: int,
    env_rng: np.random.Generator,
    profile: Sequence[int] | None = None,
    rate_weighted: bool = False,
):
    """Average reward of every user over ``T_d`` slots of the greedy profile.

    Returns ``(d, profile)``; with ``rate_weighted`` the rewards are
    throughputs.
    """
    if T_d < 1:
        raise ValueError("T_d must be >= 1")
    if profile is None:
        profile = tuple(greedy_policy(ps) for ps in game.policy_sets)
    counts = play_fixed(game, profile, T_d, env_rng)
    d = counts / T_d
    if rate_weighted:
        d = d * game.rates(np.asarray(profile, dtype=np.intp))
    return d, tuple(int(k) for k in profile)


def _search(game: Game, config: SearchConfig, env_rng, user_rngs, d=None, init=None) -> SearchResult:
    n = game.n_users
    W = config.window
    if init is None:
        profile = [int(user_rngs[i].integers(game.sizes[i])) for i in range(n)]
    else:
        profile = [int(k) for k in init]

    def window(p):
        return play_fixed(game, p, W, env_rng)

    def score_of(counts, p):
        rates = game.rates(np.asarray(p, dtype=np.intp)) if config.rate_weighted else None
        return weighted_score(counts, W, config, d, rates)

    counts = window(profile)
    res = SearchResult(None, slots=W, windows=1)
    bench = score_of(counts, profile)
    bench_u = counts / W
    res.scores.append(bench)
    fails = np.zeros(n, dtype=np.int64)
    rnd = 0
    while rnd < config.round_cap:
        if np.all(fails >= config.max_experiments):
            break
        i = rnd % n
        rnd += 1
        if fails[i] >= config.max_experiments or len(game.policy_sets[i]) < 2:
            if len(game.policy_sets[i]) < 2:
                fails[i] = config.max_experiments
            continue
        rng = user_rngs[i]
        if rng.random() >= config.delta:
            # no experiment this turn; the benchmark profile keeps playing
            window(profile)
            res.slots += W
            res.windows += 1
            continue
        cand = propose_local(profile[i], game.policy_sets[i], rng, config.eps_explore)
        trial = list(profile)
        trial[i] = cand
        counts = window(trial)
        res.slots += W
        res.windows += 1
        score = score_of(counts, trial)
        ref = bench
        if config.paired:
            ref_counts = window(profile)
            res.slots += W
            res.windows += 1
            ref = score_of(ref_counts, profile)
        accepted = score > ref
        res.trace.append((rnd - 1, i, score, bench, accepted))
        if accepted:
            profile = trial
            bench = score
            bench_u = counts / W
            res.final_slot = res.slots
            res.final_window = res.windows
            if config.max_counter == "reset":
                fails[:] = 0
        else:
            fails[i] += 1
        res.scores.append(bench)
    res.rounds = rnd
    res.benchmark = Benchmark(tuple(profile), bench, bench_u, None if d is None else np.asarray(d))
    return res


def run_pareto_search(
    game: Game, config: SearchConfig, env_rng: np.random.Generator, user_rngs: Sequence[np.random.Generator]
) -> SearchResult:
    """Maximize the windowed weighted sum of success probabilities."""
    if config.mode != "weighted-sum":
        config = replace(config, mode="weighted-sum")
    if config.alphas is not None and len(config.alphas) != game.n_users:
        raise ValueError(f"expected {game.n_users} alphas")
    return _search(game, config, env_rng, user_rngs)


def run_nash_bargaining(
    game: Game,
    config: SearchConfig,
    env_rng: np.random.Generator,
    user_rngs: Sequence[np.random.Generator],
    d: Sequence[float] | None = None,
    disagreement: Sequence[int] | None = None,
    start_at_disagreement: bool = True,
) -> SearchResult:
    """Maximize the windowed Nash product over the disagreement utilities.

    ``d`` defaults to :func:`disagreement_point` measured over ``config.T_d``
    slots. The search starts from the disagreement profile unless
    ``start_at_disagreement`` is off. If no profile with a positive product is found the disagreement
    profile is returned with ``benchmark.degenerate`` set.
    """
    config = replace(config, mode="nash-product")
    d_slots = 0
    if d is None:
        d, disagreement = disagreement_point(game, config.T_d, env_rng, disagreement, config.rate_weighted)
        d_slots = config.T_d
    elif disagreement is None:
        disagreement = tuple(greedy_policy(ps) for ps in game.policy_sets)
    d = np.asarray(d, dtype=float)
    res = _search(game, config, env_rng, user_rngs, d=d, init=disagreement if start_at_disagreement else None)
    res.slots += d_slots
    if res.final_slot:
        res.final_slot += d_slots
    if res.benchmark.score <= 0.0:
        log.warning("no profile beats the disagreement point; returning it")
        res.benchmark = Benchmark(tuple(disagreement), 0.0, d.copy(), d, degenerate=True)
    return res
