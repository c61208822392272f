"""Exact expected utilities and equilibrium / optimality checks for small games.

Utilities are computed by enumerating the joint channel states: receiver
``i`` succeeds in direct state ``s`` iff the interference, a sum of
independent per-interferer terms ``|h_ij|^2 * p_j(s_j)``, stays within the
threshold. The interference distribution is built by enumerating every
combination of interferer states, so results are exact up to float rounding.
"""
from __future__ import annotations

import csv
import itertools
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .sim import ACK_TOL, Game

MAX_STATE_COMBOS = 10**7
MAX_PROFILES = 10**6
CACHE_SIZE = 200_000


class InstanceTooLargeError(ValueError):
    pass


class OutcomeDistribution:
    """Distribution over joint action profiles.

    Three storage forms:

    * ``sparse``: dict ``profile -> probability`` (empirical frequencies)
    * ``dense``: array of shape ``sizes``
    * ``product``: time-average of per-user strategy snapshots, i.e.
      ``phi = mean_t prod_i q_t^i`` with ``snapshots[i]`` of shape ``(S, L_i)``
    """

    def __init__(self, kind: str, sizes: Sequence[int], data):
        self.kind = kind
        self.sizes = tuple(int(L) for L in sizes)
        self.data = data

    @classmethod
    def sparse(cls, probs: Mapping[tuple, float], sizes: Sequence[int]) -> "OutcomeDistribution":
        return cls("sparse", sizes, {tuple(int(x) for x in k): float(v) for k, v in probs.items() if v > 0})

    @classmethod
    def from_counts(cls, counts: Mapping[tuple, int], sizes: Sequence[int]) -> "OutcomeDistribution":
        total = sum(counts.values())
        return cls.sparse({k: c / total for k, c in counts.items()}, sizes)

    @classmethod
    def dense(cls, table: np.ndarray) -> "OutcomeDistribution":
        return cls("dense", table.shape, np.asarray(table, dtype=float))

    @classmethod
    def product_mixture(cls, snapshots: Sequence[np.ndarray]) -> "OutcomeDistribution":
        snaps = [np.atleast_2d(np.asarray(s, dtype=float)) for s in snapshots]
        return cls("product", [s.shape[1] for s in snaps], snaps)

    @classmethod
    def point_mass(cls, profile: Sequence[int], sizes: Sequence[int]) -> "OutcomeDistribution":
        return cls.sparse({tuple(profile): 1.0}, sizes)

    @property
    def n_users(self) -> int:
        return len(self.sizes)

    def total(self) -> float:
        if self.kind == "sparse":
            return float(sum(self.data.values()))
        if self.kind == "dense":
            return float(self.data.sum())
        return float(np.mean(np.prod([s.sum(axis=1) for s in self.data], axis=0)))

    def support(self) -> list[tuple]:
        if self.kind == "sparse":
            return sorted(self.data)
        if self.kind == "dense":
            return [tuple(int(x) for x in k) for k in zip(*np.nonzero(self.data))]
        raise TypeError("support of a product mixture is not materialized")

    def marginal(self, user: int) -> np.ndarray:
        if self.kind == "sparse":
            m = np.zeros(self.sizes[user])
            for k, p in self.data.items():
                m[k[user]] += p
            return m
        if self.kind == "dense":
            axes = tuple(a for a in range(self.n_users) if a != user)
            return self.data.sum(axis=axes)
        return self.data[user].mean(axis=0)

    def conditional_table(self, user: int) -> tuple[list[tuple], np.ndarray]:
        """Joint mass arranged as ``M[m, k] = phi(k_user = k, others = others[m])``.

        Only opponent profiles with positive mass are listed (all of them for
        the product form).
        """
        L = self.sizes[user]
        if self.kind == "sparse":
            rows: dict[tuple, np.ndarray] = {}
            for k, p in self.data.items():
                rest = k[:user] + k[user + 1:]
                if rest not in rows:
                    rows[rest] = np.zeros(L)
                rows[rest][k[user]] += p
            others = sorted(rows)
            return others, np.array([rows[o] for o in others]).reshape(len(others), L)
        if self.kind == "dense":
            moved = np.moveaxis(self.data, user, -1).reshape(-1, L)
            other_sizes = self.sizes[:user] + self.sizes[user + 1:]
            others = list(itertools.product(*[range(s) for s in other_sizes]))
            keep = moved.sum(axis=1) > 0
            return [o for o, kp in zip(others, keep) if kp], moved[keep]
        snaps = self.data
        other_idx = [j for j in range(self.n_users) if j != user]
        n_others = int(np.prod([self.sizes[j] for j in other_idx])) if other_idx else 1
        if n_others * L > MAX_PROFILES * 10:
            raise InstanceTooLargeError(f"product form over {n_others * L} profiles")
        S = snaps[user].shape[0]
        w = np.ones((S, 1))
        for j in other_idx:
            w = (w[:, :, None] * snaps[j][:, None, :]).reshape(S, -1)
        M = w.T @ snaps[user] / S
        other_sizes = [self.sizes[j] for j in other_idx]
        others = list(itertools.product(*[range(s) for s in other_sizes]))
        return others, M


class Oracle:
    """Exact utilities of a :class:`~powergame.sim.Game`, memoized per (user, opponents)."""

    def __init__(self, game: Game, max_state_combos: int = MAX_STATE_COMBOS, cache_size: int = CACHE_SIZE):
        self.game = game
        self.max_state_combos = max_state_combos
        self.cache_size = cache_size
        self._cache: OrderedDict = OrderedDict()
        model = game.model
        n = game.n_users
        for i in range(n):
            combos = len(model.direct[i])
            for j in range(n):
                if j != i:
                    combos *= len(model.direct[j]) * len(model.cross[(i, j)])
            if combos > max_state_combos:
                raise InstanceTooLargeError(f"user {i}: {combos} joint channel states exceed {max_state_combos}")

    def _interference_atoms(self, user: int, others: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """Support and pmf of the interference at ``user`` given opponent actions."""
        model, sets = self.game.model, self.game.policy_sets
        vals, probs = np.zeros(1), np.ones(1)
        o = 0
        for j in range(self.game.n_users):
            if j == user:
                continue
            k = others[o]
            o += 1
            cross = model.cross[(user, j)]
            direct = model.direct[j]
            term = np.outer(cross.squared, sets[j].powers[k]).ravel()
            p = np.outer(cross.pmf, direct.pmf).ravel()
            vals = (vals[:, None] + term[None, :]).ravel()
            probs = (probs[:, None] * p[None, :]).ravel()
        order = np.argsort(vals, kind="stable")
        return vals[order], probs[order]

    def response(self, user: int, others: Sequence[int]) -> np.ndarray:
        """Utility of every own action of ``user`` against fixed opponent actions."""
        key = (user, tuple(int(x) for x in others))
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        vals, probs = self._interference_atoms(user, key[1])
        cdf = np.concatenate([[0.0], np.cumsum(probs)])
        ps = self.game.policy_sets[user]
        pos = np.searchsorted(vals, ps.thresholds + ACK_TOL, side="right")
        success = cdf[pos]
        out = success @ np.asarray(self.game.model.direct[user].pmf)
        out.setflags(write=False)
        self._cache[key] = out
        if len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return out

    def utility(self, profile: Sequence[int]) -> np.ndarray:
        profile = tuple(int(x) for x in profile)
        return np.array([self.response(i, profile[:i] + profile[i + 1:])[profile[i]] for i in range(self.game.n_users)])

    def utility_tensor(self, user: int) -> np.ndarray:
        """``U[k_1, ..., k_N]`` of ``user`` over the full joint action space."""
        sizes = self.game.sizes
        total = int(np.prod(sizes))
        if total > MAX_PROFILES:
            raise InstanceTooLargeError(f"{total} joint profiles exceed {MAX_PROFILES}")
        other_sizes = sizes[:user] + sizes[user + 1:]
        rows = np.array([self.response(user, o) for o in itertools.product(*[range(s) for s in other_sizes])])
        rows = rows.reshape(*other_sizes, sizes[user])
        return np.moveaxis(rows, -1, user)

    def throughput_tensor(self, user: int) -> np.ndarray:
        """Like :meth:`utility_tensor` but scaled by the rate of ``user``'s action."""
        shape = [1] * self.game.n_users
        shape[user] = self.game.sizes[user]
        return self.utility_tensor(user) * self.game.policy_sets[user].rates.reshape(shape)


def exact_utility(profile: Sequence[int], game: Game, oracle: Oracle | None = None) -> np.ndarray:
    """Expected reward (success probability) of every user under ``profile``."""
    return (oracle or Oracle(game)).utility(profile)


@dataclass
class CheckResult:
    check: str
    epsilon: float
    max_violation: float
    witness_user: int | None = None
    witness_action: int | None = None
    witness_deviation: int | None = None

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.epsilon

    def __iter__(self):
        # unpacks as (passed, max_violation, witness)
        return iter((self.passed, self.max_violation, (self.witness_user, self.witness_action, self.witness_deviation)))


def _gain_tables(phi: OutcomeDistribution, oracle: Oracle, user: int):
    others, M = phi.conditional_table(user)
    R = np.array([oracle.response(user, o) for o in others]).reshape(len(others), phi.sizes[user])
    own = (M * R).sum(axis=0)
    # D[k, j] = sum_m M[m, k] (R[m, j] - R[m, k])
    D = M.T @ R - own[:, None]
    return D


def is_epsilon_ce(phi: OutcomeDistribution, game: Game, epsilon: float, oracle: Oracle | None = None) -> CheckResult:
    """Largest gain of any swap ``k -> j`` of any user, weighted by phi."""
    oracle = oracle or Oracle(game)
    best = (-np.inf, None, None, None)
    for i in range(game.n_users):
        D = _gain_tables(phi, oracle, i)
        k, j = np.unravel_index(np.argmax(D), D.shape)
        if D[k, j] > best[0]:
            best = (float(D[k, j]), i, int(k), int(j))
    return CheckResult("ce", epsilon, best[0], best[1], best[2], best[3])


def is_epsilon_cce(phi: OutcomeDistribution, game: Game, epsilon: float, oracle: Oracle | None = None) -> CheckResult:
    """Largest gain of any fixed unconditional deviation of any user."""
    oracle = oracle or Oracle(game)
    best = (-np.inf, None, None)
    for i in range(game.n_users):
        gains = _gain_tables(phi, oracle, i).sum(axis=0)
        j = int(np.argmax(gains))
        if gains[j] > best[0]:
            best = (float(gains[j]), i, j)
    return CheckResult("cce", epsilon, best[0], best[1], None, best[2])


def brute_force_pareto(
    game: Game, alphas: Sequence[float], oracle: Oracle | None = None, rate_weighted: bool = False
) -> tuple[tuple, float]:
    """Exhaustive argmax of the weighted sum of utilities (first index wins ties).

    With ``rate_weighted`` each utility is the throughput ``rate * P(ACK)``.
    """
    oracle = oracle or Oracle(game)
    tensor = oracle.throughput_tensor if rate_weighted else oracle.utility_tensor
    W = sum(a * tensor(i) for i, a in enumerate(alphas))
    flat = int(np.argmax(W))
    k = tuple(int(x) for x in np.unravel_index(flat, game.sizes))
    return k, float(W[k])


def nash_product(utilities, d) -> float:
    return float(np.prod(np.maximum(np.asarray(utilities) - np.asarray(d), 0.0)))


def brute_force_nb(
    game: Game,
    d: Sequence[float],
    disagreement: Sequence[int] | None = None,
    oracle: Oracle | None = None,
    rate_weighted: bool = False,
) -> tuple[tuple, float]:
    """Exhaustive argmax of ``prod max(u_i - d_i, 0)``.

    Returns the disagreement profile with product 0 when no profile beats
    ``d`` for every user.
    """
    oracle = oracle or Oracle(game)
    tensor = oracle.throughput_tensor if rate_weighted else oracle.utility_tensor
    P = np.ones(game.sizes)
    for i, di in enumerate(d):
        P = P * np.maximum(tensor(i) - di, 0.0)
    flat = int(np.argmax(P))
    k = tuple(int(x) for x in np.unravel_index(flat, game.sizes))
    if P[k] <= 0.0:
        fallback = tuple(disagreement) if disagreement is not None else k
        return fallback, 0.0
    return k, float(P[k])


def pure_nash_equilibria(game: Game, oracle: Oracle | None = None) -> list[tuple]:
    """Profiles where no user has a strictly better unilateral deviation."""
    oracle = oracle or Oracle(game)
    out = []
    for k in itertools.product(*[range(L) for L in game.sizes]):
        if all(oracle.response(i, k[:i] + k[i + 1:]).max() <= oracle.response(i, k[:i] + k[i + 1:])[k[i]] + 1e-15 for i in range(game.n_users)):
            out.append(k)
    return out


REPORT_FIELDS = ["check", "epsilon", "max_violation", "witness_user", "witness_action", "witness_deviation", "pass"]


def write_report(results: Iterable[CheckResult], path) -> None:
    """Verification report CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_FIELDS)
        for r in results:
            w.writerow([
                r.check, repr(r.epsilon), repr(r.max_violation),
                "" if r.witness_user is None else r.witness_user,
                "" if r.witness_action is None else r.witness_action,
                "" if r.witness_deviation is None else r.witness_deviation,
                int(r.passed),
            ])
