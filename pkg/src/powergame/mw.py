"""Multiplicative-weights learning toward a coarse correlated equilibrium.

Each user keeps one weight per action, plays proportionally to the weights
and, every slot, multiplies each weight by ``(1 - eps) ** cost`` where the
cost of an action is minus its empirical utility estimated from the user's
own history of actions and ACKs.
"""
from __future__ import annotations

import csv
import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .actions import PolicySet
from .sim import ACK_TOL, Game, RunTrace, SlotOutcome, run_slots

RENORM_EVERY = 1000
SNAPSHOT_EVERY = 100
DENSE_JOINT_LIMIT = 4096


def empirical_utility(reward_sums: np.ndarray, t: int, visits: np.ndarray | None = None) -> np.ndarray:
    """ACKs collected with each action divided by the slot count ``t``.

    With ``visits`` the denominator is each action's own play count instead
    (unplayed actions get 0).
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if visits is None:
        return np.asarray(reward_sums, dtype=float) / t
    v = np.asarray(visits, dtype=float)
    return np.divide(reward_sums, v, out=np.zeros_like(v), where=v > 0)


@dataclass
class WeightState:
    """Weights are kept as logs so they stay positive and finite over long runs."""

    log_weights: np.ndarray
    epsilon: float
    reward_sums: np.ndarray = None
    visits: np.ndarray = None
    t: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        L = len(self.log_weights)
        if self.reward_sums is None:
            self.reward_sums = np.zeros(L)
        if self.visits is None:
            self.visits = np.zeros(L, dtype=np.int64)

    @classmethod
    def initial(cls, n_actions: int, epsilon: float) -> "WeightState":
        return cls(np.zeros(n_actions), epsilon)

    @property
    def weights(self) -> np.ndarray:
        """Weights relative to the largest one."""
        return np.exp(self.log_weights - self.log_weights.max())


def mw_update(state: WeightState, costs: np.ndarray) -> WeightState:
    """``w <- w * (1 - eps) ** cost`` elementwise."""
    state.log_weights = state.log_weights + np.asarray(costs, dtype=float) * np.log1p(-state.epsilon)
    return state


def mw_strategy(state: WeightState) -> np.ndarray:
    """Play probabilities proportional to the weights."""
    w = np.exp(state.log_weights - state.log_weights.max())
    return w / w.sum()


class MultiplicativeWeightsLearner:
    """Per-user MW learner; sees only (own action, own direct state, own ACK)."""

    def __init__(self, policy_set: PolicySet, epsilon: float = 0.1, visit_normalized: bool = False):
        self.state = WeightState.initial(len(policy_set), epsilon)
        self.visit_normalized = visit_normalized
        self._step = -np.log1p(-epsilon)
        self.strategy = mw_strategy(self.state)
        self._cum = np.cumsum(self.strategy)

    def act(self, rng: np.random.Generator) -> int:
        j = int(np.searchsorted(self._cum, rng.random() * self._cum[-1], side="right"))
        return min(j, len(self._cum) - 1)

    def observe(self, action: int, state: int, ack: int) -> None:
        st = self.state
        st.t += 1
        st.visits[action] += 1
        st.reward_sums[action] += ack
        # cost = -u, so log w grows by u * -log(1 - eps)
        if self.visit_normalized:
            st.log_weights += empirical_utility(st.reward_sums, st.t, st.visits) * self._step
        else:
            st.log_weights += st.reward_sums * (self._step / st.t)
        if st.t % RENORM_EVERY == 0:
            st.log_weights -= st.log_weights.max()
        w = np.exp(st.log_weights - st.log_weights.max())
        self._cum = np.cumsum(w)
        self.strategy = w / self._cum[-1]


class StrategyRecorder:
    """Accumulates the time-averaged product of per-user strategies.

    Keeps the exact average of each user's strategy, snapshots every
    ``snapshot_every`` slots and, when the joint space is small enough, the
    exact dense average of the product distribution.
    """

    def __init__(self, sizes: Sequence[int], snapshot_every: int = SNAPSHOT_EVERY, dense_limit: int = DENSE_JOINT_LIMIT):
        self.sizes = tuple(sizes)
        self.sum_marginals = [np.zeros(L) for L in sizes]
        self.snapshots: list[list[np.ndarray]] = [[] for _ in sizes]
        self.snapshot_every = snapshot_every
        self.dense = np.zeros(self.sizes) if int(np.prod(self.sizes)) <= dense_limit else None
        self.count = 0

    def record(self, strategies: Sequence[np.ndarray]) -> None:
        for acc, q in zip(self.sum_marginals, strategies):
            acc += q
        if self.dense is not None:
            self.dense += functools.reduce(np.multiply.outer, strategies)
        if self.count % self.snapshot_every == 0:
            for snaps, q in zip(self.snapshots, strategies):
                snaps.append(q.copy())
        self.count += 1

    def distribution(self):
        from .oracle import OutcomeDistribution

        if self.dense is not None:
            return OutcomeDistribution.dense(self.dense / self.count)
        return OutcomeDistribution.product_mixture([np.array(s) for s in self.snapshots])

    def average_marginals(self) -> list[np.ndarray]:
        return [m / self.count for m in self.sum_marginals]


class ExternalRegretAuditor:
    """Realized reward versus each fixed action in hindsight, from true interference."""

    def __init__(self, game: Game):
        self.game = game
        self.realized = np.zeros(game.n_users)
        self.counterfactual = [np.zeros(L) for L in game.sizes]
        # thresholds[s] is the column of every action in state s
        self._thresholds_t = [np.ascontiguousarray(ps.thresholds.T) for ps in game.policy_sets]
        self.t = 0

    def __call__(self, o: SlotOutcome) -> None:
        for i, thr in enumerate(self._thresholds_t):
            self.counterfactual[i] += thr[o.direct_idx[i]] >= o.interference[i] - ACK_TOL
        self.realized += o.ack
        self.t += 1

    def regret(self, user: int) -> float:
        return external_regret(self.realized[user], self.counterfactual[user], self.t)


def external_regret(realized_total: float, counterfactual_totals: np.ndarray, t: int) -> float:
    """max_k (reward of always playing k - realized reward) / t, clamped at 0."""
    if t < 1:
        raise ValueError("empty history")
    return max(float((np.max(counterfactual_totals) - realized_total) / t), 0.0)


@dataclass
class CCEResult:
    distribution: object
    trace: RunTrace
    learners: list
    recorder: StrategyRecorder
    regret_trace: list = field(default_factory=list)

    def external_regret(self) -> np.ndarray:
        return np.array([row[2] for row in self.regret_trace[-len(self.learners):]])

    def write_regret_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "user", "external_regret"])
            for row in self.regret_trace:
                w.writerow([row[0], row[1], repr(row[2])])


class _Hook:
    def __init__(self, learners, recorder, auditor, every):
        self.learners, self.recorder, self.auditor, self.every = learners, recorder, auditor, every
        self.rows = []
        # strategies used in slot 1
        self._current = [l.strategy for l in learners]

    def __call__(self, o: SlotOutcome) -> None:
        self.recorder.record(self._current)
        self._current = [l.strategy for l in self.learners]
        self.auditor(o)
        t = o.slot + 1
        if t % self.every == 0:
            for i in range(len(self.learners)):
                self.rows.append((t, i, self.auditor.regret(i)))


def run_cce_learning(
    game: Game,
    horizon: int,
    env_rng: np.random.Generator,
    user_rngs: Sequence[np.random.Generator],
    epsilon: float = 0.1,
    visit_normalized: bool = False,
    checkpoint_every: int = 1000,
    snapshot_every: int = SNAPSHOT_EVERY,
    dense_limit: int = DENSE_JOINT_LIMIT,
    debug: bool = False,
) -> CCEResult:
    """Run every user's MW learner for ``horizon`` slots.

    The returned distribution is the time average of the per-slot product
    of strategies; the regret trace holds each user's external regret of
    the realized play at every checkpoint.
    """
    learners = [MultiplicativeWeightsLearner(ps, epsilon, visit_normalized) for ps in game.policy_sets]
    recorder = StrategyRecorder(game.sizes, snapshot_every, dense_limit)
    hook = _Hook(learners, recorder, ExternalRegretAuditor(game), checkpoint_every)
    trace = run_slots(game, learners, horizon, env_rng, user_rngs, observer=hook, debug=debug)
    if horizon % checkpoint_every:
        for i in range(game.n_users):
            hook.rows.append((horizon, i, hook.auditor.regret(i)))
    return CCEResult(recorder.distribution(), trace, learners, recorder, hook.rows)
