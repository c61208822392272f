"""Fully distributed regret matching with optimistic reward estimates.

A user only knows its own action, its direct-link state and its ACK bit. For
every alternative action it estimates the reward it would have received by
comparing interference thresholds: after an ACK every alternative is assumed
to succeed; after a NACK only alternatives with a strictly larger threshold
are. The estimate never undershoots the true counterfactual reward, so the
estimated internal regret bounds the actual one from above.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .actions import PolicySet
from .sim import ACK_TOL, Game, RunTrace, SlotOutcome, run_slots

CHECKPOINT_EVERY = 1000


class InvalidMuError(ValueError):
    pass


def default_mu(n_actions: int) -> float:
    return float(max(2 * (n_actions - 1), 1))


def estimated_reward(own_ack, played_threshold, alt_threshold):
    """Optimistic one-bit reward of an alternative action.

    1 if the user got an ACK, otherwise 1 only when the alternative's
    threshold is strictly above the one of the action played. Vectorizes over
    ``alt_threshold``.
    """
    alt = np.asarray(alt_threshold)
    if own_ack:
        return np.ones(alt.shape, dtype=np.int8) if alt.ndim else 1
    out = (alt > played_threshold).astype(np.int8)
    return out if alt.ndim else int(out)


@dataclass
class RegretState:
    """Running sums of estimated instantaneous regrets of one user.

    ``sums[k, j]`` accumulates w_est(k -> j) - w over the slots where ``k``
    was played. Regrets are ``max(0, sums / horizon)``.
    """

    n_actions: int
    mu: float
    sums: np.ndarray = None
    horizon: int = 0
    last_action: int | None = None

    def __post_init__(self):
        if self.sums is None:
            self.sums = np.zeros((self.n_actions, self.n_actions))

    def regrets(self) -> np.ndarray:
        if self.horizon == 0:
            return np.zeros_like(self.sums)
        return np.maximum(self.sums / self.horizon, 0.0)


def update_regrets(state: RegretState, played: int, alt_rewards: np.ndarray, own_ack: int) -> RegretState:
    """Add one slot: row ``played`` gains ``alt_rewards - own_ack``; other rows are untouched."""
    x = np.asarray(alt_rewards, dtype=float) - own_ack
    x[played] = 0.0
    state.sums[played] += x
    state.horizon += 1
    state.last_action = played
    return state


def next_strategy(state: RegretState) -> np.ndarray:
    """Mixed strategy for the next slot: switch to j w.p. regret(k, j) / mu."""
    L = state.n_actions
    if state.last_action is None:
        return np.full(L, 1.0 / L)
    k = state.last_action
    row = state.regrets()[k].copy()
    row[k] = 0.0
    total = row.sum()
    if total > state.mu:
        raise InvalidMuError(f"mu={state.mu} below regret row sum {total}")
    p = row / state.mu
    p[k] = 1.0 - total / state.mu
    return p


def max_internal_regret(state: RegretState) -> float:
    r = state.regrets()
    if r.size == 0:
        return 0.0
    np.fill_diagonal(r, 0.0)
    return float(r.max())


class RegretMatchingLearner:
    """Per-user learner; sees only (own action, own direct state, own ACK)."""

    def __init__(self, policy_set: PolicySet, mu: float | None = None):
        L = len(policy_set)
        self.mu = default_mu(L) if mu is None else float(mu)
        if self.mu < L - 1:
            raise InvalidMuError(f"mu={self.mu} must be >= L-1={L - 1}")
        self.state = RegretState(L, self.mu)
        thr = policy_set.thresholds
        # better[s][k] marks alternatives with a strictly larger threshold than k in state s
        self._better = [thr[:, s][None, :] > thr[:, s][:, None] for s in range(policy_set.n_states)]
        self._thr = thr

    def act(self, rng: np.random.Generator) -> int:
        st = self.state
        L = st.n_actions
        if st.last_action is None:
            return int(rng.integers(L))
        k = st.last_action
        row = st.sums[k]
        u = rng.random()
        # sums are >= 0 here (estimated regrets never decrease), so the clamp is a no-op
        leave = row.sum() / (st.horizon * st.mu)
        if leave > 1.0 + 1e-12:
            raise InvalidMuError(f"mu={st.mu} too small")
        if u >= leave:
            return k
        cum = np.cumsum(row)
        j = int(np.searchsorted(cum, u * st.horizon * st.mu, side="right"))
        return min(j, L - 1)

    def observe(self, action: int, state: int, ack: int) -> None:
        st = self.state
        if not ack:
            st.sums[action] += self._better[state][action]
        st.horizon += 1
        st.last_action = action

    def estimated_rewards(self, action: int, state: int, ack: int) -> np.ndarray:
        return estimated_reward(ack, self._thr[action, state], self._thr[:, state])


class RegretAuditor:
    """Harness-side check of the optimistic estimate against true counterfactuals.

    Uses the slot's true interference, which the learners never see. Tracks
    actual internal-regret sums alongside the estimated ones and counts
    violations of ``w_est >= w_true`` and of ``R_actual <= R_est``.
    """

    def __init__(self, game: Game, learners: Sequence[RegretMatchingLearner], checkpoint_every: int = CHECKPOINT_EVERY):
        self.game = game
        self.learners = learners
        self.actual = [np.zeros((L, L)) for L in game.sizes]
        self.dominance_violations = 0
        self.bound_violations = 0
        self.slots_checked = 0
        self.checkpoint_every = checkpoint_every
        self.history: list[tuple[int, int, float, float]] = []

    def __call__(self, o: SlotOutcome) -> None:
        for i, ps in enumerate(self.game.policy_sets):
            k, s = int(o.profile[i]), int(o.direct_idx[i])
            col = ps.thresholds[:, s]
            w_true = (o.interference[i] <= col + ACK_TOL).astype(np.int8)
            w_est = estimated_reward(int(o.ack[i]), col[k], col)
            w_est[k] = o.ack[i]
            if np.any(w_est < w_true):
                self.dominance_violations += int(np.sum(w_est < w_true))
            self.actual[i][k] += w_true - int(o.ack[i])
        self.slots_checked += 1
        t = o.slot + 1
        if t % self.checkpoint_every == 0:
            self.checkpoint(t)

    def checkpoint(self, t: int) -> None:
        for i, learner in enumerate(self.learners):
            est = np.maximum(learner.state.sums / t, 0.0)
            act = np.maximum(self.actual[i] / t, 0.0)
            np.fill_diagonal(est, 0.0)
            np.fill_diagonal(act, 0.0)
            self.bound_violations += int(np.sum(act > est + 1e-12))
            self.history.append((t, i, float(est.max()), float(act.max())))

    def max_actual_regret(self, user: int, horizon: int) -> float:
        a = np.maximum(self.actual[user] / horizon, 0.0)
        np.fill_diagonal(a, 0.0)
        return float(a.max())


@dataclass
class CEResult:
    distribution: object
    trace: RunTrace
    learners: list
    regret_trace: list = field(default_factory=list)
    auditor: RegretAuditor | None = None

    def max_regret(self) -> np.ndarray:
        return np.array([max_internal_regret(l.state) for l in self.learners])

    def write_regret_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "user", "max_estimated_regret", "max_actual_regret"])
            for row in self.regret_trace:
                w.writerow([row[0], row[1], repr(row[2]), "" if row[3] is None else repr(row[3])])


class _Checkpointer:
    def __init__(self, learners, every, auditor):
        self.learners, self.every, self.auditor = learners, every, auditor
        self.rows = []

    def __call__(self, o: SlotOutcome) -> None:
        if self.auditor is not None:
            self.auditor(o)
        t = o.slot + 1
        if t % self.every == 0:
            for i, l in enumerate(self.learners):
                act = self.auditor.max_actual_regret(i, t) if self.auditor is not None else None
                self.rows.append((t, i, max_internal_regret(l.state), act))


def run_ce_learning(
    game: Game,
    horizon: int,
    env_rng: np.random.Generator,
    user_rngs: Sequence[np.random.Generator],
    mu: float | Sequence[float] | None = None,
    audit: bool = False,
    checkpoint_every: int = CHECKPOINT_EVERY,
    debug: bool = False,
) -> CEResult:
    """Run every user's regret-matching learner for ``horizon`` slots.

    Returns the empirical joint distribution of play and a regret trace with
    the largest estimated regret of each user at every checkpoint (plus the
    actual regret when ``audit`` is on).
    """
    mus = mu if isinstance(mu, (list, tuple, np.ndarray)) else [mu] * game.n_users
    learners = [RegretMatchingLearner(ps, m) for ps, m in zip(game.policy_sets, mus)]
    auditor = RegretAuditor(game, learners, checkpoint_every) if audit else None
    cp = _Checkpointer(learners, checkpoint_every, auditor)
    trace = run_slots(game, learners, horizon, env_rng, user_rngs, observer=cp, debug=debug)
    return CEResult(trace.empirical_distribution(), trace, learners, cp.rows, auditor)
