"""Slotted play on the fading interference channel.

A slot: every user picks an action, the channel draws gains, each receiver
sees the interference of the other transmitters and returns ACK iff that
interference does not exceed the threshold of the action used.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .actions import PolicySet
from .channel import ChannelSampler, FadingModel

# ties within float rounding count as success (the ACK condition is "<=")
ACK_TOL = 1e-12
BLOCK = 4096


def received_interference(powers: Sequence[np.ndarray] | np.ndarray, cross_sq: np.ndarray, user: int | None = None):
    """Interference at each receiver: sum over j != i of |h_ij|^2 * p_j.

    ``powers`` are the transmit powers of the slot (shape ``(N,)`` or
    ``(T, N)``); ``cross_sq`` the squared cross gains (``(N, N)`` or
    ``(T, N, N)``, zero diagonal).
    """
    tx = np.asarray(powers, dtype=float)
    gamma = np.einsum("...ij,...j->...i", cross_sq, tx)
    return gamma if user is None else gamma[..., user]


def ack_outcome(threshold, interference):
    """1 where the interference is within the threshold."""
    return (np.asarray(interference) <= np.asarray(threshold) + ACK_TOL).astype(np.int8)


class Game:
    """Model plus action sets, with per-(action, state) lookup tables stacked for speed."""

    def __init__(self, model: FadingModel, policy_sets: Sequence[PolicySet]):
        if len(policy_sets) != model.n_users:
            raise ValueError(f"{model.n_users} users but {len(policy_sets)} policy sets")
        for i, ps in enumerate(policy_sets):
            if ps.n_states != len(model.direct[i]):
                raise ValueError(f"user {i}: policy set has {ps.n_states} states, model has {len(model.direct[i])}")
        self.model = model
        self.policy_sets = list(policy_sets)
        self.n_users = model.n_users
        self.sizes = tuple(len(ps) for ps in policy_sets)

    def tx_powers(self, profile: np.ndarray, direct_idx: np.ndarray) -> np.ndarray:
        """Transmit powers for actions ``profile`` in states ``direct_idx`` (same shape, last axis users)."""
        out = np.empty(np.shape(direct_idx))
        for i, ps in enumerate(self.policy_sets):
            out[..., i] = ps.powers[profile[..., i], direct_idx[..., i]]
        return out

    def thresholds(self, profile: np.ndarray, direct_idx: np.ndarray) -> np.ndarray:
        out = np.empty(np.shape(direct_idx))
        for i, ps in enumerate(self.policy_sets):
            out[..., i] = ps.thresholds[profile[..., i], direct_idx[..., i]]
        return out

    def rates(self, profile: np.ndarray) -> np.ndarray:
        out = np.empty(np.shape(profile))
        for i, ps in enumerate(self.policy_sets):
            out[..., i] = ps.rates[profile[..., i]]
        return out

    def play(self, profile, direct_idx, cross_sq):
        """Interference and ACK bits for one slot or a block of slots."""
        profile = np.asarray(profile, dtype=np.intp)
        if profile.ndim < direct_idx.ndim:
            profile = np.broadcast_to(profile, direct_idx.shape)
        gamma = received_interference(self.tx_powers(profile, direct_idx), cross_sq)
        return gamma, ack_outcome(self.thresholds(profile, direct_idx), gamma)


class Learner(Protocol):
    """Per-user decision rule driven by the slot loop.

    ``observe`` receives only the user's own action, own direct state and own
    ACK. Learners setting ``overhears_acks = True`` additionally get
    ``overhear(acks)`` with every user's ACK bit.
    """

    def act(self, rng: np.random.Generator) -> int: ...

    def observe(self, action: int, state: int, ack: int) -> None: ...


class FixedAction:
    """Plays the same action every slot."""

    def __init__(self, action: int):
        self.action = int(action)

    def act(self, rng):
        return self.action

    def observe(self, action, state, ack):
        pass


@dataclass
class SlotOutcome:
    slot: int
    direct_idx: np.ndarray
    cross_sq: np.ndarray
    profile: np.ndarray
    interference: np.ndarray
    ack: np.ndarray


@dataclass
class RunTrace:
    """Streaming aggregates of a run (full slot logs only when ``log`` is set)."""

    n_users: int
    sizes: tuple[int, ...]
    horizon: int = 0
    tail_start: int = 0
    ack_counts: np.ndarray = None
    bits: np.ndarray = None
    tail_ack_counts: np.ndarray = None
    tail_bits: np.ndarray = None
    visits: list = None
    joint: Counter = field(default_factory=Counter)
    log: list | None = None

    def __post_init__(self):
        n = self.n_users
        self.ack_counts = np.zeros(n, dtype=np.int64)
        self.bits = np.zeros(n)
        self.tail_ack_counts = np.zeros(n, dtype=np.int64)
        self.tail_bits = np.zeros(n)
        self.visits = [np.zeros(L, dtype=np.int64) for L in self.sizes]

    def average_reward(self) -> np.ndarray:
        return self.ack_counts / max(self.horizon, 1)

    @property
    def tail_length(self) -> int:
        return max(self.horizon - self.tail_start, 0)

    def empirical_distribution(self):
        from .oracle import OutcomeDistribution

        return OutcomeDistribution.from_counts(self.joint, self.sizes)

    def write_log(self, path) -> None:
        """Per-slot debug CSV: slot,user,action_index,direct_state,interference,ack."""
        if self.log is None:
            raise ValueError("run was not traced; pass debug=True")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "user", "action_index", "direct_state", "interference", "ack"])
            for o in self.log:
                for i in range(self.n_users):
                    w.writerow([o.slot, i, int(o.profile[i]), int(o.direct_idx[i]), repr(float(o.interference[i])), int(o.ack[i])])


def throughput(trace: RunTrace, user: int, tail: bool = False) -> float:
    """Bits per channel use: average of rate * ACK over the run (or its tail)."""
    if tail:
        if trace.tail_length == 0:
            raise ValueError("empty tail")
        return float(trace.tail_bits[user] / trace.tail_length)
    if trace.horizon == 0:
        raise ValueError("empty trace")
    return float(trace.bits[user] / trace.horizon)


def run_slots(
    game: Game,
    learners: Sequence[Learner],
    horizon: int,
    env_rng: np.random.Generator,
    user_rngs: Sequence[np.random.Generator],
    observer: Callable[[SlotOutcome], None] | None = None,
    tail_fraction: float = 0.1,
    count_joint: bool = True,
    debug: bool = False,
) -> RunTrace:
    """Play ``horizon`` slots with one learner per user.

    ``observer`` sees the full slot outcome (true interference included); it
    is for verification harnesses and never feeds back into the learners.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    n = game.n_users
    sampler = ChannelSampler(game.model, env_rng)
    trace = RunTrace(n, game.sizes, tail_start=horizon - int(round(tail_fraction * horizon)), log=[] if debug else None)
    overhear = [i for i, l in enumerate(learners) if getattr(l, "overhears_acks", False)]
    powers = [ps.powers for ps in game.policy_sets]
    thresholds = [ps.thresholds for ps in game.policy_sets]
    rates = [ps.rates for ps in game.policy_sets]
    profile = np.zeros(n, dtype=np.intp)
    tx = np.zeros(n)
    thr = np.zeros(n)
    rate_now = np.zeros(n)
    t = 0
    while t < horizon:
        size = min(BLOCK, horizon - t)
        direct_block, cross_block = sampler.block(size)
        for b in range(size):
            s = direct_block[b]
            for i in range(n):
                k = learners[i].act(user_rngs[i])
                profile[i] = k
                tx[i] = powers[i][k, s[i]]
                thr[i] = thresholds[i][k, s[i]]
                rate_now[i] = rates[i][k]
            gamma = cross_block[b] @ tx
            ack = (gamma <= thr + ACK_TOL).astype(np.int8)
            for i in range(n):
                learners[i].observe(int(profile[i]), int(s[i]), int(ack[i]))
            for i in overhear:
                learners[i].overhear(ack)
            trace.ack_counts += ack
            trace.bits += rate_now * ack
            for i in range(n):
                trace.visits[i][profile[i]] += 1
            if count_joint:
                trace.joint[tuple(profile.tolist())] += 1
            if t >= trace.tail_start:
                trace.tail_ack_counts += ack
                trace.tail_bits += rate_now * ack
            if observer is not None or debug:
                outcome = SlotOutcome(t, s, cross_block[b], profile.copy(), gamma, ack)
                if observer is not None:
                    observer(outcome)
                if debug:
                    trace.log.append(outcome)
            t += 1
            trace.horizon = t
    return trace


def play_fixed(game: Game, profile, horizon: int, env_rng: np.random.Generator) -> np.ndarray:
    """ACK counts per user when ``profile`` is held fixed for ``horizon`` slots (vectorized)."""
    sampler = ChannelSampler(game.model, env_rng)
    counts = np.zeros(game.n_users, dtype=np.int64)
    profile = np.asarray(profile, dtype=np.intp)
    done = 0
    while done < horizon:
        size = min(BLOCK * 4, horizon - done)
        d, c = sampler.block(size)
        _, ack = game.play(profile, d, c)
        counts += ack.sum(axis=0)
        done += size
    return counts
