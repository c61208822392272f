"""Feasible stationary power policies and their interference thresholds."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

BUDGET_TOL = 1e-9


class EmptyPolicySetError(ValueError):
    """No power tuple satisfies the average-power budget."""


@dataclass(frozen=True)
class PowerPolicy:
    """One power level per direct-gain state, plus the transmission rate."""

    powers: tuple[float, ...]
    rate: float

    def average_power(self, pmf: Sequence[float]) -> float:
        return float(np.dot(pmf, self.powers))


def interference_threshold(power: float | np.ndarray, direct_gain: float | np.ndarray, rate: float | np.ndarray):
    """Largest interference at which a transmission still gets an ACK.

    ``|h|^2 * p / (2^r - 1) - 1`` for unit noise; negative values mean the
    transmission cannot succeed at all.
    """
    return np.asarray(direct_gain) ** 2 * np.asarray(power) / (2.0 ** np.asarray(rate) - 1.0) - 1.0


class PolicySet:
    """Enumerated feasible actions of one user.

    Attributes
    ----------
    powers : ndarray, shape (L, n_states)
        Power of action ``k`` in direct state ``s``.
    rates : ndarray, shape (L,)
    thresholds : ndarray, shape (L, n_states)
        ``interference_threshold`` precomputed per (action, state).
    """

    def __init__(self, powers, rates, direct_values, direct_pmf, user: int = 0):
        self.powers = np.asarray(powers, dtype=float).reshape(len(rates), len(direct_values))
        self.rates = np.asarray(rates, dtype=float)
        self.direct_values = np.asarray(direct_values, dtype=float)
        self.direct_pmf = np.asarray(direct_pmf, dtype=float)
        self.user = user
        if len(self.rates) == 0:
            raise EmptyPolicySetError(f"user {user}: no feasible power policy")
        if np.any(self.rates <= 0):
            raise ValueError("rates must be positive")
        self.thresholds = interference_threshold(self.powers, self.direct_values[None, :], self.rates[:, None])
        for a in (self.powers, self.rates, self.thresholds):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.rates)

    def __getitem__(self, k: int) -> PowerPolicy:
        return PowerPolicy(tuple(self.powers[k].tolist()), float(self.rates[k]))

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    def index(self, powers: Sequence[float], rate: float | None = None) -> int:
        """Index of the action with the given powers (and rate, if several)."""
        hit = np.all(np.isclose(self.powers, np.asarray(powers, dtype=float)), axis=1)
        if rate is not None:
            hit &= np.isclose(self.rates, rate)
        idx = np.flatnonzero(hit)
        if len(idx) == 0:
            raise KeyError(f"no action with powers {tuple(powers)} rate {rate}")
        return int(idx[0])

    @property
    def n_states(self) -> int:
        return len(self.direct_values)

    def filter(self, predicate: Callable[[PowerPolicy], bool]) -> "PolicySet":
        """Restrict to actions satisfying ``predicate``; order is preserved."""
        keep = [k for k in range(len(self)) if predicate(self[k])]
        return PolicySet(self.powers[keep], self.rates[keep], self.direct_values, self.direct_pmf, self.user)

    def __repr__(self) -> str:
        return f"PolicySet(user={self.user}, L={len(self)}, states={self.n_states})"


def feasible_tuples(levels: Sequence[float], direct_pmf: Sequence[float], budget: float) -> np.ndarray:
    """All power tuples meeting the average budget, lexicographic in level index."""
    levels = np.asarray(sorted(set(float(p) for p in levels)))
    pmf = np.asarray(direct_pmf, dtype=float)
    n = len(pmf)
    if len(levels) == 0:
        raise ValueError("levels must be nonempty")
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    grid = np.array(list(itertools.product(range(len(levels)), repeat=n)), dtype=np.intp).reshape(-1, n)
    tuples = levels[grid]
    ok = tuples @ pmf <= budget + BUDGET_TOL
    return tuples[ok]


def enumerate_policies(levels, direct_values, direct_pmf, budget: float, rate: float, user: int = 0) -> PolicySet:
    """Fixed-rate action set of one user."""
    return enumerate_multirate([rate], levels, direct_values, direct_pmf, budget, user=user)


def enumerate_multirate(rates, levels, direct_values, direct_pmf, budget: float, user: int = 0) -> PolicySet:
    """Every feasible power tuple paired with every rate (rate-major order)."""
    rates = list(rates)
    if not rates:
        raise ValueError("rates must be nonempty")
    tuples = feasible_tuples(levels, direct_pmf, budget)
    if len(tuples) == 0:
        raise EmptyPolicySetError(f"user {user}: no power tuple meets budget {budget}")
    powers = np.concatenate([tuples] * len(rates))
    rate_col = np.repeat(np.asarray(rates, dtype=float), len(tuples))
    return PolicySet(powers, rate_col, direct_values, direct_pmf, user)


def build_policy_sets(model, levels, rates, budgets, multirate: bool = False) -> list[PolicySet]:
    """Action sets for every user of ``model``.

    ``levels``, ``rates`` and ``budgets`` may be given once for all users or
    per user. In multi-rate mode ``rates`` is a rate set (or one per user).
    """
    n = model.n_users
    levels = _per_user(levels, n, nested=True)
    budgets = _per_user(budgets, n, nested=False)
    rates = _per_user(rates, n, nested=multirate)
    sets = []
    for i in range(n):
        alpha = model.direct[i]
        if multirate:
            sets.append(enumerate_multirate(rates[i], levels[i], alpha.values, alpha.pmf, budgets[i], user=i))
        else:
            sets.append(enumerate_policies(levels[i], alpha.values, alpha.pmf, budgets[i], rates[i], user=i))
    return sets


def _per_user(value, n, nested):
    if nested:
        if len(value) and np.ndim(value[0]) == 0:
            return [list(value)] * n
        if len(value) != n:
            raise ValueError(f"expected {n} per-user entries, got {len(value)}")
        return [list(v) for v in value]
    if np.ndim(value) == 0:
        return [float(value)] * n
    if len(value) != n:
        raise ValueError(f"expected {n} per-user entries, got {len(value)}")
    return [float(v) for v in value]
