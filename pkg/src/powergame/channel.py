"""Discrete block-fading model for an N-pair Gaussian interference channel.

Gains are stored as amplitudes |h| and squared where they enter the SINR.
Noise power is fixed at 1, so an SNR of ``x`` dB is an average power budget
of ``10 ** (x / 10)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

PMF_TOL = 1e-12


class ModelError(ValueError):
    """Raised for malformed fading models."""


@dataclass(frozen=True)
class GainAlphabet:
    """Finite set of gain amplitudes with their probabilities."""

    values: tuple[float, ...]
    pmf: tuple[float, ...]

    def __init__(self, values: Sequence[float], pmf: Sequence[float] | None = None):
        values = tuple(float(v) for v in values)
        if pmf is None:
            pmf = [1.0 / len(values)] * len(values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "pmf", tuple(float(p) for p in pmf))

    @classmethod
    def uniform(cls, values: Sequence[float]) -> "GainAlphabet":
        return cls(values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def squared(self) -> np.ndarray:
        return np.asarray(self.values) ** 2

    def validate(self, name: str = "alphabet") -> None:
        if len(self.values) == 0:
            raise ModelError(f"{name}: empty alphabet")
        if len(self.values) != len(self.pmf):
            raise ModelError(f"{name}: {len(self.values)} values but {len(self.pmf)} probabilities")
        if any(v < 0 for v in self.values):
            raise ModelError(f"{name}: negative gain in {self.values}")
        if len(set(self.values)) != len(self.values):
            raise ModelError(f"{name}: repeated gain values {self.values}")
        if any(p < 0 for p in self.pmf):
            raise ModelError(f"{name}: negative probability in {self.pmf}")
        if abs(sum(self.pmf) - 1.0) > PMF_TOL:
            raise ModelError(f"{name}: malformed pmf {self.pmf} sums to {sum(self.pmf)!r}")


@dataclass(frozen=True)
class FadingModel:
    """Direct and cross gain distributions for ``n_users`` links.

    ``cross[(i, j)]`` is the alphabet of the gain from transmitter ``j`` into
    receiver ``i``; users are 0-based.
    """

    n_users: int
    direct: tuple[GainAlphabet, ...]
    cross: Mapping[tuple[int, int], GainAlphabet]
    noise_power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "direct", tuple(self.direct))
        object.__setattr__(self, "cross", dict(self.cross))

    @classmethod
    def per_receiver(
        cls,
        direct: Sequence[GainAlphabet] | GainAlphabet,
        cross: Sequence[GainAlphabet] | GainAlphabet,
        n_users: int | None = None,
    ) -> "FadingModel":
        """Build a model where every cross link into receiver ``i`` shares ``cross[i]``.

        Passing a single alphabet for ``direct``/``cross`` repeats it for all
        users (``n_users`` is then required).
        """
        if isinstance(direct, GainAlphabet):
            if n_users is None:
                raise ModelError("n_users is required with a shared direct alphabet")
            direct = [direct] * n_users
        n = len(direct)
        if isinstance(cross, GainAlphabet):
            cross = [cross] * n
        if len(cross) != n:
            raise ModelError(f"expected {n} cross alphabets, got {len(cross)}")
        pairs = {(i, j): cross[i] for i in range(n) for j in range(n) if i != j}
        return validate_model(cls(n, tuple(direct), pairs))

    def cross_alphabet(self, i: int, j: int) -> GainAlphabet:
        return self.cross[(i, j)]


def validate_model(model: FadingModel) -> FadingModel:
    """Return ``model`` unchanged if every alphabet is well formed and all pairs exist."""
    if model.n_users < 1:
        raise ModelError("n_users must be positive")
    if len(model.direct) != model.n_users:
        raise ModelError(f"expected {model.n_users} direct alphabets, got {len(model.direct)}")
    for i, alpha in enumerate(model.direct):
        alpha.validate(f"direct[{i}]")
    for i in range(model.n_users):
        for j in range(model.n_users):
            if i == j:
                continue
            if (i, j) not in model.cross:
                raise ModelError(f"missing cross pair ({i}, {j})")
            model.cross[(i, j)].validate(f"cross[({i}, {j})]")
    extra = [p for p in model.cross if p[0] == p[1] or not (0 <= p[0] < model.n_users and 0 <= p[1] < model.n_users)]
    if extra:
        raise ModelError(f"invalid cross pairs {extra}")
    if model.noise_power != 1.0:
        raise ModelError("noise power is fixed at 1")
    return model


def snr_to_budget(snr_db: float) -> float:
    """Average power budget for unit noise."""
    return 10.0 ** (snr_db / 10.0)


def state_probability(model: FadingModel, user: int, state: int, link: int | None = None) -> float:
    """Probability of direct state ``state`` of ``user``.

    With ``link=j`` the cross alphabet of pair ``(user, j)`` is used instead.
    """
    if not 0 <= user < model.n_users:
        raise IndexError(f"user {user} out of range")
    alpha = model.direct[user] if link is None else model.cross[(user, link)]
    if not 0 <= state < len(alpha):
        raise IndexError(f"state {state} out of range for alphabet of size {len(alpha)}")
    return alpha.pmf[state]


@dataclass(frozen=True)
class GainRealization:
    """Gains of one slot.

    ``direct_idx[i]`` indexes ``model.direct[i]``; ``cross_idx[i, j]`` indexes
    ``model.cross[(i, j)]`` (diagonal is -1).
    """

    slot: int
    direct_idx: np.ndarray
    cross_idx: np.ndarray
    direct: np.ndarray
    cross: np.ndarray


class ChannelSampler:
    """Draws i.i.d. slot realizations in blocks.

    Each link is drawn by inverse-CDF from its own pmf. Realizations are
    kept as indices; ``cross_sq`` gives the squared cross gains directly.
    """

    def __init__(self, model: FadingModel, rng: np.random.Generator):
        self.model = validate_model(model)
        self.rng = rng
        n = model.n_users
        self._direct_cdf = [_cdf(a.pmf) for a in model.direct]
        self._pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        self._cross_cdf = [_cdf(model.cross[p].pmf) for p in self._pairs]
        self._cross_sq_tab = [model.cross[p].squared for p in self._pairs]
        self.slot = 0

    def block(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        """Sample ``size`` slots.

        Returns ``(direct_idx, cross_sq)`` with shapes ``(size, N)`` and
        ``(size, N, N)``; ``cross_sq[t, i, j]`` is |h_ij|^2 (zero on the diagonal).
        """
        n = self.model.n_users
        u = self.rng.random((size, n + len(self._pairs)))
        direct_idx = np.empty((size, n), dtype=np.intp)
        for i, cdf in enumerate(self._direct_cdf):
            direct_idx[:, i] = np.searchsorted(cdf, u[:, i], side="right")
        cross_sq = np.zeros((size, n, n))
        for col, ((i, j), cdf, sq) in enumerate(zip(self._pairs, self._cross_cdf, self._cross_sq_tab)):
            cross_sq[:, i, j] = sq[np.searchsorted(cdf, u[:, n + col], side="right")]
        self.slot += size
        return direct_idx, cross_sq

    def block_indices(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        """Like :meth:`block` but returns cross-gain indices (diagonal -1)."""
        n = self.model.n_users
        u = self.rng.random((size, n + len(self._pairs)))
        direct_idx = np.empty((size, n), dtype=np.intp)
        for i, cdf in enumerate(self._direct_cdf):
            direct_idx[:, i] = np.searchsorted(cdf, u[:, i], side="right")
        cross_idx = np.full((size, n, n), -1, dtype=np.intp)
        for col, ((i, j), cdf) in enumerate(zip(self._pairs, self._cross_cdf)):
            cross_idx[:, i, j] = np.searchsorted(cdf, u[:, n + col], side="right")
        self.slot += size
        return direct_idx, cross_idx


def _cdf(pmf: Sequence[float]) -> np.ndarray:
    # interior boundaries only, so u close to 1 always lands in the last bin
    return np.cumsum(pmf)[:-1]


def sample_slot(model: FadingModel, rng: np.random.Generator, slot: int = 0) -> GainRealization:
    """Draw one slot's gains, each link independently from its pmf."""
    sampler = ChannelSampler(model, rng)
    d_idx, c_idx = sampler.block_indices(1)
    d_idx, c_idx = d_idx[0], c_idx[0]
    n = model.n_users
    direct = np.array([model.direct[i].values[d_idx[i]] for i in range(n)])
    cross = np.zeros((n, n))
    for (i, j), a in model.cross.items():
        cross[i, j] = a.values[c_idx[i, j]]
    return GainRealization(slot, d_idx, c_idx, direct, cross)


def user_streams(seed: int | np.random.SeedSequence, n_users: int) -> tuple[np.random.Generator, list[np.random.Generator]]:
    """One generator for the environment plus one independent generator per user."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(n_users + 1)
    return np.random.default_rng(children[0]), [np.random.default_rng(c) for c in children[1:]]


def example1_model() -> FadingModel:
    """Symmetric three-pair model with equiprobable states."""
    return FadingModel.per_receiver(
        GainAlphabet.uniform([0.2, 0.6, 1.0]),
        GainAlphabet.uniform([0.1, 0.3, 0.5]),
        n_users=3,
    )


def example2_model() -> FadingModel:
    """Same alphabets as :func:`example1_model`, per-receiver cross pmfs."""
    hc = [0.1, 0.3, 0.5]
    return FadingModel.per_receiver(
        GainAlphabet.uniform([0.2, 0.6, 1.0]),
        [
            GainAlphabet(hc, [0.5, 0.3, 0.2]),
            GainAlphabet(hc, [0.4, 0.5, 0.1]),
            GainAlphabet(hc, [0.25, 0.5, 0.25]),
        ],
        n_users=3,
    )
