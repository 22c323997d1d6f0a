"""Finite-armed bandit engines: UCB1, Exp3 and Exp3.S.

All engines share ``select() -> arm`` and ``update(arm, reward)``. Each engine
owns its generator; ties break toward the lowest arm index.
"""
from __future__ import annotations

import enum
import math
from typing import Hashable, Sequence

import numpy as np

from .errors import EmptySequenceError, InvalidArgumentsError, InvalidRewardError
from .rng import make_rng

# Renormalize weights once their sum passes this; floor keeps them strictly positive.
WEIGHT_GUARD = 1e100
WEIGHT_FLOOR = 1e-290


class EngineKind(str, enum.Enum):
    UCB1 = "ucb1"
    EXP3 = "exp3"
    EXP3S = "exp3s"

    @property
    def adversarial(self) -> bool:
        return self is not EngineKind.UCB1


def exp3_gamma(n_arms: int, horizon: int) -> float:
    """Known-horizon exploration rate min(1, sqrt(K ln K / ((e-1) T)))."""
    if n_arms == 1:
        return 1.0
    return min(1.0, math.sqrt(n_arms * math.log(n_arms) / ((math.e - 1) * horizon)))


def _check_reward(reward: float) -> float:
    reward = float(reward)
    if not math.isfinite(reward):
        raise InvalidRewardError(f"reward must be finite, got {reward}")
    return reward


class UCB1:
    """UCB1 with index mean + zeta * sqrt(2 ln t / count).

    ``zeta`` is the sub-Gaussian noise scale; rewards are unbounded.
    """

    kind = EngineKind.UCB1

    def __init__(self, n_arms: int, horizon: int = 1, *, zeta: float = 1.0, seed: int | None = None):
        if n_arms < 1 or horizon < 1:
            raise InvalidArgumentsError("need n_arms >= 1 and horizon >= 1")
        if not zeta > 0:
            raise InvalidArgumentsError("UCB1 needs zeta > 0")
        self.n_arms = n_arms
        self.horizon = horizon
        self.zeta = zeta
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.means = np.zeros(n_arms)
        self.t = 0
        self.rng = make_rng(seed)
        self._unpulled = n_arms

    def select(self) -> int:
        if self._unpulled:
            return int(np.argmin(self.counts))
        radius = self.zeta * np.sqrt(2.0 * math.log(self.t) / self.counts)
        return int(np.argmax(self.means + radius))

    def update(self, arm: int, reward: float) -> None:
        reward = _check_reward(reward)
        if self.counts[arm] == 0:
            self._unpulled -= 1
        self.counts[arm] += 1
        self.means[arm] += (reward - self.means[arm]) / self.counts[arm]
        self.t += 1


class Exp3:
    """Exp3 with importance-weighted reward estimates; rewards must lie in [0, 1]."""

    kind = EngineKind.EXP3

    def __init__(self, n_arms: int, horizon: int, *, seed: int | None = None, gamma: float | None = None):
        if n_arms < 1 or horizon < 1:
            raise InvalidArgumentsError("need n_arms >= 1 and horizon >= 1")
        self.n_arms = n_arms
        self.horizon = horizon
        self.gamma = exp3_gamma(n_arms, horizon) if gamma is None else float(gamma)
        if not 0 < self.gamma <= 1:
            raise InvalidArgumentsError(f"gamma must lie in (0, 1], got {self.gamma}")
        self.weights = np.ones(n_arms)
        self.rng = make_rng(seed)
        self._last_p: float | None = None
        self._last_arm: int | None = None

    def probabilities(self) -> np.ndarray:
        return (1.0 - self.gamma) * self.weights / self.weights.sum() + self.gamma / self.n_arms

    def select(self) -> int:
        # mixture draw: uniform w.p. gamma, else proportional to weights
        K = self.n_arms
        cum = np.cumsum(self.weights)
        total = cum[-1]
        if self.rng.random() < self.gamma:
            arm = min(int(self.rng.random() * K), K - 1)
        else:
            arm = int(np.searchsorted(cum, self.rng.random() * total, side="right"))
            arm = min(arm, K - 1)
        self._last_arm = arm
        self._last_p = (1.0 - self.gamma) * self.weights[arm] / total + self.gamma / K
        return arm

    def _prob_of(self, arm: int) -> float:
        if self._last_arm == arm and self._last_p is not None:
            return self._last_p
        return float(self.probabilities()[arm])

    def estimate(self, arm: int, reward: float) -> np.ndarray:
        """Importance-weighted reward vector: reward / p_arm on ``arm``, 0 elsewhere."""
        x_hat = np.zeros(self.n_arms)
        x_hat[arm] = reward / self._prob_of(arm)
        return x_hat

    def update(self, arm: int, reward: float) -> None:
        reward = _check_reward(reward)
        x_hat = reward / self._prob_of(arm)
        self._last_arm = self._last_p = None
        self.weights[arm] *= math.exp(self.gamma * x_hat / self.n_arms)
        self._guard()

    def _guard(self) -> None:
        if self.weights.sum() > WEIGHT_GUARD:
            self.weights /= self.weights.mean()
            np.maximum(self.weights, WEIGHT_FLOOR, out=self.weights)


class Exp3S(Exp3):
    """Exp3.S: Exp3 plus a weight-sharing step with rate ``alpha_share``.

    The shared mass uses the weights from before the exponential step.
    """

    kind = EngineKind.EXP3S

    def __init__(
        self,
        n_arms: int,
        horizon: int,
        *,
        seed: int | None = None,
        gamma: float | None = None,
        alpha_share: float | None = None,
    ):
        super().__init__(n_arms, horizon, seed=seed, gamma=gamma)
        self.alpha_share = 1.0 / horizon if alpha_share is None else float(alpha_share)
        # 1/T reaches 1 in the length-1 first epoch
        if not 0 <= self.alpha_share <= 1:
            raise InvalidArgumentsError("alpha_share must lie in [0, 1]")

    def update(self, arm: int, reward: float) -> None:
        reward = _check_reward(reward)
        x_hat = reward / self._prob_of(arm)
        self._last_arm = self._last_p = None
        share = math.e * self.alpha_share / self.n_arms * self.weights.sum()
        self.weights[arm] *= math.exp(self.gamma * x_hat / self.n_arms)
        self.weights += share
        self._guard()


Engine = UCB1 | Exp3 | Exp3S


def engine_new(
    kind: EngineKind | str,
    n_arms: int,
    horizon: int,
    seed: int | None = None,
    *,
    zeta: float = 1.0,
) -> Engine:
    kind = EngineKind(kind)
    if kind is EngineKind.UCB1:
        return UCB1(n_arms, horizon, zeta=zeta, seed=seed)
    if kind is EngineKind.EXP3:
        return Exp3(n_arms, horizon, seed=seed)
    return Exp3S(n_arms, horizon, seed=seed)


def hardness(seq: Sequence[Hashable]) -> int:
    """1 + number of adjacent positions whose values differ."""
    items = [tuple(np.asarray(b).tolist()) if isinstance(b, np.ndarray) else b for b in seq]
    if not items:
        raise EmptySequenceError("hardness of an empty sequence is undefined")
    return 1 + sum(1 for a, b in zip(items, items[1:]) if a != b)
