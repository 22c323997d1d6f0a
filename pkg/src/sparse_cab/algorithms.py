"""CAB(d, k): doubling-trick continuum-armed bandit over a partition-family grid.

Epochs start at T = 1, 2, 4, ...; epoch T covers rounds T..min(2T-1, n). Each
epoch picks a resolution M from the configured schedule, builds the strategy
grid, and runs a fresh finite-armed engine tuned for horizon T.

All logarithms are natural; ln T is replaced by max(ln T, 1) so the schedules
are defined for T = 1, 2.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .engines import EngineKind, engine_new
from .environments import Environment
from .errors import ArmCapExceededError, InvalidArgumentsError
from .partition_family import PartitionFamily, build_random_family, trivial_family
from .rng import derive_seed
from .strategy_grid import ARM_CAP, StrategyGrid
from .trace import RegretTrace

SCHEDULES = ("auto", "k1", "k1_shard", "general", "general_shard")


def _log_T(T: int) -> float:
    return max(math.log(T), 1.0)


def m_schedule_k1(T: int, alpha: float) -> int:
    """ceil((T / ln T)^(1 / (2 alpha + 1)))."""
    return max(1, math.ceil((T / _log_T(T)) ** (1.0 / (2 * alpha + 1))))


def m_schedule_k1_shard(T: int, alpha: float, S: int) -> int:
    """ceil((T / (S ln T))^(1 / (2 alpha + 1))) for S-hard tuple sequences."""
    return max(1, math.ceil((T / (S * _log_T(T))) ** (1.0 / (2 * alpha + 1))))


def _general(T: int, alpha: float, k: int, d: int, S: int) -> int:
    if d < 2:
        raise InvalidArgumentsError("the general schedule needs d >= 2 (ln d > 0)")
    if not 1 <= k <= d:
        raise InvalidArgumentsError(f"need 1 <= k <= d, got k={k}, d={d}")
    base = (
        k ** ((alpha - 3) / 2)
        * math.exp(-k / 2)
        * (S * math.log(d)) ** -0.5
        * math.sqrt(T / _log_T(T))
    )
    return max(1, math.ceil(base ** (2.0 / (2 * alpha + k))))


def m_schedule_general(T: int, alpha: float, k: int, d: int) -> int:
    """ceil((k^((a-3)/2) e^(-k/2) (ln d)^(-1/2) sqrt(T / ln T))^(2 / (2a + k)))."""
    return _general(T, alpha, k, d, 1)


def m_schedule_general_shard(T: int, alpha: float, k: int, d: int, S: int) -> int:
    """As :func:`m_schedule_general` with (S ln d)^(-1/2) in place of (ln d)^(-1/2)."""
    return _general(T, alpha, k, d, S)


@dataclass
class CabConfig:
    """Algorithm configuration.

    ``family=None`` means: the single one-block partition when k = 1 (the
    diagonal grid), otherwise a random family of ``family_m`` partitions
    (default: the minimum size) drawn from ``family_seed``.
    """

    d: int
    k: int
    alpha: float = 1.0
    engine: EngineKind = EngineKind.EXP3
    zeta: float = 0.1
    S: int | None = None
    schedule: str = "auto"
    arm_cap: int = ARM_CAP
    family: PartitionFamily | None = field(default=None, repr=False)
    family_seed: int = 0
    family_m: int | None = None
    horizon: int | None = None

    def __post_init__(self):
        self.engine = EngineKind(self.engine)
        if not 1 <= self.k <= self.d:
            raise InvalidArgumentsError(f"need 1 <= k <= d, got d={self.d}, k={self.k}")
        if not 0 < self.alpha <= 1:
            raise InvalidArgumentsError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.S is not None and self.S < 1:
            raise InvalidArgumentsError("hardness budget S must be >= 1")
        if self.schedule not in SCHEDULES:
            raise InvalidArgumentsError(f"unknown schedule {self.schedule!r}; choose from {SCHEDULES}")
        if self.schedule.endswith("shard") and self.S is None:
            raise InvalidArgumentsError(f"schedule {self.schedule!r} needs S")
        if self.family is not None and (self.family.d, self.family.k) != (self.d, self.k):
            raise InvalidArgumentsError("family (d, k) does not match the configuration")
        if self.engine is EngineKind.UCB1 and not self.zeta > 0:
            raise InvalidArgumentsError("UCB1 needs zeta > 0")

    @property
    def resolved_schedule(self) -> str:
        if self.schedule != "auto":
            return self.schedule
        base = "k1" if self.k == 1 else "general"
        return base + "_shard" if self.S is not None else base

    def m_for(self, T: int) -> int:
        s = self.resolved_schedule
        if s == "k1":
            return m_schedule_k1(T, self.alpha)
        if s == "k1_shard":
            return m_schedule_k1_shard(T, self.alpha, self.S)
        if s == "general":
            return m_schedule_general(T, self.alpha, self.k, self.d)
        return m_schedule_general_shard(T, self.alpha, self.k, self.d, self.S)

    def resolve_family(self) -> PartitionFamily:
        if self.family is None:
            if self.k == 1:
                self.family = trivial_family(self.d)
            else:
                self.family = build_random_family(self.d, self.k, self.family_m, seed=self.family_seed)
        return self.family

    def to_dict(self) -> dict:
        doc = {
            "d": self.d,
            "k": self.k,
            "alpha": self.alpha,
            "engine": self.engine.value,
            "zeta": self.zeta,
            "S": self.S,
            "schedule": self.schedule,
            "arm_cap": self.arm_cap,
            "family_seed": self.family_seed,
            "family_m": self.family_m,
            "horizon": self.horizon,
        }
        return doc

    @classmethod
    def from_dict(cls, doc: dict, family: PartitionFamily | None = None) -> "CabConfig":
        known = {
            "d", "k", "alpha", "engine", "zeta", "S", "schedule",
            "arm_cap", "family_seed", "family_m", "horizon",
        }
        unknown = set(doc) - known - {"family_file"}
        if unknown:
            raise InvalidArgumentsError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in doc.items() if k in known}, family=family)


class Epoch(NamedTuple):
    T: int
    length: int
    M: int


def epoch_plan(config: CabConfig, n: int) -> list[Epoch]:
    """Doubling epochs covering exactly n rounds, with their M values."""
    if n < 1:
        raise InvalidArgumentsError("need at least one round")
    plan = []
    T = 1
    while T <= n:
        plan.append(Epoch(T, min(2 * T - 1, n) - T + 1, config.m_for(T)))
        T *= 2
    return plan


def fingerprint(config: CabConfig, env: Environment) -> str:
    fam = config.resolve_family()
    payload = {
        "cab": config.to_dict(),
        "family": hashlib.sha256(json.dumps(fam.to_dict(), sort_keys=True).encode()).hexdigest(),
        "environment": env.to_dict(),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def run_cab(config: CabConfig, env: Environment, n: int, seed: int = 0) -> RegretTrace:
    """Play n rounds of CAB(d, k) against ``env``; ``seed`` drives the engines."""
    if env.d != config.d:
        raise InvalidArgumentsError(f"environment dimension {env.d} != configured d={config.d}")
    if env.k > config.k:
        raise InvalidArgumentsError(f"environment has {env.k} active coordinates, configured k={config.k}")
    family = config.resolve_family()
    plan = epoch_plan(config, n)

    epoch_col = np.empty(n, dtype=np.int64)
    m_col = np.empty(n, dtype=np.int64)
    arms = np.empty(n, dtype=np.int64)
    rewards = np.empty(n)
    regrets = np.empty(n)
    clip = config.engine.adversarial

    for e, (T, length, M) in enumerate(plan):
        grid = StrategyGrid(family, M)
        if grid.num_strategies > config.arm_cap:
            raise ArmCapExceededError(
                f"epoch T={T} needs M={M}, i.e. {grid.num_strategies} arms, above the cap {config.arm_cap}",
                T=T,
                M=M,
                arms=grid.num_strategies,
            )
        pts = grid.points(config.arm_cap)
        points = pts.tolist() if pts.size <= 5_000_000 else pts
        engine = engine_new(config.engine, grid.num_strategies, T, derive_seed(seed, e), zeta=config.zeta)
        select, update, step = engine.select, engine.update, env.step
        lo = T - 1
        epoch_col[lo : lo + length] = T
        m_col[lo : lo + length] = M
        for t in range(T, T + length):
            arm = select()
            r, inst = step(t, points[arm])
            if clip:
                update(arm, 0.0 if r < 0.0 else 1.0 if r > 1.0 else r)
            else:
                update(arm, r)
            arms[t - 1] = arm
            rewards[t - 1] = r
            regrets[t - 1] = inst

    return RegretTrace(
        epoch_T=epoch_col,
        M=m_col,
        arm=arms,
        reward=rewards,
        inst_regret=regrets,
        fingerprint=fingerprint(config, env),
        seeds={"algorithm": int(seed), "environment": int(getattr(env, "seed", 0))},
    )
