"""The discrete strategy set built from a partition family and a resolution M.

A strategy picks a partition and one grid level alpha_j in {1..M} per block;
every coordinate in block j takes the value alpha_j / M. Arms are numbered
lexicographically (partition index major, alphas minor).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    ArmCapExceededError,
    InvalidArgumentsError,
    NoSeparatingPartitionError,
    StrategyOverflowError,
)
from .partition_family import PartitionFamily, find_separating

ARM_CAP = 10**6
_SAFE_INT = 2**63 - 1


class StrategyId(NamedTuple):
    partition_index: int
    alphas: tuple[int, ...]


@dataclass(frozen=True)
class StrategyGrid:
    family: PartitionFamily
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise InvalidArgumentsError(f"grid resolution M must be >= 1, got {self.M}")

    @property
    def d(self) -> int:
        return self.family.d

    @property
    def k(self) -> int:
        return self.family.k

    @cached_property
    def num_strategies(self) -> int:
        n = self.M**self.k * len(self.family)
        if n > _SAFE_INT:
            raise StrategyOverflowError(f"M^k |A| = {n} exceeds the 64-bit index range")
        return n

    def __len__(self) -> int:
        return self.num_strategies

    def _check_id(self, sid: StrategyId) -> None:
        p, alphas = sid
        if not 0 <= p < len(self.family):
            raise IndexError(f"partition index {p} out of range [0, {len(self.family)})")
        if len(alphas) != self.k or any(not 1 <= a <= self.M for a in alphas):
            raise IndexError(f"alphas {alphas} invalid for k={self.k}, M={self.M}")

    def materialize(self, sid: StrategyId) -> np.ndarray:
        """The point in [0,1]^d named by ``sid``."""
        self._check_id(sid)
        labels = self.family.labels[sid.partition_index]
        return np.asarray(sid.alphas, dtype=float)[labels] / self.M

    def id_of(self, arm: int) -> StrategyId:
        per = self.M**self.k
        if not 0 <= arm < self.num_strategies:
            raise IndexError(f"arm {arm} out of range [0, {self.num_strategies})")
        p, rest = divmod(arm, per)
        alphas = []
        for _ in range(self.k):
            rest, a = divmod(rest, self.M)
            alphas.append(a + 1)
        return StrategyId(p, tuple(reversed(alphas)))

    def arm_of(self, sid: StrategyId) -> int:
        self._check_id(sid)
        idx = 0
        for a in sid.alphas:
            idx = idx * self.M + (a - 1)
        return sid.partition_index * self.M**self.k + idx

    def enumerate_ids(self, arm_cap: int = ARM_CAP) -> Iterator[StrategyId]:
        self._cap(arm_cap)
        levels = range(1, self.M + 1)
        for p in range(len(self.family)):
            for alphas in itertools.product(levels, repeat=self.k):
                yield StrategyId(p, alphas)

    def points(self, arm_cap: int = ARM_CAP) -> np.ndarray:
        """(num_strategies, d) matrix; row i is arm i materialized."""
        self._cap(arm_cap)
        combos = np.array(list(itertools.product(range(1, self.M + 1), repeat=self.k)), dtype=float)
        combos /= self.M
        blocks = [combos[:, labels] for labels in self.family.labels]
        return np.concatenate(blocks, axis=0)

    def project(self, tup: Sequence[int], targets: Sequence[float]) -> StrategyId:
        """Strategy whose coordinates ``tup`` are within 1/M of ``targets``.

        Uses the lowest-index separating partition and rounds each target to
        the nearest level in {1/M, ..., 1} (halves away from zero).
        """
        if len(targets) != self.k:
            raise InvalidArgumentsError(f"expected {self.k} targets")
        p = find_separating(self.family, tup)
        if p is None:
            raise NoSeparatingPartitionError(f"no partition in the family separates {tuple(tup)}")
        labels = self.family.labels[p]
        alphas = [0] * self.k
        for i, x in zip(tup, targets):
            if not 0.0 <= x <= 1.0:
                raise InvalidArgumentsError(f"target {x} outside [0, 1]")
            alphas[int(labels[i])] = min(self.M, max(1, math.floor(x * self.M + 0.5)))
        return StrategyId(p, tuple(alphas))

    def _cap(self, arm_cap: int) -> None:
        if self.num_strategies > arm_cap:
            raise ArmCapExceededError(
                f"grid has {self.num_strategies} arms, above the cap {arm_cap}",
                M=self.M,
                arms=self.num_strategies,
            )


def num_strategies(grid: StrategyGrid) -> int:
    return grid.num_strategies


def materialize(grid: StrategyGrid, sid: StrategyId) -> np.ndarray:
    return grid.materialize(sid)


def project(grid: StrategyGrid, tup: Sequence[int], targets: Sequence[float]) -> StrategyId:
    return grid.project(tup, targets)


def enumerate_ids(grid: StrategyGrid, arm_cap: int = ARM_CAP) -> Iterator[StrategyId]:
    return grid.enumerate_ids(arm_cap)
