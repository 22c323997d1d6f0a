"""Families of k-block partitions of {0, ..., d-1} (perfect hash families).

Coordinates are 0-based throughout. A family satisfies the partition
assumption when every k-tuple of distinct coordinates is split by at least one
member partition, one coordinate per block.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceededError, InvalidArgumentsError
from .rng import make_rng

EXHAUSTIVE_CAP = 10**6
_CHUNK = 50_000


def _check_dims(d: int, k: int) -> None:
    if k < 1 or d < 1 or k > d:
        raise InvalidArgumentsError(f"need 1 <= k <= d, got d={d}, k={k}")


@dataclass(frozen=True)
class Partition:
    """Ordered k blocks covering {0..d-1}; blocks may be empty."""

    d: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise InvalidArgumentsError("a partition needs at least one block")
        seen = [i for b in blocks for i in b]
        if len(seen) != len(set(seen)):
            raise InvalidArgumentsError("blocks are not pairwise disjoint")
        if set(seen) != set(range(self.d)):
            raise InvalidArgumentsError(f"blocks do not cover 0..{self.d - 1}")

    @classmethod
    def from_labels(cls, labels: Sequence[int], k: int) -> "Partition":
        """Build from a per-coordinate block label vector."""
        blocks: list[list[int]] = [[] for _ in range(k)]
        for i, lab in enumerate(labels):
            if not 0 <= lab < k:
                raise InvalidArgumentsError(f"label {lab} outside 0..{k - 1}")
            blocks[int(lab)].append(i)
        return cls(len(labels), tuple(tuple(b) for b in blocks))

    @property
    def k(self) -> int:
        return len(self.blocks)

    @cached_property
    def labels(self) -> np.ndarray:
        """``labels[i]`` is the block holding coordinate i."""
        out = np.empty(self.d, dtype=np.int64)
        for j, b in enumerate(self.blocks):
            out[list(b)] = j
        out.flags.writeable = False
        return out

    def block_of(self, i: int) -> int:
        return int(self.labels[i])


@dataclass(frozen=True)
class PartitionFamily:
    d: int
    k: int
    partitions: tuple[Partition, ...]
    seed: int | None = None
    m: int = field(default=-1)

    def __post_init__(self):
        _check_dims(self.d, self.k)
        object.__setattr__(self, "partitions", tuple(self.partitions))
        if self.m == -1:
            object.__setattr__(self, "m", len(self.partitions))
        if self.m < 1 or len(self.partitions) != self.m:
            raise InvalidArgumentsError(
                f"family holds {len(self.partitions)} partitions, expected m={self.m} >= 1"
            )
        for p in self.partitions:
            if p.d != self.d or p.k != self.k:
                raise InvalidArgumentsError("member partition has mismatched (d, k)")

    def __len__(self) -> int:
        return len(self.partitions)

    def __getitem__(self, j: int) -> Partition:
        return self.partitions[j]

    @cached_property
    def labels(self) -> np.ndarray:
        """(m, d) matrix of block labels."""
        out = np.stack([p.labels for p in self.partitions])
        out.flags.writeable = False
        return out

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "k": self.k,
            "seed": self.seed,
            "partitions": [[list(b) for b in p.blocks] for p in self.partitions],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PartitionFamily":
        d, k = int(doc["d"]), int(doc["k"])
        parts = tuple(Partition(d, tuple(tuple(b) for b in blocks)) for blocks in doc["partitions"])
        return cls(d, k, parts, doc.get("seed"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "PartitionFamily":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class VerificationReport:
    mode: str
    tuples_checked: int
    failures: list[tuple[int, ...]]

    @property
    def satisfied(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "tuples_checked": self.tuples_checked,
            "satisfied": self.satisfied,
            "failures": [list(f) for f in self.failures],
        }


def min_family_size(d: int, k: int) -> int:
    """Family size ceil(2 k e^k ln d) that meets the partition assumption w.p. >= 1 - d^-k."""
    _check_dims(d, k)
    return max(1, math.ceil(2 * k * math.exp(k) * math.log(d)))


def random_partition(d: int, k: int, rng: np.random.Generator) -> Partition:
    """Each coordinate goes to one of the k blocks uniformly and independently."""
    _check_dims(d, k)
    return Partition.from_labels(rng.integers(0, k, size=d), k)


def trivial_family(d: int) -> PartitionFamily:
    """The single one-block partition; its grid is the diagonal of [0,1]^d."""
    return PartitionFamily(d, 1, (Partition(d, (tuple(range(d)),)),), seed=None)


def build_random_family(d: int, k: int, m: int | None = None, seed: int = 0) -> PartitionFamily:
    _check_dims(d, k)
    if m is None:
        m = min_family_size(d, k)
    if m < 1:
        raise InvalidArgumentsError(f"m must be positive, got {m}")
    rng = make_rng(seed)
    labels = rng.integers(0, k, size=(m, d))
    parts = tuple(Partition.from_labels(row, k) for row in labels)
    return PartitionFamily(d, k, parts, seed=seed)


def _check_tuple(d: int, k: int, tup: Sequence[int]) -> tuple[int, ...]:
    tup = tuple(int(i) for i in tup)
    if len(tup) != k:
        raise InvalidArgumentsError(f"expected a {k}-tuple, got {tup}")
    if len(set(tup)) != k:
        raise InvalidArgumentsError(f"tuple has duplicate indices: {tup}")
    if any(i < 0 or i >= d for i in tup):
        raise InvalidArgumentsError(f"tuple index out of range 0..{d - 1}: {tup}")
    return tup


def separates(partition: Partition, tup: Sequence[int]) -> bool:
    """True iff every block holds exactly one entry of ``tup``."""
    tup = _check_tuple(partition.d, partition.k, tup)
    return len({partition.block_of(i) for i in tup}) == partition.k


def find_separating(family: PartitionFamily, tup: Sequence[int]) -> int | None:
    """Lowest index of a member partition separating ``tup``, or None."""
    tup = _check_tuple(family.d, family.k, tup)
    hits = np.flatnonzero(_separated_mask(family.labels, np.asarray([tup]), family.k)[:, 0])
    return int(hits[0]) if hits.size else None


def _separated_mask(labels: np.ndarray, tuples: np.ndarray, k: int) -> np.ndarray:
    """(m, N) mask: partition p separates tuple n."""
    full = (1 << k) - 1
    bits = np.left_shift(1, labels[:, tuples])  # (m, N, k)
    return np.bitwise_or.reduce(bits, axis=2) == full


def _unseparated(family: PartitionFamily, tuples: np.ndarray) -> list[tuple[int, ...]]:
    if tuples.size == 0:
        return []
    ok = _separated_mask(family.labels, tuples, family.k).any(axis=0)
    return [tuple(int(i) for i in row) for row in tuples[~ok]]


def _chunks(it: Iterable[tuple[int, ...]], k: int) -> Iterable[np.ndarray]:
    it = iter(it)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64).reshape(-1, k)


def verify_partition_assumption(
    family: PartitionFamily,
    *,
    sample: int | None = None,
    seed: int = 0,
    cap: int = EXHAUSTIVE_CAP,
) -> VerificationReport:
    """Check the partition assumption.

    With ``sample=None`` all C(d, k) tuples are enumerated (refused above
    ``cap``); otherwise ``sample`` uniformly random distinct-index tuples are
    drawn from ``seed``.
    """
    d, k = family.d, family.k
    failures: list[tuple[int, ...]] = []
    if sample is None:
        total = math.comb(d, k)
        if total > cap:
            raise BudgetExceededError(f"C({d},{k}) = {total} tuples exceeds the exhaustive cap {cap}")
        for chunk in _chunks(itertools.combinations(range(d), k), k):
            failures.extend(_unseparated(family, chunk))
        return VerificationReport("exhaustive", total, failures)

    if sample < 0:
        raise InvalidArgumentsError("sample size must be non-negative")
    rng = make_rng(seed)
    done = 0
    while done < sample:
        n = min(_CHUNK, sample - done)
        tuples = np.stack([rng.choice(d, size=k, replace=False) for _ in range(n)])
        failures.extend(_unseparated(family, tuples))
        done += n
    return VerificationReport("sampled", sample, failures)
