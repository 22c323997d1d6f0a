"""Reward environments over [0,1]^d whose rewards depend on k active coordinates.

Rounds are 1-based. Every source of environment randomness is a pure function
of ``(seed, t)``: per-round draws come from fixed-size chunks, each generated
from its own child stream, so replaying the same queries gives the same
rewards no matter how the player behaves (the adversary is oblivious).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import HorizonExceededError, InvalidArgumentsError, OracleUnsupportedError
from .rng import derive_seed, make_rng

_CHUNK = 1 << 14
# brute-force oracle resolution per k
ORACLE_RESOLUTION = {1: 1000, 2: 200, 3: 60}

# stream tags for child generators
_NOISE, _COORD, _TUPLE, _COIN, _PARTITION, _DRIFT, _PEAK = range(7)


# ---------------------------------------------------------------------------
# Hölder test functions


@dataclass(frozen=True)
class HolderFunction:
    """A mean-reward function g: [0,1]^k -> R.

    ``cone``: height - ||u - peak||^alpha clipped at 0 (one peak).
    ``multipeak``: pointwise max of cones, one per (peak, height).
    ``table``: multilinear interpolation of ``table`` values on a regular grid.
    Cones are Hölder with constant L = 1 for any alpha in (0, 1].
    """

    kind: str
    k: int
    alpha: float = 1.0
    L: float = 1.0
    delta: float = math.inf
    peaks: tuple[tuple[float, ...], ...] = ()
    heights: tuple[float, ...] = ()
    table: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("cone", "multipeak", "table"):
            raise InvalidArgumentsError(f"unknown function kind {self.kind!r}")
        if not 0 < self.alpha <= 1:
            raise InvalidArgumentsError(f"Hölder exponent must lie in (0, 1], got {self.alpha}")
        if self.kind == "table":
            if self.table is None:
                raise InvalidArgumentsError("table function needs values")
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != self.k or min(tab.shape) < 2:
                raise InvalidArgumentsError("table must be a k-dimensional array with >= 2 points per axis")
            object.__setattr__(self, "table", tab)
            object.__setattr__(self, "alpha", 1.0)
            object.__setattr__(self, "L", _table_lipschitz(tab))
            return
        peaks = tuple(tuple(float(c) for c in p) for p in self.peaks)
        heights = tuple(float(h) for h in self.heights) or (1.0,) * len(peaks)
        if not peaks or len(heights) != len(peaks):
            raise InvalidArgumentsError("need one height per peak and at least one peak")
        if self.kind == "cone" and len(peaks) != 1:
            raise InvalidArgumentsError("a cone has exactly one peak; use multipeak")
        if any(len(p) != self.k or not all(0 <= c <= 1 for c in p) for p in peaks):
            raise InvalidArgumentsError(f"peaks must be points of [0,1]^{self.k}")
        object.__setattr__(self, "peaks", peaks)
        object.__setattr__(self, "heights", heights)

    @classmethod
    def cone(cls, peak: Sequence[float], alpha: float = 1.0, height: float = 1.0) -> "HolderFunction":
        return cls("cone", len(peak), alpha, 1.0, math.inf, (tuple(peak),), (height,))

    @classmethod
    def multipeak(
        cls, peaks: Sequence[Sequence[float]], heights: Sequence[float], alpha: float = 1.0
    ) -> "HolderFunction":
        return cls("multipeak", len(peaks[0]), alpha, 1.0, math.inf, tuple(map(tuple, peaks)), tuple(heights))

    def with_peaks(self, peaks: Sequence[Sequence[float]]) -> "HolderFunction":
        return HolderFunction(self.kind, self.k, self.alpha, self.L, self.delta, tuple(map(tuple, peaks)), self.heights)

    def __call__(self, u: Sequence[float]) -> float:
        if self.kind == "table":
            return float(self.many(np.asarray(u, dtype=float)[None, :])[0])
        best = 0.0
        a = self.alpha
        for peak, h in zip(self.peaks, self.heights):
            dist = math.sqrt(sum((x - c) * (x - c) for x, c in zip(u, peak)))
            v = h - dist**a
            if v > best:
                best = v
        return best

    def many(self, U: np.ndarray) -> np.ndarray:
        """Evaluate on each row of the (N, k) array ``U``."""
        U = np.asarray(U, dtype=float)
        if self.kind == "table":
            return _multilinear(self.table, U)
        out = np.zeros(len(U))
        for peak, h in zip(self.peaks, self.heights):
            dist = np.linalg.norm(U - np.asarray(peak), axis=1)
            np.maximum(out, h - dist**self.alpha, out=out)
        return out

    def closed_form_max(self) -> float | None:
        if self.kind == "table":
            return None
        return max(0.0, max(self.heights))

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "k": self.k, "alpha": self.alpha, "L": self.L}
        if math.isfinite(self.delta):
            doc["delta"] = self.delta
        if self.kind == "table":
            doc["table"] = self.table.tolist()
        else:
            doc["peaks"] = [list(p) for p in self.peaks]
            doc["heights"] = list(self.heights)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "HolderFunction":
        kind = doc.get("kind", "cone")
        delta = float(doc.get("delta", math.inf))
        if kind == "table":
            tab = np.asarray(doc["table"], dtype=float)
            return cls("table", tab.ndim, 1.0, 1.0, delta, table=tab)
        peaks = tuple(tuple(p) for p in doc["peaks"])
        return cls(
            kind,
            int(doc.get("k", len(peaks[0]))),
            float(doc.get("alpha", 1.0)),
            float(doc.get("L", 1.0)),
            delta,
            peaks,
            tuple(doc.get("heights", ())),
        )


def _table_lipschitz(tab: np.ndarray) -> float:
    # gradient of a multilinear cell is bounded per axis by the max difference quotient
    worst = 0.0
    for axis in range(tab.ndim):
        step = 1.0 / (tab.shape[axis] - 1)
        worst = max(worst, float(np.abs(np.diff(tab, axis=axis)).max()) / step)
    return math.sqrt(tab.ndim) * worst


def _multilinear(tab: np.ndarray, U: np.ndarray) -> np.ndarray:
    k = tab.ndim
    sizes = np.asarray(tab.shape) - 1
    pos = np.clip(U, 0.0, 1.0) * sizes
    lo = np.minimum(np.floor(pos).astype(np.int64), sizes - 1)
    frac = pos - lo
    out = np.zeros(len(U))
    for corner in itertools.product((0, 1), repeat=k):
        c = np.asarray(corner)
        w = np.prod(np.where(c == 1, frac, 1.0 - frac), axis=1)
        out += w * tab[tuple((lo + c).T)]
    return out


def grid_optimum(g: HolderFunction) -> tuple[float, np.ndarray]:
    """Brute-force maximum of g over [0,1]^k, refined by coordinate ternary search.

    Resolution is 1/1000, 1/200, 1/60 for k = 1, 2, 3. Returns (value, argmax).
    """
    if g.k not in ORACLE_RESOLUTION:
        raise OracleUnsupportedError(f"grid oracle supports k <= 3, got k={g.k}; supply a closed-form optimum")
    res = ORACLE_RESOLUTION[g.k]
    axis = np.linspace(0.0, 1.0, res + 1)
    U = np.stack(np.meshgrid(*([axis] * g.k), indexing="ij"), axis=-1).reshape(-1, g.k)
    vals = g.many(U)
    best = U[int(np.argmax(vals))].copy()
    best_val = float(vals.max())
    for j in range(g.k):
        lo, hi = max(0.0, best[j] - 1.0 / res), min(1.0, best[j] + 1.0 / res)
        probe = best.copy()

        def f(x):
            probe[j] = x
            return g(probe)

        for _ in range(100):
            m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
            if f(m1) < f(m2):
                lo = m1
            else:
                hi = m2
        x = 0.5 * (lo + hi)
        if f(x) > best_val:
            best[j] = x
            best_val = g(best)
    return best_val, best


# ---------------------------------------------------------------------------
# per-round random streams


class _ChunkedStream:
    """Per-round draws of fixed shape, a pure function of (seed, tag, t)."""

    def __init__(self, seed: int, tag: int, draw):
        self.seed = seed
        self.tag = tag
        self._draw = draw
        self._chunks: dict[int, np.ndarray] = {}

    def __getitem__(self, t: int):
        c, r = divmod(t - 1, _CHUNK)
        chunk = self._chunks.get(c)
        if chunk is None:
            if len(self._chunks) > 64:
                self._chunks.clear()
            chunk = self._chunks[c] = self._draw(make_rng(self.seed, self.tag, c), _CHUNK)
        return chunk[r]


def _random_tuple(d: int, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(i) for i in rng.choice(d, size=k, replace=False))


def make_shard_sequence(d: int, k: int, S: int, n: int, seed: int) -> np.ndarray:
    """(n, k) array of active tuples with exactly S - 1 change points.

    Change points are uniform among rounds 2..n and adjacent segments always
    use different (ordered) tuples, so the hardness is exactly S.
    """
    if not 1 <= k <= d or n < 1 or not 1 <= S <= n:
        raise InvalidArgumentsError(f"need 1 <= k <= d and 1 <= S <= n, got d={d} k={k} S={S} n={n}")
    if S > 1 and math.perm(d, k) < 2:
        raise InvalidArgumentsError("only one distinct tuple exists; cannot switch")
    rng = make_rng(seed)
    cuts = np.sort(rng.choice(np.arange(1, n), size=S - 1, replace=False)) if S > 1 else np.array([], int)
    bounds = [0, *cuts.tolist(), n]
    out = np.empty((n, k), dtype=np.int64)
    prev = None
    for a, b in zip(bounds, bounds[1:]):
        tup = _random_tuple(d, k, rng)
        while tup == prev:
            tup = _random_tuple(d, k, rng)
        out[a:b] = tup
        prev = tup
    return out


# ---------------------------------------------------------------------------
# environments


class Environment:
    """Common surface of all environments.

    ``step`` plays one round and returns (reward, instantaneous regret); the
    regret reference is the expected reward for stochastic models and the
    realized per-round optimum for adversarial ones.
    """

    d: int
    k: int
    model: str
    horizon: int | None = None

    def eval_mean(self, point: Sequence[float], t: int = 1) -> float:
        raise NotImplementedError

    def sample_reward(self, t: int, point: Sequence[float]) -> float:
        raise NotImplementedError

    def optimal_value(self, t: int = 1) -> float:
        raise NotImplementedError

    def step(self, t: int, point: Sequence[float]) -> tuple[float, float]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_point(self, point) -> None:
        if len(point) != self.d:
            raise InvalidArgumentsError(f"point has dimension {len(point)}, environment expects {self.d}")

    def _check_round(self, t: int) -> None:
        if t < 1:
            raise InvalidArgumentsError(f"rounds start at 1, got {t}")
        if self.horizon is not None and t > self.horizon:
            raise HorizonExceededError(f"round {t} beyond the pre-generated horizon {self.horizon}")


class StochasticEnv(Environment):
    """Mean function g on a hidden tuple plus N(0, zeta^2) noise.

    With ``random_coordinate=True`` (k = 1 only) the active coordinate is
    redrawn every round from ``coord_probs`` (uniform by default).
    """

    model = "stochastic"

    def __init__(
        self,
        g: HolderFunction,
        d: int,
        *,
        zeta: float = 0.1,
        tup: Sequence[int] | None = None,
        seed: int = 0,
        random_coordinate: bool = False,
        coord_probs: Sequence[float] | None = None,
    ):
        if zeta < 0:
            raise InvalidArgumentsError("noise scale must be non-negative")
        self.g, self.d, self.k, self.zeta, self.seed = g, d, g.k, float(zeta), seed
        if not 1 <= self.k <= d:
            raise InvalidArgumentsError(f"need 1 <= k <= d, got k={self.k}, d={d}")
        self.random_coordinate = random_coordinate
        if random_coordinate:
            if self.k != 1:
                raise InvalidArgumentsError("random-coordinate mode requires k = 1")
            probs = np.full(d, 1.0 / d) if coord_probs is None else np.asarray(coord_probs, float)
            if probs.shape != (d,) or (probs < 0).any() or not math.isclose(probs.sum(), 1.0):
                raise InvalidArgumentsError("coord_probs must be a distribution over the d coordinates")
            self.coord_probs = probs
            cdf = np.cumsum(probs)
            self._coords = _ChunkedStream(
                seed, _COORD, lambda rng, n: np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), d - 1)
            )
            self.tup = None
        else:
            self.tup = tuple(int(i) for i in tup) if tup is not None else _random_tuple(d, self.k, make_rng(seed, _TUPLE))
            if len(self.tup) != self.k or len(set(self.tup)) != self.k or not all(0 <= i < d for i in self.tup):
                raise InvalidArgumentsError(f"invalid active tuple {self.tup} for d={d}, k={self.k}")
        self._noise = _ChunkedStream(seed, _NOISE, lambda rng, n: rng.standard_normal(n))
        self._opt: float | None = None

    def eval_mean(self, point, t: int = 1) -> float:
        self._check_point(point)
        if self.random_coordinate:
            g = self.g
            return float(sum(p * g((point[i],)) for i, p in enumerate(self.coord_probs) if p))
        return self.g([point[i] for i in self.tup])

    def active_tuple(self, t: int) -> tuple[int, ...]:
        if self.random_coordinate:
            return (int(self._coords[t]),)
        return self.tup

    def sample_reward(self, t: int, point) -> float:
        self._check_round(t)
        u = [point[i] for i in self.active_tuple(t)]
        return self.g(u) + self.zeta * self._noise[t]

    def optimal_value(self, t: int = 1) -> float:
        if self._opt is None:
            closed = self.g.closed_form_max()
            self._opt = closed if closed is not None else grid_optimum(self.g)[0]
        return self._opt

    def step(self, t: int, point) -> tuple[float, float]:
        if self.random_coordinate:
            return self.sample_reward(t, point), self.optimal_value() - self.eval_mean(point)
        self._check_round(t)
        mean = self.g([point[i] for i in self.tup])
        return mean + self.zeta * self._noise[t], self.optimal_value() - mean

    def to_dict(self) -> dict:
        doc = {
            "model": self.model,
            "d": self.d,
            "k": self.k,
            "alpha": self.g.alpha,
            "L": self.g.L,
            "zeta": self.zeta,
            "seed": self.seed,
            "function": self.g.to_dict(),
        }
        if self.random_coordinate:
            doc["random_coordinate"] = True
            doc["coord_probs"] = self.coord_probs.tolist()
        else:
            doc["tuple"] = list(self.tup)
        return doc


class AdversarialEnv(Environment):
    """Oblivious adversary with rewards g_t(x at tuple_t) in [0, 1].

    The whole (g_t, tuple_t) sequence is fixed at construction from ``seed``:

    * fixed tuple, fixed g (``tup`` given or drawn once);
    * ``S``-hard switching tuples with fixed g;
    * ``drift > 0``: cone peaks move as peak + drift * sin(2 pi t / period + phase).
    """

    model = "adversarial"

    def __init__(
        self,
        g: HolderFunction,
        d: int,
        horizon: int,
        *,
        tup: Sequence[int] | None = None,
        S: int | None = None,
        seed: int = 0,
        drift: float = 0.0,
        period: float = 4096.0,
    ):
        if (g.kind == "table" and not 0 <= g.table.min() <= g.table.max() <= 1) or (
            g.kind != "table" and max(g.heights) > 1
        ):
            raise InvalidArgumentsError("adversarial rewards must lie in [0, 1]")
        if drift and g.kind == "table":
            raise InvalidArgumentsError("drifting peaks need a cone or multipeak function")
        self.g, self.d, self.k, self.horizon, self.seed = g, d, g.k, int(horizon), seed
        self.S, self.drift, self.period = S, float(drift), float(period)
        if S is not None:
            if tup is not None:
                raise InvalidArgumentsError("give either a fixed tuple or a switching budget S, not both")
            self.tuples = make_shard_sequence(d, self.k, S, self.horizon, derive_seed(seed, _TUPLE))
        else:
            fixed = tuple(int(i) for i in tup) if tup is not None else _random_tuple(d, self.k, make_rng(seed, _TUPLE))
            if len(fixed) != self.k or len(set(fixed)) != self.k or not all(0 <= i < d for i in fixed):
                raise InvalidArgumentsError(f"invalid active tuple {fixed} for d={d}, k={self.k}")
            self.tuples = np.tile(np.asarray(fixed, dtype=np.int64), (self.horizon, 1))
        self._tuple_rows = [tuple(r) for r in self.tuples.tolist()]
        if self.drift:
            self._phases = make_rng(seed, _DRIFT).uniform(0, 2 * math.pi, size=(len(g.peaks), self.k))
        self._opt: float | None = None

    @property
    def declared_hardness(self) -> int:
        from .engines import hardness

        return hardness(self._tuple_rows)

    def g_at(self, t: int) -> HolderFunction:
        if not self.drift:
            return self.g
        shift = self.drift * np.sin(2 * math.pi * t / self.period + self._phases)
        return self.g.with_peaks(np.clip(np.asarray(self.g.peaks) + shift, 0.0, 1.0))

    def eval_mean(self, point, t: int = 1) -> float:
        self._check_point(point)
        return self.sample_reward(t, point)

    def sample_reward(self, t: int, point) -> float:
        self._check_round(t)
        return self.g_at(t)([point[i] for i in self._tuple_rows[t - 1]])

    def optimal_value(self, t: int = 1) -> float:
        """Per-round maximum of g_t over [0,1]^k."""
        if self._opt is None:
            closed = self.g.closed_form_max()
            self._opt = closed if closed is not None else grid_optimum(self.g)[0]
        return self._opt

    def step(self, t: int, point) -> tuple[float, float]:
        r = self.sample_reward(t, point)
        return r, self.optimal_value(t) - r

    def to_dict(self) -> dict:
        doc = {
            "model": self.model,
            "d": self.d,
            "k": self.k,
            "alpha": self.g.alpha,
            "L": self.g.L,
            "seed": self.seed,
            "function": self.g.to_dict(),
        }
        if self.S is not None:
            doc["shard"] = {"S": self.S, "seed": self.seed}
        else:
            doc["tuple"] = list(self._tuple_rows[0])
        if self.drift:
            doc["drift"] = self.drift
            doc["period"] = self.period
        return doc


def bump_u(x: float) -> float:
    """sin^2(2 pi x) on [0, 1/2], 0 elsewhere; maximum 1 at x = 1/4."""
    return math.sin(2 * math.pi * x) ** 2 if 0.0 <= x <= 0.5 else 0.0


def bump_v(x: float) -> float:
    """sin^2(2 pi (x - 1/2)) on [1/2, 1], 0 elsewhere; maximum 1 at x = 3/4."""
    return math.sin(2 * math.pi * (x - 0.5)) ** 2 if 0.5 <= x <= 1.0 else 0.0


class AdvLowerBoundEnv(Environment):
    """Two-block adversary that holds every diagonal player to reward <= 1/2.

    A hidden ordered 2-partition (A1, A2), both non-empty, is drawn uniformly at
    construction. Each round a fair coin picks the bump on [0, 1/2] (active
    coordinate uniform in A1) or the bump on [1/2, 1] (coordinate uniform in A2).
    The point with 1/4 on A1 and 3/4 on A2 earns 1 every round.
    """

    model = "adv_lower_bound"
    k = 1
    a = 0.25
    b = 0.75

    def __init__(self, d: int, *, seed: int = 0):
        if d < 2:
            raise InvalidArgumentsError("the two-block adversary needs d >= 2")
        self.d, self.seed = d, seed
        rng = make_rng(seed, _PARTITION)
        while True:
            labels = rng.integers(0, 2, size=d)
            if 0 < labels.sum() < d:
                break
        self.A1 = tuple(int(i) for i in np.flatnonzero(labels == 0))
        self.A2 = tuple(int(i) for i in np.flatnonzero(labels == 1))
        self._coin = _ChunkedStream(seed, _COIN, lambda rng, n: rng.random(n) < 0.5)
        self._pick = _ChunkedStream(seed, _COORD, lambda rng, n: rng.random(n))

    def optimal_point(self) -> np.ndarray:
        x = np.empty(self.d)
        x[list(self.A1)] = self.a
        x[list(self.A2)] = self.b
        return x

    def round_draw(self, t: int) -> tuple[bool, int]:
        """(first bump chosen?, active coordinate) for round t."""
        first = bool(self._coin[t])
        block = self.A1 if first else self.A2
        return first, block[min(int(self._pick[t] * len(block)), len(block) - 1)]

    def eval_mean(self, point, t: int = 1) -> float:
        self._check_point(point)
        m1 = sum(bump_u(point[i]) for i in self.A1) / len(self.A1)
        m2 = sum(bump_v(point[i]) for i in self.A2) / len(self.A2)
        return 0.5 * (m1 + m2)

    def sample_reward(self, t: int, point) -> float:
        self._check_round(t)
        first, i = self.round_draw(t)
        return bump_u(point[i]) if first else bump_v(point[i])

    def optimal_value(self, t: int = 1) -> float:
        return 1.0

    def step(self, t: int, point) -> tuple[float, float]:
        r = self.sample_reward(t, point)
        return r, 1.0 - r

    def to_dict(self) -> dict:
        return {"model": self.model, "d": self.d, "k": 1, "seed": self.seed}


def environment_from_dict(doc: dict, horizon: int | None = None, seed: int | None = None) -> Environment:
    """Build an environment from its JSON description.

    ``seed`` overrides the document's seed (sweeps derive one per run).
    """
    model = doc.get("model", "stochastic")
    d = int(doc["d"])
    env_seed = int(doc.get("seed", 0)) if seed is None else seed
    if model == "adv_lower_bound":
        return AdvLowerBoundEnv(d, seed=env_seed)
    fdoc = dict(doc.get("function") or {"kind": "cone"})
    fdoc.setdefault("alpha", doc.get("alpha", 1.0))
    fdoc.setdefault("k", doc.get("k"))
    if "peaks" not in fdoc and fdoc.get("kind", "cone") != "table":
        fdoc["peaks"] = doc.get("peaks") or [[0.5] * int(doc["k"])]
    if fdoc.get("peaks") == "random":
        # one peak per height, uniform in [0.05, 0.95]^k from the environment seed
        count = len(fdoc.get("heights") or [1.0])
        fdoc["peaks"] = make_rng(env_seed, _PEAK).uniform(0.05, 0.95, size=(count, int(fdoc["k"]))).tolist()
    g = HolderFunction.from_dict(fdoc)
    tup = doc.get("tuple")
    if model == "stochastic":
        return StochasticEnv(
            g,
            d,
            zeta=float(doc.get("zeta", 0.1)),
            tup=tup,
            seed=env_seed,
            random_coordinate=bool(doc.get("random_coordinate", False)),
            coord_probs=doc.get("coord_probs"),
        )
    if model == "adversarial":
        if horizon is None:
            raise InvalidArgumentsError("adversarial environments need a horizon")
        shard = doc.get("shard")
        S = None
        if shard is not None:
            S = int(shard["S"])
            if seed is None and "seed" in shard:
                env_seed = int(shard["seed"])
        return AdversarialEnv(
            g,
            d,
            horizon,
            tup=tup,
            S=S,
            seed=env_seed,
            drift=float(doc.get("drift", 0.0)),
            period=float(doc.get("period", 4096.0)),
        )
    raise InvalidArgumentsError(f"unknown environment model {model!r}")
