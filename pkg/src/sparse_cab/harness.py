"""Experiment driver: seed sweeps, log-log slope fits, lower-bound checks.

A run configuration is a JSON-able dict::

    {"name": ..., "cab": {CabConfig fields}, "environment": {environment description}}

Run seed ``s`` fixes the environment seed ``derive_seed(s, 1)`` and the
algorithm seed ``derive_seed(s, 2)``, so ``run`` and ``sweep`` agree.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algorithms import CabConfig, run_cab
from .engines import EngineKind
from .environments import AdvLowerBoundEnv, Environment, environment_from_dict
from .errors import CabError, DegenerateFitError, InvalidArgumentsError
from .partition_family import PartitionFamily, trivial_family
from .rng import derive_seed, make_rng
from .trace import RegretTrace

DEFAULT_CHECKPOINTS = tuple(2**j for j in range(10, 18))
ENV_STREAM, ALG_STREAM = 1, 2


def theory_exponent(alpha: float, k: int) -> float:
    """Regret growth exponent (alpha + k) / (2 alpha + k)."""
    return (alpha + k) / (2 * alpha + k)


def run_seeds(seed: int) -> tuple[int, int]:
    """(environment seed, algorithm seed) for run seed ``seed``."""
    return derive_seed(seed, ENV_STREAM), derive_seed(seed, ALG_STREAM)


def build_run(doc: dict, seed: int, rounds: int) -> tuple[CabConfig, Environment]:
    """Config and environment for one run of the configuration ``doc``."""
    if "cab" not in doc or "environment" not in doc:
        raise InvalidArgumentsError("run configuration needs 'cab' and 'environment' sections")
    cab = dict(doc["cab"])
    family = None
    if cab.get("family_file"):
        family = PartitionFamily.load(cab.pop("family_file"))
    config = CabConfig.from_dict(cab, family=family)
    env_seed, _ = run_seeds(seed)
    env = environment_from_dict(doc["environment"], horizon=rounds, seed=env_seed)
    return config, env


def run_config(doc: dict, seed: int, rounds: int) -> RegretTrace:
    config, env = build_run(doc, seed, rounds)
    return run_cab(config, env, rounds, seed=run_seeds(seed)[1])


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class CellResult:
    config_index: int
    name: str
    seed: int
    checkpoints: list[int]
    regret: list[float] = field(default_factory=list)
    error: dict | None = None
    trace: RegretTrace | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_cell(task) -> CellResult:
    index, doc, seed, rounds, checkpoints, keep = task
    cell = CellResult(index, doc.get("name", f"config{index}"), seed, list(checkpoints))
    try:
        trace = run_config(doc, seed, rounds)
    except CabError as exc:
        cell.error = {"type": type(exc).__name__, "message": str(exc)}
        for attr in ("T", "M", "arms"):
            if getattr(exc, attr, None) is not None:
                cell.error[attr] = getattr(exc, attr)
        return cell
    cell.regret = [trace.regret_at(c) for c in checkpoints]
    if keep:
        cell.trace = trace
    return cell


def run_sweep(
    configs: Sequence[dict],
    seeds: Iterable[int],
    checkpoints: Sequence[int] = DEFAULT_CHECKPOINTS,
    *,
    rounds: int | None = None,
    parallelism: int = 1,
    keep_traces: bool = False,
) -> list[CellResult]:
    """Run every (config, seed) cell; failures become error records.

    Results come back in (config index, seed) order whatever the parallelism.
    """
    seeds = list(seeds)
    if len(set(seeds)) != len(seeds):
        raise InvalidArgumentsError("sweep seeds must be distinct")
    checkpoints = sorted(int(c) for c in checkpoints)
    rounds = rounds if rounds is not None else checkpoints[-1]
    if checkpoints and checkpoints[-1] > rounds:
        raise InvalidArgumentsError(f"checkpoint {checkpoints[-1]} beyond {rounds} rounds")
    tasks = [(i, doc, s, rounds, checkpoints, keep_traces) for i, doc in enumerate(configs) for s in seeds]
    if parallelism > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]
    return sorted(results, key=lambda c: (c.config_index, c.seed))


def mean_regret_at(traces: Sequence[RegretTrace], checkpoints: Sequence[int]) -> np.ndarray:
    """Cumulative regret at each checkpoint, averaged over traces."""
    return np.mean([[tr.regret_at(c) for c in checkpoints] for tr in traces], axis=0)


@dataclass
class SlopeFit:
    checkpoints: list[int]
    mean_regret: list[float]
    slope: float
    intercept: float
    residual: float
    theory_exponent: float | None = None

    @property
    def deviation(self) -> float | None:
        if self.theory_exponent is None:
            return None
        return self.slope - self.theory_exponent

    def to_dict(self) -> dict:
        return {
            "checkpoints": self.checkpoints,
            "mean_regret": self.mean_regret,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "theory_exponent": self.theory_exponent,
            "deviation": self.deviation,
        }


def fit_slope(
    checkpoints: Sequence[int],
    mean_regret: Sequence[float],
    theory: float | None = None,
) -> SlopeFit:
    """Least-squares line through (ln n, ln R(n)); ``residual`` is the RMS misfit."""
    n = np.asarray(checkpoints, dtype=float)
    R = np.asarray(mean_regret, dtype=float)
    if n.shape != R.shape or len(n) < 4:
        raise DegenerateFitError("slope fit needs at least 4 (checkpoint, regret) pairs")
    if np.any(np.diff(n) <= 0):
        raise DegenerateFitError("checkpoints must be strictly increasing")
    if np.any(~(R > 0)):
        raise DegenerateFitError("mean regret must be positive at every checkpoint")
    x, y = np.log(n), np.log(R)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return SlopeFit([int(c) for c in checkpoints], R.tolist(), float(slope), float(intercept), resid, theory)


def fit_traces(traces: Sequence[RegretTrace], checkpoints: Sequence[int], theory: float | None = None) -> SlopeFit:
    return fit_slope(checkpoints, mean_regret_at(traces, checkpoints), theory)


def summarize(configs: Sequence[dict], cells: Sequence[CellResult]) -> list[dict]:
    """One summary per configuration: mean regret, slope and theory exponent."""
    out = []
    for i, doc in enumerate(configs):
        mine = [c for c in cells if c.config_index == i]
        good = [c for c in mine if c.ok]
        cab = doc.get("cab", {})
        theory = theory_exponent(float(cab.get("alpha", 1.0)), int(cab.get("k", 1)))
        entry = {
            "name": doc.get("name", f"config{i}"),
            "config": doc,
            "seeds": [c.seed for c in good],
            "checkpoints": mine[0].checkpoints if mine else [],
            "mean_regret": [],
            "slope": None,
            "intercept": None,
            "residual": None,
            "theory_exponent": theory,
            "failures": [{"seed": c.seed, **c.error} for c in mine if not c.ok],
        }
        if good:
            mean = np.mean([c.regret for c in good], axis=0)
            entry["mean_regret"] = mean.tolist()
            try:
                fit = fit_slope(entry["checkpoints"], mean, theory)
            except DegenerateFitError as exc:
                entry["fit_error"] = str(exc)
            else:
                entry.update(slope=fit.slope, intercept=fit.intercept, residual=fit.residual)
        out.append(entry)
    return out


def cells_to_csv(cells: Sequence[CellResult]) -> str:
    """Long-format checkpoint table: config,seed,n,cum_regret."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("config", "seed", "n", "cum_regret"))
    for c in cells:
        for n, r in zip(c.checkpoints, c.regret):
            w.writerow((c.name, c.seed, n, repr(float(r))))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# reference players and the lower-bound check


def _fixed_trace(env: Environment, points: Iterable[Sequence[float]], n: int, seeds: dict) -> RegretTrace:
    rewards, regrets = np.empty(n), np.empty(n)
    for t, x in zip(range(1, n + 1), points):
        rewards[t - 1], regrets[t - 1] = env.step(t, x)
    zeros = np.zeros(n, dtype=np.int64)
    return RegretTrace(zeros, zeros.copy(), np.full(n, -1, dtype=np.int64), rewards, regrets, seeds=seeds)


def play_fixed_point(env: Environment, point: Sequence[float], n: int) -> RegretTrace:
    """Trace of a player that plays ``point`` every round."""
    x = [float(v) for v in point]
    return _fixed_trace(env, (x for _ in range(n)), n, {"environment": int(getattr(env, "seed", 0))})


def play_uniform(env: Environment, n: int, seed: int) -> RegretTrace:
    """Trace of a player drawing each point uniformly from [0,1]^d."""
    pts = make_rng(seed).random((n, env.d)).tolist()
    return _fixed_trace(env, pts, n, {"algorithm": seed, "environment": int(getattr(env, "seed", 0))})


@dataclass
class LowerBoundReport:
    rounds: int
    runs: int
    mean_per_round_regret: float
    bound: float = 0.5

    @property
    def margin(self) -> float:
        return self.mean_per_round_regret - self.bound

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "runs": self.runs,
            "mean_per_round_regret": self.mean_per_round_regret,
            "bound": self.bound,
            "margin": self.margin,
        }


def compare_lower_bound(traces: RegretTrace | Sequence[RegretTrace]) -> LowerBoundReport:
    """Mean per-round regret against the T/2 line."""
    if isinstance(traces, RegretTrace):
        traces = [traces]
    per_round = [tr.cum_regret[-1] / tr.rounds for tr in traces]
    return LowerBoundReport(traces[0].rounds, len(traces), float(np.mean(per_round)))


def lower_bound_experiment(d: int, rounds: int, seeds: Sequence[int]) -> dict:
    """Exp3 on the diagonal grid versus the two-block adversary, plus the mixed-point oracle."""
    diagonal, oracle = [], []
    for s in seeds:
        env_seed, alg_seed = run_seeds(s)
        env = AdvLowerBoundEnv(d, seed=env_seed)
        config = CabConfig(d=d, k=1, engine=EngineKind.EXP3, family=trivial_family(d))
        diagonal.append(run_cab(config, env, rounds, seed=alg_seed))
        oracle.append(play_fixed_point(env, env.optimal_point(), rounds))
    return {
        "d": d,
        "seeds": list(seeds),
        "diagonal": compare_lower_bound(diagonal).to_dict(),
        "oracle": compare_lower_bound(oracle).to_dict(),
    }


def parse_seed_range(text: str) -> list[int]:
    """``"a..b"`` (inclusive) or a comma-separated list."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise InvalidArgumentsError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(s) for s in text.split(",") if s.strip()]

