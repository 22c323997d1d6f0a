import math

import numpy as np
import pytest

from sparse_cab.algorithms import (
    CabConfig,
    epoch_plan,
    m_schedule_general,
    m_schedule_general_shard,
    m_schedule_k1,
    m_schedule_k1_shard,
    run_cab,
)
from sparse_cab.environments import AdversarialEnv, HolderFunction, StochasticEnv
from sparse_cab.errors import ArmCapExceededError, InvalidArgumentsError
from sparse_cab.partition_family import build_random_family


def test_k1_schedule_examples():
    assert m_schedule_k1(16, 1.0) == 2
    assert m_schedule_k1(1024, 1.0) == 6
    assert m_schedule_k1(1, 0.3) == 1
    assert m_schedule_k1_shard(1024, 1.0, 4) == 4
    assert m_schedule_k1_shard(2, 1.0, 100) == 1


def test_general_schedule_examples():
    # base = 0.5 e^-1 (ln 20)^-1/2 sqrt(4096 / ln 4096) = 2.359, and M = ceil(base^(1/2))
    base = 0.5 * math.exp(-1) / math.sqrt(math.log(20)) * math.sqrt(4096 / math.log(4096))
    assert base == pytest.approx(2.359, abs=1e-3)
    assert m_schedule_general(4096, 1.0, 2, 20) == 2
    assert m_schedule_general_shard(4096, 1.0, 2, 20, 4) == 2
    assert m_schedule_general_shard(4096, 1.0, 2, 20, 1) == m_schedule_general(4096, 1.0, 2, 20)
    assert m_schedule_general_shard(4096, 1.0, 2, 20, 10**9) == 1
    assert m_schedule_general(4, 1.0, 1, 7) == 1
    with pytest.raises(InvalidArgumentsError):
        m_schedule_general(100, 1.0, 1, 1)


def test_schedules_non_decreasing_in_T():
    for alpha in (0.25, 0.5, 1.0):
        ms = [m_schedule_k1(2**j, alpha) for j in range(25)]
        assert ms == sorted(ms)
        gs = [m_schedule_general(2**j, alpha, 3, 30) for j in range(25)]
        assert gs == sorted(gs)


def test_epoch_plan_lengths():
    cfg = CabConfig(d=3, k=1)
    assert [e.length for e in epoch_plan(cfg, 10)] == [1, 2, 4, 3]
    assert [e.T for e in epoch_plan(cfg, 10)] == [1, 2, 4, 8]
    assert [e.length for e in epoch_plan(cfg, 1)] == [1]
    assert sum(e.length for e in epoch_plan(cfg, 1000)) == 1000


def test_config_validation():
    with pytest.raises(InvalidArgumentsError):
        CabConfig(d=3, k=4)
    with pytest.raises(InvalidArgumentsError):
        CabConfig(d=3, k=1, alpha=1.5)
    with pytest.raises(InvalidArgumentsError):
        CabConfig(d=3, k=1, schedule="k1_shard")
    with pytest.raises(InvalidArgumentsError):
        CabConfig.from_dict({"d": 3, "k": 1, "bogus": 1})
    assert CabConfig(d=5, k=2, S=3).resolved_schedule == "general_shard"
    assert CabConfig(d=5, k=1).resolved_schedule == "k1"


def _cone_env(d=5, k=1, seed=0, zeta=0.1):
    return StochasticEnv(HolderFunction.cone((0.3,) * k), d, zeta=zeta, seed=seed)


def test_single_round_run():
    trace = run_cab(CabConfig(d=5, k=1, engine="ucb1"), _cone_env(), 1, seed=0)
    assert trace.rounds == 1 and list(trace.epoch_T) == [1]


def test_trace_columns_follow_schedule():
    cfg = CabConfig(d=5, k=1, engine="ucb1")
    trace = run_cab(cfg, _cone_env(), 300, seed=4)
    assert trace.rounds == 300
    for e in epoch_plan(cfg, 300):
        rows = slice(e.T - 1, e.T - 1 + e.length)
        assert np.all(trace.epoch_T[rows] == e.T) and np.all(trace.M[rows] == e.M)
        assert np.all(trace.arm[rows] < e.M)
    assert np.allclose(trace.cum_regret, np.cumsum(trace.inst_regret))
    assert np.all(trace.inst_regret >= -1e-9)


def test_k1_plays_only_diagonal_points():
    env = _cone_env(d=4, zeta=0.0)
    seen = []
    step = env.step
    env.step = lambda t, x: (seen.append(list(x)), step(t, x))[1]
    run_cab(CabConfig(d=4, k=1), env, 200, seed=1)
    assert all(len(set(x)) == 1 for x in seen)


def test_run_is_deterministic():
    cfg = CabConfig(d=6, k=2, engine="exp3", family_m=8)
    env = AdversarialEnv(HolderFunction.cone((0.2, 0.8)), 6, 500, seed=3)
    a = run_cab(cfg, env, 500, seed=11)
    b = run_cab(CabConfig(d=6, k=2, engine="exp3", family_m=8), env, 500, seed=11)
    c = run_cab(cfg, env, 500, seed=12)
    assert a == b and a.fingerprint == b.fingerprint
    assert not np.array_equal(a.arm, c.arm)


def test_explicit_family_is_used():
    fam = build_random_family(6, 2, m=3, seed=9)
    cfg = CabConfig(d=6, k=2, family=fam)
    assert cfg.resolve_family() is fam
    with pytest.raises(InvalidArgumentsError):
        CabConfig(d=7, k=2, family=fam)


def test_arm_cap_reports_epoch():
    cfg = CabConfig(d=20, k=2, arm_cap=200)
    env = StochasticEnv(HolderFunction.cone((0.5, 0.5)), 20, seed=0)
    with pytest.raises(ArmCapExceededError) as info:
        run_cab(cfg, env, 4096, seed=0)
    # M first reaches 2 once T / ln T > (2 e sqrt(ln 20))^2 = 88.5, i.e. at T = 1024
    assert info.value.T == 1024 and info.value.M == 2 and info.value.arms == 4 * 89


def test_dimension_mismatch():
    with pytest.raises(InvalidArgumentsError):
        run_cab(CabConfig(d=4, k=1), _cone_env(d=5), 10)
    with pytest.raises(InvalidArgumentsError):
        run_cab(CabConfig(d=5, k=1), _cone_env(d=5, k=2), 10)
