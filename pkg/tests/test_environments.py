import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_cab.engines import hardness
from sparse_cab.environments import (
    AdversarialEnv,
    AdvLowerBoundEnv,
    HolderFunction,
    StochasticEnv,
    bump_u,
    bump_v,
    environment_from_dict,
    grid_optimum,
    make_shard_sequence,
)
from sparse_cab.errors import HorizonExceededError, InvalidArgumentsError, OracleUnsupportedError
from sparse_cab.rng import make_rng


def test_cone_peak_value():
    g = HolderFunction.cone((0.2, 0.7), alpha=0.5)
    assert g((0.2, 0.7)) == 1.0
    assert g((0.2, 0.7 - 0.09)) == pytest.approx(1 - 0.3)


def test_scalar_and_vector_evaluation_agree():
    g = HolderFunction.multipeak([(0.1, 0.2), (0.8, 0.6)], [0.7, 0.9], alpha=0.6)
    U = make_rng(0).random((500, 2))
    assert np.allclose(g.many(U), [g(u) for u in U], atol=1e-14)


@pytest.mark.parametrize(
    "g",
    [
        HolderFunction.cone((0.4,), alpha=1.0),
        HolderFunction.cone((0.3, 0.6), alpha=0.5),
        HolderFunction.cone((0.1, 0.5, 0.9), alpha=0.25),
        HolderFunction.multipeak([(0.2, 0.2), (0.7, 0.9)], [0.8, 1.0], alpha=0.7),
        HolderFunction("table", 2, table=make_rng(4).random((5, 4))),
    ],
    ids=["cone1", "cone2", "cone3", "multipeak", "table"],
)
def test_holder_condition_on_random_pairs(g):
    rng = make_rng(9)
    U, V = rng.random((10**4, g.k)), rng.random((10**4, g.k))
    # half the pairs close together, where the condition is tightest
    V[::2] = np.clip(U[::2] + 1e-3 * rng.standard_normal((5000, g.k)), 0, 1)
    dist = np.linalg.norm(U - V, axis=1)
    assert np.all(np.abs(g.many(U) - g.many(V)) <= g.L * dist**g.alpha + 1e-12)


def test_oracle_agrees_with_closed_form():
    for peak in [(0.37,), (0.2, 0.81), (0.33, 0.5, 0.71)]:
        g = HolderFunction.cone(peak)
        value, arg = grid_optimum(g)
        assert abs(value - g.closed_form_max()) < 1e-6
        assert np.allclose(arg, peak, atol=1e-6)


def test_oracle_two_peaks():
    g = HolderFunction.multipeak([(0.2,), (0.75,)], [0.8, 0.9])
    value, arg = grid_optimum(g)
    assert value == pytest.approx(0.9, abs=1e-6) and arg[0] == pytest.approx(0.75, abs=1e-6)


def test_oracle_table_and_unsupported_k():
    tab = np.array([[0.0, 0.2], [0.5, 0.3]])
    value, _ = grid_optimum(HolderFunction("table", 2, table=tab))
    assert value == pytest.approx(0.5)
    with pytest.raises(OracleUnsupportedError):
        grid_optimum(HolderFunction.cone((0.5,) * 4))


def test_noiseless_sample_equals_mean():
    env = StochasticEnv(HolderFunction.cone((0.4, 0.6)), 6, zeta=0.0, seed=3)
    x = make_rng(1).random(6)
    assert env.sample_reward(5, x) == env.eval_mean(x)


def test_stochastic_regret_uses_mean():
    env = StochasticEnv(HolderFunction.cone((0.4,)), 3, zeta=1.0, tup=(1,), seed=0)
    reward, regret = env.step(1, [0.0, 0.5, 0.0])
    assert regret == pytest.approx(0.1)
    assert reward != pytest.approx(0.9)


def test_gaussian_noise_mgf():
    # E exp(s * zeta * Z) = exp(zeta^2 s^2 / 2) for Gaussian noise
    zeta = 0.5
    env = StochasticEnv(HolderFunction.cone((0.5,)), 1, zeta=zeta, tup=(0,), seed=12)
    N = 50000
    noise = np.array([env.sample_reward(t, [0.5]) - 1.0 for t in range(1, N + 1)])
    for s in (-1.0, 1.0):
        vals = np.exp(s * noise)
        target = math.exp(zeta**2 * s**2 / 2)
        assert abs(vals.mean() - target) < 4 * vals.std() / math.sqrt(N)


def test_random_coordinate_mode():
    g = HolderFunction.cone((0.3,))
    env = StochasticEnv(g, 4, zeta=0.0, seed=2, random_coordinate=True, coord_probs=[0.5, 0.5, 0.0, 0.0])
    x = [0.3, 0.1, 0.9, 0.9]
    assert env.eval_mean(x) == pytest.approx(0.5 * 1.0 + 0.5 * 0.8)
    coords = [env.active_tuple(t)[0] for t in range(1, 2001)]
    assert set(coords) == {0, 1}
    with pytest.raises(InvalidArgumentsError):
        StochasticEnv(HolderFunction.cone((0.3, 0.3)), 4, random_coordinate=True)


def test_adversarial_replay_is_oblivious():
    doc = {"model": "adversarial", "d": 8, "k": 1, "peaks": [[0.3]], "shard": {"S": 5}, "seed": 4}
    env_a = environment_from_dict(doc, horizon=500)
    env_b = environment_from_dict(doc, horizon=500)
    rng = make_rng(0)
    pts = rng.random((500, 8))
    assert [env_a.sample_reward(t, p) for t, p in enumerate(pts, 1)] == [
        env_b.sample_reward(t, p) for t, p in enumerate(pts, 1)
    ]
    # reward at t does not depend on what was queried before
    other = AdversarialEnv(env_a.g, 8, 500, S=5, seed=4)
    for t in (1, 250, 500):
        assert other.sample_reward(t, pts[t - 1]) == env_a.sample_reward(t, pts[t - 1])


def test_adversarial_horizon_and_range():
    env = AdversarialEnv(HolderFunction.cone((0.5,)), 3, 10, seed=0)
    with pytest.raises(HorizonExceededError):
        env.sample_reward(11, [0.5] * 3)
    with pytest.raises(InvalidArgumentsError):
        AdversarialEnv(HolderFunction.cone((0.5,), height=2.0), 3, 10)


def test_drift_moves_peaks_within_cube():
    env = AdversarialEnv(HolderFunction.cone((0.5, 0.5)), 5, 1000, seed=1, drift=0.2, period=100)
    peaks = {env.g_at(t).peaks[0] for t in range(1, 100)}
    assert len(peaks) > 50
    assert all(0 <= c <= 1 for p in peaks for c in p)
    assert env.optimal_value(7) == 1.0


@pytest.mark.parametrize("S,n", [(1, 50), (4, 100), (30, 40), (40, 40)])
def test_shard_sequence_hardness(S, n):
    seq = make_shard_sequence(10, 2, S, n, seed=S)
    assert seq.shape == (n, 2) and hardness(seq) == S
    assert all(len(set(row)) == 2 for row in seq.tolist())


def test_shard_sequence_validation():
    with pytest.raises(InvalidArgumentsError):
        make_shard_sequence(5, 1, 11, 10, 0)
    with pytest.raises(InvalidArgumentsError):
        make_shard_sequence(1, 1, 2, 10, 0)


def test_declared_hardness_matches_S():
    env = AdversarialEnv(HolderFunction.cone((0.5,)), 10, 1000, S=7, seed=5)
    assert env.declared_hardness == 7


def test_bumps():
    assert bump_u(0.25) == 1.0 and bump_v(0.75) == 1.0
    for x in (0.0, 0.5):
        assert bump_u(x) == pytest.approx(0.0, abs=1e-30)
    for x in (0.5, 1.0):
        assert bump_v(x) == pytest.approx(0.0, abs=1e-30)
    assert bump_u(0.6) == 0.0 and bump_v(0.4) == 0.0


def test_lower_bound_env_means():
    env = AdvLowerBoundEnv(8, seed=3)
    assert env.A1 and env.A2 and sorted(env.A1 + env.A2) == list(range(8))
    assert env.eval_mean([0.25] * 8) == pytest.approx(0.5)
    assert env.eval_mean([0.75] * 8) == pytest.approx(0.5)
    assert abs(env.eval_mean(env.optimal_point()) - 1.0) < 1e-12
    assert env.optimal_value() == 1.0


def test_lower_bound_env_diagonal_ceiling():
    env = AdvLowerBoundEnv(6, seed=0)
    assert max(env.eval_mean([x] * 6) for x in np.linspace(0, 1, 1001)) <= 0.5 + 1e-12


def test_lower_bound_env_sampling_matches_mean():
    env = AdvLowerBoundEnv(5, seed=8)
    x = make_rng(2).random(5)
    N = 40000
    r = np.array([env.sample_reward(t, x) for t in range(1, N + 1)])
    assert abs(r.mean() - env.eval_mean(x)) < 4 * r.std() / math.sqrt(N)


def test_random_peaks_follow_seed():
    doc = {"model": "stochastic", "d": 5, "k": 2, "peaks": "random"}
    a, b = environment_from_dict(doc, seed=1), environment_from_dict(doc, seed=2)
    assert a.g.peaks != b.g.peaks
    assert a.g.peaks == environment_from_dict(doc, seed=1).g.peaks
    assert all(0.05 <= c <= 0.95 for c in a.g.peaks[0])


def test_environment_dict_round_trip():
    env = StochasticEnv(HolderFunction.cone((0.2,), alpha=0.5), 4, zeta=0.3, tup=(2,), seed=6)
    doc = env.to_dict()
    back = environment_from_dict({**doc, "peaks": doc["function"]["peaks"]})
    assert back.to_dict() == doc


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 1.0), st.lists(st.floats(0, 1), min_size=2, max_size=2), st.integers(0, 2**31))
def test_cone_regret_never_negative(alpha, peak, seed):
    env = StochasticEnv(HolderFunction.cone(peak, alpha=alpha), 5, seed=seed)
    x = make_rng(seed).random(5)
    assert env.step(1, x)[1] >= -1e-12
