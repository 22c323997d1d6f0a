"""Continuum-armed bandits over [0,1]^d with few active coordinates."""
from .algorithms import (
    CabConfig,
    epoch_plan,
    m_schedule_general,
    m_schedule_general_shard,
    m_schedule_k1,
    m_schedule_k1_shard,
    run_cab,
)
from .engines import UCB1, EngineKind, Exp3, Exp3S, engine_new, hardness
from .environments import (
    AdversarialEnv,
    AdvLowerBoundEnv,
    HolderFunction,
    StochasticEnv,
    environment_from_dict,
    grid_optimum,
    make_shard_sequence,
)
from .partition_family import (
    Partition,
    PartitionFamily,
    VerificationReport,
    build_random_family,
    find_separating,
    min_family_size,
    random_partition,
    separates,
    trivial_family,
    verify_partition_assumption,
)
from .strategy_grid import StrategyGrid, StrategyId
from .trace import RegretTrace

__version__ = "0.1.0"
