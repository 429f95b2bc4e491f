"""Exact Bernoulli factory for f(p) = C p, with running-time bounds and tooling."""

from .basic import VonNeumannResult, known_q_factory, von_neumann
from .bounds import (
    OptimizedParams,
    lower_bound,
    lower_bound_abstract,
    optimize_params,
    simple_bound,
    stage_bound,
    stage_reach_probability_bound,
    sup_bound,
    theorem4_bound,
)
from .coins import CoinSource, SimulatedCoin, StreamCoin
from .errors import (
    BernoulliFactoryError,
    DomainError,
    InfeasibleBoundError,
    InfeasibleBoundWarning,
    InputExhaustedError,
    InvariantError,
    NonTerminationError,
    StreamFormatError,
)
from .estimator import EstimateRecord, estimate_many, estimate_p, expected_flip_cost
from .linear import (
    FactoryParams,
    RunRecord,
    StageState,
    make_params,
    sample,
    sample_many,
    simulate,
    summarize,
)
from .randomness import RandomSeed, UniformSource, bernoulli_known, geometric, next_uniform
from .stats import FlipStats

__version__ = "0.1.0"
