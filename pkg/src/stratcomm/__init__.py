"""Strategic semantic communication: models, information limits, equilibria.

The package models a communication chain in which an encoder and a decoder
each minimize their own expected distortion. It provides exact
finite-alphabet information measures, capacity and rate-distortion solvers,
commitment (leader-follower) solvers under optimistic and pessimistic tie
breaking, simultaneous-move equilibrium enumeration, a scalar game in which
pessimistic commitment strictly beats every simultaneous equilibrium, and
deterministic experiment runners behind a CLI.
"""

from .chain import (
    ChainModel,
    DecoderStrategy,
    DistortionSpec,
    EncoderStrategy,
    chain_joint,
    expected_distortion,
    observation_joint,
    validate_model,
)
from .equilibria import (
    BestResponseSet,
    BimatrixReduction,
    CommitmentResult,
    NashPoint,
    NashReport,
    ReducedGame,
    audit_commitment_order,
    decoder_best_responses,
    evaluate_commitment,
    nash_equilibria,
    reduce_to_bimatrix,
    solve_ose,
    solve_rse,
)
from .info_limits import (
    CapacityResult,
    FeasibilityReport,
    RatePoint,
    achievable_rate,
    audit_conditional_identity,
    audit_semantic_identity,
    channel_capacity,
    feasibility_check,
    feasibility_test,
    information_demand,
    rate_at_distortion,
    rate_decomposition,
    rate_distortion_curve,
    repair_to_feasible,
)
from .probability import (
    ConditionalKernel,
    FiniteDistribution,
    JointTensor,
    compose,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    marginalize,
    mutual_information,
)

__version__ = "0.1.0"

__all__ = [
    "BestResponseSet",
    "BimatrixReduction",
    "CapacityResult",
    "ChainModel",
    "CommitmentResult",
    "ConditionalKernel",
    "DecoderStrategy",
    "DistortionSpec",
    "EncoderStrategy",
    "FeasibilityReport",
    "FiniteDistribution",
    "JointTensor",
    "NashPoint",
    "NashReport",
    "RatePoint",
    "ReducedGame",
    "achievable_rate",
    "audit_commitment_order",
    "audit_conditional_identity",
    "audit_semantic_identity",
    "chain_joint",
    "channel_capacity",
    "compose",
    "conditional_entropy",
    "conditional_mutual_information",
    "decoder_best_responses",
    "entropy",
    "evaluate_commitment",
    "expected_distortion",
    "feasibility_check",
    "feasibility_test",
    "information_demand",
    "marginalize",
    "mutual_information",
    "nash_equilibria",
    "observation_joint",
    "rate_at_distortion",
    "rate_decomposition",
    "rate_distortion_curve",
    "reduce_to_bimatrix",
    "repair_to_feasible",
    "solve_ose",
    "solve_rse",
    "validate_model",
    "__version__",
]
