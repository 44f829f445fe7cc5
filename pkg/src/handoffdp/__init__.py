from __future__ import annotations

__version__ = "0.1.0"

from .result import Err, Ok, Result, Matcher

from .safe import safe, SafeOptions

from .error import (
    TaggedError,
    Issue,
    ConfigError,
    ChannelIndexError,
    StateIndexError,
    StageIndexError,
    SampleSizeError,
    InvalidStateError,
    PenaltyRangeError,
    DisallowedActionError,
    PolicyMismatchError,
    UnknownPolicyError,
    GridSpecError,
    OutputError,
    ShapeMismatchError,
    UnhandledException,
    is_panic,
    panic,
    Panic,
)

from .channel import (
    ChannelModel,
    ChannelParams,
    ChannelStateVector,
    RateParams,
    decode,
    encode,
    validate_channel_params,
)

from .mdp import (
    AccessMDP,
    Action,
    CostParams,
    PenaltySpec,
    ScenarioConfig,
    State,
    StateSpace,
)

from .backward import (
    PolicyTable,
    ValueTable,
    backward_induction,
    evaluate_policy,
    expected_total_cost,
    q_value,
)

from .monotone import (
    CaseTag,
    ThresholdTable,
    classify_case,
    monotone_backward_induction,
    policy_from_thresholds,
)

from .checks import (
    CheckReport,
    Counterexample,
    check_policy_monotone,
    check_subadditivity,
    check_value_monotone,
    run_all_checks,
)

from .policies import (
    ALWAYS_STAYING,
    QUALITY_BASED_SWITCHING,
    PolicyHandle,
    policy_by_name,
)

from .sim import (
    Estimate,
    SweepResult,
    Trajectory,
    dump_action_surface,
    monte_carlo,
    rollout,
    sweep_data_size,
    sweep_deadline,
)

from .config import parse_config


__all__ = [
    # Result types
    "Err",
    "Ok",
    "Result",
    "Matcher",
    "safe",
    "SafeOptions",
    # Error types
    "TaggedError",
    "Issue",
    "ConfigError",
    "ChannelIndexError",
    "StateIndexError",
    "StageIndexError",
    "SampleSizeError",
    "InvalidStateError",
    "PenaltyRangeError",
    "DisallowedActionError",
    "PolicyMismatchError",
    "UnknownPolicyError",
    "GridSpecError",
    "OutputError",
    "ShapeMismatchError",
    "UnhandledException",
    "is_panic",
    "panic",
    "Panic",
    # Channel model
    "ChannelModel",
    "ChannelParams",
    "ChannelStateVector",
    "RateParams",
    "decode",
    "encode",
    "validate_channel_params",
    # MDP
    "AccessMDP",
    "Action",
    "CostParams",
    "PenaltySpec",
    "ScenarioConfig",
    "State",
    "StateSpace",
    # Solvers
    "PolicyTable",
    "ValueTable",
    "backward_induction",
    "evaluate_policy",
    "expected_total_cost",
    "q_value",
    "CaseTag",
    "ThresholdTable",
    "classify_case",
    "monotone_backward_induction",
    "policy_from_thresholds",
    # Structure checks
    "CheckReport",
    "Counterexample",
    "check_policy_monotone",
    "check_subadditivity",
    "check_value_monotone",
    "run_all_checks",
    # Policies and simulation
    "ALWAYS_STAYING",
    "QUALITY_BASED_SWITCHING",
    "PolicyHandle",
    "policy_by_name",
    "Estimate",
    "SweepResult",
    "Trajectory",
    "dump_action_surface",
    "monte_carlo",
    "rollout",
    "sweep_data_size",
    "sweep_deadline",
    # Scenarios
    "parse_config",
]
