"""flurrysda: sealed-sender group traffic simulator and counting-attack harness.

Generates synthetic delivery logs in which a target's group sends show up
only as receipt flurries, runs the epoch-counting disclosure attack against
the metadata-only view, and validates the attack's closed-form success
bound by Monte Carlo and exhaustive enumeration.
"""

from .attack import (
    AttackConfig,
    AttackResult,
    CountTable,
    judge_success,
    process_pair,
    run_attack,
)
from .epochs import (
    EpochSample,
    FlurryParams,
    detect_flurries,
    extract_target_epoch,
    sample_random_epoch,
)
from .errors import (
    FlurrySdaError,
    GapNonPositive,
    HorizonTooShort,
    InvalidRate,
    LabelMismatch,
    NoFlurries,
    PlanInvalid,
    TooLarge,
    WindowUnderflow,
)
from .experiment import (
    ExperimentPlan,
    TraceSettings,
    run_experiment,
    run_ideal_trial,
    run_trace_trial,
    trial_seed,
    wilson_interval,
)
from .observer import ObservedEvent, ObservedLog, observe
from .oracle import brute_force_oracle
from .theory import BoundInputs, BoundResult, bound, compute_C, n_min
from .traffic import (
    IdealEpochDraw,
    PopulationSpec,
    TraceConfig,
    TrafficTrace,
    UserProfile,
    background_rate_for,
    draw_ideal_epoch,
    generate_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackResult",
    "BoundInputs",
    "BoundResult",
    "CountTable",
    "EpochSample",
    "ExperimentPlan",
    "FlurryParams",
    "FlurrySdaError",
    "GapNonPositive",
    "HorizonTooShort",
    "IdealEpochDraw",
    "InvalidRate",
    "LabelMismatch",
    "NoFlurries",
    "ObservedEvent",
    "ObservedLog",
    "PlanInvalid",
    "PopulationSpec",
    "TooLarge",
    "TraceConfig",
    "TraceSettings",
    "TrafficTrace",
    "UserProfile",
    "WindowUnderflow",
    "background_rate_for",
    "bound",
    "brute_force_oracle",
    "compute_C",
    "detect_flurries",
    "draw_ideal_epoch",
    "extract_target_epoch",
    "generate_trace",
    "judge_success",
    "n_min",
    "observe",
    "process_pair",
    "run_attack",
    "run_experiment",
    "run_ideal_trial",
    "run_trace_trial",
    "sample_random_epoch",
    "trial_seed",
    "wilson_interval",
]
