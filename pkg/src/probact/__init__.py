"""Abstraction, interval projection and refinement planning for probabilistic actions."""

from .abstraction import (
    GroupingPlan,
    abstract,
    inter_abstract_I,
    inter_abstract_II,
    intra_abstract_I,
    intra_abstract_II,
    weaken_condition_pair,
    weaken_effects,
)
from .actions import (
    ActionDescription,
    AmongSet,
    Branch,
    CondList,
    ConjDisj,
    Effect,
    Exact,
    MaybeUnchanged,
    Point,
    ProbList,
    Range,
    RelativeExact,
    RelativeRange,
    Single,
    Unconstrained,
    check_concrete,
    pad_branches,
    validate_concrete,
)
from .chronicle import Chronicle, ChronicleSet, Envelope, TimedState, apply_effect, enumerate_chronicles
from .errors import (
    BoundError,
    DegenerateEffectError,
    DomainOverflowError,
    DomainSyntaxError,
    IncompletenessError,
    NothingToRefine,
    ProbactError,
    ValidationError,
)
from .planner import (
    CandidatePlan,
    Network,
    SearchStats,
    UtilityFunction,
    UtilityTerm,
    dominates,
    expected_utility,
    maximal_pruning_bound,
    refine,
    search,
)
from .projection import (
    ProjectionResult,
    project,
    project_abstract_inter_I,
    project_abstract_inter_II,
    project_abstract_intra_I,
    project_abstract_intra_II,
    project_concrete,
)
from .worldmodel import (
    FALSE,
    TRUE,
    Fluent,
    Interval,
    ProbInterval,
    State,
    StateDistribution,
    Vocabulary,
    entails,
    lower_prob,
    models,
    parse_sentence,
    prob_of,
    upper_prob,
)

__version__ = "0.1.0"
