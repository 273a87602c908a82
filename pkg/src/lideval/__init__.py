"""Evaluation toolkit for closed-set language detection.

Scores per-segment language scores against a trial key with a pairwise
detection-cost protocol, validates the interchange files, breaks results
down by metadata partitions, and simulates synthetic campaigns for
sanity checks and benchmarking.
"""

from .analysis import (
    ConfusionMatrix,
    DispersionRow,
    Leaderboard,
    LeaderboardRow,
    confusion,
    language_dispersion,
    leaderboard,
    partition_scores,
)
from .errors import (
    DuplicateSegment,
    EmptyClass,
    HeaderMismatch,
    LanguageMismatch,
    Malformed,
    MissingDuration,
    MissingSegment,
    NonFiniteScore,
    ToolkitError,
    UnknownLanguage,
    UnknownSegment,
)
from .formats import (
    Issue,
    ValidationReport,
    parse_key,
    parse_metadata,
    parse_submission,
    report_to_json,
    validate,
    write_key,
    write_metadata,
    write_report,
    write_submission,
)
from .scoring import (
    DEFAULT_APPS,
    ApplicationParams,
    ApplicationSet,
    AppReport,
    LanguageOutcome,
    PairOutcome,
    PairRates,
    Scope,
    ScoreReport,
    bayes_threshold,
    c_primary,
    c_primary_from_llrs,
    llr_matrix,
    min_pair_cost,
    pair_cost,
    pair_rates,
)
from .simulate import SimCampaign, SimConfig, SystemSpec, simulate_campaign
from .trial import (
    DEFAULT_DURATION_EDGES,
    LanguageSet,
    PartitionKind,
    PartitionSpec,
    ScoreSet,
    SegmentMeta,
    SourceType,
    TrialKey,
    build_key,
    partition,
)

__version__ = "0.1.0"

__all__ = [
    "ApplicationParams",
    "ApplicationSet",
    "AppReport",
    "ConfusionMatrix",
    "DEFAULT_APPS",
    "DEFAULT_DURATION_EDGES",
    "DispersionRow",
    "DuplicateSegment",
    "EmptyClass",
    "HeaderMismatch",
    "Issue",
    "LanguageMismatch",
    "LanguageOutcome",
    "LanguageSet",
    "Leaderboard",
    "LeaderboardRow",
    "Malformed",
    "MissingDuration",
    "MissingSegment",
    "NonFiniteScore",
    "PairOutcome",
    "PairRates",
    "PartitionKind",
    "PartitionSpec",
    "Scope",
    "ScoreReport",
    "ScoreSet",
    "SegmentMeta",
    "SimCampaign",
    "SimConfig",
    "SourceType",
    "SystemSpec",
    "ToolkitError",
    "TrialKey",
    "UnknownLanguage",
    "UnknownSegment",
    "ValidationReport",
    "bayes_threshold",
    "build_key",
    "c_primary",
    "c_primary_from_llrs",
    "confusion",
    "language_dispersion",
    "leaderboard",
    "llr_matrix",
    "min_pair_cost",
    "pair_cost",
    "pair_rates",
    "parse_key",
    "parse_metadata",
    "parse_submission",
    "partition",
    "partition_scores",
    "report_to_json",
    "simulate_campaign",
    "validate",
    "write_key",
    "write_metadata",
    "write_report",
    "write_submission",
]
