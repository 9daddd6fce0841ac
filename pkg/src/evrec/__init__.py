"""Event recommendation: five-factor scoring plus a regression experiment lab."""

from .model import (
    Config,
    DEFAULT_CONFIG,
    Event,
    GeoCircle,
    IntervalSpec,
    Label,
    LabelKind,
    UserProfile,
    Vocabulary,
    distance,
    effective_distance,
)
from .scoring import (
    FACTOR_NAMES,
    FactorVector,
    Piece,
    RankedEvent,
    ScoringFunction,
    average_rating,
    combined_user_factor,
    factor_vector,
    friends_participation,
    map_interval,
    rank,
    reachability,
    score,
    thematic_interest,
    type_interest,
)
from .regression import (
    AssumptionSpec,
    FitResult,
    Regime,
    Sample,
    eliminate_attributes,
    fit_assumption,
    fit_linear,
    rmse,
)
from .experiments import (
    ExperimentReport,
    SplitPlan,
    TTestResult,
    paired_t_test,
    run_protocol,
    split_dataset,
    t_critical,
)

__version__ = "0.1.0"

__all__ = [
    "Config", "DEFAULT_CONFIG", "Event", "GeoCircle", "IntervalSpec", "Label",
    "LabelKind", "UserProfile", "Vocabulary", "distance", "effective_distance",
    "FACTOR_NAMES", "FactorVector", "Piece", "RankedEvent", "ScoringFunction",
    "average_rating", "combined_user_factor", "factor_vector",
    "friends_participation", "map_interval", "rank", "reachability", "score",
    "thematic_interest", "type_interest",
    "AssumptionSpec", "FitResult", "Regime", "Sample", "eliminate_attributes",
    "fit_assumption", "fit_linear", "rmse",
    "ExperimentReport", "SplitPlan", "TTestResult", "paired_t_test",
    "run_protocol", "split_dataset", "t_critical",
    "__version__",
]
