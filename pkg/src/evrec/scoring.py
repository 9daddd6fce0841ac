"""The five scoring factors and the linear scoring function.

Factor values are scaled onto the score interval so their learned weights are
comparable. The friends factor alone is not clamped above: past the saturation
count K it keeps growing, logarithmically slowly.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass, field
from typing import Literal, Mapping, Optional, Sequence, Union

from .errors import (
    DegenerateReachWarning,
    EvrecError,
    MissingFactorValue,
    MissingInterest,
    MissingSelfWeights,
    NoRatings,
    ZeroWeights,
)
from .model import (
    Config,
    DEFAULT_CONFIG,
    Event,
    IntervalSpec,
    UserProfile,
    effective_distance,
    event_radius,
)

FACTOR_NAMES = ("thi", "tyi", "rat", "rch", "frn")
COMBINED_NAMES = ("u_abs", "u_rel")


@dataclass(frozen=True)
class FactorVector:
    """The five factor values for one (user, event) pair."""

    thi: float
    tyi: float
    rat: float
    rch: float
    frn: float

    def as_dict(self) -> dict[str, float]:
        return {"thi": self.thi, "tyi": self.tyi, "rat": self.rat,
                "rch": self.rch, "frn": self.frn}


@dataclass(frozen=True)
class Piece:
    """One branch of a piecewise scoring function.

    A factor absent from ``coefficients`` is dropped (switched off), which is
    distinct from a coefficient that happens to be zero.
    """

    intercept: float
    coefficients: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", dict(self.coefficients))


@dataclass(frozen=True)
class ScoringFunction:
    """An affine score over factor values, optionally piecewise.

    Simple form: ``intercept + sum(coefficients[f] * value[f])``.
    Piecewise form: ``thresholds`` split the score interval of
    ``split_attribute`` into left-closed right-open intervals (the last one
    closed), and each piece supplies its own intercept and coefficients.
    """

    intercept: float = 0.0
    coefficients: Mapping[str, float] = field(default_factory=dict)
    split_attribute: Optional[str] = None
    thresholds: tuple[float, ...] = ()
    pieces: tuple[Piece, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficients", dict(self.coefficients))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if self.pieces:
            if self.split_attribute not in ("thi", "tyi"):
                raise ValueError("piecewise functions must split on thi or tyi")
            if len(self.pieces) != len(self.thresholds) + 1:
                raise ValueError("need exactly len(thresholds)+1 pieces")
            if any(a >= b for a, b in zip(self.thresholds, self.thresholds[1:])):
                raise ValueError("thresholds must be strictly ascending")
        elif self.split_attribute is not None or self.thresholds:
            raise ValueError("split_attribute/thresholds given without pieces")

    @property
    def is_piecewise(self) -> bool:
        return bool(self.pieces)

    def piece_for(self, value: float) -> Piece:
        for threshold, piece in zip(self.thresholds, self.pieces):
            if value < threshold:
                return piece
        return self.pieces[-1]

    def factor_names(self) -> frozenset[str]:
        """All factor names referenced anywhere in the function."""
        names = set(self.coefficients)
        for piece in self.pieces:
            names.update(piece.coefficients)
        return frozenset(names)


def map_interval(x: float, src: IntervalSpec, dst: IntervalSpec) -> float:
    """Affine map sending [src.lb, src.ub] onto [dst.lb, dst.ub]."""
    return (x - src.lb) * dst.width / src.width + dst.lb


def _mean_interest(user: UserProfile, labels, config: Config) -> float:
    total = 0.0
    for label in labels:
        value = user.interests.get(label)
        if value is None:
            if config.default_interest is None:
                raise MissingInterest(label)
            value = config.default_interest
        total += value
    return total / len(labels)


def thematic_interest(user: UserProfile, event: Event,
                      config: Config = DEFAULT_CONFIG) -> float:
    """Mean of the user's interests over the event themes, on the score scale."""
    mean = _mean_interest(user, event.themes, config)
    return map_interval(mean, config.interest_interval, config.score_interval)


def type_interest(user: UserProfile, event: Event,
                  config: Config = DEFAULT_CONFIG) -> float:
    """Mean of the user's interests over the event types, on the score scale."""
    mean = _mean_interest(user, event.etype, config)
    return map_interval(mean, config.interest_interval, config.score_interval)


def average_rating(event: Event, config: Config = DEFAULT_CONFIG) -> float:
    """Community mean rating on the score scale.

    When individual ratings exist they win; otherwise the pre-aggregated
    average is used; with neither the factor is undefined.
    """
    if event.raters:
        mean = sum(r for _, r in event.raters) / len(event.raters)
    elif event.avg_rating_input is not None:
        mean = event.avg_rating_input
    else:
        raise NoRatings(f"event {event.id!r} has no ratings")
    return map_interval(mean, config.rating_interval, config.score_interval)


def reachability(user: UserProfile, event: Event,
                 config: Config = DEFAULT_CONFIG) -> float:
    """Willingness-adjusted distance score.

    Decays linearly from the top of the score interval at distance 0 to its
    bottom once the distance exhausts user radius + event radius + willingness
    to move. A zero denominator is degenerate: the score is maximal at
    distance 0 and minimal (with a warning) beyond.
    """
    lb, ub = config.score_interval.lb, config.score_interval.ub
    dist = effective_distance(user, event)
    reach = user.position.radius + event_radius(event, config) + user.mov_km
    if reach == 0:
        if dist == 0:
            return ub
        _warnings.warn(
            f"event {event.id!r}: zero reach for user {user.id!r} at distance {dist}",
            DegenerateReachWarning,
        )
        return lb
    return max(lb, (lb - ub) / reach * dist + ub)


def friends_participation(user: UserProfile, event: Event,
                          config: Config = DEFAULT_CONFIG) -> float:
    """Logarithmic score of the number of participating friends.

    Equals the interval bottom at zero friends and its top at K friends; it
    keeps growing (slowly) past K rather than clamping. The event-level
    friends_count shortcut, when present, stands in for the participant/friend
    set intersection.
    """
    if event.friends_count is not None:
        n = event.friends_count
    else:
        n = len(event.participants & user.friends)
    lb, ub = config.score_interval.lb, config.score_interval.ub
    return lb + (ub - lb) / math.log(config.k_friends + 1) * math.log(n + 1)


def combined_user_factor(user: UserProfile, factors: FactorVector,
                         mode: Literal["abs", "rel"],
                         config: Config = DEFAULT_CONFIG) -> float:
    """Self-weighted combination of the three additional factors.

    ``abs`` treats the weights as absolute values and divides by three times
    their upper bound (30 at defaults); ``rel`` divides by the weight sum.
    """
    if user.self_weights is None:
        raise MissingSelfWeights(f"user {user.id!r} has no self-assessed weights")
    w_rat, w_rch, w_frn = user.self_weights
    numerator = w_rat * factors.rat + w_rch * factors.rch + w_frn * factors.frn
    if mode == "abs":
        return numerator / (3.0 * config.weight_ub)
    if mode == "rel":
        total = w_rat + w_rch + w_frn
        if total == 0:
            raise ZeroWeights(f"user {user.id!r}: all self-weights are zero")
        return numerator / total
    raise ValueError(f"unknown mode {mode!r}")


def factor_vector(user: UserProfile, event: Event,
                  config: Config = DEFAULT_CONFIG) -> FactorVector:
    """All five factors for one (user, event) pair under one configuration."""
    return FactorVector(
        thi=thematic_interest(user, event, config),
        tyi=type_interest(user, event, config),
        rat=average_rating(event, config),
        rch=reachability(user, event, config),
        frn=friends_participation(user, event, config),
    )


def score(factors: Union[FactorVector, Mapping[str, float]],
          func: ScoringFunction) -> float:
    """Evaluate a scoring function on factor values.

    Accepts a FactorVector or a name->value mapping (the latter may carry the
    combined u_abs/u_rel values). Factors without a coefficient contribute
    nothing; a coefficient without a supplied value is an error.
    """
    values = factors.as_dict() if isinstance(factors, FactorVector) else dict(factors)
    if func.is_piecewise:
        split_value = values.get(func.split_attribute)
        if split_value is None:
            raise MissingFactorValue(func.split_attribute)
        piece = func.piece_for(split_value)
        intercept, coefficients = piece.intercept, piece.coefficients
    else:
        intercept, coefficients = func.intercept, func.coefficients
    total = intercept
    for name, coef in coefficients.items():
        value = values.get(name)
        if value is None:
            raise MissingFactorValue(name)
        total += coef * value
    return total


@dataclass(frozen=True)
class RankedEvent:
    """One row of a ranking: either a scored event or an annotated failure."""

    event_id: str
    score: Optional[float] = None
    factors: Optional[FactorVector] = None
    error: Optional[str] = None


def _extended_values(user: UserProfile, factors: FactorVector,
                     needed: frozenset[str], config: Config) -> dict[str, float]:
    values = factors.as_dict()
    if "u_abs" in needed:
        values["u_abs"] = combined_user_factor(user, factors, "abs", config)
    if "u_rel" in needed:
        values["u_rel"] = combined_user_factor(user, factors, "rel", config)
    return values


def rank(user: UserProfile, events: Sequence[Event], func: ScoringFunction,
         config: Config = DEFAULT_CONFIG) -> list[RankedEvent]:
    """Score and order events for a user.

    Descending by score, ties broken by ascending event id. Events whose
    factors cannot be computed are kept at the tail with the error attached
    rather than dropped.
    """
    needed = func.factor_names()
    scored: list[RankedEvent] = []
    failed: list[RankedEvent] = []
    for event in events:
        try:
            factors = factor_vector(user, event, config)
            values = _extended_values(user, factors, needed, config)
            scored.append(RankedEvent(event.id, score(values, func), factors))
        except EvrecError as exc:
            failed.append(RankedEvent(event.id, error=str(exc)))
    scored.sort(key=lambda r: (-r.score, r.event_id))
    failed.sort(key=lambda r: r.event_id)
    return scored + failed
