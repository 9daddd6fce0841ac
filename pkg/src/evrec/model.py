"""Domain types: events, user profiles, label vocabulary, and planar geometry.

All values are immutable after construction and safe to share across threads.
Coordinates live in a local planar frame measured in kilometres; distances are
straight-line. Survey-style events may carry a precomputed distance instead of
a location circle, in which case geometry is bypassed entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .errors import IntegrityError


class LabelKind(str, Enum):
    THEME = "theme"
    TYPE = "type"


@dataclass(frozen=True)
class Label:
    """A content label; theme and type vocabularies are disjoint."""

    text: str
    kind: LabelKind

    def __post_init__(self):
        trimmed = self.text.strip()
        if not trimmed:
            raise ValueError("label text must be non-empty after trimming")
        object.__setattr__(self, "text", trimmed)
        object.__setattr__(self, "kind", LabelKind(self.kind))


def theme(text: str) -> Label:
    return Label(text, LabelKind.THEME)


def etype_label(text: str) -> Label:
    return Label(text, LabelKind.TYPE)


class Vocabulary:
    """Registry of known labels, rejecting texts reused across kinds."""

    def __init__(self):
        self._kinds: dict[str, LabelKind] = {}

    def register(self, text: str, kind: LabelKind | str) -> Label:
        label = Label(text, LabelKind(kind))
        existing = self._kinds.get(label.text)
        if existing is not None and existing != label.kind:
            raise IntegrityError(
                "label_kind_clash",
                [label.text],
                f"label {label.text!r} already registered as {existing.value}, "
                f"cannot also be a {label.kind.value}",
            )
        self._kinds[label.text] = label.kind
        return label

    def __len__(self) -> int:
        return len(self._kinds)


@dataclass(frozen=True)
class IntervalSpec:
    """A closed real interval [lb, ub]."""

    lb: float
    ub: float

    def __post_init__(self):
        if not self.lb < self.ub:
            raise ValueError(f"interval requires lb < ub, got [{self.lb}, {self.ub}]")

    @property
    def width(self) -> float:
        return self.ub - self.lb

    def contains(self, x: float) -> bool:
        return self.lb <= x <= self.ub


@dataclass(frozen=True)
class GeoCircle:
    """An area given by a center (planar km coordinates) and a radius in km."""

    center_x: float
    center_y: float
    radius: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")


@dataclass(frozen=True)
class Config:
    """All tunable constants in one place.

    ``k_friends`` is the participating-friend count at which the friends
    factor saturates at the top of the score interval. ``default_interest``
    enables a fallback value for labels missing from a profile; left ``None``,
    missing labels are an error. ``default_event_radius_km`` stands in for the
    event-area radius when an event carries a precomputed distance and no
    geometry.
    """

    score_interval: IntervalSpec = IntervalSpec(0.0, 10.0)
    rating_interval: IntervalSpec = IntervalSpec(0.0, 10.0)
    interest_interval: IntervalSpec = IntervalSpec(0.0, 10.0)
    weight_ub: float = 10.0
    k_friends: int = 8
    default_interest: Optional[float] = None
    default_event_radius_km: float = 0.1

    def __post_init__(self):
        if self.k_friends < 1:
            raise ValueError("k_friends must be >= 1")
        if self.weight_ub <= 0:
            raise ValueError("weight_ub must be > 0")
        if self.default_event_radius_km < 0:
            raise ValueError("default_event_radius_km must be >= 0")

    def to_dict(self) -> dict:
        return {
            "score_interval": [self.score_interval.lb, self.score_interval.ub],
            "rating_interval": [self.rating_interval.lb, self.rating_interval.ub],
            "interest_interval": [self.interest_interval.lb, self.interest_interval.ub],
            "weight_ub": self.weight_ub,
            "k_friends": self.k_friends,
            "default_interest": self.default_interest,
            "default_event_radius_km": self.default_event_radius_km,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        def interval(key, fallback):
            pair = d.get(key)
            return IntervalSpec(float(pair[0]), float(pair[1])) if pair else fallback

        return cls(
            score_interval=interval("score_interval", IntervalSpec(0.0, 10.0)),
            rating_interval=interval("rating_interval", IntervalSpec(0.0, 10.0)),
            interest_interval=interval("interest_interval", IntervalSpec(0.0, 10.0)),
            weight_ub=float(d.get("weight_ub", 10.0)),
            k_friends=int(d.get("k_friends", 8)),
            default_interest=(
                None if d.get("default_interest") is None else float(d["default_interest"])
            ),
            default_event_radius_km=float(d.get("default_event_radius_km", 0.1)),
        )


DEFAULT_CONFIG = Config()


@dataclass(frozen=True)
class Event:
    """An event offered for recommendation.

    Exactly one of ``location`` and ``precomputed_distance_km`` must be set.
    ``friends_count`` is the survey shortcut: a directly supplied count of
    participating friends that bypasses the participant/friend set
    intersection when present.
    """

    id: str
    themes: frozenset[Label]
    etype: frozenset[Label]
    location: Optional[GeoCircle] = None
    precomputed_distance_km: Optional[float] = None
    avg_rating_input: Optional[float] = None
    raters: frozenset[tuple[str, float]] = frozenset()
    participants: frozenset[str] = frozenset()
    friends_count: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "themes", frozenset(self.themes))
        object.__setattr__(self, "etype", frozenset(self.etype))
        object.__setattr__(self, "raters", frozenset(self.raters))
        object.__setattr__(self, "participants", frozenset(self.participants))
        if not self.themes:
            raise ValueError(f"event {self.id!r}: themes must be non-empty")
        if not self.etype:
            raise ValueError(f"event {self.id!r}: types must be non-empty")
        if any(lb.kind != LabelKind.THEME for lb in self.themes):
            raise ValueError(f"event {self.id!r}: themes must all have kind=theme")
        if any(lb.kind != LabelKind.TYPE for lb in self.etype):
            raise ValueError(f"event {self.id!r}: types must all have kind=type")
        if (self.location is None) == (self.precomputed_distance_km is None):
            raise ValueError(
                f"event {self.id!r}: exactly one of location and "
                "precomputed_distance_km must be set"
            )
        if self.precomputed_distance_km is not None and self.precomputed_distance_km < 0:
            raise ValueError(f"event {self.id!r}: precomputed distance must be >= 0")
        if self.friends_count is not None and self.friends_count < 0:
            raise ValueError(f"event {self.id!r}: friends_count must be >= 0")

    def validate(self, config: Config = DEFAULT_CONFIG) -> list[str]:
        """Config-dependent checks. Raises on violations, returns warnings."""
        warnings: list[str] = []
        for _, rating in self.raters:
            if not config.rating_interval.contains(rating):
                raise ValueError(
                    f"event {self.id!r}: rating {rating} outside "
                    f"[{config.rating_interval.lb}, {config.rating_interval.ub}]"
                )
        if self.avg_rating_input is not None and not config.rating_interval.contains(
            self.avg_rating_input
        ):
            raise ValueError(
                f"event {self.id!r}: avg_rating_input {self.avg_rating_input} outside "
                f"[{config.rating_interval.lb}, {config.rating_interval.ub}]"
            )
        if self.raters and self.avg_rating_input is not None:
            warnings.append(
                f"event {self.id!r}: both raters and avg_rating_input present; raters win"
            )
        if self.participants and self.friends_count is not None:
            warnings.append(
                f"event {self.id!r}: both participants and friends_count present; "
                "friends_count wins"
            )
        return warnings


@dataclass(frozen=True)
class UserProfile:
    """A user: position, willingness to move, interests, friends, self-weights.

    ``self_weights`` is the (W_rat, W_rch, W_frn) triple of self-assessed
    importances for the rating, reachability, and friends factors.
    Friendship is directional and may be non-symmetric.
    """

    id: str
    position: GeoCircle
    mov_km: float = 0.0
    interests: Mapping[Label, float] = field(default_factory=dict)
    friends: frozenset[str] = frozenset()
    self_weights: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "interests", dict(self.interests))
        object.__setattr__(self, "friends", frozenset(self.friends))
        if self.mov_km < 0:
            raise ValueError(f"user {self.id!r}: mov_km must be >= 0")
        if self.id in self.friends:
            raise ValueError(f"user {self.id!r}: friend set must not contain the user")
        if self.self_weights is not None:
            w = tuple(float(x) for x in self.self_weights)
            if len(w) != 3:
                raise ValueError(f"user {self.id!r}: self_weights must be a triple")
            object.__setattr__(self, "self_weights", w)

    def validate(self, config: Config = DEFAULT_CONFIG) -> list[str]:
        """Config-dependent checks. Raises on violations, returns warnings."""
        for label, value in self.interests.items():
            if not config.interest_interval.contains(value):
                raise ValueError(
                    f"user {self.id!r}: interest {value} for {label.text!r} outside "
                    f"[{config.interest_interval.lb}, {config.interest_interval.ub}]"
                )
        if self.self_weights is not None:
            for w in self.self_weights:
                if not 0 <= w <= config.weight_ub:
                    raise ValueError(
                        f"user {self.id!r}: self-weight {w} outside [0, {config.weight_ub}]"
                    )
        return []


def distance(a: GeoCircle, b: GeoCircle) -> float:
    """Straight-line distance between two circle centers, in km."""
    return math.hypot(a.center_x - b.center_x, a.center_y - b.center_y)


def effective_distance(user: UserProfile, event: Event) -> float:
    """Distance used by reachability: the precomputed value when the event
    carries one, otherwise the center-to-center distance."""
    if event.precomputed_distance_km is not None:
        return event.precomputed_distance_km
    return distance(user.position, event.location)


def event_radius(event: Event, config: Config = DEFAULT_CONFIG) -> float:
    """Event-area radius; falls back to the configured default for
    precomputed-distance events that have no geometry."""
    if event.location is not None:
        return event.location.radius
    return config.default_event_radius_km
