"""Shared test fixtures: the worked example, random generators, oracles."""

from __future__ import annotations

import numpy as np

from evrec import Event, FactorVector, GeoCircle, Label, UserProfile

ACCEPTANCE_RESULTS: list[str] = []


def susan() -> UserProfile:
    """The user from the worked example: at the fair, willing to move 100 km."""
    return UserProfile(
        id="susan",
        position=GeoCircle(0.0, 0.0, 0.0),
        mov_km=100.0,
        interests={
            Label("fish", "theme"): 10, Label("coffee", "theme"): 7,
            Label("wine", "theme"): 0, Label("beer", "theme"): 0,
            Label("cheese", "theme"): 8, Label("cold cuts", "theme"): 9,
            Label("workshop", "type"): 2, Label("tasting", "type"): 10,
            Label("debate", "type"): 1, Label("dinner", "type"): 9,
        },
        friends=frozenset({"john", "joseph", "kate"}),
    )


def beer_dinner() -> Event:
    """The worked-example dinner: fish+beer themes, 77 km away, 4 raters,
    three participants of whom two are Susan's friends."""
    return Event(
        id="beer_dinner",
        themes={Label("fish", "theme"), Label("beer", "theme")},
        etype={Label("dinner", "type")},
        location=GeoCircle(0.0, 77.0, 0.1),
        raters=frozenset({("mike", 3.0), ("mark", 6.0), ("mary", 7.0),
                          ("megan", 8.0)}),
        participants=frozenset({"john", "joseph", "jane"}),
    )


SUSAN_FACTORS = FactorVector(thi=5.0, tyi=9.0, rat=6.0,
                             rch=2.3076923076923075, frn=5.0)


def random_factor_rows(rng: np.random.Generator, n: int) -> np.ndarray:
    """Factor-shaped inputs: five columns uniform over the score interval."""
    return rng.uniform(0.0, 10.0, size=(n, 5))


def ols_reference(X, y) -> tuple[float, np.ndarray]:
    """Independent least-squares oracle: explicit inversion of the
    uncentered augmented normal equations."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.column_stack([np.ones(X.shape[0]), X])
    w = np.linalg.inv(A.T @ A) @ (A.T @ y)
    return float(w[0]), w[1:]
