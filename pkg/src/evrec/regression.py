"""Ridge-regularized least squares and the assumption-regime fits.

The solver mean-centers the inputs, solves the regularized normal equations
with a Cholesky factorization, and recovers the intercept from the means, so
the intercept itself is never penalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InsufficientSamples,
    RegimeDataError,
    SingularSystem,
)
from .model import Config, DEFAULT_CONFIG
from .scoring import FACTOR_NAMES, FactorVector, Piece, ScoringFunction, score


class Regime(str, Enum):
    """Which factors enter the fitted function, and against which target."""

    IA0_INIT = "ia0_init"
    IA0_FIN = "ia0_fin"
    IAX = "ia_x"
    IAXU_ABS = "ia_xu_abs"
    IAXU_REL = "ia_xu_rel"
    IAXD_THI = "ia_xd_thi"
    IAXD_TYI = "ia_xd_tyi"


REGIME_ATTRIBUTES = {
    Regime.IA0_INIT: ("thi", "tyi"),
    Regime.IA0_FIN: ("thi", "tyi"),
    Regime.IAX: FACTOR_NAMES,
    Regime.IAXU_ABS: ("thi", "tyi", "u_abs"),
    Regime.IAXU_REL: ("thi", "tyi", "u_rel"),
    Regime.IAXD_THI: FACTOR_NAMES,
    Regime.IAXD_TYI: FACTOR_NAMES,
}

DEFAULT_RIDGE = 1.0e-8
DEFAULT_THRESHOLDS = (6.0, 8.0)


@dataclass(frozen=True)
class Sample:
    """One (user, event) row with computed factors and observed score(s)."""

    user_id: str
    event_id: str
    factors: FactorVector
    score_fin: float
    score_init: Optional[float] = None
    u_abs: Optional[float] = None
    u_rel: Optional[float] = None


@dataclass(frozen=True)
class AssumptionSpec:
    """A regime plus its fitting knobs."""

    regime: Regime
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    ridge: float = DEFAULT_RIDGE
    attribute_selection: bool = False

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if any(a >= b for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly ascending")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")


@dataclass(frozen=True)
class FitResult:
    function: ScoringFunction
    training_rmse: float
    n_samples: int
    dropped_attributes: frozenset[str] = frozenset()


def fit_linear(inputs, targets, ridge: float = 0.0) -> tuple[float, np.ndarray]:
    """Least squares with an L2 penalty on the non-intercept coefficients.

    Solves (Xc'Xc + ridge*I) w = Xc'yc on mean-centered data and recovers the
    intercept from the means. At ridge=0 on full-rank data this is the exact
    least-squares minimizer.
    """
    X = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"inputs must be 2-d, got shape {X.shape}")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise DimensionMismatch(
            f"targets shape {y.shape} does not match {X.shape[0]} input rows"
        )
    if X.shape[0] < 2:
        raise InsufficientSamples(f"need at least 2 rows, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise DimensionMismatch("need at least one input attribute")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")

    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean
    A = Xc.T @ Xc + ridge * np.eye(X.shape[1])
    b = Xc.T @ yc
    try:
        coefs = scipy.linalg.solve(A, b, assume_a="pos")
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(coefs)):
        raise SingularSystem("solution is not finite")
    intercept = y_mean - float(x_mean @ coefs)
    return intercept, coefs


def predict(intercept: float, coefs, inputs) -> np.ndarray:
    X = np.asarray(inputs, dtype=float)
    return intercept + X @ np.asarray(coefs, dtype=float)


def rmse(predicted, observed) -> float:
    """Root mean square error between two equal-length vectors."""
    p = np.asarray(predicted, dtype=float)
    o = np.asarray(observed, dtype=float)
    if p.shape != o.shape or p.ndim != 1:
        raise DimensionMismatch(f"shapes {p.shape} and {o.shape} differ")
    if p.size == 0:
        raise EmptyInput("rmse of empty vectors")
    return float(np.sqrt(np.mean((p - o) ** 2)))


def _aic(sse: float, n: int, n_attrs: int) -> float:
    # k counts the intercept as a parameter; the floor keeps log() finite
    # for exact fits without disturbing comparisons.
    k = n_attrs + 1
    return n * math.log(max(sse, 1e-300) / n) + 2 * k


def eliminate_attributes(inputs, targets, ridge: float = 0.0,
                         names: Optional[Sequence[str]] = None
                         ) -> tuple[tuple[str, ...], tuple[float, np.ndarray]]:
    """Greedy backward elimination under an AIC-style criterion.

    Repeatedly drops the attribute whose removal most improves
    n*ln(SSE/n) + 2k, stopping when no removal improves it; never drops the
    last remaining attribute. Returns the surviving attribute names and the
    fit over them.
    """
    X = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float)
    if names is None:
        names = tuple(f"x{i}" for i in range(X.shape[1]))
    names = tuple(names)
    if len(names) != X.shape[1]:
        raise DimensionMismatch("one name per input column required")
    if X.shape[1] < 2:
        raise DimensionMismatch("attribute selection needs at least 2 attributes")

    def fit_subset(cols: list[int]):
        intercept, coefs = fit_linear(X[:, cols], y, ridge)
        residuals = y - predict(intercept, coefs, X[:, cols])
        return (intercept, coefs), float(residuals @ residuals)

    active = list(range(X.shape[1]))
    fit, sse = fit_subset(active)
    current = _aic(sse, X.shape[0], len(active))
    while len(active) > 1:
        best = None
        for i in range(len(active)):
            trial = active[:i] + active[i + 1:]
            trial_fit, trial_sse = fit_subset(trial)
            criterion = _aic(trial_sse, X.shape[0], len(trial))
            if criterion < current and (best is None or criterion < best[0]):
                best = (criterion, trial, trial_fit)
        if best is None:
            break
        current, active, fit = best
    return tuple(names[i] for i in active), fit


def _sample_value(sample: Sample, attribute: str, regime: Regime) -> float:
    if attribute in FACTOR_NAMES:
        return getattr(sample.factors, attribute)
    value = getattr(sample, attribute)
    if value is None:
        raise RegimeDataError(
            f"sample ({sample.user_id!r}, {sample.event_id!r}) lacks "
            f"{attribute!r}, required by regime {regime.value}"
        )
    return value


def sample_target(sample: Sample, regime: Regime) -> float:
    if regime is Regime.IA0_INIT:
        if sample.score_init is None:
            raise RegimeDataError(
                f"sample ({sample.user_id!r}, {sample.event_id!r}) lacks an "
                "initial score, required by regime ia0_init"
            )
        return sample.score_init
    return sample.score_fin


def design_matrix(samples: Sequence[Sample], spec: AssumptionSpec
                  ) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Inputs, targets, and attribute names for a regime's fit."""
    attrs = REGIME_ATTRIBUTES[spec.regime]
    X = np.array([[_sample_value(s, a, spec.regime) for a in attrs] for s in samples])
    y = np.array([sample_target(s, spec.regime) for s in samples])
    return X, y, attrs


def _fit_one(X: np.ndarray, y: np.ndarray, attrs: tuple[str, ...],
             spec: AssumptionSpec, branch: Optional[str] = None
             ) -> tuple[float, dict[str, float], frozenset[str]]:
    floor = len(attrs) + 2
    if X.shape[0] < floor:
        where = f" in branch {branch}" if branch else ""
        raise InsufficientSamples(
            f"{X.shape[0]} samples{where}, need at least {floor}", branch=branch
        )
    if spec.attribute_selection:
        kept, (intercept, coefs) = eliminate_attributes(X, y, spec.ridge, attrs)
    else:
        kept = attrs
        intercept, coefs = fit_linear(X, y, spec.ridge)
    coefficients = {name: float(c) for name, c in zip(kept, coefs)}
    dropped = frozenset(attrs) - frozenset(kept)
    return intercept, coefficients, dropped


def fit_assumption(samples: Sequence[Sample], spec: AssumptionSpec,
                   config: Config = DEFAULT_CONFIG) -> FitResult:
    """Fit one scoring function under the given assumption regime."""
    samples = list(samples)
    regime = spec.regime
    if regime in (Regime.IAXD_THI, Regime.IAXD_TYI):
        return _fit_piecewise(samples, spec, config)

    X, y, attrs = design_matrix(samples, spec)
    intercept, coefficients, dropped = _fit_one(X, y, attrs, spec)
    function = ScoringFunction(intercept=intercept, coefficients=coefficients)
    predictions = [score(sample_values(s), function) for s in samples]
    return FitResult(function, rmse(predictions, y), len(samples), dropped)


def sample_values(sample: Sample) -> dict[str, float]:
    values = sample.factors.as_dict()
    if sample.u_abs is not None:
        values["u_abs"] = sample.u_abs
    if sample.u_rel is not None:
        values["u_rel"] = sample.u_rel
    return values


def _fit_piecewise(samples: list[Sample], spec: AssumptionSpec,
                   config: Config) -> FitResult:
    split = "thi" if spec.regime is Regime.IAXD_THI else "tyi"
    interval = config.score_interval
    for t in spec.thresholds:
        if not interval.lb < t < interval.ub:
            raise ValueError(
                f"threshold {t} not inside ({interval.lb}, {interval.ub})"
            )
    edges = (interval.lb,) + spec.thresholds + (interval.ub,)
    branches: list[list[Sample]] = [[] for _ in range(len(spec.thresholds) + 1)]
    for sample in samples:
        value = getattr(sample.factors, split)
        index = len(spec.thresholds)
        for i, threshold in enumerate(spec.thresholds):
            if value < threshold:
                index = i
                break
        branches[index].append(sample)

    attrs = REGIME_ATTRIBUTES[spec.regime]
    pieces: list[Piece] = []
    dropped: set[str] = set()
    for i, branch_samples in enumerate(branches):
        label = f"[{edges[i]}, {edges[i + 1]}" + ("]" if i == len(branches) - 1 else ")")
        X, y, _ = design_matrix(branch_samples, spec) if branch_samples else (
            np.empty((0, len(attrs))), np.empty(0), attrs)
        intercept, coefficients, branch_dropped = _fit_one(X, y, attrs, spec, label)
        pieces.append(Piece(intercept, coefficients))
        dropped |= branch_dropped

    function = ScoringFunction(
        split_attribute=split, thresholds=spec.thresholds, pieces=tuple(pieces)
    )
    y_all = np.array([sample_target(s, spec.regime) for s in samples])
    predictions = [score(sample_values(s), function) for s in samples]
    return FitResult(function, rmse(predictions, y_all), len(samples), frozenset(dropped))
