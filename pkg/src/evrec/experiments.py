"""Evaluation protocol: seeded random splits, paired t-tests, report assembly.

Every run is deterministic given its seed: splits are drawn from a PCG64
generator seeded with (seed, split_index), so the same plan reproduces the
same partitions on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.stats

from .errors import EvrecError, TooFewSamples
from .model import Config, DEFAULT_CONFIG
from .regression import (AssumptionSpec, FitResult, Regime, Sample,
                         fit_assumption, rmse, sample_target, sample_values)
from .scoring import Piece, ScoringFunction, score


@dataclass(frozen=True)
class SplitPlan:
    """How to draw the train/validation splits."""

    seed: int
    n_splits: int = 15
    train_fraction: float = 2.0 / 3.0
    stratify_by_user: bool = False

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.n_splits < 2:
            raise ValueError("n_splits must be >= 2")
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")


def _round_split(n: int, fraction: float) -> int:
    return min(max(int(round(fraction * n)), 1), n - 1)


def split_dataset(samples: Sequence, seed: int, split_index: int,
                  train_fraction: float = 2.0 / 3.0,
                  stratify_by_user: bool = False) -> tuple[list, list]:
    """Deterministic disjoint, exhaustive partition into (train, validation).

    The stratified mode splits each user's rows separately, which keeps every
    user represented in training; the default draws over rows, matching the
    protocol the RMSE tables assume.
    """
    samples = list(samples)
    n = len(samples)
    if n < 3:
        raise TooFewSamples(f"need at least 3 samples to split, got {n}")
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence([seed, split_index]))

    if not stratify_by_user:
        order = rng.permutation(n)
        n_train = _round_split(n, train_fraction)
        train_idx, val_idx = order[:n_train], order[n_train:]
    else:
        groups: dict[str, list[int]] = {}
        for i, sample in enumerate(samples):
            groups.setdefault(sample.user_id, []).append(i)
        train_idx, val_idx = [], []
        for user_id in sorted(groups):
            indices = np.array(groups[user_id])
            order = indices[rng.permutation(len(indices))]
            k = int(round(train_fraction * len(indices)))
            train_idx.extend(order[:k])
            val_idx.extend(order[k:])
        if not val_idx:  # tiny per-user groups can round everything into train
            val_idx.append(train_idx.pop())
        if not train_idx:
            train_idx.append(val_idx.pop())
    return [samples[i] for i in train_idx], [samples[i] for i in val_idx]


def t_critical(p: float, df: int) -> float:
    """Student-t inverse CDF (quantile) at probability p with df degrees."""
    if not 0 < p < 1:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    return float(scipy.stats.t.ppf(p, df))


@dataclass(frozen=True)
class TTestResult:
    """Paired t-test of a against b; percentages are relative to mean(b)."""

    mean_delta: float
    mean_delta_pct: float
    ci95_halfwidth: Optional[float]
    t_stat: float
    df: int
    zero_variance: bool = False


def paired_t_test(a, b) -> TTestResult:
    """Paired t-test on elementwise differences d = a - b.

    The percentage fields are expressed relative to the mean of the second
    argument. When the differences have zero variance the result is flagged
    and carries no confidence interval.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired test needs equal-length vectors, got {a.shape}, {b.shape}")
    n = a.size
    if n < 2:
        raise ValueError(f"paired test needs at least 2 pairs, got {n}")
    d = a - b
    mean_d = float(d.mean())
    sd = float(d.std(ddof=1))
    base = float(b.mean())
    pct = mean_d / base * 100.0 if base != 0 else math.nan
    if sd == 0:
        t = math.inf if mean_d > 0 else (-math.inf if mean_d < 0 else math.nan)
        return TTestResult(mean_d, pct, None, t, n - 1, zero_variance=True)
    se = sd / math.sqrt(n)
    t = mean_d / se
    halfwidth = t_critical(0.975, n - 1) * se
    halfwidth_pct = halfwidth / abs(base) * 100.0 if base != 0 else math.nan
    return TTestResult(mean_d, pct, halfwidth_pct, t, n - 1)


@dataclass(frozen=True)
class TTestCell:
    """One t-test matrix entry: candidate regime against a baseline regime.

    delta_pct is the candidate's RMSE reduction as a percentage of the
    baseline's mean RMSE, so positive means the candidate predicts better.
    basis records which RMSE series (test or validation) was compared.
    """

    candidate: str
    baseline: str
    basis: str
    mean_delta: float
    delta_pct: float
    ci95_pct: Optional[float]
    t_stat: float
    df: int
    zero_variance: bool = False


@dataclass(frozen=True)
class CellError:
    regime: str
    split: Optional[int]
    stage: str
    message: str


@dataclass
class ExperimentReport:
    """All tables produced by one protocol run."""

    seed: int
    n_splits: int
    train_fraction: float
    stratify_by_user: bool
    regimes: list[str]
    config: dict
    validation_rmse: dict[str, list[Optional[float]]]
    test_rmse: Optional[dict[str, list[Optional[float]]]]
    coefficient_splits: Optional[dict] = None
    coefficient_summary: Optional[dict] = None
    ttests: list[TTestCell] = field(default_factory=list)
    errors: list[CellError] = field(default_factory=list)
    averaged_functions: dict[str, ScoringFunction] = field(default_factory=dict)


def _summary_stats(values: Sequence[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return {"mean": mean, "ci95": 0.0, "t": math.nan}
    sd = float(arr.std(ddof=1))
    se = sd / math.sqrt(arr.size)
    ci = t_critical(0.975, arr.size - 1) * se if se > 0 else 0.0
    t = mean / se if se > 0 else math.inf
    return {"mean": mean, "ci95": ci, "t": t}


def _average_functions(fits: Sequence[ScoringFunction]) -> ScoringFunction:
    """Coefficient-wise mean; a coefficient survives only if present in every
    split's function (a factor dropped anywhere stays dropped)."""
    first = fits[0]
    if first.is_piecewise:
        pieces = []
        for i in range(len(first.pieces)):
            branch = [f.pieces[i] for f in fits]
            pieces.append(_average_piece(branch))
        return ScoringFunction(
            split_attribute=first.split_attribute,
            thresholds=first.thresholds,
            pieces=tuple(pieces),
        )
    piece = _average_piece([Piece(f.intercept, f.coefficients) for f in fits])
    return ScoringFunction(intercept=piece.intercept, coefficients=piece.coefficients)


def _average_piece(pieces: Sequence[Piece]) -> Piece:
    intercept = float(np.mean([p.intercept for p in pieces]))
    common = set(pieces[0].coefficients)
    for p in pieces[1:]:
        common &= set(p.coefficients)
    coefficients = {
        name: float(np.mean([p.coefficients[name] for p in pieces]))
        for name in sorted(common)
    }
    return Piece(intercept, coefficients)


def _series_pairs(x: list[Optional[float]], y: list[Optional[float]]
                  ) -> tuple[np.ndarray, np.ndarray]:
    pairs = [(a, b) for a, b in zip(x, y) if a is not None and b is not None]
    if len(pairs) < 2:
        return np.empty(0), np.empty(0)
    ax, ay = zip(*pairs)
    return np.asarray(ax, dtype=float), np.asarray(ay, dtype=float)


def compare_series(candidate: Sequence[float], baseline: Sequence[float]
                   ) -> tuple[float, float, Optional[float], float, int, bool]:
    """Improvement of candidate over baseline, normalized by the baseline mean.

    Returns (mean_delta, delta_pct, ci95_pct, t, df, zero_variance) where the
    deltas are baseline - candidate, positive when the candidate's RMSE is
    lower.
    """
    test = paired_t_test(baseline, candidate)
    base_mean = float(np.mean(baseline))
    if base_mean != 0:
        delta_pct = test.mean_delta / base_mean * 100.0
        ci_pct = None
        if not test.zero_variance:
            n = len(list(baseline))
            d = np.asarray(baseline, dtype=float) - np.asarray(candidate, dtype=float)
            ci_pct = (t_critical(0.975, n - 1) * float(d.std(ddof=1)) / math.sqrt(n)
                      / abs(base_mean) * 100.0)
    else:
        delta_pct, ci_pct = math.nan, None
    return test.mean_delta, delta_pct, ci_pct, test.t_stat, test.df, test.zero_variance


def run_protocol(train_pool: Sequence[Sample], test_pool: Sequence[Sample],
                 regimes: Sequence[AssumptionSpec], plan: SplitPlan,
                 config: Config = DEFAULT_CONFIG) -> ExperimentReport:
    """Train every regime once per split; collect validation RMSE, held-out
    test RMSE, coefficient summaries, and the pairwise t-test matrix.

    Per-cell fit failures are recorded in the report rather than raised. With
    an empty test pool the run is validation-only and t-tests fall back to
    the validation series.
    """
    train_pool = list(train_pool)
    test_pool = list(test_pool)
    regime_names = [spec.regime.value for spec in regimes]
    if len(set(regime_names)) != len(regime_names):
        raise ValueError("duplicate regimes in protocol")

    validation_rmse: dict[str, list[Optional[float]]] = {n: [] for n in regime_names}
    test_rmse: dict[str, list[Optional[float]]] = {n: [] for n in regime_names}
    fits: dict[str, list[Optional[FitResult]]] = {n: [] for n in regime_names}
    errors: list[CellError] = []

    for index in range(plan.n_splits):
        train, validation = split_dataset(
            train_pool, plan.seed, index, plan.train_fraction, plan.stratify_by_user
        )
        for spec in regimes:
            name = spec.regime.value
            try:
                fit = fit_assumption(train, spec, config)
            except EvrecError as exc:
                errors.append(CellError(name, index, "fit", str(exc)))
                fits[name].append(None)
                validation_rmse[name].append(None)
                test_rmse[name].append(None)
                continue
            fits[name].append(fit)
            validation_rmse[name].append(
                _pool_rmse(fit.function, validation, spec, errors, name, index, "validation")
            )
            if test_pool:
                test_rmse[name].append(
                    _pool_rmse(fit.function, test_pool, spec, errors, name, index, "test")
                )
            else:
                test_rmse[name].append(None)

    report = ExperimentReport(
        seed=plan.seed,
        n_splits=plan.n_splits,
        train_fraction=plan.train_fraction,
        stratify_by_user=plan.stratify_by_user,
        regimes=regime_names,
        config=config.to_dict(),
        validation_rmse=validation_rmse,
        test_rmse=test_rmse if test_pool else None,
    )

    _collect_coefficients(report, fits)
    _collect_averages(report, fits)
    _collect_ttests(report, validation_rmse, test_rmse if test_pool else None)
    report.errors.extend(errors)
    return report


def _pool_rmse(function: ScoringFunction, pool: Sequence[Sample],
               spec: AssumptionSpec, errors: list[CellError], regime: str,
               split: int, stage: str) -> Optional[float]:
    try:
        predicted = [score(sample_values(s), function) for s in pool]
        observed = [sample_target(s, spec.regime) for s in pool]
        return rmse(predicted, observed)
    except EvrecError as exc:
        errors.append(CellError(regime, split, stage, str(exc)))
        return None


def _collect_coefficients(report: ExperimentReport,
                          fits: dict[str, list[Optional[FitResult]]]) -> None:
    name = Regime.IAX.value
    if name not in fits:
        return
    rows = [f for f in fits[name] if f is not None]
    if not rows:
        return
    seen = {k for f in rows for k in f.function.coefficients}
    canonical = [n for n in ("thi", "tyi", "rat", "rch", "frn") if n in seen]
    factor_names = canonical + sorted(seen - set(canonical))
    per_split = [
        {k: f.function.coefficients.get(k) for k in factor_names} for f in rows
    ]
    intercepts = [f.function.intercept for f in rows]
    report.coefficient_splits = {"factors": factor_names, "rows": per_split,
                                 "intercepts": intercepts}

    summary: dict[str, dict[str, float]] = {}
    for k in factor_names:
        values = [row[k] for row in per_split if row[k] is not None]
        if values:
            summary[k] = _summary_stats(values)
    ratios = []
    for f in rows:
        c = f.function.coefficients
        content = c.get("thi", 0.0) + c.get("tyi", 0.0)
        additional = c.get("rat", 0.0) + c.get("rch", 0.0) + c.get("frn", 0.0)
        if content != 0:
            ratios.append(additional / content)
    if ratios:
        summary["R"] = _summary_stats(ratios)
    report.coefficient_summary = summary


def _collect_averages(report: ExperimentReport,
                      fits: dict[str, list[Optional[FitResult]]]) -> None:
    for name, results in fits.items():
        functions = [f.function for f in results if f is not None]
        if functions:
            report.averaged_functions[name] = _average_functions(functions)


def _collect_ttests(report: ExperimentReport,
                    validation: dict[str, list[Optional[float]]],
                    test: Optional[dict[str, list[Optional[float]]]]) -> None:
    names = report.regimes
    for candidate in names:
        for baseline in names:
            if candidate == baseline:
                continue
            basis = None
            if test is not None:
                cand, base = _series_pairs(test[candidate], test[baseline])
                if cand.size >= 2:
                    basis = "test"
            if basis is None:
                cand, base = _series_pairs(validation[candidate], validation[baseline])
                if cand.size >= 2:
                    basis = "validation"
            if basis is None:
                report.errors.append(CellError(
                    candidate, None, "ttest",
                    f"no comparable RMSE series against {baseline}"))
                continue
            mean_delta, delta_pct, ci_pct, t, df, zero_var = compare_series(cand, base)
            report.ttests.append(TTestCell(
                candidate, baseline, basis, mean_delta, delta_pct, ci_pct, t, df,
                zero_var))
