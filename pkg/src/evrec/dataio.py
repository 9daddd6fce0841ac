"""Ingestion of survey-style CSV datasets and persistence of models/reports.

A dataset directory holds four UTF-8 CSV files with mandatory headers in this
exact column order:

    events.csv     event_id, themes, event_type, dist_km, friends_count, avg_rating
    users.csv      user_id, mov_km, w_rat, w_rch, w_frn
    interests.csv  user_id, label, kind, value
    responses.csv  user_id, event_id, score_init, score_fin

``themes`` and ``event_type`` are semicolon-joined label lists. Optional
values (friends_count, avg_rating, the weight triple, score_init) are empty
cells. An optional ``config.json`` overrides interval/constant defaults.

Persisted models and reports use the versioned ``evrec/1`` JSON format with
decimal (never scientific) number rendering.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import textjson
from .errors import EvrecError, IntegrityError, ParseError, VersionMismatch
from .experiments import CellError, ExperimentReport, TTestCell
from .model import (
    Config,
    DEFAULT_CONFIG,
    Event,
    GeoCircle,
    Label,
    LabelKind,
    UserProfile,
    Vocabulary,
)
from .regression import Sample
from .scoring import FactorVector, Piece, ScoringFunction, combined_user_factor, factor_vector
from .errors import ZeroWeights

FORMAT_VERSION = "evrec/1"

EVENTS_COLUMNS = ("event_id", "themes", "event_type", "dist_km", "friends_count", "avg_rating")
USERS_COLUMNS = ("user_id", "mov_km", "w_rat", "w_rch", "w_frn")
INTERESTS_COLUMNS = ("user_id", "label", "kind", "value")
RESPONSES_COLUMNS = ("user_id", "event_id", "score_init", "score_fin")


@dataclass(frozen=True)
class Response:
    user_id: str
    event_id: str
    score_fin: float
    score_init: Optional[float] = None


@dataclass
class DatasetBundle:
    events: list[Event]
    users: list[UserProfile]
    responses: list[Response]
    config: Config = DEFAULT_CONFIG
    warnings: list[str] = field(default_factory=list)

    def event_map(self) -> dict[str, Event]:
        return {e.id: e for e in self.events}

    def user_map(self) -> dict[str, UserProfile]:
        return {u.id: u for u in self.users}


def _read_rows(path: Path, columns: tuple[str, ...]):
    """Yield (line_number, row) after validating the header strictly."""
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(str(path), None, None, "file not found")
    except UnicodeDecodeError as exc:
        raise ParseError(str(path), None, None, f"not valid UTF-8: {exc}")
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(str(path), 1, None, "missing header row")
    except csv.Error as exc:
        raise ParseError(str(path), 1, None, f"malformed CSV: {exc}")
    header = [h.strip() for h in header]
    if tuple(header) != columns:
        raise ParseError(
            str(path), 1, None,
            f"header must be exactly {', '.join(columns)}; got {', '.join(header)}",
        )
    line = 1
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise ParseError(str(path), line + 1, None, f"malformed CSV: {exc}")
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(columns):
            raise ParseError(str(path), line, None,
                             f"expected {len(columns)} columns, got {len(row)}")
        yield line, [cell.strip() for cell in row]


def _parse_float(path: Path, line: int, column: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParseError(str(path), line, column, f"not a number: {raw!r}")


def _parse_optional_float(path: Path, line: int, column: str, raw: str) -> Optional[float]:
    return None if raw == "" else _parse_float(path, line, column, raw)


def _check_interval(path: Path, line: int, column: str, value: float, interval,
                    what: str) -> float:
    if not interval.contains(value):
        raise ParseError(str(path), line, column,
                         f"{what} {value} outside [{interval.lb}, {interval.ub}]")
    return value


def _split_labels(path: Path, line: int, column: str, raw: str) -> list[str]:
    parts = [p.strip() for p in raw.split(";")]
    parts = [p for p in parts if p]
    if not parts:
        raise ParseError(str(path), line, column, "at least one label required")
    return parts


def load_config(directory: Path) -> Config:
    path = directory / "config.json"
    if not path.exists():
        return DEFAULT_CONFIG
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), exc.lineno, None, exc.msg)
    try:
        return Config.from_dict(data)
    except (TypeError, ValueError, KeyError, IndexError) as exc:
        raise ParseError(str(path), None, None, f"bad config: {exc}")


def load_bundle(directory) -> DatasetBundle:
    """Load and validate a dataset directory into an immutable bundle.

    All referential-integrity and interval checks run here; malformed input
    yields a diagnostic, never a crash.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError(str(directory), None, None, "not a directory")
    config = load_config(directory)
    vocabulary = Vocabulary()
    warnings: list[str] = []

    events: list[Event] = []
    seen_events: set[str] = set()
    path = directory / "events.csv"
    for line, row in _read_rows(path, EVENTS_COLUMNS):
        event_id, themes_raw, types_raw, dist_raw, friends_raw, rating_raw = row
        if not event_id:
            raise ParseError(str(path), line, "event_id", "must be non-empty")
        if event_id in seen_events:
            raise IntegrityError("duplicate_event", [event_id])
        seen_events.add(event_id)
        themes = frozenset(
            vocabulary.register(t, LabelKind.THEME)
            for t in _split_labels(path, line, "themes", themes_raw)
        )
        types = frozenset(
            vocabulary.register(t, LabelKind.TYPE)
            for t in _split_labels(path, line, "event_type", types_raw)
        )
        dist = _parse_float(path, line, "dist_km", dist_raw)
        if dist < 0:
            raise ParseError(str(path), line, "dist_km", f"must be >= 0, got {dist}")
        friends = _parse_optional_float(path, line, "friends_count", friends_raw)
        if friends is not None and (friends < 0 or friends != int(friends)):
            raise ParseError(str(path), line, "friends_count",
                             f"must be a non-negative integer, got {friends_raw!r}")
        rating = _parse_optional_float(path, line, "avg_rating", rating_raw)
        if rating is not None:
            _check_interval(path, line, "avg_rating", rating,
                            config.rating_interval, "rating")
        events.append(Event(
            id=event_id,
            themes=themes,
            etype=types,
            precomputed_distance_km=dist,
            avg_rating_input=rating,
            friends_count=None if friends is None else int(friends),
        ))

    users: list[UserProfile] = []
    user_order: list[str] = []
    seen_users: set[str] = set()
    raw_weights: dict[str, Optional[tuple[float, float, float]]] = {}
    raw_mov: dict[str, float] = {}
    path = directory / "users.csv"
    for line, row in _read_rows(path, USERS_COLUMNS):
        user_id, mov_raw, w_rat_raw, w_rch_raw, w_frn_raw = row
        if not user_id:
            raise ParseError(str(path), line, "user_id", "must be non-empty")
        if user_id in seen_users:
            raise IntegrityError("duplicate_user", [user_id])
        seen_users.add(user_id)
        user_order.append(user_id)
        mov = _parse_float(path, line, "mov_km", mov_raw)
        if mov < 0:
            raise ParseError(str(path), line, "mov_km", f"must be >= 0, got {mov}")
        triple_raw = (w_rat_raw, w_rch_raw, w_frn_raw)
        if all(v == "" for v in triple_raw):
            weights = None
        elif any(v == "" for v in triple_raw):
            raise ParseError(str(path), line, "w_rat",
                             "self-weights must be all present or all empty")
        else:
            names = ("w_rat", "w_rch", "w_frn")
            values = []
            for name, raw in zip(names, triple_raw):
                w = _parse_float(path, line, name, raw)
                if not 0 <= w <= config.weight_ub:
                    raise ParseError(str(path), line, name,
                                     f"weight {w} outside [0, {config.weight_ub}]")
                values.append(w)
            weights = tuple(values)
        raw_mov[user_id] = mov
        raw_weights[user_id] = weights

    interests: dict[str, dict[Label, float]] = {u: {} for u in seen_users}
    path = directory / "interests.csv"
    for line, row in _read_rows(path, INTERESTS_COLUMNS):
        user_id, label_raw, kind_raw, value_raw = row
        if user_id not in seen_users:
            raise IntegrityError("unknown_user", [user_id],
                                 f"{path}:{line}: interest for unknown user {user_id!r}")
        if kind_raw not in (LabelKind.THEME.value, LabelKind.TYPE.value):
            raise ParseError(str(path), line, "kind",
                             f"kind must be 'theme' or 'type', got {kind_raw!r}")
        label = vocabulary.register(label_raw, kind_raw)
        value = _parse_float(path, line, "value", value_raw)
        _check_interval(path, line, "value", value, config.interest_interval, "interest")
        if label in interests[user_id]:
            raise IntegrityError("duplicate_interest", [user_id, label.text])
        interests[user_id][label] = value

    for user_id in user_order:
        users.append(UserProfile(
            id=user_id,
            position=GeoCircle(0.0, 0.0, 0.0),
            mov_km=raw_mov[user_id],
            interests=interests[user_id],
            self_weights=raw_weights[user_id],
        ))

    responses: list[Response] = []
    seen_pairs: set[tuple[str, str]] = set()
    path = directory / "responses.csv"
    for line, row in _read_rows(path, RESPONSES_COLUMNS):
        user_id, event_id, init_raw, fin_raw = row
        if user_id not in seen_users:
            raise IntegrityError("unknown_user", [user_id],
                                 f"{path}:{line}: response from unknown user {user_id!r}")
        if event_id not in seen_events:
            raise IntegrityError("unknown_event", [event_id],
                                 f"{path}:{line}: response for unknown event {event_id!r}")
        if (user_id, event_id) in seen_pairs:
            raise IntegrityError("duplicate_response", [user_id, event_id])
        seen_pairs.add((user_id, event_id))
        init = _parse_optional_float(path, line, "score_init", init_raw)
        if init is not None:
            _check_interval(path, line, "score_init", init, config.score_interval, "score")
        if fin_raw == "":
            raise ParseError(str(path), line, "score_fin", "must be present")
        fin = _parse_float(path, line, "score_fin", fin_raw)
        _check_interval(path, line, "score_fin", fin, config.score_interval, "score")
        responses.append(Response(user_id, event_id, fin, init))

    for event in events:
        warnings.extend(event.validate(config))
    for user in users:
        warnings.extend(user.validate(config))

    return DatasetBundle(events, users, responses, config, warnings)


@dataclass(frozen=True)
class Reject:
    user_id: str
    event_id: str
    error: str


@dataclass
class BuildResult:
    samples: list[Sample]
    rejects: list[Reject]


def build_samples(bundle: DatasetBundle) -> BuildResult:
    """One Sample per response; rows whose factors cannot be computed are
    collected as rejects while the clean rows are still returned."""
    event_map = bundle.event_map()
    user_map = bundle.user_map()
    samples: list[Sample] = []
    rejects: list[Reject] = []
    for response in bundle.responses:
        user = user_map[response.user_id]
        event = event_map[response.event_id]
        try:
            factors = factor_vector(user, event, bundle.config)
        except EvrecError as exc:
            rejects.append(Reject(response.user_id, response.event_id, str(exc)))
            continue
        u_abs = u_rel = None
        if user.self_weights is not None:
            u_abs = combined_user_factor(user, factors, "abs", bundle.config)
            try:
                u_rel = combined_user_factor(user, factors, "rel", bundle.config)
            except ZeroWeights:
                u_rel = None
        samples.append(Sample(
            user_id=response.user_id,
            event_id=response.event_id,
            factors=factors,
            score_fin=response.score_fin,
            score_init=response.score_init,
            u_abs=u_abs,
            u_rel=u_rel,
        ))
    return BuildResult(samples, rejects)


# ---------------------------------------------------------------------------
# Scoring-function persistence


def function_to_dict(func: ScoringFunction) -> dict:
    if func.is_piecewise:
        pieces = {
            "split_attribute": func.split_attribute,
            "thresholds": list(func.thresholds),
            "branches": [
                {"intercept": p.intercept, "coefficients": dict(p.coefficients)}
                for p in func.pieces
            ],
        }
        return {"intercept": None, "coefficients": None, "pieces": pieces}
    return {"intercept": func.intercept, "coefficients": dict(func.coefficients),
            "pieces": None}


def function_from_dict(data: dict) -> ScoringFunction:
    pieces = data.get("pieces")
    if pieces:
        return ScoringFunction(
            split_attribute=pieces["split_attribute"],
            thresholds=tuple(textjson.parse_number(t) for t in pieces["thresholds"]),
            pieces=tuple(
                Piece(textjson.parse_number(b["intercept"]),
                      {k: textjson.parse_number(v)
                       for k, v in b["coefficients"].items()})
                for b in pieces["branches"]
            ),
        )
    return ScoringFunction(
        intercept=textjson.parse_number(data["intercept"]),
        coefficients={k: textjson.parse_number(v)
                      for k, v in data["coefficients"].items()},
    )


def save_function(func: ScoringFunction, path, *, regime: Optional[str] = None,
                  seed: Optional[int] = None, config: Optional[Config] = None,
                  created_at: Optional[str] = None) -> None:
    document = {
        "format": FORMAT_VERSION,
        "kind": "scoring_function",
        "regime": regime,
        "seed": seed,
        "created_at": created_at,
        "config": config.to_dict() if config is not None else None,
        "function": function_to_dict(func),
    }
    Path(path).write_text(textjson.dumps(document), encoding="utf-8")


def _check_format(path, data: dict, kind: str) -> None:
    fmt = data.get("format")
    if fmt != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format {fmt!r}, expected {FORMAT_VERSION!r}")
    if data.get("kind") != kind:
        raise ParseError(str(path), None, None,
                         f"kind {data.get('kind')!r}, expected {kind!r}")


def load_function(path) -> tuple[ScoringFunction, dict]:
    """Returns the function and its metadata (regime, seed, config, ...)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(str(path), None, None, "file not found")
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), exc.lineno, None, exc.msg)
    _check_format(path, data, "scoring_function")
    metadata = {k: data.get(k) for k in ("regime", "seed", "created_at", "config")}
    return function_from_dict(data["function"]), metadata


def now_utc() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------------------
# Report persistence


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "experiment_report",
        "seed": report.seed,
        "n_splits": report.n_splits,
        "train_fraction": report.train_fraction,
        "stratify_by_user": report.stratify_by_user,
        "regimes": list(report.regimes),
        "config": report.config,
        "validation_rmse": report.validation_rmse,
        "test_rmse": report.test_rmse,
        "coefficient_splits": report.coefficient_splits,
        "coefficient_summary": report.coefficient_summary,
        "ttests": [
            {
                "candidate": c.candidate,
                "baseline": c.baseline,
                "basis": c.basis,
                "mean_delta": c.mean_delta,
                "delta_pct": c.delta_pct,
                "ci95_pct": c.ci95_pct,
                "t_stat": c.t_stat,
                "df": c.df,
                "zero_variance": c.zero_variance,
            }
            for c in report.ttests
        ],
        "errors": [
            {"regime": e.regime, "split": e.split, "stage": e.stage,
             "message": e.message}
            for e in report.errors
        ],
        "averaged_functions": {
            name: function_to_dict(func)
            for name, func in report.averaged_functions.items()
        },
    }


def _num_list(values) -> list:
    return [textjson.parse_number(v) for v in values]


def report_from_dict(data: dict) -> ExperimentReport:
    def num_table(table):
        if table is None:
            return None
        return {k: _num_list(v) for k, v in table.items()}

    coefficient_splits = data.get("coefficient_splits")
    if coefficient_splits is not None:
        coefficient_splits = {
            "factors": list(coefficient_splits["factors"]),
            "rows": [
                {k: textjson.parse_number(v) for k, v in row.items()}
                for row in coefficient_splits["rows"]
            ],
            "intercepts": _num_list(coefficient_splits["intercepts"]),
        }
    coefficient_summary = data.get("coefficient_summary")
    if coefficient_summary is not None:
        coefficient_summary = {
            name: {k: textjson.parse_number(v) for k, v in stats.items()}
            for name, stats in coefficient_summary.items()
        }
    return ExperimentReport(
        seed=data["seed"],
        n_splits=data["n_splits"],
        train_fraction=textjson.parse_number(data["train_fraction"]),
        stratify_by_user=data["stratify_by_user"],
        regimes=list(data["regimes"]),
        config=data["config"],
        validation_rmse=num_table(data["validation_rmse"]),
        test_rmse=num_table(data.get("test_rmse")),
        coefficient_splits=coefficient_splits,
        coefficient_summary=coefficient_summary,
        ttests=[
            TTestCell(
                candidate=c["candidate"],
                baseline=c["baseline"],
                basis=c["basis"],
                mean_delta=textjson.parse_number(c["mean_delta"]),
                delta_pct=textjson.parse_number(c["delta_pct"]),
                ci95_pct=textjson.parse_number(c.get("ci95_pct")),
                t_stat=textjson.parse_number(c["t_stat"]),
                df=c["df"],
                zero_variance=c["zero_variance"],
            )
            for c in data.get("ttests", [])
        ],
        errors=[
            CellError(e["regime"], e.get("split"), e["stage"], e["message"])
            for e in data.get("errors", [])
        ],
        averaged_functions={
            name: function_from_dict(f)
            for name, f in data.get("averaged_functions", {}).items()
        },
    )


def save_report(report: ExperimentReport, path) -> None:
    Path(path).write_text(textjson.dumps(report_to_dict(report)), encoding="utf-8")


def load_report(path) -> ExperimentReport:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(str(path), None, None, "file not found")
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), exc.lineno, None, exc.msg)
    _check_format(path, data, "experiment_report")
    return report_from_dict(data)


# ---------------------------------------------------------------------------
# Text rendering


def _fmt(value, width: int = 9) -> str:
    if value is None:
        return "-".rjust(width)
    if isinstance(value, float):
        return f"{value:.4f}".rjust(width)
    return str(value).rjust(width)


def render_report_text(report: ExperimentReport) -> str:
    """Human-readable tables: RMSE grids, coefficient summary, t-test matrix."""
    lines: list[str] = []
    lines.append(f"protocol: seed={report.seed} splits={report.n_splits} "
                 f"train_fraction={report.train_fraction:.4f}")
    lines.append("")

    def grid(title: str, table: dict[str, list[Optional[float]]]) -> None:
        lines.append(title)
        header = "regime".ljust(12) + "".join(
            str(i + 1).rjust(9) for i in range(report.n_splits))
        lines.append(header)
        for name in report.regimes:
            row = table.get(name)
            if row is None:
                continue
            lines.append(name.ljust(12) + "".join(_fmt(v) for v in row))
        lines.append("")

    grid("validation RMSE per split", report.validation_rmse)
    if report.test_rmse is not None:
        grid("test RMSE per split", report.test_rmse)

    if report.coefficient_summary:
        lines.append("coefficients (mean over splits, 0.95 CI, t)")
        lines.append("factor".ljust(12) + "mean".rjust(10) + "ci95".rjust(10)
                     + "t".rjust(12))
        for name, stats in report.coefficient_summary.items():
            lines.append(name.ljust(12) + _fmt(stats["mean"], 10)
                         + _fmt(stats["ci95"], 10) + _fmt(stats["t"], 12))
        lines.append("")

    if report.ttests:
        lines.append("paired t-tests (delta% = RMSE reduction vs baseline mean)")
        lines.append("candidate".ljust(12) + "baseline".ljust(12) + "basis".ljust(12)
                     + "delta%".rjust(9) + "ci95%".rjust(9) + "t".rjust(12)
                     + "df".rjust(5))
        for cell in report.ttests:
            lines.append(
                cell.candidate.ljust(12) + cell.baseline.ljust(12)
                + cell.basis.ljust(12) + _fmt(cell.delta_pct)
                + _fmt(cell.ci95_pct) + _fmt(cell.t_stat, 12)
                + str(cell.df).rjust(5)
            )
        lines.append("")

    if report.errors:
        lines.append("cell errors")
        for e in report.errors:
            split = "-" if e.split is None else str(e.split + 1)
            lines.append(f"  {e.regime} split {split} [{e.stage}]: {e.message}")
        lines.append("")
    return "\n".join(lines)
