"""HTTP API over a loaded dataset: scoring, ranking, models, training runs.

The bundle is loaded once and never mutated, so read endpoints share it
without locks. Training requests become background jobs on a single FIFO
worker; finished runs atomically swap an enlarged model store into place.
JSON numbers are rendered in plain decimal (never scientific) notation.
"""

from __future__ import annotations

import queue
import threading
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import dataio, published, textjson
from .errors import EvrecError
from .experiments import SplitPlan, run_protocol
from .model import UserProfile
from .regression import AssumptionSpec, Regime
from .scoring import FACTOR_NAMES, ScoringFunction, factor_vector, rank


class DecimalJSONResponse(JSONResponse):
    def render(self, content) -> bytes:
        return textjson.dumps(content).encode("utf-8")


def _error_body(code: str, message: str, detail=None) -> dict:
    return {"code": code, "message": message, "detail": detail}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        self.status = status
        self.body = _error_body(code, message, detail)
        super().__init__(message)


class RankRequest(BaseModel):
    user_id: str
    weights: dict[str, float] = Field(default_factory=dict)
    intercept: float = 0.0


class TrainRequest(BaseModel):
    regimes: list[str]
    splits: int = 15
    seed: int = 0


class ModelStore:
    """Immutable-snapshot model store; replacement swaps the whole dict."""

    def __init__(self, initial: dict[str, dict]):
        self._snapshot = dict(initial)

    def snapshot(self) -> dict[str, dict]:
        return self._snapshot

    def extend(self, additions: dict[str, dict]) -> None:
        merged = dict(self._snapshot)
        merged.update(additions)
        self._snapshot = merged


def _initial_models(data_dir: Path) -> dict[str, dict]:
    models: dict[str, dict] = {}
    for name, func in published.PUBLISHED_FUNCTIONS.items():
        models[name] = {
            "id": name,
            "regime": published.PUBLISHED_REGIMES[name],
            "source": "published-defaults",
            "function": func,
        }
    models_dir = data_dir / "models"
    if models_dir.is_dir():
        for path in sorted(models_dir.glob("*.json")):
            try:
                func, meta = dataio.load_function(path)
            except EvrecError:
                continue
            model_id = path.stem
            models[model_id] = {
                "id": model_id,
                "regime": meta.get("regime"),
                "source": str(path),
                "function": func,
            }
    return models


class TrainWorker:
    """Single background thread running queued training jobs in FIFO order."""

    def __init__(self, samples, config, store: ModelStore, runs_dir: Path):
        self.samples = samples
        self.config = config
        self.store = store
        self.runs_dir = runs_dir
        self.runs: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._queue: queue.Queue = queue.Queue()
        self._thread: Optional[threading.Thread] = None

    def _ensure_thread(self):
        if self._thread is None or not self._thread.is_alive():
            self._thread = threading.Thread(target=self._loop, daemon=True)
            self._thread.start()

    def submit(self, specs: list[AssumptionSpec], splits: int, seed: int) -> str:
        run_id = f"run-{uuid.uuid4().hex[:12]}"
        record = {
            "run_id": run_id,
            "status": "queued",
            "regimes": [s.regime.value for s in specs],
            "splits": splits,
            "seed": seed,
            "created_at": dataio.now_utc(),
        }
        with self._lock:
            self.runs[run_id] = record
        self._persist(record)
        self._queue.put((run_id, specs, splits, seed))
        self._ensure_thread()
        return run_id

    def get(self, run_id: str) -> Optional[dict]:
        with self._lock:
            record = self.runs.get(run_id)
            return dict(record) if record is not None else None

    def _set(self, run_id: str, **updates) -> dict:
        with self._lock:
            self.runs[run_id].update(updates)
            record = dict(self.runs[run_id])
        self._persist(record)
        return record

    def _persist(self, record: dict) -> None:
        try:
            self.runs_dir.mkdir(parents=True, exist_ok=True)
            body = {k: v for k, v in record.items() if k != "report"}
            (self.runs_dir / f"{record['run_id']}.json").write_text(
                textjson.dumps(body), encoding="utf-8")
        except OSError:
            pass  # persistence is best-effort; polling still works in-memory

    def _loop(self):
        while True:
            run_id, specs, splits, seed = self._queue.get()
            self._set(run_id, status="running")
            try:
                plan = SplitPlan(seed=seed, n_splits=splits)
                report = run_protocol(self.samples, [], specs, plan, self.config)
                additions = {}
                for name, func in report.averaged_functions.items():
                    model_id = f"{run_id}/{name}"
                    additions[model_id] = {
                        "id": model_id,
                        "regime": name,
                        "source": run_id,
                        "function": func,
                    }
                self.store.extend(additions)
                self._set(run_id, status="done",
                          report=dataio.report_to_dict(report),
                          models=sorted(additions))
            except Exception as exc:  # failed runs are reported, not fatal
                self._set(run_id, status="error", error=str(exc))


def _function_payload(func: ScoringFunction) -> dict:
    return dataio.function_to_dict(func)


def _event_payload(event) -> dict:
    payload = {
        "event_id": event.id,
        "themes": sorted(lb.text for lb in event.themes),
        "types": sorted(lb.text for lb in event.etype),
        "avg_rating": event.avg_rating_input,
        "friends_count": event.friends_count,
    }
    if event.precomputed_distance_km is not None:
        payload["dist_km"] = event.precomputed_distance_km
    else:
        payload["location"] = {
            "center_x": event.location.center_x,
            "center_y": event.location.center_y,
            "radius": event.location.radius,
        }
    if event.raters:
        payload["n_raters"] = len(event.raters)
    return payload


def create_app(data_dir, config=None) -> FastAPI:
    data_dir = Path(data_dir)
    bundle = dataio.load_bundle(data_dir)
    if config is not None:
        bundle.config = config
    build = dataio.build_samples(bundle)
    store = ModelStore(_initial_models(data_dir))
    worker = TrainWorker(build.samples, bundle.config, store, data_dir / "runs")
    events_by_id = bundle.event_map()
    users_by_id = bundle.user_map()

    app = FastAPI(title="evrec", default_response_class=DecimalJSONResponse)

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return DecimalJSONResponse(exc.body, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(p) for p in e.get("loc", [])], "msg": str(e.get("msg", ""))}
            for e in exc.errors()
        ]
        return DecimalJSONResponse(
            _error_body("validation_error", "invalid request body", detail),
            status_code=422,
        )

    def _get_user(user_id: str) -> UserProfile:
        user = users_by_id.get(user_id)
        if user is None:
            raise ApiError(404, "not_found", f"unknown user {user_id!r}")
        return user

    @app.get("/api/v1/events")
    def list_events():
        return {"events": [_event_payload(e) for e in bundle.events]}

    @app.get("/api/v1/users")
    def list_users():
        return {"users": [
            {"user_id": u.id, "mov_km": u.mov_km,
             "has_self_weights": u.self_weights is not None}
            for u in bundle.users
        ]}

    @app.get("/api/v1/users/{user_id}/factors")
    def user_factors(user_id: str):
        user = _get_user(user_id)
        rows = []
        for event in bundle.events:
            try:
                fv = factor_vector(user, event, bundle.config)
                rows.append({"event_id": event.id, "factors": fv.as_dict()})
            except EvrecError as exc:
                rows.append({"event_id": event.id, "error": str(exc)})
        return {"user_id": user_id, "events": rows}

    @app.post("/api/v1/rank")
    def rank_events(request: RankRequest):
        user = _get_user(request.user_id)
        weights = request.weights
        if not weights:
            raise ApiError(422, "validation_error",
                           "at least one factor weight required",
                           {"valid_factors": list(FACTOR_NAMES)})
        unknown = sorted(set(weights) - set(FACTOR_NAMES))
        if unknown:
            raise ApiError(422, "validation_error",
                           f"unknown factor(s): {', '.join(unknown)}",
                           {"valid_factors": list(FACTOR_NAMES)})
        bad = sorted(k for k, v in weights.items()
                     if not isinstance(v, (int, float)) or v != v or v in (float("inf"), float("-inf")))
        if bad:
            raise ApiError(422, "validation_error",
                           f"non-finite weight(s): {', '.join(bad)}")
        func = ScoringFunction(intercept=request.intercept, coefficients=weights)
        rows = []
        for entry in rank(user, bundle.events, func, bundle.config):
            if entry.error is not None:
                rows.append({"event_id": entry.event_id, "error": entry.error})
                continue
            factors = entry.factors.as_dict()
            contributions = {name: weights[name] * factors[name] for name in weights}
            rows.append({
                "event_id": entry.event_id,
                "score": entry.score,
                "factors": factors,
                "contributions": contributions,
                "intercept": request.intercept,
            })
        return {"user_id": request.user_id, "weights": weights,
                "intercept": request.intercept, "results": rows}

    @app.get("/api/v1/models")
    def list_models():
        snapshot = store.snapshot()
        return {"models": [
            {"id": m["id"], "regime": m["regime"], "source": m["source"],
             "piecewise": m["function"].is_piecewise}
            for m in snapshot.values()
        ]}

    @app.get("/api/v1/models/{model_id:path}")
    def get_model(model_id: str):
        model = store.snapshot().get(model_id)
        if model is None:
            raise ApiError(404, "not_found", f"unknown model {model_id!r}")
        return {"id": model["id"], "regime": model["regime"],
                "source": model["source"],
                "function": _function_payload(model["function"])}

    @app.post("/api/v1/train")
    def start_train(request: TrainRequest):
        if not request.regimes:
            raise ApiError(422, "validation_error", "at least one regime required",
                           {"valid_regimes": [r.value for r in Regime]})
        specs = []
        for name in request.regimes:
            try:
                specs.append(AssumptionSpec(Regime(name)))
            except ValueError:
                raise ApiError(422, "validation_error", f"unknown regime {name!r}",
                               {"valid_regimes": [r.value for r in Regime]})
        if request.splits < 2:
            raise ApiError(422, "validation_error", "splits must be >= 2")
        if request.seed < 0:
            raise ApiError(422, "validation_error", "seed must be >= 0")
        run_id = worker.submit(specs, request.splits, request.seed)
        return {"run_id": run_id}

    @app.get("/api/v1/runs/{run_id}")
    def get_run(run_id: str):
        record = worker.get(run_id)
        if record is None:
            raise ApiError(404, "not_found", f"unknown run {run_id!r}")
        return record

    frontend_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if frontend_dist.is_dir():
        app.mount("/", StaticFiles(directory=frontend_dist, html=True), name="ui")

    return app
