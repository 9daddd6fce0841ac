"""Command-line driver: ingest, train, score, serve, synth, export-models."""

from __future__ import annotations

import os
import sys
import uuid
from pathlib import Path

import click

from . import dataio, published
from .errors import EvrecError
from .experiments import SplitPlan, run_protocol
from .regression import AssumptionSpec, Regime
from .scoring import rank
from .synth import generate_dataset
from . import textjson

VALID_REGIMES = ", ".join(r.value for r in Regime)


def _data_dir_default():
    return os.environ.get("EVREC_DATA_DIR")


def _load_bundle_or_exit(directory) -> dataio.DatasetBundle:
    try:
        return dataio.load_bundle(directory)
    except EvrecError as exc:
        raise click.UsageError(str(exc))


def _parse_regimes(values: tuple[str, ...]) -> list[Regime]:
    names: list[str] = []
    for value in values:
        names.extend(n.strip() for n in value.split(",") if n.strip())
    if not names:
        raise click.UsageError(f"at least one --regime required (one of: {VALID_REGIMES})")
    regimes = []
    for name in names:
        try:
            regimes.append(Regime(name))
        except ValueError:
            raise click.BadParameter(
                f"unknown regime {name!r}; valid regimes: {VALID_REGIMES}",
                param_hint="--regime",
            )
    return regimes


@click.group()
@click.version_option(package_name="evrec")
def main():
    """Event recommendation: factor scoring and the regression experiment lab."""


@main.command()
@click.argument("directory", type=click.Path(file_okay=False))
def ingest(directory):
    """Load and validate a dataset directory; exit 0 only with zero rejects."""
    bundle = _load_bundle_or_exit(directory)
    result = dataio.build_samples(bundle)
    for warning in bundle.warnings:
        click.echo(f"warning: {warning}")
    click.echo(
        f"{len(bundle.events)} events, {len(bundle.users)} users, "
        f"{len(result.samples)} samples, {len(result.rejects)} rejects"
    )
    for reject in result.rejects:
        click.echo(f"reject: ({reject.user_id}, {reject.event_id}): {reject.error}")
    if result.rejects:
        sys.exit(1)


@main.command()
@click.option("--regime", "regimes", multiple=True, required=True,
              help=f"Regime name(s), repeatable or comma-separated. One of: {VALID_REGIMES}")
@click.option("--splits", default=15, show_default=True, type=click.IntRange(min=2))
@click.option("--seed", default=0, show_default=True, type=click.IntRange(min=0))
@click.option("--train", "train_dir", type=click.Path(file_okay=False),
              default=_data_dir_default, help="Training pool directory "
              "[defaults to $EVREC_DATA_DIR].")
@click.option("--test", "test_dir", type=click.Path(file_okay=False), default=None,
              help="Held-out test pool directory.")
@click.option("--train-fraction", default=2.0 / 3.0, show_default=True)
@click.option("--stratify-by-user", is_flag=True, default=False,
              help="Split each user's rows separately (sensitivity mode).")
@click.option("--ridge", default=1.0e-8, show_default=True)
@click.option("--select-attributes", is_flag=True, default=False,
              help="Backward attribute elimination during each fit.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="evrec_out",
              show_default=True)
def train(regimes, splits, seed, train_dir, test_dir, train_fraction,
          stratify_by_user, ridge, select_attributes, out_dir):
    """Run the split/fit/test protocol and write report + averaged models."""
    specs = [AssumptionSpec(r, ridge=ridge, attribute_selection=select_attributes)
             for r in _parse_regimes(regimes)]
    if train_dir is None:
        raise click.UsageError("--train required (or set EVREC_DATA_DIR)")
    train_bundle = _load_bundle_or_exit(train_dir)
    train_result = dataio.build_samples(train_bundle)
    if train_result.rejects:
        click.echo(f"note: {len(train_result.rejects)} training rows rejected")
    test_samples = []
    if test_dir is not None:
        test_result = dataio.build_samples(_load_bundle_or_exit(test_dir))
        if test_result.rejects:
            click.echo(f"note: {len(test_result.rejects)} test rows rejected")
        test_samples = test_result.samples

    plan = SplitPlan(seed=seed, n_splits=splits, train_fraction=train_fraction,
                     stratify_by_user=stratify_by_user)
    try:
        report = run_protocol(train_result.samples, test_samples, specs, plan,
                              train_bundle.config)
    except EvrecError as exc:
        raise click.ClickException(str(exc))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataio.save_report(report, out / "report.json")
    (out / "report.txt").write_text(dataio.render_report_text(report),
                                    encoding="utf-8")
    model_files = {}
    for name, func in report.averaged_functions.items():
        model_path = out / f"model_{name}.json"
        dataio.save_function(func, model_path, regime=name, seed=seed,
                             config=train_bundle.config,
                             created_at=dataio.now_utc())
        model_files[name] = str(model_path)
    run_record = {
        "run_id": f"run-{uuid.uuid4().hex[:12]}",
        "regimes": [s.regime.value for s in specs],
        "seed": seed,
        "created_at": dataio.now_utc(),
        "report": str(out / "report.json"),
        "models": model_files,
    }
    (out / "run.json").write_text(textjson.dumps(run_record), encoding="utf-8")

    click.echo(dataio.render_report_text(report))
    click.echo(f"report written to {out / 'report.json'}")
    if all(v is None for row in report.validation_rmse.values() for v in row):
        raise click.ClickException("every protocol cell failed; see report errors")


@main.command()
@click.option("--user", "user_id", required=True)
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_dir", type=click.Path(file_okay=False),
              default=_data_dir_default, help="Dataset directory "
              "[defaults to $EVREC_DATA_DIR].")
@click.option("--top", "top_k", type=click.IntRange(min=1), default=None,
              help="Only the best K events.")
def score(user_id, model_path, data_dir, top_k):
    """Rank the dataset's events for one user with a stored model."""
    if data_dir is None:
        raise click.UsageError("--data required (or set EVREC_DATA_DIR)")
    bundle = _load_bundle_or_exit(data_dir)
    try:
        func, _meta = dataio.load_function(model_path)
    except EvrecError as exc:
        raise click.UsageError(str(exc))
    user = bundle.user_map().get(user_id)
    if user is None:
        raise click.UsageError(f"unknown user {user_id!r}")
    rows = rank(user, bundle.events, func, bundle.config)
    if top_k is not None:
        rows = rows[:top_k]
    header = (f"{'rank':>4}  {'event':<12} {'score':>8}  "
              f"{'thi':>7} {'tyi':>7} {'rat':>7} {'rch':>7} {'frn':>7}")
    click.echo(header)
    for position, row in enumerate(rows, start=1):
        if row.error is not None:
            click.echo(f"{position:>4}  {row.event_id:<12} {'-':>8}  error: {row.error}")
            continue
        f = row.factors
        click.echo(
            f"{position:>4}  {row.event_id:<12} {row.score:>8.4f}  "
            f"{f.thi:>7.3f} {f.tyi:>7.3f} {f.rat:>7.3f} {f.rch:>7.3f} {f.frn:>7.3f}"
        )


@main.command()
@click.option("--data", "data_dir", type=click.Path(file_okay=False),
              default=_data_dir_default, help="Dataset directory "
              "[defaults to $EVREC_DATA_DIR].")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
def serve(data_dir, host, port):
    """Serve the scoring/training HTTP API (and the UI's backend)."""
    import uvicorn

    from .service import create_app

    if data_dir is None:
        raise click.UsageError("--data required (or set EVREC_DATA_DIR)")
    app = create_app(data_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("directory", type=click.Path(file_okay=False))
@click.option("--users", default=40, show_default=True, type=click.IntRange(min=1))
@click.option("--events", default=15, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=click.IntRange(min=0))
@click.option("--noise-sd", default=0.5, show_default=True)
def synth(directory, users, events, seed, noise_sd):
    """Generate a synthetic dataset with known ground-truth coefficients."""
    out = generate_dataset(directory, n_users=users, n_events=events, seed=seed,
                           noise_sd=noise_sd)
    click.echo(f"synthetic dataset written to {out}")


@main.command("export-models")
@click.argument("directory", type=click.Path(file_okay=False))
def export_models(directory):
    """Write the shipped default scoring functions as model files."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, func in published.PUBLISHED_FUNCTIONS.items():
        dataio.save_function(func, out / f"{name}.json",
                             regime=published.PUBLISHED_REGIMES[name])
    click.echo(f"{len(published.PUBLISHED_FUNCTIONS)} models written to {out}")


if __name__ == "__main__":
    main()
