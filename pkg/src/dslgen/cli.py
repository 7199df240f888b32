"""Command-line entry points.

  dslgen validate FILE               exit 0 valid / 1 invalid / 2 parse error
  dslgen generate ...                one scenario through the retry pipeline
  dslgen eval run|aggregate|tasks    batch evaluation and exports
  dslgen serve ...                   the rating service
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import evalhub, pipeline
from .gateway import BackendConfig, BackendKind
from .parser import parse
from .printer import print_model
from .prompts import default_spec, render_feedback
from .validate import validate as validate_model


@click.group()
def main() -> None:
    """Toolchain for LLM-generated entity-modeling DSL documents."""


def _backend_from_options(endpoint: str | None, replay: str | None,
                          api_key: str | None) -> BackendConfig:
    if replay:
        return BackendConfig(kind=BackendKind.REPLAY, fixture_path=replay)
    if endpoint:
        return BackendConfig(kind=BackendKind.OPENAI_COMPATIBLE,
                             base_url=endpoint, api_key=api_key)
    cfg = BackendConfig.from_env()
    if not cfg.base_url:
        raise click.UsageError(
            "no backend: pass --endpoint/--replay or set LLM_BASE_URL")
    return cfg


@main.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.option("--json", "as_json", is_flag=True,
              help="emit the diagnostic report as JSON")
def validate(file: Path, as_json: bool) -> None:
    """Parse and semantically validate a .dsl file."""
    source = file.read_text(encoding="utf-8")
    result = parse(source, source_name=str(file))
    if not result.ok:
        if as_json:
            click.echo(json.dumps(
                {"valid": False,
                 "diagnostics": [d.to_dict() for d in result.diagnostics]},
                indent=2))
        else:
            click.echo(render_feedback(result.diagnostics, source))
        sys.exit(2)
    report = validate_model(result.model)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        for diag in report.diagnostics:
            click.echo(f"{file}:{diag.span.line}:{diag.span.column}: "
                       f"[{diag.code}] {diag.message}")
        click.echo("valid" if report.valid else "invalid")
    sys.exit(0 if report.valid else 1)


@main.command()
@click.option("--scenario", required=True,
              help="scenario text, or a path to a text file")
@click.option("--model", "model_id", required=True)
@click.option("--max-attempts", default=3, show_default=True)
@click.option("--temp", default=0.8, show_default=True,
              help="temperature for the first attempt")
@click.option("--retry-temp", default=0.1, show_default=True,
              help="temperature for retries")
@click.option("--endpoint", default=None, help="OpenAI-compatible base URL")
@click.option("--api-key", default=None, envvar="LLM_API_KEY")
@click.option("--replay", default=None,
              type=click.Path(exists=True),
              help="replay fixture instead of a live endpoint")
@click.option("--review", is_flag=True,
              help="pause for approval of the generated model")
@click.option("--out", default=None, type=click.Path(path_type=Path),
              help="append the run to this JSONL log")
def generate(scenario: str, model_id: str, max_attempts: int, temp: float,
             retry_temp: float, endpoint: str | None, api_key: str | None,
             replay: str | None, review: bool, out: Path | None) -> None:
    """Generate a DSL model for one scenario with retry-on-failure."""
    scenario_path = Path(scenario)
    if scenario_path.exists():
        user_input = scenario_path.read_text(encoding="utf-8").strip()
        scenario_id = scenario_path.stem
    else:
        user_input = scenario
        scenario_id = "cli"
    cfg = pipeline.PipelineConfig(
        max_attempts=max_attempts,
        initial_temperature=temp,
        retry_temperature=retry_temp,
        review_gate=review,
    )
    backend = _backend_from_options(endpoint, replay, api_key)
    spec = default_spec(user_input)

    def approve(printed: str) -> str | None:
        click.echo(printed)
        if click.confirm("Approve this model?", default=True):
            return printed
        return None

    try:
        run, _ = pipeline.run_two_stage(
            cfg, spec, model_id, backend, scenario_id=scenario_id,
            approve=approve if review else None, log_path=out)
    except pipeline.PipelineFatalError as exc:
        raise click.ClickException(f"backend error: {exc}")
    click.echo(f"outcome: {run.outcome.value} "
               f"({len(run.attempts)} attempt(s))")
    if run.final_model is not None:
        click.echo(print_model(run.final_model), nl=False)
    else:
        final = run.final_attempt
        if final is not None:
            for diag in final.diagnostics:
                click.echo(f"[{diag.code}] line {diag.span.line}, "
                           f"col {diag.span.column}: {diag.message}")
    sys.exit(0 if run.outcome is pipeline.Outcome.VALID else 1)


@main.group(name="eval")
def eval_group() -> None:
    """Batch evaluation: run the matrix, aggregate ratings, export tasks."""


@eval_group.command(name="run")
@click.option("--registry", "registry_path", default=None,
              type=click.Path(exists=True),
              help="model registry JSON (defaults to the bundled registry)")
@click.option("--scenarios", "scenarios_path", default=None,
              type=click.Path(exists=True),
              help="scenario corpus JSON (defaults to the bundled corpus)")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--endpoint", default=None)
@click.option("--api-key", default=None, envvar="LLM_API_KEY")
@click.option("--replay", default=None, type=click.Path(exists=True))
@click.option("--max-attempts", default=3, show_default=True)
@click.option("--workers", default=1, show_default=True)
def eval_run(registry_path, scenarios_path, out: Path, endpoint, api_key,
             replay, max_attempts: int, workers: int) -> None:
    """Run every (model, scenario) pair and print the validity summary."""
    registry = evalhub.load_registry(
        registry_path or evalhub.bundled_registry_path())
    scenarios = evalhub.load_scenarios(
        scenarios_path or evalhub.bundled_scenarios_path())
    backend = _backend_from_options(endpoint, replay, api_key)
    cfg = pipeline.PipelineConfig(max_attempts=max_attempts)
    summary = evalhub.run_matrix(registry, scenarios, cfg, backend,
                                 log_path=out, max_workers=workers)
    click.echo(json.dumps(summary.to_dict(), indent=2))
    click.echo(f"{summary.valid_model_count} of {summary.total_models} models "
               f"produced at least one valid output")


@eval_group.command(name="aggregate")
@click.option("--runs", "runs_path", default=None, type=click.Path(exists=True),
              help="run log, used to flag syntactic validity")
@click.option("--ratings", "ratings_path", required=True,
              type=click.Path(exists=True))
@click.option("--registry", "registry_path", default=None,
              type=click.Path(exists=True))
@click.option("--csv", "csv_path", default=None, type=click.Path(path_type=Path))
@click.option("--json", "json_path", default=None, type=click.Path(path_type=Path))
@click.option("--max-params", default=None, type=float,
              help="keep only models at or below this size in billions")
@click.option("--sort-by", default="total",
              type=click.Choice(["total", "size"]), show_default=True)
def eval_aggregate(runs_path, ratings_path, registry_path, csv_path,
                   json_path, max_params, sort_by: str) -> None:
    """Aggregate Likert ratings into chart-ready rows."""
    registry = evalhub.load_registry(
        registry_path or evalhub.bundled_registry_path())
    ratings = []
    with open(ratings_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                ratings.append(evalhub.RatingRecord.from_dict(json.loads(line)))
    valid_models = None
    if runs_path:
        valid_models = {
            run.model_id for run in pipeline.load_runs(runs_path)
            if run.outcome is pipeline.Outcome.VALID
        }
    rows = evalhub.sort_rows(
        evalhub.aggregate(ratings, registry, valid_models=valid_models,
                          max_params=max_params),
        by=sort_by)
    if csv_path:
        evalhub.export_results(rows, "csv", csv_path)
    if json_path:
        evalhub.export_results(rows, "json", json_path)
    for row in rows:
        click.echo(f"{row.model_id:28s} {row.params_billions:7.2f}B "
                   f"total={row.total:5.2f} n={row.n_ratings}")


@eval_group.command(name="tasks")
@click.option("--runs", "runs_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--blind", is_flag=True,
              help="replace model ids with anonymous labels")
def eval_tasks(runs_path, out: Path, blind: bool) -> None:
    """Export rating tasks (valid runs only) for the human study."""
    document = evalhub.export_rating_tasks(runs_path, out, blind=blind)
    n_outputs = sum(len(t["outputs"]) for t in document["tasks"])
    click.echo(f"wrote {len(document['tasks'])} task(s), "
               f"{n_outputs} output(s) to {out}")


@main.command()
@click.option("--bind", default="127.0.0.1:8400", show_default=True)
@click.option("--tasks", "tasks_path", required=True,
              type=click.Path(path_type=Path))
@click.option("--ratings", "ratings_path", required=True,
              type=click.Path(path_type=Path))
def serve(bind: str, tasks_path: Path, ratings_path: Path) -> None:
    """Run the rating service."""
    import uvicorn

    from .service import create_app

    host, _, port = bind.partition(":")
    app = create_app(tasks_path, ratings_path)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8400))


if __name__ == "__main__":
    main()
