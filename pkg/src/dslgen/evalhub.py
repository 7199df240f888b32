"""Model registry, scenario corpus, batch driver, and score aggregation.

Likert ratings (four criteria, 1..5 each) are averaged per criterion across
raters and summed, so a model's total lands in [4, 20] with 20 the maximum.
Exports are chart-ready rows (CSV/JSON); rating-task exports feed the human
evaluation service and omit every run that never produced a valid model.
"""

from __future__ import annotations

import csv
import json
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import pipeline
from .gateway import BackendConfig
from .pipeline import GenerationRun, Outcome, PipelineConfig
from .printer import print_model
from .prompts import PromptSpec, default_example_pair, default_grammar_text
from .summary import concept_summary

CRITERIA = ("semantic_correctness", "concept_identification",
            "completeness", "advanced_features")

CSV_COLUMNS = ("model_id", "params_billions", "sem_correctness", "concept_id",
               "completeness", "adv_features", "total", "n_ratings",
               "syntactic_valid")


@dataclass(frozen=True)
class ModelEntry:
    model_id: str
    family: str
    params_billions: float
    notes: str = ""

    def __post_init__(self) -> None:
        if self.params_billions <= 0:
            raise ValueError(f"{self.model_id}: params_billions must be > 0")


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    user_input: str
    example_pair: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if not self.user_input.strip():
            raise ValueError(f"{self.scenario_id}: user_input must be non-empty")


@dataclass(frozen=True)
class CriterionScores:
    semantic_correctness: int
    concept_identification: int
    completeness: int
    advanced_features: int

    def __post_init__(self) -> None:
        for name in CRITERIA:
            value = getattr(self, name)
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise ValueError(f"{name} must be an integer in [1, 5], "
                                 f"got {value!r}")

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in CRITERIA}

    @classmethod
    def from_dict(cls, data: dict) -> "CriterionScores":
        return cls(**{name: data[name] for name in CRITERIA})

    @property
    def total(self) -> int:
        return sum(getattr(self, name) for name in CRITERIA)


@dataclass
class RatingRecord:
    """One rater's judgment of one model output; the schema the rating
    service appends and ``aggregate`` consumes unchanged."""

    rating_id: str
    task_id: str
    output_id: str
    rater_id: str
    model_id: str
    scores: CriterionScores
    comment: str | None = None
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "rating_id": self.rating_id,
            "task_id": self.task_id,
            "output_id": self.output_id,
            "rater_id": self.rater_id,
            "model_id": self.model_id,
            "scores": self.scores.to_dict(),
            "comment": self.comment,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RatingRecord":
        return cls(
            rating_id=data["rating_id"],
            task_id=data["task_id"],
            output_id=data["output_id"],
            rater_id=data["rater_id"],
            model_id=data["model_id"],
            scores=CriterionScores.from_dict(data["scores"]),
            comment=data.get("comment"),
            timestamp=data.get("timestamp", ""),
        )


@dataclass
class AggregateRow:
    model_id: str
    params_billions: float
    sem_correctness: float
    concept_id: float
    completeness: float
    adv_features: float
    total: float
    n_ratings: int
    syntactic_valid: bool = True

    def to_dict(self) -> dict:
        return {col: getattr(self, col) for col in CSV_COLUMNS}

    @classmethod
    def from_dict(cls, data: dict) -> "AggregateRow":
        return cls(**{col: data[col] for col in CSV_COLUMNS})


def bundled_registry_path() -> Path:
    return Path(str(resources.files("dslgen.data").joinpath("registry.json")))


def bundled_scenarios_path() -> Path:
    return Path(str(resources.files("dslgen.data").joinpath("scenarios.json")))


def load_registry(path: str | Path) -> list[ModelEntry]:
    """Parse a registry file; duplicate ids and non-positive params are fatal."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = [ModelEntry(**item) for item in raw]
    seen: set[str] = set()
    for entry in entries:
        if entry.model_id in seen:
            raise ValueError(f"duplicate model_id {entry.model_id!r}")
        seen.add(entry.model_id)
    return entries


def load_scenarios(path: str | Path) -> list[Scenario]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    scenarios = []
    for item in raw:
        pair = item.get("example_pair")
        scenarios.append(Scenario(
            scenario_id=item["scenario_id"],
            user_input=item["user_input"],
            example_pair=tuple(pair) if pair else None,
        ))
    seen: set[str] = set()
    for scenario in scenarios:
        if scenario.scenario_id in seen:
            raise ValueError(f"duplicate scenario_id {scenario.scenario_id!r}")
        seen.add(scenario.scenario_id)
    return scenarios


@dataclass
class MatrixSummary:
    """Validity bookkeeping over one full (model x scenario) sweep."""

    total_models: int
    valid_model_count: int  # models with >= 1 valid run anywhere
    per_model_valid_scenarios: dict[str, int] = field(default_factory=dict)
    fatal_errors: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total_models": self.total_models,
            "valid_model_count": self.valid_model_count,
            "per_model_valid_scenarios": self.per_model_valid_scenarios,
            "fatal_errors": self.fatal_errors,
        }


def _scenario_spec(scenario: Scenario) -> PromptSpec:
    pair = scenario.example_pair or default_example_pair()
    return PromptSpec(
        grammar_text=default_grammar_text(),
        user_input=scenario.user_input,
        examples=(pair,),
    )


def run_matrix(registry: list[ModelEntry], scenarios: list[Scenario],
               cfg: PipelineConfig, backend: BackendConfig,
               log_path: str | Path,
               max_workers: int = 1) -> MatrixSummary:
    """Run every (model, scenario) pair, appending runs to ``log_path``.

    FATAL backend errors are recorded per pair and do not abort the sweep.
    """
    if not registry or not scenarios:
        raise ValueError("registry and scenarios must be non-empty")
    summary = MatrixSummary(total_models=len(registry), valid_model_count=0)

    def one(pair: tuple[ModelEntry, Scenario]) -> tuple[str, str, GenerationRun | None, str]:
        entry, scenario = pair
        try:
            run = pipeline.run_generation(
                cfg, _scenario_spec(scenario), entry.model_id, backend,
                scenario_id=scenario.scenario_id, log_path=log_path)
            return entry.model_id, scenario.scenario_id, run, ""
        except pipeline.PipelineFatalError as exc:
            return entry.model_id, scenario.scenario_id, None, str(exc)

    pairs = [(entry, scenario) for entry in registry for scenario in scenarios]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(pair) for pair in pairs]

    valid_counts: dict[str, int] = {entry.model_id: 0 for entry in registry}
    for model_id, scenario_id, run, fatal in results:
        if fatal:
            summary.fatal_errors[f"{model_id}/{scenario_id}"] = fatal
        elif run is not None and run.outcome is Outcome.VALID:
            valid_counts[model_id] += 1
    summary.per_model_valid_scenarios = valid_counts
    summary.valid_model_count = sum(1 for c in valid_counts.values() if c > 0)
    return summary


def aggregate(ratings: list[RatingRecord], registry: list[ModelEntry],
              valid_models: set[str] | None = None,
              max_params: float | None = None) -> list[AggregateRow]:
    """Per-criterion means across raters per model; total is their sum.

    ``max_params`` filters to models at or below the threshold (the
    small-model view).  Permutation-invariant in the ratings list.
    """
    by_id = {entry.model_id: entry for entry in registry}
    grouped: dict[str, list[RatingRecord]] = {}
    for rating in ratings:
        if rating.model_id not in by_id:
            raise ValueError(f"rating references unknown model "
                             f"{rating.model_id!r}")
        grouped.setdefault(rating.model_id, []).append(rating)

    rows = []
    for model_id in sorted(grouped):
        entry = by_id[model_id]
        if max_params is not None and entry.params_billions > max_params:
            continue
        records = grouped[model_id]
        means = {
            name: sum(getattr(r.scores, name) for r in records) / len(records)
            for name in CRITERIA
        }
        rows.append(AggregateRow(
            model_id=model_id,
            params_billions=entry.params_billions,
            sem_correctness=means["semantic_correctness"],
            concept_id=means["concept_identification"],
            completeness=means["completeness"],
            adv_features=means["advanced_features"],
            total=sum(means.values()),
            n_ratings=len(records),
            syntactic_valid=(valid_models is None
                             or model_id in valid_models),
        ))
    return rows


def sort_rows(rows: list[AggregateRow], by: str = "total") -> list[AggregateRow]:
    """Order rows for chart rendering: by total score or by model size,
    both descending."""
    if by == "total":
        return sorted(rows, key=lambda r: (-r.total, r.model_id))
    if by == "size":
        return sorted(rows, key=lambda r: (-r.params_billions, r.model_id))
    raise ValueError(f"unknown sort key {by!r}")


def export_results(rows: list[AggregateRow], fmt: str,
                   path: str | Path) -> None:
    """Write aggregate rows as CSV or JSON with a stable column order."""
    if not rows:
        raise ValueError("no rows to export")
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row.to_dict())
    elif fmt == "json":
        path.write_text(
            json.dumps([row.to_dict() for row in rows], indent=2) + "\n",
            encoding="utf-8")
    else:
        raise ValueError(f"unknown export format {fmt!r}")


def import_results(path: str | Path) -> list[AggregateRow]:
    """Read back an export (either format), inverse of ``export_results``."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        rows = []
        with path.open(newline="", encoding="utf-8") as fh:
            for record in csv.DictReader(fh):
                record["params_billions"] = float(record["params_billions"])
                for col in ("sem_correctness", "concept_id", "completeness",
                            "adv_features", "total"):
                    record[col] = float(record[col])
                record["n_ratings"] = int(record["n_ratings"])
                record["syntactic_valid"] = record["syntactic_valid"] == "True"
                rows.append(AggregateRow.from_dict(record))
        return rows
    return [AggregateRow.from_dict(item)
            for item in json.loads(path.read_text(encoding="utf-8"))]


def _blind_label(index: int) -> str:
    letters = string.ascii_uppercase
    label = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        label = letters[rem] + label
    return f"Model {label}"


def export_rating_tasks(run_log: str | Path, path: str | Path,
                        blind: bool = False,
                        key_path: str | Path | None = None) -> dict:
    """Emit one rating task per scenario listing its VALID runs only.

    Each output carries the canonical printed DSL, a concept summary, and
    the originating prompt text.  With ``blind`` on, model ids are replaced
    by anonymous labels and the mapping goes to ``key_path``.
    """
    runs = pipeline.load_runs(run_log)
    by_scenario: dict[str, list[GenerationRun]] = {}
    for run in runs:
        if run.outcome is Outcome.VALID and run.final_model is not None:
            by_scenario.setdefault(run.scenario_id, []).append(run)

    tasks = []
    key: dict[str, str] = {}
    for scenario_id in sorted(by_scenario):
        outputs = []
        for index, run in enumerate(by_scenario[scenario_id]):
            output_id = f"{scenario_id}/{run.run_id}"
            label = _blind_label(index) if blind else run.model_id
            if blind:
                key[output_id] = run.model_id
            final = run.final_attempt
            outputs.append({
                "output_id": output_id,
                "label": label,
                "model_id": None if blind else run.model_id,
                "dsl_text": print_model(run.final_model),
                "summary": concept_summary(run.final_model).to_dict(),
                "prompt_text": final.prompt_text if final else "",
            })
        tasks.append({
            "task_id": scenario_id,
            "title": f"Scenario: {scenario_id}",
            "outputs": outputs,
        })
    document = {"tasks": tasks, "blinded": blind}
    Path(path).write_text(json.dumps(document, indent=2) + "\n",
                          encoding="utf-8")
    if blind:
        if key_path is None:
            key_path = Path(path).with_suffix(".key.json")
        Path(key_path).write_text(json.dumps(key, indent=2) + "\n",
                                  encoding="utf-8")
    return document
