"""Generation orchestration: the bounded retry loop with diagnostic feedback.

Attempt 1 runs at the configured initial temperature; every retry runs at the
reduced retry temperature and carries the prior output plus its diagnostics
in the prompt.  A run ends at the first attempt that both parses and passes
semantic validation, or after N attempts with outcome SYNTACTICALLY_INVALID.
Runs append to a JSON-lines log, one attempt per line with the run envelope
repeated, so an interrupted run replays to the same state.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from . import gateway
from .ast import DslModel
from .diagnostics import Diagnostic, SourceSpan, error
from .parser import parse
from .prompts import PromptSpec, RenderedPrompt, build_generation_prompt, build_retry_prompt
from .validate import validate


class Stage(Enum):
    DATA_MODEL = "data_model"
    UI_MODEL = "ui_model"


class Outcome(Enum):
    VALID = "valid"
    SYNTACTICALLY_INVALID = "syntactically_invalid"


class PipelineFatalError(Exception):
    """A FATAL backend error aborted the run before an outcome was reached."""


@dataclass(frozen=True)
class PipelineConfig:
    max_attempts: int = 3
    initial_temperature: float = 0.8
    retry_temperature: float = 0.1
    review_gate: bool = False

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.retry_temperature > self.initial_temperature:
            raise ValueError("retry_temperature must not exceed "
                             "initial_temperature")


@dataclass
class GenerationAttempt:
    attempt_no: int
    temperature: float
    prompt_hash: str
    raw_output: str
    extracted_dsl: str
    parse_ok: bool
    semantic_ok: bool
    diagnostics: list[Diagnostic]
    latency_ms: int
    timestamp: str  # UTC ISO-8601
    prompt_text: str = ""  # kept so rating-task exports can show the prompt

    def to_dict(self) -> dict:
        return {
            "attempt_no": self.attempt_no,
            "temperature": self.temperature,
            "prompt_hash": self.prompt_hash,
            "raw_output": self.raw_output,
            "extracted_dsl": self.extracted_dsl,
            "parse_ok": self.parse_ok,
            "semantic_ok": self.semantic_ok,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "latency_ms": self.latency_ms,
            "timestamp": self.timestamp,
            "prompt_text": self.prompt_text,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationAttempt":
        return cls(
            attempt_no=data["attempt_no"],
            temperature=data["temperature"],
            prompt_hash=data["prompt_hash"],
            raw_output=data["raw_output"],
            extracted_dsl=data["extracted_dsl"],
            parse_ok=data["parse_ok"],
            semantic_ok=data["semantic_ok"],
            diagnostics=[Diagnostic.from_dict(d) for d in data["diagnostics"]],
            latency_ms=data["latency_ms"],
            timestamp=data["timestamp"],
            prompt_text=data.get("prompt_text", ""),
        )


@dataclass
class GenerationRun:
    run_id: str
    scenario_id: str
    model_id: str
    stage: Stage
    attempts: list[GenerationAttempt] = field(default_factory=list)
    outcome: Outcome = Outcome.SYNTACTICALLY_INVALID
    final_model: DslModel | None = None

    @property
    def final_attempt(self) -> GenerationAttempt | None:
        return self.attempts[-1] if self.attempts else None

    def envelope(self) -> dict:
        return {
            "run_id": self.run_id,
            "scenario_id": self.scenario_id,
            "model_id": self.model_id,
            "stage": self.stage.value,
            "outcome": self.outcome.value,
        }


def _utc_now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="milliseconds")


def _transport_diagnostic(exc: gateway.GatewayError) -> Diagnostic:
    return error("E901", SourceSpan(1, 1),
                 f"backend failure: {exc}",
                 hint="transport failure consumed this attempt")


def _attempt_prompt(spec: PromptSpec,
                    prior: GenerationAttempt | None) -> RenderedPrompt:
    if prior is None or not prior.diagnostics:
        return build_generation_prompt(spec)
    return build_retry_prompt(spec, prior.extracted_dsl or prior.raw_output,
                              prior.diagnostics)


def run_generation(cfg: PipelineConfig, spec: PromptSpec, model_id: str,
                   backend: gateway.BackendConfig,
                   scenario_id: str = "adhoc",
                   stage: Stage = Stage.DATA_MODEL,
                   run_id: str | None = None,
                   log_path: str | Path | None = None) -> GenerationRun:
    """Execute one N-bounded generation episode for (scenario, model)."""
    run = GenerationRun(
        run_id=run_id or uuid.uuid4().hex,
        scenario_id=scenario_id,
        model_id=model_id,
        stage=stage,
    )
    prior: GenerationAttempt | None = None
    for attempt_no in range(1, cfg.max_attempts + 1):
        temperature = (cfg.initial_temperature if attempt_no == 1
                       else cfg.retry_temperature)
        prompt = _attempt_prompt(spec, prior)
        request = gateway.ChatRequest(
            model_id=model_id,
            messages=prompt.messages,
            temperature=temperature,
        )
        timestamp = _utc_now()
        try:
            response = gateway.complete(backend, request)
        except gateway.GatewayError as exc:
            if not exc.retryable:
                raise PipelineFatalError(str(exc)) from exc
            attempt = GenerationAttempt(
                attempt_no=attempt_no,
                temperature=temperature,
                prompt_hash=prompt.template_hash,
                raw_output="",
                extracted_dsl="",
                parse_ok=False,
                semantic_ok=False,
                diagnostics=[_transport_diagnostic(exc)],
                latency_ms=0,
                timestamp=timestamp,
                prompt_text=prompt.as_text(),
            )
            run.attempts.append(attempt)
            prior = attempt
            continue

        extracted = gateway.extract_dsl(response.content)
        result = parse(extracted, source_name=f"{scenario_id}/{model_id}")
        if result.ok:
            report = validate(result.model)
            semantic_ok = report.valid
            diagnostics = list(report.errors)
        else:
            semantic_ok = False
            diagnostics = list(result.diagnostics)
        attempt = GenerationAttempt(
            attempt_no=attempt_no,
            temperature=temperature,
            prompt_hash=prompt.template_hash,
            raw_output=response.content,
            extracted_dsl=extracted,
            parse_ok=result.ok,
            semantic_ok=semantic_ok,
            diagnostics=diagnostics,
            latency_ms=response.latency_ms,
            timestamp=timestamp,
            prompt_text=prompt.as_text(),
        )
        run.attempts.append(attempt)
        if result.ok and semantic_ok:
            run.outcome = Outcome.VALID
            run.final_model = result.model
            break
        prior = attempt
    if log_path is not None:
        persist_run(run, log_path)
    return run


def run_two_stage(cfg: PipelineConfig, spec: PromptSpec, model_id: str,
                  backend: gateway.BackendConfig,
                  scenario_id: str = "adhoc",
                  approve=None,
                  log_path: str | Path | None = None,
                  ) -> tuple[GenerationRun, GenerationRun | None]:
    """Stage 1 generates the data model; when the review gate is on, the
    printed model goes through ``approve`` (printed_text -> approved_text
    or None to reject) before any further stage.  No UI-model grammar ships,
    so the second stage is a hook that currently always returns None.
    """
    from .printer import print_model

    data_run = run_generation(cfg, spec, model_id, backend,
                              scenario_id=scenario_id,
                              stage=Stage.DATA_MODEL, log_path=log_path)
    if data_run.outcome is not Outcome.VALID:
        return data_run, None
    if cfg.review_gate:
        if approve is None:
            raise ValueError("review_gate requires an approve callback")
        printed = print_model(data_run.final_model)
        approved = approve(printed)
        if approved is None:
            return data_run, None
        if approved != printed:
            result = parse(approved, source_name=f"{scenario_id}:reviewed")
            if result.ok and validate(result.model).valid:
                data_run.final_model = result.model
            else:
                raise ValueError("reviewed model no longer parses/validates")
    return data_run, None


_log_lock = threading.Lock()


def persist_run(run: GenerationRun, log_path: str | Path) -> int:
    """Append one line per attempt; a single locked write keeps concurrent
    persists from interleaving.  Returns the number of lines written."""
    lines = []
    envelope = run.envelope()
    for attempt in run.attempts:
        record = dict(envelope)
        record["attempt"] = attempt.to_dict()
        lines.append(json.dumps(record, ensure_ascii=False))
    payload = "".join(line + "\n" for line in lines)
    path = Path(log_path)
    with _log_lock:
        with path.open("a", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
    return len(lines)


def load_runs(log_path: str | Path) -> list[GenerationRun]:
    """Rebuild runs from the append-only log; corrupt lines are fatal and
    reported with their line number."""
    runs: dict[str, GenerationRun] = {}
    path = Path(log_path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                run_id = record["run_id"]
                attempt = GenerationAttempt.from_dict(record["attempt"])
                outcome = Outcome(record["outcome"])
                stage = Stage(record["stage"])
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(
                    f"{path}:{lineno}: corrupt run log line: {exc}") from exc
            run = runs.get(run_id)
            if run is None:
                run = GenerationRun(
                    run_id=run_id,
                    scenario_id=record["scenario_id"],
                    model_id=record["model_id"],
                    stage=stage,
                )
                runs[run_id] = run
            run.attempts.append(attempt)
            run.outcome = outcome
    for run in runs.values():
        final = run.final_attempt
        if run.outcome is Outcome.VALID and final is not None:
            result = parse(final.extracted_dsl)
            if result.ok:
                run.final_model = result.model
    return list(runs.values())
