import json
import threading

import pytest

from dslgen.gateway import BackendConfig, BackendKind
from dslgen.pipeline import (
    GenerationRun,
    Outcome,
    PipelineConfig,
    PipelineFatalError,
    Stage,
    load_runs,
    persist_run,
    run_generation,
    run_two_stage,
)
from dslgen.prompts import PromptSpec

VALID_DSL = ("main concept Shop {\n    one name : string isId;\n"
             "    flavors <>--> Flavor;\n}\n"
             "concept Flavor {\n    one label : string;\n}")
INVALID_DSL = "concept Shop { one name : string }"       # missing ';'
SEMANTIC_BAD = "main concept Shop { owner --> Person; }"  # V102


def make_spec(user_input="an ice cream shop"):
    return PromptSpec(
        grammar_text="model = { element } ;",
        user_input=user_input,
        examples=(("a zoo", "main concept Zoo {\n}\n"),),
    )


def test_success_after_two_failures_uses_temperature_schedule(replay_backend):
    backend = replay_backend({"m1": [INVALID_DSL, INVALID_DSL, VALID_DSL]})
    run = run_generation(PipelineConfig(max_attempts=3), make_spec(), "m1",
                         backend)
    assert run.outcome is Outcome.VALID
    assert [a.temperature for a in run.attempts] == [0.8, 0.1, 0.1]
    assert [a.attempt_no for a in run.attempts] == [1, 2, 3]
    assert run.final_model is not None


def test_immediate_success_is_single_attempt(replay_backend):
    backend = replay_backend({"m1": [VALID_DSL]})
    run = run_generation(PipelineConfig(), make_spec(), "m1", backend)
    assert run.outcome is Outcome.VALID
    assert len(run.attempts) == 1
    assert run.attempts[0].temperature == 0.8


def test_all_invalid_marks_run_syntactically_invalid(replay_backend):
    backend = replay_backend({"m1": [INVALID_DSL] * 3})
    run = run_generation(PipelineConfig(max_attempts=3), make_spec(), "m1",
                         backend)
    assert run.outcome is Outcome.SYNTACTICALLY_INVALID
    assert len(run.attempts) == 3
    assert run.final_model is None
    assert all(not a.parse_ok for a in run.attempts)


def test_semantic_failure_also_retries(replay_backend):
    backend = replay_backend({"m1": [SEMANTIC_BAD, VALID_DSL]})
    run = run_generation(PipelineConfig(), make_spec(), "m1", backend)
    assert run.outcome is Outcome.VALID
    first = run.attempts[0]
    assert first.parse_ok and not first.semantic_ok
    assert any(d.code == "V102" for d in first.diagnostics)


def test_fenced_output_is_extracted(replay_backend):
    backend = replay_backend({"m1": [f"Here you go:\n```\n{VALID_DSL}\n```"]})
    run = run_generation(PipelineConfig(), make_spec(), "m1", backend)
    assert run.outcome is Outcome.VALID
    assert run.attempts[0].extracted_dsl.startswith("main concept Shop")


def test_feedback_threading_carries_prior_diagnostics(replay_backend, tmp_path):
    backend = replay_backend({"m1": [INVALID_DSL, VALID_DSL]})
    run = run_generation(PipelineConfig(), make_spec(), "m1", backend)
    first_diags = run.attempts[0].diagnostics
    retry_prompt = run.attempts[1].prompt_text
    assert first_diags
    for diag in first_diags:
        assert diag.message in retry_prompt
    assert INVALID_DSL in retry_prompt


def test_fatal_backend_error_aborts(replay_backend):
    backend = replay_backend({"other": ["x"]})
    with pytest.raises(PipelineFatalError):
        run_generation(PipelineConfig(), make_spec(), "m1", backend)


def test_http_transport_failure_consumes_attempts():
    backend = BackendConfig(kind=BackendKind.OPENAI_COMPATIBLE,
                            base_url="http://127.0.0.1:1", timeout_s=1)
    run = run_generation(PipelineConfig(max_attempts=2), make_spec(), "m1",
                         backend)
    assert run.outcome is Outcome.SYNTACTICALLY_INVALID
    assert len(run.attempts) == 2
    assert all(d.code == "E901"
               for a in run.attempts for d in a.diagnostics)


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(max_attempts=0)
    with pytest.raises(ValueError):
        PipelineConfig(initial_temperature=0.1, retry_temperature=0.5)


def test_attempt_bound_invariant(replay_backend):
    for n in (1, 2, 4):
        backend = replay_backend({"m1": [INVALID_DSL] * n})
        run = run_generation(PipelineConfig(max_attempts=n), make_spec(),
                             "m1", backend, run_id=f"run-{n}")
        assert 1 <= len(run.attempts) <= n
        from dslgen import gateway
        gateway.reset_replay()


# -- two-stage ---------------------------------------------------------------

def test_two_stage_without_review(replay_backend):
    backend = replay_backend({"m1": [VALID_DSL]})
    data_run, ui_run = run_two_stage(PipelineConfig(), make_spec(), "m1",
                                     backend)
    assert data_run.outcome is Outcome.VALID
    assert ui_run is None


def test_two_stage_review_gate_blocks_for_approval(replay_backend):
    backend = replay_backend({"m1": [VALID_DSL]})
    seen = {}

    def approve(printed):
        seen["printed"] = printed
        return printed

    cfg = PipelineConfig(review_gate=True)
    data_run, _ = run_two_stage(cfg, make_spec(), "m1", backend,
                                approve=approve)
    assert "main concept Shop" in seen["printed"]
    assert data_run.outcome is Outcome.VALID


def test_two_stage_review_rejection(replay_backend):
    backend = replay_backend({"m1": [VALID_DSL]})
    cfg = PipelineConfig(review_gate=True)
    data_run, ui_run = run_two_stage(cfg, make_spec(), "m1", backend,
                                     approve=lambda printed: None)
    assert ui_run is None


def test_two_stage_invalid_stage1_skips_review(replay_backend):
    backend = replay_backend({"m1": [INVALID_DSL] * 3})
    cfg = PipelineConfig(review_gate=True)
    data_run, ui_run = run_two_stage(cfg, make_spec(), "m1", backend,
                                     approve=lambda printed: printed)
    assert data_run.outcome is Outcome.SYNTACTICALLY_INVALID
    assert ui_run is None


# -- persistence -------------------------------------------------------------

def test_persist_and_load_round_trip(replay_backend, tmp_path):
    log = tmp_path / "runs.jsonl"
    backend = replay_backend({"m1": [INVALID_DSL, VALID_DSL]})
    run = run_generation(PipelineConfig(), make_spec(), "m1", backend,
                         scenario_id="s1", log_path=log)
    (loaded,) = load_runs(log)
    assert loaded.run_id == run.run_id
    assert loaded.scenario_id == "s1"
    assert loaded.outcome is run.outcome
    assert loaded.stage is Stage.DATA_MODEL
    assert [a.to_dict() for a in loaded.attempts] == \
        [a.to_dict() for a in run.attempts]
    assert loaded.final_model is not None


def test_concurrent_persists_do_not_interleave(tmp_path):
    log = tmp_path / "runs.jsonl"
    from dslgen.diagnostics import Diagnostic
    from dslgen.pipeline import GenerationAttempt

    def attempt(i):
        return GenerationAttempt(
            attempt_no=1, temperature=0.8, prompt_hash="h",
            raw_output="x" * 2000, extracted_dsl="concept A {}",
            parse_ok=True, semantic_ok=False, diagnostics=[],
            latency_ms=0, timestamp="t")

    def persist(i):
        run = GenerationRun(run_id=f"r{i}", scenario_id="s", model_id="m",
                            stage=Stage.DATA_MODEL,
                            attempts=[attempt(i)])
        persist_run(run, log)

    threads = [threading.Thread(target=persist, args=(i,)) for i in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    lines = log.read_text().splitlines()
    assert len(lines) == 16
    assert {json.loads(line)["run_id"] for line in lines} == \
        {f"r{i}" for i in range(16)}


def test_corrupt_line_reports_line_number(tmp_path):
    log = tmp_path / "runs.jsonl"
    log.write_text('{"run_id": "a", "scenario_id": "s", "model_id": "m", '
                   '"stage": "data_model", "outcome": "valid", '
                   '"attempt": {"attempt_no": 1, "temperature": 0.8, '
                   '"prompt_hash": "h", "raw_output": "", '
                   '"extracted_dsl": "", "parse_ok": true, '
                   '"semantic_ok": true, "diagnostics": [], '
                   '"latency_ms": 0, "timestamp": "t"}}\n'
                   "{broken\n")
    with pytest.raises(ValueError, match=":2:"):
        load_runs(log)
