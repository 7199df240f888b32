import json

import pytest
from fastapi.testclient import TestClient

from dslgen.evalhub import CriterionScores, RatingRecord, aggregate
from dslgen.service import create_app

TASK_DOC = {
    "tasks": [
        {
            "task_id": "t1",
            "title": "an ice cream shop",
            "outputs": [
                {
                    "output_id": "o1",
                    "label": "Model A",
                    "model_id": None,
                    "dsl_text": "main concept Shop {\n    one name : string;\n}",
                    "summary": {"concept_count": 1, "enum_count": 0,
                                "concepts": [], "enums": []},
                    "prompt_text": "generate a DSL",
                },
                {
                    "output_id": "o2",
                    "label": "Model B",
                    "model_id": None,
                    "dsl_text": "concept Shop {\n}",
                    "summary": {"concept_count": 1, "enum_count": 0,
                                "concepts": [], "enums": []},
                    "prompt_text": "generate a DSL",
                },
            ],
        }
    ],
    "blinded": True,
}

PROFILE = {
    "rater_id": "alice",
    "age_band": "25-34",
    "gender": "prefer not to say",
    "dsl_experience": "basic",
    "llm_usage_frequency": "weekly",
}

SCORES = {"semantic_correctness": 5, "concept_identification": 4,
          "completeness": 3, "advanced_features": 5}


@pytest.fixture
def service(tmp_path):
    tasks = tmp_path / "tasks.json"
    tasks.write_text(json.dumps(TASK_DOC))
    key = tmp_path / "tasks.key.json"
    key.write_text(json.dumps({"o1": "gemma3:1b", "o2": "phi4:14b"}))
    ratings = tmp_path / "ratings.jsonl"
    return tmp_path, TestClient(create_app(tasks, ratings))


def register(client, rater_id="alice"):
    body = dict(PROFILE, rater_id=rater_id)
    response = client.post("/api/raters", json=body)
    assert response.status_code == 201
    return rater_id


def submit(client, rater_id="alice", output_id="o1", scores=SCORES, **extra):
    return client.post("/api/ratings", json={
        "rater_id": rater_id, "task_id": "t1", "output_id": output_id,
        "scores": scores, **extra})


# -- task endpoints ----------------------------------------------------------

def test_task_list(service):
    _, client = service
    response = client.get("/api/tasks")
    assert response.status_code == 200
    assert response.json() == [
        {"task_id": "t1", "title": "an ice cream shop", "output_count": 2}]


def test_task_detail_hides_model_ids(service):
    _, client = service
    response = client.get("/api/tasks/t1")
    assert response.status_code == 200
    body = response.json()
    assert {o["label"] for o in body["outputs"]} == {"Model A", "Model B"}
    assert "gemma3" not in response.text
    assert all("dsl_text" in o and "summary" in o and "prompt_text" in o
               for o in body["outputs"])


def test_unknown_task_is_404(service):
    _, client = service
    assert client.get("/api/tasks/nope").status_code == 404


def test_missing_task_file_is_503(tmp_path):
    client = TestClient(create_app(tmp_path / "absent.json",
                                   tmp_path / "ratings.jsonl"))
    assert client.get("/api/tasks").status_code == 503
    assert client.get("/api/tasks/t1").status_code == 503


# -- rater registration ------------------------------------------------------

def test_register_rater(service):
    _, client = service
    register(client)


def test_bad_demographics_rejected(service):
    _, client = service
    body = dict(PROFILE, dsl_experience="expert")
    assert client.post("/api/raters", json=body).status_code == 400
    body = dict(PROFILE, llm_usage_frequency="hourly")
    assert client.post("/api/raters", json=body).status_code == 400


# -- rating submission -------------------------------------------------------

def test_submit_rating_happy_path(service):
    tmp_path, client = service
    register(client)
    response = submit(client, comment="solid model")
    assert response.status_code == 201
    assert response.json()["rating_id"]
    line = (tmp_path / "ratings.jsonl").read_text().splitlines()[0]
    record = json.loads(line)
    assert record["model_id"] == "gemma3:1b"  # resolved via key file
    assert record["scores"] == SCORES
    assert record["comment"] == "solid model"


def test_unregistered_rater_is_422(service):
    _, client = service
    assert submit(client, rater_id="ghost").status_code == 422


def test_out_of_range_score_is_400(service):
    _, client = service
    register(client)
    assert submit(client, scores=dict(SCORES, completeness=6)).status_code == 400
    assert submit(client, scores=dict(SCORES, completeness=0)).status_code == 400
    assert submit(client, scores=dict(SCORES, completeness=3.5)).status_code == 400


def test_missing_criterion_is_400(service):
    _, client = service
    register(client)
    partial = {k: v for k, v in SCORES.items() if k != "advanced_features"}
    assert submit(client, scores=partial).status_code == 400


def test_duplicate_rating_is_409(service):
    _, client = service
    register(client)
    assert submit(client).status_code == 201
    assert submit(client).status_code == 409
    # A different output from the same rater is still allowed.
    assert submit(client, output_id="o2").status_code == 201


def test_unknown_output_is_422(service):
    _, client = service
    register(client)
    assert submit(client, output_id="o99").status_code == 422


def test_output_task_mismatch_is_422(service):
    _, client = service
    register(client)
    response = client.post("/api/ratings", json={
        "rater_id": "alice", "task_id": "t2", "output_id": "o1",
        "scores": SCORES})
    assert response.status_code == 422


# -- progress ----------------------------------------------------------------

def test_progress_monotonic(service):
    _, client = service
    register(client)
    assert client.get("/api/progress/alice").json() == {"rated": 0, "total": 2}
    submit(client)
    assert client.get("/api/progress/alice").json() == {"rated": 1, "total": 2}
    submit(client, output_id="o2")
    assert client.get("/api/progress/alice").json() == {"rated": 2, "total": 2}


def test_progress_unknown_rater_is_404(service):
    _, client = service
    assert client.get("/api/progress/ghost").status_code == 404


def test_progress_is_per_rater(service):
    _, client = service
    register(client, "alice")
    register(client, "bob")
    submit(client, rater_id="alice")
    assert client.get("/api/progress/alice").json()["rated"] == 1
    assert client.get("/api/progress/bob").json()["rated"] == 0


# -- persistence -------------------------------------------------------------

def test_restart_preserves_state(service, tmp_path):
    tmp, client = service
    register(client)
    submit(client)
    # Rebuild the app against the same files, as after a process restart.
    client2 = TestClient(create_app(tmp / "tasks.json", tmp / "ratings.jsonl"))
    assert client2.get("/api/progress/alice").json() == {"rated": 1, "total": 2}
    assert submit(client2).status_code == 409


def test_logged_records_feed_aggregation(service):
    tmp, client = service
    register(client, "alice")
    register(client, "bob")
    submit(client, rater_id="alice")
    submit(client, rater_id="bob",
           scores={"semantic_correctness": 1, "concept_identification": 2,
                   "completeness": 3, "advanced_features": 1})
    records = [RatingRecord.from_dict(json.loads(line))
               for line in (tmp / "ratings.jsonl").read_text().splitlines()]
    from dslgen.evalhub import ModelEntry
    rows = aggregate(records, [ModelEntry("gemma3:1b", "gemma", 1.0)])
    (row,) = rows
    assert row.n_ratings == 2
    # Oracle: per-criterion means (5+1)/2, (4+2)/2, (3+3)/2, (5+1)/2.
    assert (row.sem_correctness, row.concept_id, row.completeness,
            row.adv_features) == (3.0, 3.0, 3.0, 3.0)
    assert row.total == 12.0


def test_unblinded_tasks_resolve_model_directly(tmp_path):
    doc = json.loads(json.dumps(TASK_DOC))
    doc["blinded"] = False
    for output, model in zip(doc["tasks"][0]["outputs"],
                             ["m1:1b", "m2:2b"]):
        output["model_id"] = model
        output["label"] = model
    tasks = tmp_path / "tasks.json"
    tasks.write_text(json.dumps(doc))
    client = TestClient(create_app(tasks, tmp_path / "r.jsonl"))
    register(client)
    submit(client)
    record = json.loads((tmp_path / "r.jsonl").read_text().splitlines()[0])
    assert record["model_id"] == "m1:1b"
