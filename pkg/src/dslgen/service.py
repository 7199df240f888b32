"""HTTP backend for the human semantic-evaluation study.

Serves rating tasks, registers rater demographics, records four-criterion
Likert scores, and reports per-rater progress.  Storage is two append-only
JSON-lines logs (raters, ratings) plus in-memory indexes rebuilt at
startup, so a restart reconstructs every acknowledged record.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .evalhub import CRITERIA, CriterionScores, RatingRecord

DSL_EXPERIENCE = ("none", "basic", "advanced")
LLM_USAGE = ("never", "monthly", "weekly", "daily")


class RaterProfileBody(BaseModel):
    rater_id: str
    age_band: str
    gender: str
    dsl_experience: str
    llm_usage_frequency: str


class RatingBody(BaseModel):
    rater_id: str
    task_id: str
    output_id: str
    scores: dict
    comment: str | None = None


@dataclass
class _Store:
    tasks_path: Path
    ratings_path: Path
    raters_path: Path

    def __post_init__(self) -> None:
        self._lock = threading.Lock()
        self.raters: dict[str, dict] = {}
        self.ratings: dict[tuple[str, str], RatingRecord] = {}
        self.tasks: list[dict] = []
        self.outputs: dict[str, dict] = {}  # output_id -> output payload
        self.output_task: dict[str, str] = {}
        self.key: dict[str, str] = {}
        self._load()

    def _load(self) -> None:
        if self.tasks_path.exists():
            document = json.loads(self.tasks_path.read_text(encoding="utf-8"))
            self.tasks = document.get("tasks", [])
            for task in self.tasks:
                for output in task["outputs"]:
                    self.outputs[output["output_id"]] = output
                    self.output_task[output["output_id"]] = task["task_id"]
            key_path = self.tasks_path.with_suffix(".key.json")
            if document.get("blinded") and key_path.exists():
                self.key = json.loads(key_path.read_text(encoding="utf-8"))
        if self.raters_path.exists():
            with self.raters_path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        profile = json.loads(line)
                        self.raters[profile["rater_id"]] = profile
        if self.ratings_path.exists():
            with self.ratings_path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        record = RatingRecord.from_dict(json.loads(line))
                        self.ratings[(record.rater_id, record.output_id)] = record

    @property
    def tasks_loaded(self) -> bool:
        return self.tasks_path.exists()

    def total_outputs(self) -> int:
        return len(self.outputs)

    def model_id_for(self, output_id: str) -> str:
        output = self.outputs[output_id]
        if output.get("model_id"):
            return output["model_id"]
        return self.key.get(output_id, output["label"])

    def add_rater(self, profile: dict) -> None:
        with self._lock:
            self.raters[profile["rater_id"]] = profile
            with self.raters_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(profile, ensure_ascii=False) + "\n")
                fh.flush()

    def add_rating(self, record: RatingRecord) -> None:
        with self._lock:
            self.ratings[(record.rater_id, record.output_id)] = record
            with self.ratings_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
                fh.flush()


def _utc_now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="milliseconds")


def create_app(tasks_path: str | Path, ratings_path: str | Path,
               raters_path: str | Path | None = None) -> FastAPI:
    """Build the service around one task file and its append-only logs."""
    ratings_path = Path(ratings_path)
    if raters_path is None:
        raters_path = ratings_path.with_name(ratings_path.stem + ".raters.jsonl")
    store = _Store(Path(tasks_path), ratings_path, Path(raters_path))

    app = FastAPI(title="dslgen rating service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.get("/api/tasks")
    def list_tasks() -> list[dict]:
        if not store.tasks_loaded:
            raise HTTPException(status_code=503, detail="task file missing")
        return [{"task_id": t["task_id"], "title": t["title"],
                 "output_count": len(t["outputs"])} for t in store.tasks]

    @app.get("/api/tasks/{task_id}")
    def task_detail(task_id: str) -> dict:
        if not store.tasks_loaded:
            raise HTTPException(status_code=503, detail="task file missing")
        for task in store.tasks:
            if task["task_id"] == task_id:
                outputs = [
                    {
                        "output_id": o["output_id"],
                        "label": o["label"],
                        "dsl_text": o["dsl_text"],
                        "summary": o["summary"],
                        "prompt_text": o["prompt_text"],
                    }
                    for o in task["outputs"]
                ]
                return {"task_id": task_id, "title": task["title"],
                        "outputs": outputs}
        raise HTTPException(status_code=404, detail=f"unknown task {task_id!r}")

    @app.post("/api/raters", status_code=201)
    def register_rater(body: RaterProfileBody) -> dict:
        if body.dsl_experience.lower() not in DSL_EXPERIENCE:
            raise HTTPException(status_code=400,
                                detail=f"dsl_experience must be one of "
                                       f"{DSL_EXPERIENCE}")
        if body.llm_usage_frequency.lower() not in LLM_USAGE:
            raise HTTPException(status_code=400,
                                detail=f"llm_usage_frequency must be one of "
                                       f"{LLM_USAGE}")
        store.add_rater(body.model_dump())
        return {"rater_id": body.rater_id}

    @app.post("/api/ratings", status_code=201)
    def submit_rating(body: RatingBody) -> dict:
        if body.rater_id not in store.raters:
            raise HTTPException(status_code=422,
                                detail="rater not registered")
        for name in CRITERIA:
            value = body.scores.get(name)
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise HTTPException(
                    status_code=400,
                    detail=f"score {name} must be an integer in [1, 5]")
        if body.output_id not in store.outputs:
            raise HTTPException(status_code=422,
                                detail=f"unknown output {body.output_id!r}")
        if store.output_task.get(body.output_id) != body.task_id:
            raise HTTPException(status_code=422,
                                detail="output does not belong to task")
        if (body.rater_id, body.output_id) in store.ratings:
            raise HTTPException(status_code=409,
                                detail="output already rated by this rater")
        record = RatingRecord(
            rating_id=uuid.uuid4().hex,
            task_id=body.task_id,
            output_id=body.output_id,
            rater_id=body.rater_id,
            model_id=store.model_id_for(body.output_id),
            scores=CriterionScores.from_dict(body.scores),
            comment=body.comment,
            timestamp=_utc_now(),
        )
        store.add_rating(record)
        return {"rating_id": record.rating_id}

    @app.get("/api/progress/{rater_id}")
    def progress(rater_id: str) -> dict:
        if rater_id not in store.raters:
            raise HTTPException(status_code=404,
                                detail=f"unknown rater {rater_id!r}")
        rated = sum(1 for key in store.ratings if key[0] == rater_id)
        return {"rated": rated, "total": store.total_outputs()}

    return app
