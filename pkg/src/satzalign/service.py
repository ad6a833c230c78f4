"""HTTP backend for the two annotation workflows: ground-truth creation
and blind match classification.

Blindness invariant: no classification payload ever contains a measure or
matcher identifier; the variant is stored server-side and injected into
the persisted record only.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .corpus import Corpus, load_corpus
from .evaluation import (
    VERDICTS,
    GroundTruth,
    LabelRecord,
    LabelTask,
    ground_truth_filename,
    load_label_tasks,
    load_labels,
    parse_ground_truth,
    write_ground_truth,
)

logger = logging.getLogger(__name__)

DEFAULT_ANNOTATOR = "anonymous"


class ServiceError(Exception):
    def __init__(self, status_code: int, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.message = message


@dataclass
class ServiceConfig:
    corpus_root: str | Path | None = None
    tasks_file: str | Path | None = None
    labels_file: str | Path = "labels.jsonl"
    ground_truth_dir: str | Path = "ground_truth"
    ui_dist: str | Path | None = None
    token: str | None = None
    lease_ttl_seconds: float = 900.0


class LabelStore:
    """Append-only JSON-lines store; every append is fsynced before the
    request is acknowledged, so acknowledged labels survive a crash."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.records: dict[str, LabelRecord] = {}
        if self.path.exists():
            for record in load_labels(self.path):
                self.records[record.record_id] = record
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("a", encoding="utf-8")

    def append(self, record: LabelRecord) -> None:
        with self._lock:
            self._handle.write(record.to_json_line() + "\n")
            self._handle.flush()
            os.fsync(self._handle.fileno())
            self.records[record.record_id] = record

    def close(self) -> None:
        with self._lock:
            self._handle.close()

    def export_text(self) -> str:
        if self.path.exists():
            return self.path.read_text(encoding="utf-8")
        return ""


class GroundTruthStore:
    """One .gt file per pair, written atomically; resubmissions replace the
    previous version and leave an audit entry."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.audit_path = self.directory / "audit.jsonl"
        self._lock = threading.Lock()

    def has(self, pair_id: str) -> bool:
        return (self.directory / ground_truth_filename(pair_id)).exists()

    def submitted_pair_ids(self) -> set[str]:
        pair_ids = set()
        for path in self.directory.glob("*.gt"):
            for truth in parse_ground_truth(path.read_text(encoding="utf-8")):
                pair_ids.add(truth.pair_id)
        return pair_ids

    def submit(self, truth: GroundTruth, annotator: str) -> bool:
        """Returns True when a previous version was replaced."""
        with self._lock:
            path = self.directory / ground_truth_filename(truth.pair_id)
            replaced = path.exists()
            tmp = path.with_suffix(".gt.tmp")
            write_ground_truth([truth], tmp)
            os.replace(tmp, path)
            with self.audit_path.open("a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps(
                        {
                            "pair_id": truth.pair_id,
                            "matches": len(truth.matches),
                            "replaced": replaced,
                            "annotator": annotator,
                            "timestamp": _now(),
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
        return replaced

    def export_text(self) -> str:
        chunks = []
        for path in sorted(self.directory.glob("*.gt")):
            chunks.append(path.read_text(encoding="utf-8"))
        return "".join(chunks)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class _Lease:
    task_id: str
    leased_at: float


class AnnotationState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.label_store = LabelStore(config.labels_file)
        self.ground_truth_store = GroundTruthStore(config.ground_truth_dir)
        self.tasks: list[LabelTask] = (
            load_label_tasks(config.tasks_file)
            if config.tasks_file and Path(config.tasks_file).exists()
            else []
        )
        self.tasks_by_id = {t.task_id: t for t in self.tasks}
        self.corpus: Corpus | None = (
            load_corpus(config.corpus_root) if config.corpus_root else None
        )
        self._lock = threading.Lock()
        self._leases: dict[tuple[str, str], _Lease] = {}

    # -- classification tasks ------------------------------------------------

    def _task_leased_elsewhere(self, kind: str, task_id: str, annotator: str) -> bool:
        now = time.monotonic()
        for (lease_kind, holder), lease in self._leases.items():
            if lease_kind != kind or holder == annotator:
                continue
            if lease.task_id != task_id:
                continue
            if now - lease.leased_at < self.config.lease_ttl_seconds:
                return True
        return False

    def next_classification_task(self, annotator: str) -> LabelTask | None:
        with self._lock:
            lease = self._leases.get(("classification", annotator))
            if lease and lease.task_id not in self.label_store.records:
                return self.tasks_by_id[lease.task_id]
            for task in self.tasks:
                if task.task_id in self.label_store.records:
                    continue
                if self._task_leased_elsewhere("classification", task.task_id, annotator):
                    continue
                self._leases[("classification", annotator)] = _Lease(
                    task.task_id, time.monotonic()
                )
                return task
        return None

    def submit_label(self, task_id: str, verdict: str, annotator: str) -> tuple[LabelRecord, bool]:
        """Returns (record, already_stored).  Double submissions are
        idempotent when the verdict matches; a conflicting verdict is
        rejected (first wins)."""
        task = self.tasks_by_id.get(task_id)
        if task is None:
            raise ServiceError(404, f"unknown task {task_id!r}")
        if verdict not in VERDICTS:
            raise ServiceError(400, f"verdict must be one of {list(VERDICTS)}")
        with self._lock:
            existing = self.label_store.records.get(task_id)
            if existing is not None:
                if existing.verdict == verdict:
                    return existing, True
                raise ServiceError(
                    409, f"task {task_id!r} already labelled {existing.verdict!r}"
                )
            record = LabelRecord(
                record_id=task_id,
                variant=task.variant,
                pair_id=task.pair_id,
                simple_index=task.simple_index,
                complex_index=task.complex_index,
                verdict=verdict,
                annotator=annotator,
                timestamp=_now(),
            )
            self.label_store.append(record)
            lease = self._leases.get(("classification", annotator))
            if lease and lease.task_id == task_id:
                del self._leases[("classification", annotator)]
            return record, False

    # -- ground truth --------------------------------------------------------

    def _ground_truth_pairs(self) -> list:
        if self.corpus is None:
            return []
        return sorted(self.corpus.pairs, key=lambda p: p.pair_id)

    def next_ground_truth_task(self, annotator: str) -> dict | None:
        with self._lock:
            submitted = self.ground_truth_store.submitted_pair_ids()
            lease = self._leases.get(("ground_truth", annotator))
            if lease and lease.task_id not in submitted:
                pair = next(
                    p for p in self._ground_truth_pairs() if p.pair_id == lease.task_id
                )
                return self._ground_truth_payload(pair)
            for pair in self._ground_truth_pairs():
                if pair.pair_id in submitted:
                    continue
                if self._task_leased_elsewhere("ground_truth", pair.pair_id, annotator):
                    continue
                self._leases[("ground_truth", annotator)] = _Lease(
                    pair.pair_id, time.monotonic()
                )
                return self._ground_truth_payload(pair)
        return None

    @staticmethod
    def _ground_truth_payload(pair) -> dict:
        return {
            "task_id": f"gt-{pair.pair_id}",
            "kind": "ground_truth",
            "pair_id": pair.pair_id,
            "simple_sentences": [s.raw_text for s in pair.simple.sentences],
            "complex_sentences": [s.raw_text for s in pair.complex.sentences],
        }

    def submit_ground_truth(
        self, pair_id: str, matches: list, annotator: str
    ) -> tuple[int, bool]:
        pair = self.corpus.pair_by_id(pair_id) if self.corpus else None
        if pair is None:
            raise ServiceError(404, f"unknown pair {pair_id!r}")
        seen: set[int] = set()
        validated: set[tuple[int, int]] = set()
        for item in matches:
            if (
                not isinstance(item, (list, tuple))
                or len(item) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in item)
            ):
                raise ServiceError(400, "matches must be [simple_index, complex_index] pairs")
            simple_index, complex_index = item
            if not 0 <= simple_index < len(pair.simple.sentences):
                raise ServiceError(400, f"simple index {simple_index} out of range")
            if not 0 <= complex_index < len(pair.complex.sentences):
                raise ServiceError(400, f"complex index {complex_index} out of range")
            if simple_index in seen:
                raise ServiceError(
                    400, f"simple index {simple_index} linked twice (n:1 constraint)"
                )
            seen.add(simple_index)
            validated.add((simple_index, complex_index))
        replaced = self.ground_truth_store.submit(
            GroundTruth(pair_id=pair_id, matches=validated), annotator
        )
        with self._lock:
            lease = self._leases.get(("ground_truth", annotator))
            if lease and lease.task_id == pair_id:
                del self._leases[("ground_truth", annotator)]
        return len(validated), replaced

    def progress(self) -> dict:
        completed = sum(1 for t in self.tasks if t.task_id in self.label_store.records)
        submitted = self.ground_truth_store.submitted_pair_ids()
        pairs = self._ground_truth_pairs()
        return {
            "classification": {"total": len(self.tasks), "completed": completed},
            "ground_truth": {
                "total": len(pairs),
                "completed": sum(1 for p in pairs if p.pair_id in submitted),
            },
        }


def create_app(config: ServiceConfig) -> FastAPI:
    state = AnnotationState(config)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        state.label_store.close()

    app = FastAPI(
        title="satzalign annotation service",
        docs_url=None,
        redoc_url=None,
        lifespan=lifespan,
    )
    app.state.annotation = state

    @app.exception_handler(ServiceError)
    async def service_error_handler(_request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code, content={"error": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if config.token and request.url.path.startswith("/api/"):
            if request.headers.get("x-auth-token") != config.token:
                return JSONResponse(status_code=401, content={"error": "invalid token"})
        return await call_next(request)

    @app.get("/api/tasks/next")
    async def next_task(kind: str = "classification", annotator: str = DEFAULT_ANNOTATOR):
        if kind == "classification":
            task = state.next_classification_task(annotator)
            if task is None:
                return {"task": None, "done": True}
            return {
                "task": {
                    "task_id": task.task_id,
                    "kind": "classification",
                    "simple_text": task.simple_text,
                    "complex_text": task.complex_text,
                },
                "done": False,
            }
        if kind == "ground_truth":
            payload = state.next_ground_truth_task(annotator)
            if payload is None:
                return {"task": None, "done": True}
            return {"task": payload, "done": False}
        raise ServiceError(400, f"unknown task kind {kind!r}")

    @app.post("/api/labels/{task_id}")
    async def submit_label(task_id: str, request: Request):
        body = await _json_body(request)
        verdict = body.get("verdict")
        if not isinstance(verdict, str):
            raise ServiceError(400, "body must contain a 'verdict' string")
        annotator = body.get("annotator", DEFAULT_ANNOTATOR)
        record, already = state.submit_label(task_id, verdict, annotator)
        return {
            "task_id": record.record_id,
            "verdict": record.verdict,
            "status": "already-recorded" if already else "stored",
        }

    @app.post("/api/ground-truth/{pair_id:path}")
    async def submit_ground_truth(pair_id: str, request: Request):
        body = await _json_body(request)
        matches = body.get("matches")
        if not isinstance(matches, list):
            raise ServiceError(400, "body must contain a 'matches' list")
        annotator = body.get("annotator", DEFAULT_ANNOTATOR)
        count, replaced = state.submit_ground_truth(pair_id, matches, annotator)
        return {"pair_id": pair_id, "matches": count, "replaced": replaced, "status": "stored"}

    @app.get("/api/progress")
    async def progress():
        return state.progress()

    @app.get("/api/export/labels")
    async def export_labels():
        return PlainTextResponse(state.label_store.export_text())

    @app.get("/api/export/ground-truth")
    async def export_ground_truth():
        return PlainTextResponse(state.ground_truth_store.export_text())

    if config.ui_dist and Path(config.ui_dist).is_dir():
        app.mount("/", StaticFiles(directory=str(config.ui_dist), html=True), name="ui")

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except json.JSONDecodeError as exc:
        raise ServiceError(400, f"invalid JSON body: {exc}") from exc
    if not isinstance(body, dict):
        raise ServiceError(400, "body must be a JSON object")
    return body


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the annotation service; fatal errors surface at startup."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=host, port=port, log_level="warning")
