"""HTTP service for the human-in-the-loop refinement session.

A session holds one taxonomy, the current (possibly partial) labeling with
per-value provenance (human vs machine), the violation list, the guidance
history fed into later prompts, and a log of labelling runs. Sessions are
kept in memory and persisted as single JSON documents on demand.

Concurrency: each session is guarded by one lock; mutations are serialized
per session. The LLM call of a labelling run happens outside the lock and
its merge re-acquires it, so a slow model never blocks label edits, and
human edits made meanwhile are never overwritten.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import engine
from .engine import LabelSet, Labeling, labeling_from_json, labeling_to_json, value_from_symbol
from .errors import (
    AuthError,
    EmptyGuidance,
    EmptyResponse,
    IllegalValue,
    IoError,
    LlmError,
    MalformedResponse,
    NoGoldLabels,
    RateLimited,
    SessionNotFound,
    TransportError,
    UnknownBenchmark,
    UnknownClass,
    WorkbenchError,
)
from .harness import BENCHMARK_NAMES, compute_accuracy, load_benchmark
from .labeler import (
    Flat,
    Hierarchical,
    LabelingResult,
    LlmConfig,
    PromptConfig,
    PromptStrategy,
    label_ontology,
)
from .taxonomy import Taxonomy, parse_taxonomy, serialize_taxonomy

HUMAN = "human"
MACHINE = "machine"


@dataclass
class Session:
    id: str
    taxonomy: Taxonomy
    labeling: Labeling = field(default_factory=dict)
    # provenance[cls][prop] is "human" or "machine" for every present value
    provenance: dict[str, dict[str, str]] = field(default_factory=dict)
    violations: list[engine.Violation] = field(default_factory=list)
    guidance_history: list[str] = field(default_factory=list)
    trial_log: list[dict] = field(default_factory=list)
    gold: Labeling | None = None

    def refresh_violations(self) -> None:
        self.violations = engine.check_constraints(self.taxonomy, self.labeling)
        self.violations += engine.check_sortal_individuation(self.taxonomy, self.labeling)

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "taxonomy": json.loads(serialize_taxonomy(self.taxonomy, "json")),
            "labeling": labeling_to_json(self.labeling),
            "provenance": self.provenance,
            "violations": [v.to_json() for v in self.violations],
            "guidance_history": list(self.guidance_history),
            "trial_log": list(self.trial_log),
            "gold": labeling_to_json(self.gold) if self.gold is not None else None,
        }

    @staticmethod
    def from_doc(doc: dict) -> "Session":
        taxonomy = parse_taxonomy(json.dumps(doc["taxonomy"]), "json")
        session = Session(
            id=doc["id"],
            taxonomy=taxonomy,
            labeling=labeling_from_json(doc.get("labeling", {})),
            provenance={cls: dict(m) for cls, m in doc.get("provenance", {}).items()},
            guidance_history=list(doc.get("guidance_history", [])),
            trial_log=list(doc.get("trial_log", [])),
            gold=labeling_from_json(doc["gold"]) if doc.get("gold") is not None else None,
        )
        session.refresh_violations()
        return session


class SessionStore:
    """In-memory session registry with per-session locks and file persistence."""

    def __init__(self, sessions_dir: Path):
        self.sessions_dir = Path(sessions_dir)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._registry_lock:
            self._sessions[session.id] = session
            self._locks.setdefault(session.id, threading.RLock())

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionNotFound(f"no session {session_id!r}") from None

    def lock(self, session_id: str) -> threading.RLock:
        self.get(session_id)
        return self._locks[session_id]

    def save(self, session_id: str, path: str | None = None) -> Path:
        session = self.get(session_id)
        with self.lock(session_id):
            target = Path(path) if path else self.sessions_dir / f"{session_id}.json"
            target.parent.mkdir(parents=True, exist_ok=True)
            try:
                target.write_text(
                    json.dumps(session.to_doc(), indent=2, ensure_ascii=False) + "\n",
                    encoding="utf-8",
                )
            except OSError as exc:
                raise IoError(f"cannot write session file: {exc}") from exc
            return target

    def load(self, path: str | Path) -> Session:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read session file: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IoError(
                f"session file is not valid JSON: {exc.msg} "
                f"(line {exc.lineno}, column {exc.colno})"
            ) from exc
        session = Session.from_doc(doc)
        self.add(session)
        return session


# --- request bodies -----------------------------------------------------------

class CreateSessionBody(BaseModel):
    benchmark: str | None = None
    taxonomy: str | None = None
    format: Literal["json", "indented"] = "json"
    gold: dict | None = None
    prelabel_gold: bool = False
    load_path: str | None = None


class SetLabelBody(BaseModel):
    property: Literal["I", "U", "R", "D"]
    value: str | None = None


class GuidanceBody(BaseModel):
    text: str


class LlmBody(BaseModel):
    endpoint_url: str
    model: str
    temperature: float = 0.0
    max_tokens: int = 2048
    timeout: float = 60.0
    max_retries: int = 2


class LabelRunBody(BaseModel):
    strategy: Literal["zero", "incontext"] = "zero"
    representation: Literal["flat", "hier"] = "hier"
    seed: int = 0
    mode: Literal["overwrite", "fill_missing"] = "fill_missing"
    llm: LlmBody


_HTTP_STATUS: dict[str, int] = {
    "session_not_found": 404,
    "unknown_class": 404,
    "unknown_benchmark": 404,
    "no_gold_labels": 409,
    "auth_error": 502,
    "rate_limited": 502,
    "transport_error": 502,
    "malformed_response": 502,
    "empty_response": 502,
}


def _session_payload(session: Session) -> dict:
    return session.to_doc()


def _violations_payload(session: Session) -> list[dict]:
    return [v.to_json() for v in session.violations]


def create_app(sessions_dir: str | Path = "sessions") -> FastAPI:
    app = FastAPI(title="ontoclean-workbench")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(Path(sessions_dir))
    app.state.store = store

    @app.exception_handler(WorkbenchError)
    def _domain_error(_request, exc: WorkbenchError):
        status = _HTTP_STATUS.get(exc.code, 400)
        return JSONResponse(
            status_code=status, content={"error_code": exc.code, "message": str(exc)}
        )

    @app.exception_handler(RequestValidationError)
    def _validation_error(_request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"error_code": "validation_error", "message": str(exc.errors()[:3])},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/benchmarks")
    def benchmarks():
        return [load_benchmark(name).manifest for name in BENCHMARK_NAMES]

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.load_path:
            session = store.load(body.load_path)
            return _session_payload(session)
        gold: Labeling | None = None
        if body.benchmark:
            benchmark = load_benchmark(body.benchmark)
            taxonomy = benchmark.taxonomy
            gold = benchmark.gold
        elif body.taxonomy is not None:
            taxonomy = parse_taxonomy(body.taxonomy, body.format)
            if body.gold is not None:
                gold = labeling_from_json(body.gold)
                for cls in gold:
                    if cls not in taxonomy:
                        raise UnknownClass(f"gold labels unknown class {cls!r}")
        else:
            raise WorkbenchError("provide 'benchmark', 'taxonomy', or 'load_path'")
        session = Session(id=uuid.uuid4().hex, taxonomy=taxonomy, gold=gold)
        if body.prelabel_gold:
            if gold is None:
                raise NoGoldLabels("prelabel_gold requires gold labels")
            session.labeling = dict(gold)
            session.provenance = {
                cls: {prop: HUMAN for prop in ls.to_json()} for cls, ls in gold.items()
            }
        session.refresh_violations()
        store.add(session)
        return _session_payload(session)

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str):
        with store.lock(session_id):
            return _session_payload(store.get(session_id))

    @app.get("/sessions/{session_id}/violations")
    def get_violations(session_id: str):
        with store.lock(session_id):
            return _violations_payload(store.get(session_id))

    @app.put("/sessions/{session_id}/labels/{class_id}")
    def set_label(session_id: str, class_id: str, body: SetLabelBody):
        with store.lock(session_id):
            session = store.get(session_id)
            if class_id not in session.taxonomy:
                raise UnknownClass(f"class {class_id!r} is not in the taxonomy")
            current = session.labeling.get(class_id, LabelSet())
            if body.value is None:
                updated = current.with_value(body.property, None)
                session.provenance.get(class_id, {}).pop(body.property, None)
            else:
                updated = current.with_value(
                    body.property, value_from_symbol(body.property, body.value)
                )
                session.provenance.setdefault(class_id, {})[body.property] = HUMAN
            if updated.is_empty:
                session.labeling.pop(class_id, None)
                session.provenance.pop(class_id, None)
            else:
                session.labeling[class_id] = updated
            session.refresh_violations()
            return {"violations": _violations_payload(session)}

    @app.post("/sessions/{session_id}/guidance")
    def add_guidance(session_id: str, body: GuidanceBody):
        if not body.text.strip():
            raise EmptyGuidance("guidance text must be nonempty")
        with store.lock(session_id):
            session = store.get(session_id)
            session.guidance_history.append(body.text)
            return {"guidance_history": list(session.guidance_history)}

    @app.post("/sessions/{session_id}/label-run")
    def label_run(session_id: str, body: LabelRunBody):
        with store.lock(session_id):
            session = store.get(session_id)
            taxonomy = session.taxonomy
            guidance = "\n".join(session.guidance_history) or None

        representation = Flat() if body.representation == "flat" else Hierarchical(body.seed)
        pc = PromptConfig(
            strategy=PromptStrategy(body.strategy),
            representation=representation,
            guidance=guidance,
        )
        lc = LlmConfig(
            endpoint_url=body.llm.endpoint_url,
            model=body.llm.model,
            temperature=body.llm.temperature,
            max_tokens=body.llm.max_tokens,
            timeout=body.llm.timeout,
            max_retries=body.llm.max_retries,
        )
        # the slow call happens without the session lock; errors propagate
        # before any state is touched, keeping the session unchanged
        outcome = label_ontology(taxonomy, pc, lc)

        with store.lock(session_id):
            session = store.get(session_id)
            _merge_run(session, outcome.labeling, body.mode)
            summary = {
                "strategy": body.strategy,
                "representation": body.representation,
                "seed": body.seed,
                "mode": body.mode,
                "model": body.llm.model,
                "attempts": outcome.attempts,
                "labelled_classes": sum(
                    1 for ls in outcome.labeling.values() if not ls.is_empty
                ),
                "warnings": len(outcome.warnings),
            }
            session.trial_log.append(summary)
            session.refresh_violations()
            return {"result": summary, "violations": _violations_payload(session)}

    @app.get("/sessions/{session_id}/accuracy")
    def get_accuracy(session_id: str):
        with store.lock(session_id):
            session = store.get(session_id)
            if session.gold is None:
                raise NoGoldLabels("session has no gold labels attached")
            # a custom gold may cover a subset of classes; score only those
            scored = {cls: ls for cls, ls in session.labeling.items() if cls in session.gold}
            counts = compute_accuracy(scored, session.gold)
            return {
                prop: {
                    "correct": c.correct,
                    "incorrect": c.incorrect,
                    "accuracy": c.accuracy,
                }
                for prop, c in counts.items()
            }

    @app.post("/sessions/{session_id}/save")
    def save_session(session_id: str, body: dict | None = None):
        path = (body or {}).get("path")
        target = store.save(session_id, path)
        return {"path": str(target)}

    return app


def _merge_run(session: Session, fresh: Labeling, mode: str) -> None:
    """Fold machine labels into the session; human-set values always survive."""
    if mode == "overwrite":
        for cls in list(session.labeling):
            kept = session.labeling[cls]
            for prop in engine.PROPERTY_KEYS:
                if kept.get(prop) is None:
                    continue
                if session.provenance.get(cls, {}).get(prop) != HUMAN:
                    kept = kept.with_value(prop, None)
                    session.provenance.get(cls, {}).pop(prop, None)
            if kept.is_empty:
                session.labeling.pop(cls)
                session.provenance.pop(cls, None)
            else:
                session.labeling[cls] = kept
    for cls, labels in fresh.items():
        current = session.labeling.get(cls, LabelSet())
        for prop in engine.PROPERTY_KEYS:
            value = labels.get(prop)
            if value is None or current.get(prop) is not None:
                continue
            current = current.with_value(prop, value)
            session.provenance.setdefault(cls, {})[prop] = MACHINE
        if not current.is_empty:
            session.labeling[cls] = current


def run_server(host: str = "127.0.0.1", port: int = 8000, sessions_dir: str = "sessions") -> None:
    import uvicorn

    uvicorn.run(create_app(sessions_dir), host=host, port=port)
