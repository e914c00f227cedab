"""HTTP session service: serves assignments and styled texts, records
answer/event streams, and exports session logs for analysis.

Persistence is an append-only JSONL event stream per session under the
data directory; replaying a stream reconstructs the session state
exactly.  Within a session, writes are serialized by a per-session
lock; sessions are independent of each other.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .analysis import analyze  # noqa: F401  (re-exported for service users)
from .errors import SeglitError
from .ingest import QuestionBank, load_documents, load_question_bank
from .protocol import (
    SCHEMA_VERSION,
    Assignment,
    ItemRecord,
    SessionLog,
    STYLED,
    generate_assignment,
    item_record,
)
from .render import spans_payload
from .styler import apply_scheme, get_scheme, plain_scheme
from .textmodel import Document

ACTIVE = "active"
COMPLETE = "complete"
ABANDONED = "abandoned"


# ---------------------------------------------------------------------------
# Wire models


class CreateSessionRequest(BaseModel):
    participant_id: str = Field(min_length=1)
    seed: int | None = None


class AssignmentItemModel(BaseModel):
    text_id: str
    condition: str


class SessionModel(BaseModel):
    session_id: str
    participant_id: str
    seed: int
    status: str
    cursor: int
    items: list[AssignmentItemModel]


class QuestionModel(BaseModel):
    kind: str
    prompt: str
    options: list[str]


class NextItemResponse(BaseModel):
    done: bool
    index: int | None = None
    position: int | None = None
    text_id: str | None = None
    condition: str | None = None
    text: str | None = None
    spans: list[dict] | None = None
    questions: list[QuestionModel] | None = None
    keywords: list[str] | None = None


class SubmitRequest(BaseModel):
    index: int
    mcq: list[int]
    keywords: list[str] = []
    difficulty: int = Field(ge=1, le=5)
    text_shown_at: int
    answers_opened_at: int
    answers_submitted_at: int


class SubmitResponse(BaseModel):
    cursor: int
    status: str


# ---------------------------------------------------------------------------
# Session state (event sourced)


@dataclass
class SessionState:
    session_id: str
    assignment: Assignment
    cursor: int = 0
    status: str = ACTIVE
    shown: set[int] = field(default_factory=set)  # indices already presented
    items: list[ItemRecord] = field(default_factory=list)
    last_event_at: float = 0.0

    def apply(self, event: dict) -> None:
        kind = event["type"]
        self.last_event_at = event.get("ts", self.last_event_at)
        if kind == "created":
            pass
        elif kind == "text_shown":
            self.shown.add(event["index"])
        elif kind == "submitted":
            payload = event["payload"]
            self.items.append(
                ItemRecord(
                    text_id=payload["text_id"],
                    position=payload["position"],
                    condition=payload["condition"],
                    text_shown_at=payload["text_shown_at"],
                    answers_opened_at=payload["answers_opened_at"],
                    answers_submitted_at=payload["answers_submitted_at"],
                    mcq=tuple(payload["mcq"]),
                    keywords=tuple(payload["keywords"]),
                    difficulty=payload["difficulty"],
                )
            )
            self.cursor += 1
            if self.cursor == len(self.assignment.items):
                self.status = COMPLETE
        elif kind == "abandoned":
            self.status = ABANDONED
        else:
            raise SeglitError(f"unknown event type {kind!r}")

    def to_log(self) -> SessionLog:
        return SessionLog(self.assignment.participant_id, tuple(self.items))


class SessionStore:
    """Append-only JSONL event streams, one file per session."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def append(self, session_id: str, event: dict) -> None:
        event = {"v": SCHEMA_VERSION, "ts": time.time(), **event}
        with self.path(session_id).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def events(self, session_id: str) -> list[dict]:
        path = self.path(session_id)
        if not path.exists():
            return []
        with path.open(encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def load(self, session_id: str) -> SessionState | None:
        events = self.events(session_id)
        if not events:
            return None
        created = events[0]
        payload = created["payload"]
        assignment = Assignment(
            participant_id=payload["participant_id"],
            seed=payload["seed"],
            items=tuple((i["text_id"], i["condition"]) for i in payload["items"]),
        )
        state = SessionState(session_id=session_id, assignment=assignment)
        for event in events:
            state.apply(event)
        return state

    def session_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))


def session_id_for(participant_id: str, seed: int) -> str:
    digest = hashlib.sha256(f"{participant_id}:{seed}".encode()).hexdigest()
    return digest[:16]


# ---------------------------------------------------------------------------
# App factory


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def create_app(
    documents: list[Document],
    bank: QuestionBank,
    data_dir: str | Path,
    scheme_name: str | None = None,
    idle_timeout_s: float | None = None,
) -> FastAPI:
    """Build the session service over an experiment bundle.

    ``scheme_name`` defaults per document language (khmer-bold for
    Khmer, ja-color for Japanese).  Sessions idle longer than
    ``idle_timeout_s`` are marked abandoned on next access.
    """
    docs = {d.id: d for d in documents}
    missing = [tid for tid in docs if tid not in bank]
    if missing:
        raise SeglitError(f"documents without bank entries: {missing}")
    store = SessionStore(Path(data_dir) / "sessions")
    app = FastAPI(title="seglit session service")
    app.state.store = store

    def scheme_for(doc: Document):
        if scheme_name:
            return get_scheme(scheme_name)
        return get_scheme(
            "khmer-bold" if doc.language.value == "khmer" else "ja-color"
        )

    def get_state(session_id: str) -> SessionState:
        state = store.load(session_id)
        if state is None:
            raise _error(404, "not_found", f"unknown session {session_id!r}")
        if (
            idle_timeout_s is not None
            and state.status == ACTIVE
            and time.time() - state.last_event_at > idle_timeout_s
        ):
            store.append(session_id, {"type": "abandoned"})
            state.apply({"type": "abandoned", "ts": time.time()})
        return state

    def session_model(state: SessionState) -> SessionModel:
        return SessionModel(
            session_id=state.session_id,
            participant_id=state.assignment.participant_id,
            seed=state.assignment.seed,
            status=state.status,
            cursor=state.cursor,
            items=[
                AssignmentItemModel(text_id=t, condition=c)
                for t, c in state.assignment.items
            ],
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", response_model=SessionModel)
    def create_session(req: CreateSessionRequest):
        seed = req.seed if req.seed is not None else random.getrandbits(63)
        session_id = session_id_for(req.participant_id, seed)
        with store.lock(session_id):
            existing = store.load(session_id)
            if existing is not None:
                # idempotent per (participant_id, seed)
                return session_model(existing)
            for other_id in store.session_ids():
                other = store.load(other_id)
                if (
                    other is not None
                    and other.status == ACTIVE
                    and other.assignment.participant_id == req.participant_id
                ):
                    raise _error(
                        409,
                        "conflict",
                        f"participant {req.participant_id!r} already has an "
                        f"active session {other_id}",
                    )
            try:
                assignment = generate_assignment(
                    sorted(docs), seed, req.participant_id
                )
            except SeglitError as exc:
                raise _error(400, "invalid", str(exc))
            store.append(
                session_id,
                {
                    "type": "created",
                    "payload": {
                        "participant_id": req.participant_id,
                        "seed": seed,
                        "algo": assignment.algo,
                        "items": [
                            {"text_id": t, "condition": c} for t, c in assignment.items
                        ],
                    },
                },
            )
            return session_model(store.load(session_id))

    @app.get("/sessions/{session_id}", response_model=SessionModel)
    def get_session(session_id: str):
        return session_model(get_state(session_id))

    @app.get("/sessions/{session_id}/next", response_model=NextItemResponse)
    def next_item(session_id: str):
        with store.lock(session_id):
            state = get_state(session_id)
            if state.status != ACTIVE:
                return NextItemResponse(done=True)
            index = state.cursor
            text_id, condition = state.assignment.items[index]
            doc = docs[text_id]
            scheme = (
                scheme_for(doc)
                if condition == STYLED
                else plain_scheme(doc.language.scheme)
            )
            runs = apply_scheme(doc, scheme)
            tb = bank[text_id]
            # deterministic per-item shuffles so repeated calls agree
            rng = random.Random(state.assignment.seed * 1000 + index)
            questions = []
            for q in tb.questions:
                order = list(range(4))
                rng.shuffle(order)
                questions.append(
                    QuestionModel(
                        kind=q.kind,
                        prompt=q.prompt,
                        options=[q.options[i] for i in order],
                    )
                )
            keywords = list(tb.candidates)
            rng.shuffle(keywords)
            if index not in state.shown:
                store.append(session_id, {"type": "text_shown", "index": index})
            return NextItemResponse(
                done=False,
                index=index,
                position=index + 1,
                text_id=text_id,
                condition=condition,
                text=doc.source_text,
                spans=spans_payload(doc, runs),
                questions=questions,
                keywords=keywords,
            )

    @app.post("/sessions/{session_id}/submit", response_model=SubmitResponse)
    def submit(session_id: str, req: SubmitRequest):
        with store.lock(session_id):
            state = get_state(session_id)
            if state.status == COMPLETE:
                raise _error(409, "complete", "session is already complete")
            if state.status == ABANDONED:
                raise _error(409, "abandoned", "session was abandoned")
            if req.index != state.cursor:
                raise _error(
                    409,
                    "out_of_order",
                    f"submit for item {req.index} but cursor is at {state.cursor}",
                )
            if not (
                req.text_shown_at < req.answers_opened_at < req.answers_submitted_at
            ):
                raise _error(
                    409, "non_monotonic", "item timestamps must be strictly increasing"
                )
            if state.items and req.text_shown_at <= state.items[-1].answers_submitted_at:
                raise _error(
                    409,
                    "non_monotonic",
                    "item timestamps must advance past the previous item",
                )
            text_id, condition = state.assignment.items[req.index]
            tb = bank[text_id]
            if len(req.mcq) != len(tb.questions):
                raise _error(400, "invalid", "expected one response per question")
            # translate displayed option indices back to bank order
            rng = random.Random(state.assignment.seed * 1000 + req.index)
            mcq = []
            for q, displayed in zip(tb.questions, req.mcq):
                order = list(range(4))
                rng.shuffle(order)
                if not 0 <= displayed < 4:
                    raise _error(400, "invalid", "MCQ response index out of range")
                mcq.append(order[displayed])
            rng.shuffle(list(tb.candidates))  # keep rng stream aligned with next_item
            unknown = set(req.keywords) - set(tb.candidates)
            if unknown:
                raise _error(400, "invalid", f"unknown keywords: {sorted(unknown)}")
            store.append(
                session_id,
                {
                    "type": "submitted",
                    "index": req.index,
                    "payload": {
                        "text_id": text_id,
                        "position": req.index + 1,
                        "condition": condition,
                        "text_shown_at": req.text_shown_at,
                        "answers_opened_at": req.answers_opened_at,
                        "answers_submitted_at": req.answers_submitted_at,
                        "mcq": mcq,
                        "keywords": list(req.keywords),
                        "difficulty": req.difficulty,
                    },
                },
            )
            state = store.load(session_id)
            return SubmitResponse(cursor=state.cursor, status=state.status)

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        state = get_state(session_id)
        log = state.to_log()
        return {
            "v": SCHEMA_VERSION,
            "participant_id": log.participant_id,
            "status": state.status,
            "items": [item_record(log.participant_id, item) for item in log.items],
        }

    return app
