"""HTTP sessions for interactive structure learning.

Each session runs one search on a worker thread. When the search decides
a change deserves a question, the thread parks inside the oracle until a
verdict is posted (or the session is cancelled), so clients drive the
run by polling state and answering the pending question.
"""

from __future__ import annotations

import math
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from askdag import bayesnet
from askdag.dataset import Dataset, read_csv_text
from askdag.graph import Dag
from askdag.knowledge import ConstraintError, KnowledgeConstraints, Query, Verdict
from askdag.metrics import confusion_dag, f1, shd_dag
from askdag.search import CancelSearch, Criterion, SearchConfig, tabu_al

RUNNING = "running"
AWAITING = "awaiting_answer"
FINISHED = "finished"
FAILED = "failed"

_CRITERIA = {
    "none": None,
    "equivalent-add": Criterion.EQUIVALENT_ADD,
    "small-counts": Criterion.SMALL_COUNTS,
    "unreliable-score": Criterion.UNRELIABLE_SCORE,
    "small-delta": Criterion.SMALL_DELTA,
}


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class _Session:
    id: str
    dataset: Dataset
    config: SearchConfig
    constraints: KnowledgeConstraints | None
    truth: Dag | None
    budget: int | None
    cond: threading.Condition = field(default_factory=threading.Condition)
    status: str = RUNNING
    requests_used: int = 0
    next_question_id: int = 1
    pending: dict | None = None
    pending_answer: Verdict | None = None
    answered: dict = field(default_factory=dict)
    cancelled: bool = False
    snapshot: dict = field(default_factory=lambda: {"arcs": [], "score": None, "iteration": 0})
    recent: list = field(default_factory=list)
    result: dict | None = None
    error: str | None = None
    thread: threading.Thread | None = None


class _InteractiveOracle:
    """Blocks the search thread until a human verdict arrives."""

    def __init__(self, session: _Session):
        self._s = session

    @property
    def requests_used(self) -> int:
        return self._s.requests_used

    def accepts(self) -> bool:
        s = self._s
        if s.cancelled:
            # keep the query path open so the next question raises and
            # the search winds down promptly
            return True
        return s.budget is None or s.requests_used < s.budget

    def answer(self, query: Query) -> Verdict | None:
        s = self._s
        with s.cond:
            if s.cancelled:
                raise CancelSearch()
            if s.budget is not None and s.requests_used >= s.budget:
                return None
            a, b = query.change.arc
            qid = s.next_question_id
            s.next_question_id += 1
            s.pending = {
                "question_id": qid,
                "kind": query.change.kind.value,
                "from": s.dataset.names[a],
                "to": s.dataset.names[b],
                "iteration": query.iteration,
                "requests_used": s.requests_used,
            }
            s.status = AWAITING
            s.cond.notify_all()
            while s.pending_answer is None and not s.cancelled:
                s.cond.wait(0.25)
            if s.pending_answer is None:
                s.pending = None
                raise CancelSearch()
            verdict = s.pending_answer
            s.pending_answer = None
            s.pending = None
            s.status = RUNNING
            s.requests_used += 1
            s.cond.notify_all()
            return verdict


def _worker(session: _Session) -> None:
    def observe(dag, score, record):
        with session.cond:
            session.snapshot = {
                "arcs": sorted(dag.arcs()),
                "score": score,
                "iteration": record.iteration,
            }
            session.recent.append(record.as_dict())
            # deep enough that answered questions survive long quiet
            # stretches between polls; still bounded per snapshot
            del session.recent[:-200]

    try:
        result = tabu_al(
            session.dataset,
            session.config,
            _InteractiveOracle(session) if session.config.criterion else None,
            session.constraints,
            observer=observe,
        )
        names = session.dataset.names
        with session.cond:
            session.result = {
                "arcs": [
                    {"from": names[a], "to": names[b]} for a, b in sorted(result.dag.arcs())
                ],
                "score": result.score,
                "requests_used": result.trace.request_total,
                "iterations": len(result.trace.records),
                "constraints": {
                    "reqd": [
                        {"from": names[a], "to": names[b]}
                        for a, b in sorted(result.constraints.reqd)
                    ],
                    "stop": [
                        {"from": names[a], "to": names[b]}
                        for a, b in sorted(result.constraints.stop)
                    ],
                },
            }
            session.snapshot = {
                "arcs": sorted(result.dag.arcs()),
                "score": result.score,
                "iteration": session.snapshot["iteration"],
            }
            session.status = FINISHED
            session.pending = None
            session.cond.notify_all()
    except Exception as exc:
        with session.cond:
            session.status = FAILED
            session.error = f"{type(exc).__name__}: {exc}"
            session.pending = None
            session.cond.notify_all()


def _view(session: _Session) -> dict:
    s = session
    names = s.dataset.names
    arcs = [{"from": names[a], "to": names[b]} for a, b in s.snapshot["arcs"]]
    metrics = None
    if s.truth is not None:
        current = Dag(s.dataset.n, s.snapshot["arcs"])
        conf = confusion_dag(current, s.truth)
        metrics = {"f1": f1(conf), "shd": shd_dag(current, s.truth)}
    recent = []
    for record in s.recent[-200:]:
        entry = dict(record)
        entry["from"] = names[entry["from"]]
        entry["to"] = names[entry["to"]]
        recent.append(entry)
    return {
        "id": s.id,
        "status": s.status,
        "variables": list(names),
        "arcs": arcs,
        "score": s.snapshot["score"],
        "iteration": s.snapshot["iteration"],
        "pending": dict(s.pending) if s.pending else None,
        "requests_used": s.requests_used,
        "budget": s.budget,
        "orientation_only": s.config.orientation_only,
        "recent": recent,
        "metrics": metrics,
        "result": s.result,
        "error": s.error,
    }


def _parse_create(body: dict) -> _Session:
    if not isinstance(body, dict) or "csv_text" not in body:
        raise ServiceError(422, "bad_dataset", "body must carry csv_text")
    try:
        dataset = read_csv_text(body["csv_text"])
    except Exception as exc:
        raise ServiceError(422, "bad_dataset", f"dataset rejected: {exc}") from exc
    cfg = body.get("config", {}) or {}
    criterion_name = cfg.get("criterion", "none")
    if criterion_name not in _CRITERIA:
        raise ServiceError(422, "bad_config", f"unknown criterion {criterion_name!r}")
    try:
        config = SearchConfig(
            tabu_length=int(cfg.get("tabu_length", 10)),
            stop_patience=int(cfg.get("stop_patience", 10)),
            criterion=_CRITERIA[criterion_name],
            threshold=float(cfg.get("threshold", 0.0)),
            orientation_only=bool(cfg.get("orientation_only", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ServiceError(422, "bad_config", f"config rejected: {exc}") from exc
    limit = cfg.get("limit")
    budget = None if limit is None else math.ceil(float(limit) * dataset.n)

    truth = None
    doc = body.get("truth")
    if doc is not None:
        try:
            net = (
                bayesnet.load_fixture(doc)
                if isinstance(doc, str)
                else bayesnet.from_document(doc)
            )
            index = {name: i for i, name in enumerate(dataset.names)}
            truth = Dag(
                net.n,
                [
                    (index[net.variables[a].name], index[net.variables[b].name])
                    for a, b in net.dag.arcs()
                ],
            )
        except Exception as exc:
            raise ServiceError(422, "bad_config", f"truth rejected: {exc}") from exc

    constraints = None
    doc = body.get("constraints")
    if doc is not None:
        index = {name: i for i, name in enumerate(dataset.names)}
        try:
            constraints = KnowledgeConstraints(
                reqd=[(index[e["from"]], index[e["to"]]) for e in doc.get("reqd", [])],
                stop=[(index[e["from"]], index[e["to"]]) for e in doc.get("stop", [])],
            )
        except (KeyError, ConstraintError) as exc:
            raise ServiceError(422, "bad_config", f"constraints rejected: {exc}") from exc

    return _Session(
        id=uuid.uuid4().hex[:12],
        dataset=dataset,
        config=config,
        constraints=constraints,
        truth=truth,
        budget=budget,
    )


def create_app(max_sessions: int = 16) -> FastAPI:
    app = FastAPI(title="askdag service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(ServiceError)
    async def _service_error(_request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    def _get(sid: str) -> _Session:
        session = sessions.get(sid)
        if session is None:
            raise ServiceError(404, "unknown_session", f"no session {sid}")
        return session

    @app.post("/sessions", status_code=201)
    async def create(request: Request):
        body = await request.json()
        session = _parse_create(body)
        with registry_lock:
            active = sum(1 for s in sessions.values() if s.status in (RUNNING, AWAITING))
            if active >= max_sessions:
                raise ServiceError(429, "session_limit", f"at most {max_sessions} active sessions")
            sessions[session.id] = session
        session.thread = threading.Thread(target=_worker, args=(session,), daemon=True)
        session.thread.start()
        # settle into the first stable state so the response is useful
        with session.cond:
            session.cond.wait_for(
                lambda: session.status != RUNNING or session.pending is not None,
                timeout=10.0,
            )
            return _view(session)

    @app.get("/sessions")
    async def list_sessions():
        with registry_lock:
            items = list(sessions.values())
        return {
            "sessions": [
                {"id": s.id, "status": s.status, "variables": len(s.dataset.names)}
                for s in items
            ]
        }

    @app.get("/sessions/{sid}")
    async def state(sid: str):
        session = _get(sid)
        with session.cond:
            return _view(session)

    @app.post("/sessions/{sid}/answer")
    async def answer(sid: str, request: Request):
        body = await request.json()
        session = _get(sid)
        try:
            qid = int(body["question_id"])
            verdict = Verdict(body["verdict"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError(422, "bad_verdict", f"bad answer payload: {exc}") from exc
        if session.config.orientation_only and verdict is Verdict.ABSENT:
            raise ServiceError(
                422, "bad_verdict", "absent verdict in an orientation-only session"
            )
        with session.cond:
            if qid in session.answered:
                if session.answered[qid] == verdict.value:
                    return _view(session)
                raise ServiceError(
                    409, "verdict_conflict", f"question {qid} already answered differently"
                )
            if session.pending is None or session.pending["question_id"] != qid:
                raise ServiceError(409, "stale_question", f"question {qid} is not pending")
            session.answered[qid] = verdict.value
            session.pending_answer = verdict
            session.cond.notify_all()
            # settle on the next stable state — a new question or the end —
            # so clients see no transient in-between snapshots
            session.cond.wait_for(
                lambda: (
                    session.pending is not None
                    and session.pending["question_id"] != qid
                )
                or session.status in (FINISHED, FAILED),
                timeout=10.0,
            )
            return _view(session)

    @app.post("/sessions/{sid}/cancel")
    async def cancel(sid: str):
        session = _get(sid)
        with session.cond:
            if session.status not in (FINISHED, FAILED):
                session.cancelled = True
                session.cond.notify_all()
        if session.thread is not None:
            session.thread.join(timeout=60.0)
        with session.cond:
            return _view(session)

    return app
