"""HTTP service for the write / analyze / reflect lifecycle.

Analysis runs asynchronously on a bounded worker pool because a pipeline run
takes multiple seconds; clients poll the analysis record.  Jobs are
idempotent per (essay, mode, pipeline-config fingerprint) while running.
Messages within one session are strictly serialized: a second message racing
a first gets 429 and retries client-side.
"""

from __future__ import annotations

import logging
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import AppConfig
from .gateway import LlmGateway, ProviderConfigError, TokenBucket, build_provider
from .pipeline import PipelineError, PipelineResult, run_pipeline
from .session import SessionFinishedError, SessionState, SocraticEngine
from .store import KIND_ANALYSIS, KIND_ESSAY, KIND_SESSION, FileStore

logger = logging.getLogger(__name__)

MODE_VISUAL = "visual"
MODE_SOCRATIC = "socratic"

STATUS_QUEUED = "queued"
STATUS_RUNNING = "running"
STATUS_DONE = "done"
STATUS_FAILED = "failed"


class EssayBody(BaseModel):
    text: str


class AnalyzeBody(BaseModel):
    mode: str = MODE_VISUAL


class SessionBody(BaseModel):
    analysis_id: str


class MessageBody(BaseModel):
    text: str


@dataclass
class ServerContext:
    """Mutable server state shared across requests."""

    config: AppConfig
    store: FileStore
    executor: ThreadPoolExecutor
    gateway: LlmGateway | None = None
    running_jobs: dict[tuple[str, str, str], str] = field(default_factory=dict)
    jobs_lock: threading.Lock = field(default_factory=threading.Lock)
    session_locks: dict[str, threading.Lock] = field(default_factory=dict)
    session_locks_guard: threading.Lock = field(default_factory=threading.Lock)

    def get_gateway(self) -> LlmGateway:
        if self.gateway is None:
            provider = build_provider(
                self.config.pipeline.model,
                mock_fixtures=self.config.mock_dir,
            )
            limiter = TokenBucket(self.config.rate_limit) if self.config.rate_limit else None
            self.gateway = LlmGateway(
                provider=provider,
                audit_path=self.config.audit_path,
                rate_limiter=limiter,
            )
        return self.gateway

    def session_lock(self, session_id: str) -> threading.Lock:
        with self.session_locks_guard:
            return self.session_locks.setdefault(session_id, threading.Lock())


def _new_id() -> str:
    return uuid.uuid4().hex[:12]


def create_app(config: AppConfig | None = None, *, gateway: LlmGateway | None = None) -> FastAPI:
    """Build the application; a pre-built gateway may be injected for tests."""
    config = config or AppConfig.from_env()
    context = ServerContext(
        config=config,
        store=FileStore(config.store_dir),
        executor=ThreadPoolExecutor(max_workers=max(1, config.workers)),
        gateway=gateway,
    )

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        # Let in-flight analysis jobs settle before the process exits.
        context.executor.shutdown(wait=True)

    app = FastAPI(title="argumint", version="0.1.0", lifespan=lifespan)
    app.state.context = context

    def require_auth(request: Request) -> None:
        token = context.config.auth_token
        if token and request.headers.get("X-Auth-Token") != token:
            raise HTTPException(status_code=401, detail="missing or wrong X-Auth-Token")

    auth = Depends(require_auth)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    # -- essays --------------------------------------------------------------

    @app.post("/essays", status_code=201, dependencies=[auth])
    def create_essay(body: EssayBody) -> dict:
        text = body.text
        if not text.strip():
            raise HTTPException(status_code=400, detail="essay text must be non-empty")
        if len(text) > context.config.essay_limit:
            raise HTTPException(
                status_code=400,
                detail=f"essay exceeds the {context.config.essay_limit} character limit",
            )
        essay_id = _new_id()
        context.store.put(
            KIND_ESSAY,
            essay_id,
            {"essay_id": essay_id, "text": text, "latest_analysis_id": None},
        )
        return {"essay_id": essay_id}

    @app.get("/essays/{essay_id}", dependencies=[auth])
    def read_essay(essay_id: str) -> dict:
        record = context.store.get(KIND_ESSAY, essay_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown essay {essay_id}")
        return record

    # -- analysis jobs -------------------------------------------------------

    @app.post("/essays/{essay_id}/analyze", status_code=202, dependencies=[auth])
    def analyze_essay(essay_id: str, body: AnalyzeBody) -> dict:
        if body.mode not in (MODE_VISUAL, MODE_SOCRATIC):
            raise HTTPException(status_code=400, detail=f"mode must be visual or socratic, got {body.mode!r}")
        essay = context.store.get(KIND_ESSAY, essay_id)
        if essay is None:
            raise HTTPException(status_code=404, detail=f"unknown essay {essay_id}")
        try:
            gw = context.get_gateway()
        except ProviderConfigError as exc:
            raise HTTPException(status_code=502, detail=f"llm provider unusable: {exc}") from exc

        fingerprint = context.config.pipeline.fingerprint()
        job_key = (essay_id, body.mode, fingerprint)
        with context.jobs_lock:
            running = context.running_jobs.get(job_key)
            if running is not None:
                record = context.store.get(KIND_ANALYSIS, running)
                if record and record["status"] in (STATUS_QUEUED, STATUS_RUNNING):
                    return {"analysis_id": running, "status": record["status"]}
                context.running_jobs.pop(job_key, None)
            analysis_id = _new_id()
            context.running_jobs[job_key] = analysis_id
            context.store.put(
                KIND_ANALYSIS,
                analysis_id,
                {
                    "analysis_id": analysis_id,
                    "essay_id": essay_id,
                    "mode": body.mode,
                    "status": STATUS_QUEUED,
                    "config_fingerprint": fingerprint,
                    "result": None,
                    "error": None,
                },
            )

        def job() -> None:
            record = context.store.get(KIND_ANALYSIS, analysis_id)
            record["status"] = STATUS_RUNNING
            context.store.put(KIND_ANALYSIS, analysis_id, record)
            try:
                result = run_pipeline(essay["text"], gw, context.config.pipeline)
            except PipelineError as exc:
                record["status"] = STATUS_FAILED
                record["error"] = {"stage": exc.stage, "reason": str(exc)}
                logger.error("analysis %s failed: %s", analysis_id, exc)
            except Exception as exc:  # unexpected: still surface via polling
                record["status"] = STATUS_FAILED
                record["error"] = {"stage": "internal", "reason": str(exc)}
                logger.exception("analysis %s crashed", analysis_id)
            else:
                record["status"] = STATUS_DONE
                record["result"] = result.to_dict()
                essay_record = context.store.get(KIND_ESSAY, essay_id)
                essay_record["latest_analysis_id"] = analysis_id
                context.store.put(KIND_ESSAY, essay_id, essay_record)
            finally:
                context.store.put(KIND_ANALYSIS, analysis_id, record)
                with context.jobs_lock:
                    if context.running_jobs.get(job_key) == analysis_id:
                        context.running_jobs.pop(job_key, None)

        context.executor.submit(job)
        return {"analysis_id": analysis_id, "status": STATUS_QUEUED}

    @app.get("/analyses/{analysis_id}", dependencies=[auth])
    def read_analysis(analysis_id: str) -> dict:
        record = context.store.get(KIND_ANALYSIS, analysis_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown analysis {analysis_id}")
        if record["status"] == STATUS_DONE:
            record["empty_argument"] = record["result"]["empty_argument"]
        return record

    # -- sessions ------------------------------------------------------------

    def _load_result(analysis_record: dict) -> PipelineResult:
        return PipelineResult.from_dict(analysis_record["result"])

    @app.post("/sessions", status_code=201, dependencies=[auth])
    def create_session(body: SessionBody) -> dict:
        record = context.store.get(KIND_ANALYSIS, body.analysis_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown analysis {body.analysis_id}")
        if record["mode"] != MODE_SOCRATIC:
            raise HTTPException(
                status_code=409,
                detail=f"analysis {body.analysis_id} ran in {record['mode']} mode, not socratic",
            )
        if record["status"] != STATUS_DONE:
            raise HTTPException(
                status_code=409, detail=f"analysis {body.analysis_id} is {record['status']}, not done"
            )
        try:
            gw = context.get_gateway()
        except ProviderConfigError as exc:
            raise HTTPException(status_code=502, detail=f"llm provider unusable: {exc}") from exc
        engine = SocraticEngine.start_session(
            _load_result(record),
            gw,
            context.config.pipeline,
            session_id=_new_id(),
            essay_id=record["essay_id"],
            analysis_id=record["analysis_id"],
        )
        state = engine.state
        context.store.put(KIND_SESSION, state.session_id, state.to_dict())
        response = {"session": state.to_dict(), "progress": _progress_dict(engine)}
        if engine.opening_error:
            response["degraded"] = engine.opening_error
        return response

    @app.get("/sessions/{session_id}", dependencies=[auth])
    def read_session(session_id: str) -> dict:
        record = context.store.get(KIND_SESSION, session_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return record

    def _engine_for(session_record: dict) -> SocraticEngine:
        analysis = context.store.get(KIND_ANALYSIS, session_record["analysis_id"])
        if analysis is None or analysis["status"] != STATUS_DONE:
            raise HTTPException(status_code=409, detail="backing analysis is gone or incomplete")
        return SocraticEngine.resume(
            SessionState.from_dict(session_record),
            _load_result(analysis),
            context.get_gateway(),
            context.config.pipeline,
        )

    def _session_transition(session_id: str, action) -> JSONResponse:
        record = context.store.get(KIND_SESSION, session_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        lock = context.session_lock(session_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(
                status_code=429,
                detail="a previous message for this session is still processing; retry shortly",
            )
        try:
            engine = _engine_for(record)
            known_comments = len(engine.state.comments)
            try:
                turn = action(engine)
            except SessionFinishedError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            context.store.put(KIND_SESSION, session_id, engine.state.to_dict())
            new_comments = [c.to_dict() for c in engine.state.comments[known_comments:]]
            return JSONResponse(
                {
                    "turn": turn.to_dict(),
                    "progress": _progress_dict(engine),
                    "new_comments": new_comments,
                    "finished": engine.state.finished,
                    "focus": engine.current_focus().to_dict() if engine.current_focus() else None,
                }
            )
        finally:
            lock.release()

    @app.post("/sessions/{session_id}/messages", dependencies=[auth])
    def send_message(session_id: str, body: MessageBody) -> JSONResponse:
        return _session_transition(session_id, lambda engine: engine.user_message(body.text))

    @app.post("/sessions/{session_id}/skip", dependencies=[auth])
    def skip_step(session_id: str) -> JSONResponse:
        return _session_transition(session_id, lambda engine: engine.skip_step())

    # -- comments ------------------------------------------------------------

    @app.get("/essays/{essay_id}/comments", dependencies=[auth])
    def essay_comments(essay_id: str) -> dict:
        if context.store.get(KIND_ESSAY, essay_id) is None:
            raise HTTPException(status_code=404, detail=f"unknown essay {essay_id}")
        comments = []
        for session_id in context.store.list_ids(KIND_SESSION):
            record = context.store.get(KIND_SESSION, session_id)
            if record and record.get("essay_id") == essay_id:
                for comment in record.get("comments", []):
                    comments.append({"session_id": session_id, **comment})
        comments.sort(key=lambda c: c["created_at"])
        return {"essay_id": essay_id, "comments": comments}

    # -- static frontend (optional) -------------------------------------------

    if config.frontend_dir is not None and config.frontend_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.frontend_dir, html=True), name="frontend")

    return app


def _progress_dict(engine: SocraticEngine) -> dict:
    resolved, total = engine.progress()
    return {"resolved": resolved, "total": total}
