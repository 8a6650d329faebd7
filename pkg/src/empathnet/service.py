"""HTTP session service powering the interactive elicitation loop.

A thin JSON layer over the same workflow steps the CLI runs: statements go
in, relations and inconsistency reports come out, a human resolves, selects
target networks, and reads welfare.  Per-session mutations are serialized
(an in-process mutex plus the on-disk session lock); long solves can run as
background jobs polled via /jobs/{id}.
"""

import base64
import logging
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

from fastapi import Body, FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import store, workflow
from .errors import (
    ConflictError,
    ConvergenceError,
    EmpathnetError,
    LockError,
    NotFoundError,
    PhaseError,
    PreconditionError,
    SolverFailure,
    ValidationError,
)
from .judgment import FuzzyJudgmentMatrix
from .network import Thresholds
from .relations import relation_matrix_to_json
from .welfare import welfare_report_to_json

logger = logging.getLogger("empathnet.service")

_CONFLICT_ERRORS = (PhaseError, LockError, PreconditionError, ConflictError)


def _session_view(session):
    return store._state(session)


def _threshold_overrides(blob):
    if not blob:
        return {}
    unknown = set(blob) - set(workflow.THRESHOLD_FIELDS)
    if unknown:
        field = sorted(unknown)[0]
        raise ValidationError(f"unknown threshold {field!r}", field=field)
    return dict(blob)


def _thresholds_from(blob):
    values = {f: getattr(Thresholds(), f) for f in workflow.THRESHOLD_FIELDS}
    values.update(_threshold_overrides(blob))
    return Thresholds(**values)


def create_app(root, *, token=None, workers=2, cors_origin="*") -> FastAPI:
    """Build the service around one storage root."""
    root = Path(root)
    app = FastAPI(title="empathnet", docs_url=None, redoc_url=None)
    app.state.root = root
    app.state.token = token
    app.state.jobs = {}
    app.state.executor = ThreadPoolExecutor(max_workers=max(1, workers))
    app.state.idempotency = {}
    app.state.mutexes = {}
    app.state.mutex_guard = threading.Lock()

    # ---------------------------------------------------------------- errors

    def _http(status, detail, **extra):
        return JSONResponse(status_code=status, content={"detail": detail, **extra})

    @app.exception_handler(NotFoundError)
    async def _not_found(request, exc):
        return _http(404, str(exc))

    @app.exception_handler(ValidationError)
    async def _invalid(request, exc):
        return _http(422, str(exc), field=exc.field)

    async def _conflict(request, exc):
        return _http(409, str(exc))

    for cls in _CONFLICT_ERRORS:
        app.add_exception_handler(cls, _conflict)

    async def _internal(request, exc):
        incident = uuid.uuid4().hex[:12]
        logger.exception("incident %s: %s", incident, exc)
        return _http(500, f"solver failure: {exc}", incident=incident)

    for cls in (SolverFailure, ConvergenceError, EmpathnetError):
        app.add_exception_handler(cls, _internal)

    # ------------------------------------------------------------ middleware

    @app.middleware("http")
    async def _idempotency(request, call_next):
        key = request.headers.get("Idempotency-Key")
        if not key or request.method not in ("POST", "PUT"):
            return await call_next(request)
        cache_key = (request.method, request.url.path, key)
        hit = app.state.idempotency.get(cache_key)
        if hit is not None:
            status, media_type, body = hit
            return Response(content=body, status_code=status,
                            media_type=media_type)
        response = await call_next(request)
        body = b"".join([chunk async for chunk in response.body_iterator])
        if 200 <= response.status_code < 300:
            app.state.idempotency[cache_key] = (
                response.status_code, response.media_type, body)
        return Response(content=body, status_code=response.status_code,
                        media_type=response.media_type,
                        headers=dict(response.headers))

    @app.middleware("http")
    async def _auth(request, call_next):
        expected = app.state.token
        if expected is not None and request.method != "OPTIONS":
            header = request.headers.get("Authorization", "")
            if header != f"Bearer {expected}":
                return _http(401, "missing or invalid bearer token")
        return await call_next(request)

    app.add_middleware(
        CORSMiddleware, allow_origins=[cors_origin], allow_methods=["*"],
        allow_headers=["*"])

    # --------------------------------------------------------------- helpers

    def _mutex(session_id):
        with app.state.mutex_guard:
            return app.state.mutexes.setdefault(session_id, threading.Lock())

    @contextmanager
    def locked(session_id):
        with _mutex(session_id):
            directory = store.session_dir(root, session_id)
            if directory.is_dir():
                with store.session_lock(directory):
                    yield
            else:
                yield

    def exports_dir(session_id):
        path = store.session_dir(root, session_id) / "exports"
        path.mkdir(parents=True, exist_ok=True)
        return path

    def submit_job(fn):
        job_id = uuid.uuid4().hex[:12]
        app.state.jobs[job_id] = {"status": "pending"}

        def run():
            app.state.jobs[job_id] = {"status": "running"}
            try:
                result = fn()
            except EmpathnetError as err:
                app.state.jobs[job_id] = {
                    "status": "failed", "error": str(err)}
            except Exception as err:  # defensive: never lose a job
                logger.exception("job %s crashed", job_id)
                app.state.jobs[job_id] = {
                    "status": "failed", "error": f"internal error: {err}"}
            else:
                app.state.jobs[job_id] = {"status": "done", "result": result}

        app.state.executor.submit(run)
        return job_id

    def maybe_async(mode, fn):
        if mode == "async":
            job_id = submit_job(fn)
            return JSONResponse(status_code=202,
                                content={"job": job_id,
                                         "poll": f"/jobs/{job_id}"})
        return fn()

    # -------------------------------------------------------------- sessions

    @app.get("/sessions")
    def list_all():
        return {"sessions": store.list_sessions(root)}

    @app.post("/sessions", status_code=201)
    def create(body: dict = Body(...)):
        panel = body.get("panel") or {}
        if "n" not in panel or "m" not in panel:
            raise ValidationError("panel needs n and m", field="panel")
        session_id = body.get("id") or uuid.uuid4().hex[:8]
        with locked(session_id):
            if (store.session_dir(root, session_id) / "session.json").exists():
                raise ConflictError(f"session {session_id!r} already exists")
            session = workflow.create_session(
                session_id, int(panel["n"]), int(panel["m"]),
                experts=panel.get("experts"),
                alternatives=panel.get("alternatives"),
                thresholds=_thresholds_from(body.get("thresholds")),
                seed=int(body.get("seed", 0)),
                judgments=body.get("judgments"),
                intrinsic_statements=body.get("intrinsic_statements"))
            store.save(session, root)
        return _session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_view(store.load(root, session_id))

    @app.put("/sessions/{session_id}/judgments/{dm}")
    def put_judgments(session_id: str, dm: int, body: dict = Body(...)):
        with locked(session_id):
            session = store.load(root, session_id)
            n = session.panel["n"]
            if not 1 <= dm <= n:
                raise ValidationError(f"expert index {dm} outside 1..{n}",
                                      field="dm")
            matrix = FuzzyJudgmentMatrix(m=session.panel["m"],
                                         cells=body.get("cells"))
            store.record_judgments(session, dm, matrix)
            store.save(session, root)
        return {"dm": dm, "complete": matrix.is_complete()}

    @app.post("/sessions/{session_id}/intrinsic-statements")
    def post_intrinsic_statements(session_id: str, body: list = Body(...)):
        with locked(session_id):
            session = store.load(root, session_id)
            stmts = workflow.parse_intrinsic_statements(session, body)
            store.record_intrinsic_statements(session, stmts)
            store.save(session, root)
        return {"recorded": len(stmts),
                "total": len(session.intrinsic_statements)}

    @app.post("/sessions/{session_id}/complete")
    def post_complete(session_id: str, body: dict = Body(default={})):
        with locked(session_id):
            session = store.load(root, session_id)
            if session.phase == "IntrinsicElicitation":
                t = workflow.merged_thresholds(
                    session, _threshold_overrides(body.get("thresholds")))
                rows, failures = workflow.complete_judgments(session, t)
                if failures:
                    store.save(session, root)
                    return {"status": "inconsistent", "failures": failures}
                U = workflow.derive_intrinsic(session)
                store.save(session, root)
            else:
                # completions are frozen once the session moves on
                rows = workflow.completed_summary(session)
                U = workflow.utilities_or_fail(session)
        return {"status": "completed",
                "experts": rows,
                "alternatives": session.panel["alternatives"],
                "utilities": [[float(v) for v in row] for row in U.entries],
                "phase": session.phase}

    # ------------------------------------------------- statements and checks

    @app.post("/sessions/{session_id}/statements")
    def post_statements(session_id: str, body: list = Body(...)):
        with locked(session_id):
            session = store.load(root, session_id)
            stmts = workflow.parse_statements(session, body)
            store.record_empathic_statements(session, stmts)
            store.save(session, root)
        return {"recorded": len(stmts),
                "total": len(session.empathic_statements)}

    @app.get("/sessions/{session_id}/feasibility")
    def get_feasibility(session_id: str):
        with locked(session_id):
            session = store.load(root, session_id)
            t = workflow.merged_thresholds(session)
            res, _system = workflow.feasibility(session, t)
            store.save(session, root)
        if workflow.alive(res):
            eps = None if res.status == "unbounded" else float(res.eps_star)
            return {"status": "feasible", "eps_star": eps,
                    "phase": session.phase}
        return {"status": "infeasible", "eps_star": None,
                "phase": session.phase}

    @app.get("/sessions/{session_id}/inconsistencies")
    def get_inconsistencies(session_id: str):
        with locked(session_id):
            session = store.load(root, session_id)
            t = workflow.merged_thresholds(session)
            system = workflow.assemble_system(session, t)
            blob = workflow.inconsistency_blob(session, system, t)
            store.save(session, root)
        return blob

    @app.post("/sessions/{session_id}/resolutions")
    def post_resolution(session_id: str, body: dict = Body(...)):
        if "set" not in body:
            raise ValidationError("body needs a 1-based `set` index",
                                  field="set")
        with locked(session_id):
            session = store.load(root, session_id)
            t = workflow.merged_thresholds(session)
            removed, res, _system = workflow.resolution(
                session, int(body["set"]), t)
            store.save(session, root)
        status = "feasible" if workflow.alive(res) else "infeasible"
        eps = (float(res.eps_star) if res.status == "optimal" else None)
        return {"removed": removed, "status": status, "eps_star": eps,
                "phase": session.phase}

    # ------------------------------------------- relations/select/welfare

    @app.get("/sessions/{session_id}/relations")
    def get_relations(session_id: str, mode: str = None):
        def run():
            with locked(session_id):
                session = store.load(root, session_id)
                t = workflow.merged_thresholds(session)
                rm = workflow.relations_matrix(session, t)
                store.save(session, root)
            return relation_matrix_to_json(rm)

        return maybe_async(mode, run)

    @app.post("/sessions/{session_id}/select")
    def post_select(session_id: str, body: dict = Body(...), mode: str = None):
        if "target" not in body:
            raise ValidationError("body needs a target", field="target")

        def run():
            with locked(session_id):
                session = store.load(root, session_id)
                t = workflow.merged_thresholds(
                    session, _threshold_overrides(body.get("thresholds")))
                stored = workflow.run_selection(
                    session, body["target"], t,
                    center=body.get("center"),
                    direction=body.get("direction", "fwd"),
                    tree_layers=body.get("tree"),
                    seed=body.get("seed"))
                store.save(session, root)
            return stored

        return maybe_async(mode, run)

    @app.get("/sessions/{session_id}/welfare")
    def get_welfare(session_id: str):
        with locked(session_id):
            session = store.load(root, session_id)
            report = workflow.welfare(session)
            store.save(session, root)
        return welfare_report_to_json(report)

    @app.post("/sessions/{session_id}/welfare")
    def post_welfare(session_id: str, body: dict = Body(...)):
        blobs = body.get("networks")
        if not blobs:
            raise ValidationError("body needs a `networks` list",
                                  field="networks")
        with locked(session_id):
            session = store.load(root, session_id)
            U = workflow.utilities_or_fail(session)
            entries = [workflow.network_entry_from_blob(
                           blob, U.n, U.m, origin=f"networks[{k}]")
                       for k, blob in enumerate(blobs)]
            report = workflow.welfare(session, entries)
            store.save(session, root)
        return welfare_report_to_json(report)

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str, format: str = "json"):
        with locked(session_id):
            session = store.load(root, session_id)
            written = workflow.export_bundle(session, exports_dir(session_id),
                                             format)
        files, binary = {}, {}
        for path in written:
            if path.suffix == ".png":
                binary[path.name] = base64.b64encode(
                    path.read_bytes()).decode("ascii")
            else:
                files[path.name] = path.read_text()
        return {"written": [p.name for p in written],
                "files": files, "binary": binary}

    # ------------------------------------------------------------------ jobs

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = app.state.jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job {job_id!r}")
        return job

    return app


def serve(root, *, host="127.0.0.1", port=8000, workers=2, token=None,
          cors_origin="*"):
    """Run the service under uvicorn (blocks until interrupted)."""
    import uvicorn

    app = create_app(root, token=token, workers=workers,
                     cors_origin=cors_origin)
    uvicorn.run(app, host=host, port=port)
