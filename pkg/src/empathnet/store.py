"""Session data model and on-disk persistence for the interactive workflow.

One session = one directory::

    <root>/<session-id>/
        session.json    canonical state snapshot (checksummed)
        events.ndjson   append-only event log, one JSON object per line
        exports/        rendered tables, figures, network files
        lock            advisory single-writer lock (present while held)

The canonical serialization sorts keys and formats every float with 12
significant digits, so equal states always produce identical bytes and the
files diff cleanly.  Every mutation appends one event carrying its full
payload; replaying the log reconstructs the state exactly.
"""

import hashlib
import json
import math
import numbers
import os
import re
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .constraints import empathic_statement_from_json, empathic_statement_to_json
from .errors import (
    CorruptSessionError,
    DimensionError,
    LockError,
    NotFoundError,
    PhaseError,
    ValidationError,
    VersionError,
)
from .judgment import FuzzyJudgmentMatrix, statement_from_json, statement_to_json
from .network import Thresholds, UtilityMatrix

__all__ = [
    "PHASES",
    "SCHEMA_VERSION",
    "Session",
    "advance_phase",
    "canonical_bytes",
    "canonical_float",
    "intrinsic_statements_of",
    "intrinsic_utilities",
    "judgment_matrix",
    "list_sessions",
    "load",
    "new_session",
    "record_completed_judgments",
    "record_empathic_statements",
    "record_inconsistency_report",
    "record_intrinsic_statements",
    "record_intrinsic_utilities",
    "record_judgments",
    "record_relations",
    "record_resolution",
    "record_selection",
    "record_welfare",
    "replay_events",
    "save",
    "session_dir",
    "session_lock",
    "session_thresholds",
    "statements_of",
]

PHASES = ("IntrinsicElicitation", "EmpathicElicitation", "Resolved")
SCHEMA_VERSION = 1

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


# --------------------------------------------------------------------------
# canonical encoding

def canonical_float(x) -> float:
    """Quantize to the stored precision (12 significant digits)."""
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"cannot store non-finite value {x!r}")
    return float(f"{x:.12g}")


def _encode(value, out):
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, numbers.Integral):
        out.append(str(int(value)))
    elif isinstance(value, numbers.Real):
        if not math.isfinite(float(value)):
            raise ValidationError(f"cannot store non-finite value {value!r}")
        out.append(f"{float(value):.12g}")
    elif isinstance(value, dict):
        out.append("{")
        for pos, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise ValidationError(f"object keys must be strings, got {key!r}")
            if pos:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _encode(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for pos, item in enumerate(value):
            if pos:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(value, np.ndarray):
        _encode(value.tolist(), out)
    else:
        raise ValidationError(f"cannot serialize {type(value).__name__}")


def canonical_bytes(value) -> bytes:
    """Deterministic JSON encoding: sorted keys, floats at 12 digits."""
    out = []
    _encode(value, out)
    return "".join(out).encode("ascii")


def _quantize(value):
    """Rewrite a payload into plain JSON types with quantized floats, so the
    in-memory state compares equal to what a save/load cycle returns."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        return canonical_float(value)
    if isinstance(value, dict):
        return {key: _quantize(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_quantize(v) for v in value]
    if isinstance(value, np.ndarray):
        return _quantize(value.tolist())
    raise ValidationError(f"cannot serialize {type(value).__name__}")


# --------------------------------------------------------------------------
# the session object

@dataclass
class Session:
    """Full pipeline state plus its event log.

    All fields hold plain JSON-compatible values; the *_of accessors build the
    typed domain objects back on demand.
    """

    id: str
    panel: dict
    thresholds: dict
    seed: int = 0
    phase: str = PHASES[0]
    judgments: dict = field(default_factory=dict)
    completed_judgments: dict = field(default_factory=dict)
    intrinsic_statements: list = field(default_factory=list)
    intrinsic_utilities: list | None = None
    empathic_statements: list = field(default_factory=list)
    inconsistency_reports: list = field(default_factory=list)
    resolutions_applied: list = field(default_factory=list)
    relation_cache: dict | None = None
    selections: dict = field(default_factory=dict)
    welfare_reports: list = field(default_factory=list)
    events: list = field(default_factory=list)


def new_session(session_id, n, m, experts=None, alternatives=None,
                thresholds=None, seed=0) -> Session:
    if not isinstance(session_id, str) or not _ID_RE.match(session_id):
        raise ValidationError(
            f"session id {session_id!r} must be a plain name "
            "(letters, digits, . _ -)", field="id")
    if n < 2 or m < 2:
        raise ValidationError("a panel needs at least 2 experts and 2 alternatives")
    experts = list(experts) if experts is not None else [f"d{k}" for k in range(1, n + 1)]
    alternatives = (list(alternatives) if alternatives is not None
                    else [f"a{s}" for s in range(1, m + 1)])
    if len(experts) != n:
        raise ValidationError(f"{len(experts)} expert labels for n={n}")
    if len(alternatives) != m:
        raise ValidationError(f"{len(alternatives)} alternative labels for m={m}")
    t = thresholds or Thresholds()
    t.validate_for(n)
    session = Session(
        id=session_id,
        panel={"n": int(n), "m": int(m), "experts": experts,
               "alternatives": alternatives},
        thresholds=_quantize({"eps_prime": t.eps_prime, "delta": t.delta,
                              "rho0": t.rho0, "eps_min": t.eps_min,
                              "big_m": t.big_m}),
        seed=int(seed),
    )
    _record(session, "created", {"id": session.id, "panel": session.panel,
                                 "thresholds": session.thresholds,
                                 "seed": session.seed})
    return session


# --------------------------------------------------------------------------
# mutations: phase gate -> state change -> event append

_INTRINSIC, _EMPATHIC, _RESOLVED = PHASES


def _apply_judgments(session, data):
    session.judgments[str(data["expert"])] = data["cells"]


def _apply_completed(session, data):
    session.completed_judgments[str(data["expert"])] = {
        "cells": data["cells"], "eps_star": data["eps_star"]}


def _apply_intrinsic_statements(session, data):
    session.intrinsic_statements = data["statements"]


def _apply_utilities(session, data):
    session.intrinsic_utilities = data["rows"]


def _apply_phase(session, data):
    session.phase = data["to"]


def _apply_empathic_statements(session, data):
    session.empathic_statements = data["statements"]


def _apply_inconsistency(session, data):
    session.inconsistency_reports.append(data["report"])


def _apply_resolution(session, data):
    session.resolutions_applied.append({"removed": data["removed"]})
    session.empathic_statements = data["statements"]


def _apply_relations(session, data):
    session.relation_cache = data["relations"]


def _apply_selection(session, data):
    session.selections[data["target"]] = data["result"]


def _apply_welfare(session, data):
    session.welfare_reports.append(data["report"])


_APPLY = {
    "judgments-recorded": _apply_judgments,
    "judgments-completed": _apply_completed,
    "intrinsic-statements-recorded": _apply_intrinsic_statements,
    "intrinsic-utilities-recorded": _apply_utilities,
    "phase-advanced": _apply_phase,
    "empathic-statements-recorded": _apply_empathic_statements,
    "inconsistency-recorded": _apply_inconsistency,
    "resolution-applied": _apply_resolution,
    "relations-cached": _apply_relations,
    "selection-recorded": _apply_selection,
    "welfare-recorded": _apply_welfare,
}

# which phase each mutation is legal in
_PHASE_OF = {
    "judgments-recorded": _INTRINSIC,
    "judgments-completed": _INTRINSIC,
    "intrinsic-statements-recorded": _INTRINSIC,
    "intrinsic-utilities-recorded": _INTRINSIC,
    "empathic-statements-recorded": _EMPATHIC,
    "inconsistency-recorded": _EMPATHIC,
    "resolution-applied": _EMPATHIC,
    "relations-cached": _RESOLVED,
    "selection-recorded": _RESOLVED,
    "welfare-recorded": _RESOLVED,
}


def _record(session, name, data):
    data = _quantize(data)
    if name in _APPLY:
        _APPLY[name](session, data)
    session.events.append({
        "seq": len(session.events),
        "at": datetime.now(timezone.utc).isoformat(timespec="microseconds"),
        "event": name,
        "data": data,
    })


def _gate(session, name):
    need = _PHASE_OF[name]
    if session.phase != need:
        raise PhaseError(
            f"{name} is only allowed in phase {need}, session is in {session.phase}")


def _check_expert(session, expert):
    n = session.panel["n"]
    if not 1 <= int(expert) <= n:
        raise ValidationError(f"expert {expert} outside 1..{n}", field="expert")


def _check_judgment_shape(session, matrix):
    if matrix.m != session.panel["m"]:
        raise DimensionError(
            f"judgment matrix is {matrix.m}x{matrix.m}, panel has "
            f"{session.panel['m']} alternatives")


def record_judgments(session, expert, matrix: FuzzyJudgmentMatrix):
    _gate(session, "judgments-recorded")
    _check_expert(session, expert)
    _check_judgment_shape(session, matrix)
    _record(session, "judgments-recorded",
            {"expert": int(expert), "cells": [list(r) for r in matrix.cells]})


def record_completed_judgments(session, expert, matrix: FuzzyJudgmentMatrix,
                               eps_star=None):
    _gate(session, "judgments-completed")
    _check_expert(session, expert)
    _check_judgment_shape(session, matrix)
    _record(session, "judgments-completed",
            {"expert": int(expert), "cells": [list(r) for r in matrix.cells],
             "eps_star": eps_star})


def record_intrinsic_statements(session, statements):
    _gate(session, "intrinsic-statements-recorded")
    _record(session, "intrinsic-statements-recorded",
            {"statements": [statement_to_json(s) for s in statements]})


def record_intrinsic_utilities(session, U: UtilityMatrix):
    _gate(session, "intrinsic-utilities-recorded")
    n, m = session.panel["n"], session.panel["m"]
    if U.n != n or U.m != m:
        raise DimensionError(f"utilities are {U.n}x{U.m}, panel is {n}x{m}")
    _record(session, "intrinsic-utilities-recorded", {"rows": U.entries})


def advance_phase(session, to):
    if to not in PHASES:
        raise PhaseError(f"unknown phase {to!r}")
    if PHASES.index(to) <= PHASES.index(session.phase):
        raise PhaseError(f"cannot move from {session.phase} back to {to}")
    if session.phase == _INTRINSIC and session.intrinsic_utilities is None:
        raise PhaseError("cannot leave IntrinsicElicitation before intrinsic "
                         "utilities are recorded")
    _record(session, "phase-advanced", {"from": session.phase, "to": to})


def record_empathic_statements(session, statements):
    _gate(session, "empathic-statements-recorded")
    _record(session, "empathic-statements-recorded",
            {"statements": [empathic_statement_to_json(s) for s in statements]})


def record_inconsistency_report(session, report: dict):
    _gate(session, "inconsistency-recorded")
    _record(session, "inconsistency-recorded", {"report": report})


def record_resolution(session, removed, statements):
    _gate(session, "resolution-applied")
    _record(session, "resolution-applied",
            {"removed": list(removed),
             "statements": [empathic_statement_to_json(s) for s in statements]})


def record_relations(session, relations: dict):
    _gate(session, "relations-cached")
    _record(session, "relations-cached", {"relations": relations})


def record_selection(session, target, result: dict):
    _gate(session, "selection-recorded")
    _record(session, "selection-recorded",
            {"target": str(target), "result": result})


def record_welfare(session, report: dict):
    _gate(session, "welfare-recorded")
    _record(session, "welfare-recorded", {"report": report})


# --------------------------------------------------------------------------
# typed accessors

def session_thresholds(session) -> Thresholds:
    t = session.thresholds
    return Thresholds(eps_prime=t["eps_prime"], delta=t["delta"], rho0=t["rho0"],
                      eps_min=t["eps_min"], big_m=t["big_m"])


def judgment_matrix(session, expert, completed=False):
    pool = session.completed_judgments if completed else session.judgments
    entry = pool.get(str(expert))
    if entry is None:
        return None
    cells = entry["cells"] if completed else entry
    return FuzzyJudgmentMatrix(m=session.panel["m"], cells=cells)


def intrinsic_statements_of(session) -> tuple:
    return tuple(statement_from_json(b) for b in session.intrinsic_statements)


def statements_of(session) -> tuple:
    return tuple(empathic_statement_from_json(b)
                 for b in session.empathic_statements)


def intrinsic_utilities(session):
    if session.intrinsic_utilities is None:
        return None
    rows = np.array(session.intrinsic_utilities, dtype=float)
    return UtilityMatrix(n=session.panel["n"], m=session.panel["m"],
                         entries=rows, kind="intrinsic")


# --------------------------------------------------------------------------
# persistence

def session_dir(root, session_id) -> Path:
    return Path(root) / session_id


def _state(session) -> dict:
    return {
        "id": session.id,
        "panel": session.panel,
        "thresholds": session.thresholds,
        "seed": session.seed,
        "phase": session.phase,
        "judgments": session.judgments,
        "completed_judgments": session.completed_judgments,
        "intrinsic_statements": session.intrinsic_statements,
        "intrinsic_utilities": session.intrinsic_utilities,
        "empathic_statements": session.empathic_statements,
        "inconsistency_reports": session.inconsistency_reports,
        "resolutions_applied": session.resolutions_applied,
        "relation_cache": session.relation_cache,
        "selections": session.selections,
        "welfare_reports": session.welfare_reports,
        "events_recorded": len(session.events),
    }


@contextmanager
def session_lock(directory):
    """Advisory single-writer lock via an O_EXCL lock file.

    Re-entrant within one process; a lock held by another process raises
    LockError carrying that pid.  Readers never take the lock.
    """
    directory = Path(directory)
    path = directory / "lock"
    owned = False
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY, 0o644)
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        owned = True
    except FileExistsError:
        try:
            holder = int(path.read_text().strip())
        except (OSError, ValueError):
            holder = None
        if holder != os.getpid():
            raise LockError(
                f"session directory {directory} is locked by process {holder}",
                pid=holder) from None
    try:
        yield
    finally:
        if owned:
            try:
                os.unlink(path)
            except FileNotFoundError:
                pass


def _write_atomic(path: Path, blob: bytes):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(session, root) -> Path:
    directory = session_dir(root, session.id)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "exports").mkdir(exist_ok=True)
    state = _state(session)
    body = canonical_bytes(state)
    doc = {
        "format": SCHEMA_VERSION,
        "checksum": hashlib.sha256(body).hexdigest(),
        "state": state,
    }
    log = b"".join(canonical_bytes(event) + b"\n" for event in session.events)
    with session_lock(directory):
        _write_atomic(directory / "session.json", canonical_bytes(doc) + b"\n")
        _write_atomic(directory / "events.ndjson", log)
    return directory


def _session_from_state(state, events) -> Session:
    return Session(
        id=state["id"],
        panel=state["panel"],
        thresholds=state["thresholds"],
        seed=state["seed"],
        phase=state["phase"],
        judgments=state["judgments"],
        completed_judgments=state["completed_judgments"],
        intrinsic_statements=state["intrinsic_statements"],
        intrinsic_utilities=state["intrinsic_utilities"],
        empathic_statements=state["empathic_statements"],
        inconsistency_reports=state["inconsistency_reports"],
        resolutions_applied=state["resolutions_applied"],
        relation_cache=state["relation_cache"],
        selections=state["selections"],
        welfare_reports=state["welfare_reports"],
        events=events,
    )


def load(root, session_id) -> Session:
    directory = session_dir(root, session_id)
    path = directory / "session.json"
    if not path.is_file():
        raise NotFoundError(f"no session {session_id!r} under {root}")
    try:
        doc = json.loads(path.read_text())
    except (OSError, ValueError) as err:
        raise CorruptSessionError(f"{path}: {err}") from err
    if not isinstance(doc, dict) or "state" not in doc:
        raise CorruptSessionError(f"{path}: not a session document")
    if doc.get("format") != SCHEMA_VERSION:
        raise VersionError(
            f"{path}: format {doc.get('format')!r}, expected {SCHEMA_VERSION}")
    state = doc["state"]
    digest = hashlib.sha256(canonical_bytes(state)).hexdigest()
    if digest != doc.get("checksum"):
        raise CorruptSessionError(f"{path}: checksum mismatch")
    events = []
    log_path = directory / "events.ndjson"
    try:
        raw = log_path.read_text()
    except OSError as err:
        raise CorruptSessionError(f"{log_path}: {err}") from err
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            events.append(json.loads(line))
        except ValueError as err:
            raise CorruptSessionError(f"{log_path}:{lineno}: {err}") from err
    if len(events) != state.get("events_recorded"):
        raise CorruptSessionError(
            f"{log_path}: {len(events)} events, state expects "
            f"{state.get('events_recorded')}")
    try:
        return _session_from_state(state, events)
    except KeyError as err:
        raise CorruptSessionError(f"{path}: missing field {err}") from err


def list_sessions(root) -> list:
    """Shallow summaries (id, phase, panel size, event count), sorted by id."""
    root = Path(root)
    rows = []
    if not root.is_dir():
        return rows
    for entry in sorted(root.iterdir()):
        path = entry / "session.json"
        if not path.is_file():
            continue
        try:
            state = json.loads(path.read_text())["state"]
            rows.append({"id": state["id"], "phase": state["phase"],
                         "n": state["panel"]["n"], "m": state["panel"]["m"],
                         "events": state["events_recorded"]})
        except (OSError, ValueError, KeyError, TypeError):
            continue
    return rows


# --------------------------------------------------------------------------
# event replay

def replay_events(events) -> Session:
    """Rebuild a session purely from its event log."""
    if not events or events[0].get("event") != "created":
        raise CorruptSessionError("event log does not start with a creation event")
    head = events[0]["data"]
    session = Session(id=head["id"], panel=head["panel"],
                      thresholds=head["thresholds"], seed=head["seed"])
    for event in events[1:]:
        name = event.get("event")
        if name not in _APPLY:
            raise CorruptSessionError(f"unknown event {name!r} in log")
        _APPLY[name](session, event["data"])
    session.events = [dict(e) for e in events]
    return session
