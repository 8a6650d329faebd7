"""Pipeline state transitions shared by the CLI and the HTTP service.

Both front ends do their own I/O (files and exit codes on one side, JSON
over HTTP on the other) but route every session mutation and query through
these functions, so a scripted CLI run and an API walkthrough of the same
inputs land on byte-identical session state.  Callers hold the session lock
and save; functions here only transform the in-memory session and return
plain result payloads.
"""

import dataclasses
import json

import numpy as np

from . import selection, store
from .constraints import (
    _check_indices,
    assemble,
    empathic_statement_from_json,
    feasible,
)
from .errors import PhaseError, PreconditionError, ValidationError
from .inconsistency import enumerate_sets, report_to_json
from .judgment import (
    FuzzyJudgmentMatrix,
    complete,
    intrinsic_matrix,
    judgment_inconsistency,
    statement_from_json,
)
from .network import (
    EmpathicMatrix,
    Thresholds,
    UtilityMatrix,
    empathic_centrality,
    matrix_to_dot,
)
from .relations import (
    RelationMatrix,
    relation_matrix,
    relation_matrix_to_csv,
    relation_matrix_to_json,
)
from .report import render_network_png, render_welfare_png
from .welfare import (
    WelfareReport,
    WelfareRow,
    compare_networks,
    welfare_report_to_csv,
    welfare_report_to_json,
)

FEASIBLE_TOL = 1e-9
TARGETS = ("discriminating", "sparse", "central", "distributed",
           "resilient-local", "resilient-global", "star", "bus", "tree")
THRESHOLD_FIELDS = ("eps_prime", "delta", "rho0", "eps_min", "big_m")
EXPORT_FORMATS = ("dot", "csv", "json")


def alive(res):
    """A system counts as workable when slack is unbounded or clearly positive."""
    return res.status == "unbounded" or (
        res.status == "optimal" and res.eps_star > FEASIBLE_TOL)


def merged_thresholds(session, overrides=None):
    base = store.session_thresholds(session)
    values = {f: getattr(base, f) for f in THRESHOLD_FIELDS}
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    t = Thresholds(**values)
    t.validate_for(session.panel["n"])
    return t


def utilities_or_fail(session):
    U = store.intrinsic_utilities(session)
    if U is None:
        raise PreconditionError(
            "no intrinsic utilities yet; complete the judgments first")
    return U


def require_resolved(session):
    if session.phase != "Resolved":
        raise PhaseError(
            f"session is in phase {session.phase}; establish feasibility "
            "(and resolve any inconsistencies) first")


def parse_intrinsic_statements(session, blobs):
    """Parse + range-check indirect judgment statements against the panel."""
    n, m = session.panel["n"], session.panel["m"]
    stmts = [statement_from_json(b) for b in blobs]
    for st in stmts:
        if not 1 <= st.dm <= n:
            raise ValidationError(
                f"statement dm {st.dm} outside 1..{n}", field="dm")
        for idx in st.indices():
            if not 1 <= idx <= m:
                raise ValidationError(
                    f"alternative index {idx} outside 1..{m}",
                    field="alternative")
    return stmts


def parse_statements(session, blobs):
    """Parse + range-check empathic/node statements against the panel."""
    n, m = session.panel["n"], session.panel["m"]
    stmts = [empathic_statement_from_json(b) for b in blobs]
    for st in stmts:
        _check_indices(st, n, m)
    return stmts


def create_session(session_id, n, m, *, experts=None, alternatives=None,
                   thresholds=None, seed=0, judgments=None,
                   intrinsic_statements=None):
    """New session, optionally preloaded with judgments and statements."""
    session = store.new_session(session_id, n, m, experts=experts,
                                alternatives=alternatives,
                                thresholds=thresholds, seed=seed)
    if judgments is not None:
        if len(judgments) != n:
            raise ValidationError(
                f"{len(judgments)} judgment matrices for n={n}",
                field="judgments")
        for k, cells in enumerate(judgments, start=1):
            store.record_judgments(session, k,
                                   FuzzyJudgmentMatrix(m=m, cells=cells))
    if intrinsic_statements:
        store.record_intrinsic_statements(
            session, parse_intrinsic_statements(session, intrinsic_statements))
    return session


def completed_summary(session):
    """Per-expert slack rows for completions that are already frozen."""
    rows = []
    for k in range(1, session.panel["n"] + 1):
        entry = session.completed_judgments.get(str(k))
        if entry is None:
            raise PreconditionError(f"no completed judgments for expert {k}")
        rows.append({"expert": session.panel["experts"][k - 1],
                     "eps_star": entry["eps_star"]})
    return rows


def complete_judgments(session, thresholds):
    """Fill every expert's judgment matrix; record successes on the session.

    Returns (rows, failures): rows as in completed_summary for the experts
    whose completion succeeded, failures mapping expert label to the minimal
    index sets of mutually unsatisfiable indirect statements.
    """
    stmts = store.intrinsic_statements_of(session)
    rows, failures = [], {}
    for k in range(1, session.panel["n"] + 1):
        R = store.judgment_matrix(session, k)
        if R is None:
            raise PreconditionError(
                f"no judgments recorded for expert {k}")
        mine = [s for s in stmts if s.dm == k]
        result = complete(R, mine, eps_prime=thresholds.eps_prime)
        label = session.panel["experts"][k - 1]
        if result.status == "completed":
            eps = (float(result.eps_star)
                   if np.isfinite(result.eps_star) else None)
            store.record_completed_judgments(session, k, result.completed,
                                             eps_star=eps)
            rows.append({"expert": label, "eps_star": eps})
        else:
            failures[label] = [list(s) for s in
                               judgment_inconsistency(R, mine)]
    return rows, failures


def derive_intrinsic(session):
    """Eigenvector utilities from the completed matrices; advances the phase."""
    matrices = []
    for k in range(1, session.panel["n"] + 1):
        R = store.judgment_matrix(session, k, completed=True)
        if R is None:
            raise PreconditionError(
                f"no completed judgments for expert {k}; complete the "
                "judgments first")
        matrices.append(R)
    U = intrinsic_matrix(matrices)
    store.record_intrinsic_utilities(session, U)
    store.advance_phase(session, "EmpathicElicitation")
    return U


def assemble_system(session, thresholds, statements=None):
    if statements is None:
        statements = store.statements_of(session)
    return assemble(utilities_or_fail(session), statements, thresholds)


def feasibility(session, thresholds, new_statements=None):
    """Record any new statements, test the system, advance when workable."""
    if new_statements:
        store.record_empathic_statements(session, new_statements)
    system = assemble_system(session, thresholds)
    res = feasible(system)
    if alive(res) and session.phase == "EmpathicElicitation":
        store.advance_phase(session, "Resolved")
    return res, system


def inconsistency_blob(session, system, thresholds):
    """Enumerate minimal repair sets; record them while still eliciting."""
    report = enumerate_sets(system, thresholds)
    blob = report_to_json(report)
    if session.phase == "EmpathicElicitation":
        store.record_inconsistency_report(session, blob)
    return blob


def resolution(session, set_index, thresholds):
    """Drop the chosen minimal set and re-test; advance when workable."""
    if not session.inconsistency_reports:
        raise PreconditionError(
            "no inconsistency report recorded; check feasibility first")
    sets = session.inconsistency_reports[-1]["sets"]
    if not 1 <= set_index <= len(sets):
        raise ValidationError(
            f"set {set_index} outside 1..{len(sets)}", field="set")
    chosen = set(sets[set_index - 1])
    kept = [st for st in store.statements_of(session) if st.id not in chosen]
    store.record_resolution(session, removed=sorted(chosen), statements=kept)
    system = assemble(utilities_or_fail(session), kept, thresholds)
    res = feasible(system)
    if alive(res):
        store.advance_phase(session, "Resolved")
    return sorted(chosen), res, system


def relations_matrix(session, thresholds):
    """Classify all ordered pairs; caches the result on the session."""
    require_resolved(session)
    system = assemble_system(session, thresholds)
    rm = relation_matrix(system)
    store.record_relations(session, relation_matrix_to_json(rm))
    return rm


def relation_matrix_from_json(blob):
    return RelationMatrix(
        n=blob["n"],
        cells=tuple(tuple(row) for row in blob["cells"]),
        eps_model2=tuple(tuple(row) for row in blob["eps_model2"]),
        eps_model3=tuple(tuple(row) for row in blob["eps_model3"]),
        borderline=tuple(tuple(p) for p in blob["borderline"]),
    )


def run_selection(session, target, thresholds, *, center=None,
                  direction="fwd", tree_layers=None, seed=None):
    """Solve for one representative network and record its payload."""
    require_resolved(session)
    if target not in TARGETS:
        raise ValidationError(f"unknown target {target!r}", field="target")
    system = assemble_system(session, thresholds)
    if target == "discriminating":
        result = selection.most_discriminating(system)
    elif target == "sparse":
        result = selection.sparsest(system, thresholds)
    elif target == "central":
        result = selection.central(
            system, seed=session.seed if seed is None else seed)
    elif target == "distributed":
        result = selection.distributed(system)
    elif target == "resilient-local":
        result = selection.resilient_local(system, thresholds)
    elif target == "resilient-global":
        result = selection.resilient_global(system, direction=direction)
    elif target == "star":
        result = selection.star(system, center=center)
    elif target == "bus":
        result = selection.bus(system, direction=direction)
    else:
        if tree_layers is None:
            raise ValidationError(
                "target tree needs a child-to-parent map", field="tree")
        layers = {int(child): int(parent)
                  for child, parent in tree_layers.items()}
        result = selection.tree(system, layers)
    payload = {
        "target": target,
        "objective": result.objective,
        "kind": result.W.kind,
        "W": result.W.entries,
        "omega": empathic_centrality(result.W).omega,
        "diagnostics": dataclasses.asdict(result.diagnostics),
        "certificate": result.certificate,
        "global": (None if result.global_matrix is None
                   else result.global_matrix.entries),
        "thresholds": {f: getattr(thresholds, f) for f in THRESHOLD_FIELDS},
    }
    store.record_selection(session, target, payload)
    return session.selections[target]


def network_entry_from_blob(blob, n, m, origin="entry"):
    """One (label, matrix) pair from {"label", "kind", "matrix"} data."""
    for key in ("label", "kind", "matrix"):
        if key not in blob:
            raise ValidationError(f"{origin}: missing key {key!r}", field=key)
    rows = np.array(blob["matrix"], dtype=float)
    kind = blob["kind"]
    if kind in ("local", "global"):
        return blob["label"], EmpathicMatrix(n=n, entries=rows, kind=kind)
    if kind in ("local-empathic", "global-empathic"):
        return blob["label"], UtilityMatrix(n=n, m=m, entries=rows, kind=kind)
    raise ValidationError(f"{origin}: unknown matrix kind {kind!r}",
                          field="kind")


def entries_from_selections(session):
    n = session.panel["n"]
    entries = []
    for target, payload in session.selections.items():
        if payload.get("global") is not None:
            matrix = EmpathicMatrix(n=n, entries=np.array(payload["global"]),
                                    kind="global")
        else:
            matrix = EmpathicMatrix(n=n, entries=np.array(payload["W"]),
                                    kind="local")
        entries.append((target, matrix))
    return entries


def welfare(session, entries=None):
    """Score alternatives across candidate networks; records the report."""
    U_I = utilities_or_fail(session)
    if entries is None:
        entries = entries_from_selections(session)
        if not entries:
            raise PreconditionError(
                "no recorded selections; select a network first or supply "
                "matrices to compare")
    report = compare_networks(U_I, entries)
    store.record_welfare(session, welfare_report_to_json(report))
    return report


def welfare_report_from_json(blob):
    rows = tuple(WelfareRow(label=r["label"], sw=tuple(r["sw"]), best=r["best"])
                 for r in blob["rows"])
    return WelfareReport(m=blob["m"], rows=rows)


def export_bundle(session, exports_dir, fmt):
    """Write the session's artifacts for one format; returns written paths."""
    if fmt not in EXPORT_FORMATS:
        raise ValidationError(f"unknown export format {fmt!r}", field="format")
    t = store.session_thresholds(session)
    n = session.panel["n"]
    written = []
    if fmt == "dot":
        for target, payload in session.selections.items():
            W = EmpathicMatrix(n=n, entries=np.array(payload["W"]),
                               kind="local")
            path = exports_dir / f"network-{target}.dot"
            path.write_text(matrix_to_dot(W, t.eps_prime))
            written.append(path)
    elif fmt == "csv":
        if session.welfare_reports:
            report = welfare_report_from_json(session.welfare_reports[-1])
            path = exports_dir / "welfare.csv"
            path.write_text(welfare_report_to_csv(report))
            written.append(path)
            figure = exports_dir / "welfare.png"
            render_welfare_png(report, figure,
                               alternatives=session.panel["alternatives"])
            written.append(figure)
        if session.relation_cache is not None:
            rm = relation_matrix_from_json(session.relation_cache)
            path = exports_dir / "relations.csv"
            path.write_text(relation_matrix_to_csv(rm))
            written.append(path)
        for target, payload in session.selections.items():
            W = EmpathicMatrix(n=n, entries=np.array(payload["W"]),
                               kind="local")
            figure = exports_dir / f"network-{target}.png"
            render_network_png(W, figure, labels=session.panel["experts"],
                               eps_prime=t.eps_prime, title=target)
            written.append(figure)
    else:
        doc = {
            "panel": session.panel,
            "thresholds": session.thresholds,
            "intrinsic_utilities": session.intrinsic_utilities,
            "selections": session.selections,
            "relations": session.relation_cache,
            "welfare": (session.welfare_reports[-1]
                        if session.welfare_reports else None),
        }
        path = exports_dir / "matrices.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        written.append(path)
    if not written:
        raise PreconditionError(
            "nothing to export yet; compute relations, selections, or "
            "welfare first")
    return written
