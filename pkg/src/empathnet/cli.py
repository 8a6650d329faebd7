"""Batch front door: drive the whole pipeline on session directories.

Every subcommand maps onto one step in the shared workflow module; the CLI
adds no logic of its own beyond file I/O and formatting, so scripted runs
and the HTTP service cannot diverge.  Exit codes: 0 success, 1 infeasible or
inconsistent state (a report path is printed), 2 usage or workflow error,
3 solver failure.
"""

import functools
import json
import sys
from pathlib import Path

import click

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
    StoreError,
    ValidationError,
)
from .network import Thresholds
from .relations import relation_matrix_to_csv, relation_matrix_to_json
from .welfare import welfare_report_to_csv, welfare_report_to_json


def pipeline_command(fn):
    """Translate domain errors into the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (ConflictError, PreconditionError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(1)
        except (PhaseError, LockError, NotFoundError, StoreError,
                ValidationError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)
        except (SolverFailure, ConvergenceError) as err:
            click.echo(f"solver failure: {err}", err=True)
            sys.exit(3)
        except EmpathnetError as err:  # anything domain-level but unclassified
            click.echo(f"internal error: {err}", err=True)
            sys.exit(3)

    return wrapper


def threshold_options(fn):
    fn = click.option("--big-m", "big_m", type=float, default=None,
                      help="Relaxation constant for repair programs.")(fn)
    fn = click.option("--eps-min", "eps_min", type=float, default=None,
                      help="Slack pinned into non-slack objectives.")(fn)
    fn = click.option("--rho0", type=float, default=None,
                      help="Density cutoff for high resilience.")(fn)
    fn = click.option("--delta", type=float, default=None,
                      help="Centrality tolerance for distributed networks.")(fn)
    fn = click.option("--eps-prime", "eps_prime", type=float, default=None,
                      help="Smallest weight counting as an empathic link.")(fn)
    return fn


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except ValueError as err:
        raise ValidationError(f"{path}: not valid JSON ({err})") from err


def _overrides(eps_prime, delta, rho0, eps_min, big_m):
    return dict(eps_prime=eps_prime, delta=delta, rho0=rho0,
                eps_min=eps_min, big_m=big_m)


def _exports_dir(root, session_id):
    path = store.session_dir(root, session_id) / "exports"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(as_json, payload, text):
    if as_json:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        click.echo(text)


def _slack_lines(rows):
    lines = []
    for row in rows:
        eps = row["eps_star"]
        slack = "unconstrained" if eps is None else f"eps*={eps:.4f}"
        lines.append(f"{row['expert']}: {slack}")
    return lines


def _utilities_text(session, U):
    alts = session.panel["alternatives"]
    lines = ["expert," + ",".join(alts)]
    for label, row in zip(session.panel["experts"], U.entries):
        lines.append(label + "," + ",".join(f"{v:.4f}" for v in row))
    return "\n".join(lines)


def _write_inconsistency_report(root, session, system, thresholds):
    """Enumerate minimal repair sets, record + dump them, return the path."""
    blob = workflow.inconsistency_blob(session, system, thresholds)
    store.save(session, root)
    path = _exports_dir(root, session.id) / "inconsistencies.json"
    path.write_text(json.dumps(blob, indent=2, sort_keys=True) + "\n")
    click.echo(f"inconsistent: {len(blob['sets'])} minimal set(s) of size "
               f"{blob['cardinality']}")
    for idx, ids in enumerate(blob["sets"], start=1):
        click.echo(f"  {idx}: {', '.join(ids)}")
    click.echo(f"report: {path}")
    return path


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--root", type=click.Path(file_okay=False), default="sessions",
              envvar="EMPATHNET_ROOT", show_default=True,
              help="Directory holding session folders.")
@click.pass_context
def main(ctx, root):
    """Learn empathic networks from expert preference information."""
    ctx.obj = Path(root)


@main.command("init")
@click.argument("session_id")
@click.option("--panel", "panel_file", type=click.Path(exists=True, dir_okay=False),
              help="JSON with n, m and optional expert/alternative labels.")
@click.option("--n", type=int, default=None, help="Number of experts.")
@click.option("--m", type=int, default=None, help="Number of alternatives.")
@click.option("--judgments", "judgments_file",
              type=click.Path(exists=True, dir_okay=False),
              help="JSON list of n fuzzy judgment matrices (null = missing).")
@click.option("--intrinsic-statements", "intrinsic_file",
              type=click.Path(exists=True, dir_okay=False),
              help="JSON list of indirect statements about own judgments.")
@threshold_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_init(root, session_id, panel_file, n, m, judgments_file, intrinsic_file,
             eps_prime, delta, rho0, eps_min, big_m, seed, as_json):
    """Create a session directory from panel data."""
    if (store.session_dir(root, session_id) / "session.json").exists():
        raise ValidationError(f"session {session_id!r} already exists under {root}")
    experts = alternatives = None
    if panel_file:
        blob = _read_json(panel_file)
        n, m = int(blob["n"]), int(blob["m"])
        experts = blob.get("experts")
        alternatives = blob.get("alternatives")
    if not n or not m:
        raise click.UsageError("give --panel FILE or both --n and --m")
    d = Thresholds()
    t = Thresholds(
        eps_prime=eps_prime if eps_prime is not None else d.eps_prime,
        delta=delta if delta is not None else d.delta,
        rho0=rho0 if rho0 is not None else d.rho0,
        eps_min=eps_min if eps_min is not None else d.eps_min,
        big_m=big_m,
    )
    session = workflow.create_session(
        session_id, n, m, experts=experts, alternatives=alternatives,
        thresholds=t, seed=seed,
        judgments=_read_json(judgments_file) if judgments_file else None,
        intrinsic_statements=(_read_json(intrinsic_file)
                              if intrinsic_file else None))
    directory = store.save(session, root)
    _emit(as_json, {"id": session_id, "dir": str(directory)},
          f"created session {session_id} at {directory}")


@main.command("complete-judgments")
@click.argument("session_id")
@threshold_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_complete(root, session_id, eps_prime, delta, rho0, eps_min, big_m, as_json):
    """Fill missing judgment cells for every expert (additive consistency)."""
    session = store.load(root, session_id)
    if session.phase != "IntrinsicElicitation":
        # completions are frozen once the session moves on; re-display them
        rows = workflow.completed_summary(session)
        _emit(as_json, {"experts": rows}, "\n".join(_slack_lines(rows)))
        return
    with store.session_lock(store.session_dir(root, session_id)):
        t = workflow.merged_thresholds(
            session, _overrides(eps_prime, delta, rho0, eps_min, big_m))
        rows, failures = workflow.complete_judgments(session, t)
        store.save(session, root)
        if failures:
            path = _exports_dir(root, session_id) / "judgment-inconsistencies.json"
            path.write_text(json.dumps(failures, indent=2, sort_keys=True) + "\n")
            for label in sorted(failures):
                click.echo(f"{label}: indirect statements are inconsistent")
            click.echo(f"report: {path}")
            sys.exit(1)
        _emit(as_json, {"experts": rows}, "\n".join(_slack_lines(rows)))


@main.command("intrinsic")
@click.argument("session_id")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_intrinsic(root, session_id, as_json):
    """Derive each expert's intrinsic utilities from completed judgments."""
    session = store.load(root, session_id)
    if session.phase != "IntrinsicElicitation":
        # utilities are frozen once the session moves on; re-display them
        U = workflow.utilities_or_fail(session)
    else:
        with store.session_lock(store.session_dir(root, session_id)):
            U = workflow.derive_intrinsic(session)
            store.save(session, root)
    _emit(as_json,
          {"experts": session.panel["experts"],
           "alternatives": session.panel["alternatives"],
           "utilities": [[float(v) for v in row] for row in U.entries]},
          _utilities_text(session, U))


@main.command("check")
@click.argument("session_id")
@click.option("--statements", "statements_file",
              type=click.Path(exists=True, dir_okay=False),
              help="JSON list of empathic/node statements to record first.")
@threshold_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_check(root, session_id, statements_file, eps_prime, delta, rho0,
              eps_min, big_m, as_json):
    """Test the statement system for feasibility; report minimal repairs."""
    session = store.load(root, session_id)
    with store.session_lock(store.session_dir(root, session_id)):
        t = workflow.merged_thresholds(
            session, _overrides(eps_prime, delta, rho0, eps_min, big_m))
        new = (workflow.parse_statements(session, _read_json(statements_file))
               if statements_file else None)
        res, system = workflow.feasibility(session, t, new_statements=new)
        if workflow.alive(res):
            store.save(session, root)
            if res.status == "unbounded":
                text = "feasible; no strict statement constrains the slack"
                eps = None
            else:
                eps = float(res.eps_star)
                text = f"feasible; shared slack eps* = {eps:.4f}"
            _emit(as_json, {"status": "feasible", "eps_star": eps}, text)
        else:
            _write_inconsistency_report(root, session, system, t)
            sys.exit(1)


@main.command("resolve")
@click.argument("session_id")
@click.option("--set", "set_index", type=int, required=True,
              help="1-based index into the last reported minimal sets.")
@threshold_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_resolve(root, session_id, set_index, eps_prime, delta, rho0, eps_min,
                big_m, as_json):
    """Drop one reported minimal statement set and re-check feasibility."""
    session = store.load(root, session_id)
    with store.session_lock(store.session_dir(root, session_id)):
        t = workflow.merged_thresholds(
            session, _overrides(eps_prime, delta, rho0, eps_min, big_m))
        removed, res, system = workflow.resolution(session, set_index, t)
        if workflow.alive(res):
            store.save(session, root)
            _emit(as_json,
                  {"removed": removed, "status": "feasible"},
                  f"removed {', '.join(removed)}; system is feasible")
        else:
            _write_inconsistency_report(root, session, system, t)
            sys.exit(1)


@main.command("relations")
@click.argument("session_id")
@threshold_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_relations(root, session_id, eps_prime, delta, rho0, eps_min, big_m,
                  as_json):
    """Classify every ordered pair as necessary / possible-only / impossible."""
    session = store.load(root, session_id)
    with store.session_lock(store.session_dir(root, session_id)):
        t = workflow.merged_thresholds(
            session, _overrides(eps_prime, delta, rho0, eps_min, big_m))
        rm = workflow.relations_matrix(session, t)
        store.save(session, root)
    csv = relation_matrix_to_csv(rm)
    (_exports_dir(root, session_id) / "relations.csv").write_text(csv)
    if as_json:
        click.echo(json.dumps(relation_matrix_to_json(rm), indent=2,
                              sort_keys=True))
    else:
        click.echo(csv, nl=False)


@main.command("select")
@click.argument("session_id")
@click.option("--target", type=click.Choice(workflow.TARGETS), required=True)
@click.option("--center", type=int, default=None,
              help="Star hub (omitted: best feasible center).")
@click.option("--direction", type=click.Choice(["fwd", "rev"]), default="fwd",
              show_default=True, help="Ring/chain orientation.")
@click.option("--tree", "tree_file", type=click.Path(exists=True, dir_okay=False),
              help="JSON object mapping child expert to parent expert.")
@click.option("--seed", type=int, default=None,
              help="Multistart seed (defaults to the session seed).")
@threshold_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_select(root, session_id, target, center, direction, tree_file, seed,
               eps_prime, delta, rho0, eps_min, big_m, as_json):
    """Pick one representative network for the given decision context."""
    session = store.load(root, session_id)
    with store.session_lock(store.session_dir(root, session_id)):
        t = workflow.merged_thresholds(
            session, _overrides(eps_prime, delta, rho0, eps_min, big_m))
        stored = workflow.run_selection(
            session, target, t, center=center, direction=direction,
            tree_layers=_read_json(tree_file) if tree_file else None,
            seed=seed)
        store.save(session, root)
    path = _exports_dir(root, session_id) / f"network-{target}.json"
    path.write_text(json.dumps(stored, indent=2, sort_keys=True) + "\n")
    diag = stored["diagnostics"]
    obj = ("unconstrained" if stored["objective"] is None
           else f"{stored['objective']:.6g}")
    text = (f"target {target}: objective {obj}; entropy {diag['entropy']:.4f}; "
            f"density {diag['density']:.4f}\nnetwork: {path}")
    _emit(as_json, stored, text)


@main.command("welfare")
@click.argument("session_id")
@click.option("--networks", "network_files", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Network/utility matrix files to compare (repeatable); "
                   "defaults to the session's recorded selections.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_welfare(root, session_id, network_files, as_json):
    """Score alternatives by social welfare across candidate networks."""
    session = store.load(root, session_id)
    with store.session_lock(store.session_dir(root, session_id)):
        U_I = workflow.utilities_or_fail(session)
        entries = None
        if network_files:
            entries = [workflow.network_entry_from_blob(
                           _read_json(f), U_I.n, U_I.m, origin=str(f))
                       for f in network_files]
        report = workflow.welfare(session, entries)
        store.save(session, root)
    csv = welfare_report_to_csv(report)
    (_exports_dir(root, session_id) / "welfare.csv").write_text(csv)
    if as_json:
        click.echo(json.dumps(welfare_report_to_json(report), indent=2,
                              sort_keys=True))
    else:
        click.echo(csv, nl=False)


@main.command("export")
@click.argument("session_id")
@click.option("--format", "fmt", type=click.Choice(["dot", "csv", "json"]),
              required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
@pipeline_command
def cmd_export(root, session_id, fmt, as_json):
    """Write session artifacts (tables, figures, graphs) into exports/."""
    session = store.load(root, session_id)
    written = workflow.export_bundle(session, _exports_dir(root, session_id), fmt)
    _emit(as_json, {"written": [str(p) for p in written]},
          "\n".join(str(p) for p in written))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--workers", type=int, default=2, show_default=True,
              envvar="EMPATHNET_WORKERS",
              help="Thread pool size for background solve jobs.")
@click.option("--token", default=None, envvar="EMPATHNET_TOKEN",
              help="Shared bearer token required on every API call.")
@click.option("--cors-origin", "cors_origin", default="*", show_default=True,
              envvar="EMPATHNET_CORS",
              help="Origin allowed to call the API from a browser.")
@click.pass_obj
@pipeline_command
def cmd_serve(root, host, port, workers, token, cors_origin):
    """Run the HTTP session service."""
    from .service import serve

    serve(root, host=host, port=port, workers=workers, token=token,
          cors_origin=cors_origin)


if __name__ == "__main__":
    main()
