"""HTTP service contract: endpoints, error mapping, idempotency, jobs,
and the guarantee that an API walkthrough matches the CLI on the same
inputs."""

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from empathnet import store
from empathnet.cli import main as cli_main
from empathnet.service import create_app

pytestmark = pytest.mark.filterwarnings(
    "ignore::pytest.PytestUnraisableExceptionWarning")


def make_client(tmp_path, **kwargs):
    root = tmp_path / "sessions"
    root.mkdir(parents=True, exist_ok=True)
    app = create_app(root, **kwargs)
    return TestClient(app), root


def published_networks(empathic_utilities):
    """The nine reference utility matrices as welfare entry payloads."""
    labels = ("discriminating", "sparse", "central", "distributed",
              "resilient-local", "resilient-global", "star", "bus", "tree")
    return [{"label": label,
             "kind": ("global-empathic" if label == "resilient-global"
                      else "local-empathic"),
             "matrix": empathic_utilities[label.replace("-", "_")].tolist()}
            for label in labels]


def create_demo(client, panel, judgments, intrinsic_statements,
                empathic_statements, session_id="demo"):
    """Drive the full pipeline over HTTP up to the Resolved phase."""
    r = client.post("/sessions", json={"id": session_id, "panel": panel})
    assert r.status_code == 201, r.text
    for dm, cells in enumerate(judgments, start=1):
        r = client.put(f"/sessions/{session_id}/judgments/{dm}",
                       json={"cells": cells})
        assert r.status_code == 200, r.text
    r = client.post(f"/sessions/{session_id}/intrinsic-statements",
                    json=intrinsic_statements)
    assert r.status_code == 200, r.text
    r = client.post(f"/sessions/{session_id}/complete", json={})
    assert r.status_code == 200, r.text
    assert r.json()["status"] == "completed"
    r = client.post(f"/sessions/{session_id}/statements",
                    json=empathic_statements)
    assert r.status_code == 200, r.text
    r = client.get(f"/sessions/{session_id}/feasibility")
    assert r.status_code == 200, r.text
    assert r.json()["status"] == "feasible"
    return session_id


@pytest.fixture(scope="module")
def demo(tmp_path_factory, panel, judgments_completed, intrinsic_statements,
         empathic_statements):
    client, root = make_client(tmp_path_factory.mktemp("svc"))
    create_demo(client, panel, judgments_completed, intrinsic_statements,
                empathic_statements)
    return {"client": client, "root": root}


class TestSessionLifecycle:
    def test_create_returns_created_state(self, tmp_path, panel):
        client, _ = make_client(tmp_path)
        r = client.post("/sessions", json={"id": "s1", "panel": panel})
        assert r.status_code == 201
        body = r.json()
        assert body["id"] == "s1"
        assert body["phase"] == "IntrinsicElicitation"
        assert body["panel"]["n"] == 10

    def test_create_generates_id_when_missing(self, tmp_path):
        client, _ = make_client(tmp_path)
        r = client.post("/sessions", json={"panel": {"n": 2, "m": 2}})
        assert r.status_code == 201
        assert r.json()["id"]

    def test_create_duplicate_conflicts(self, tmp_path):
        client, _ = make_client(tmp_path)
        body = {"id": "dup", "panel": {"n": 2, "m": 2}}
        assert client.post("/sessions", json=body).status_code == 201
        assert client.post("/sessions", json=body).status_code == 409

    def test_create_with_thresholds(self, tmp_path):
        client, root = make_client(tmp_path)
        r = client.post("/sessions", json={
            "id": "t", "panel": {"n": 2, "m": 2},
            "thresholds": {"eps_prime": 0.02}, "seed": 7})
        assert r.status_code == 201
        s = store.load(root, "t")
        assert s.thresholds["eps_prime"] == 0.02
        assert s.seed == 7

    def test_bad_panel_is_422(self, tmp_path):
        client, _ = make_client(tmp_path)
        r = client.post("/sessions", json={"id": "bad", "panel": {"n": 1, "m": 2}})
        assert r.status_code == 422

    def test_get_unknown_session_is_404(self, tmp_path):
        client, _ = make_client(tmp_path)
        assert client.get("/sessions/ghost").status_code == 404

    def test_get_session_state(self, demo):
        r = demo["client"].get("/sessions/demo")
        assert r.status_code == 200
        body = r.json()
        assert body["phase"] == "Resolved"
        assert len(body["empathic_statements"]) == 6

    def test_list_sessions(self, demo):
        r = demo["client"].get("/sessions")
        assert r.status_code == 200
        assert any(row["id"] == "demo" for row in r.json()["sessions"])


class TestJudgmentsAndCompletion:
    def test_put_judgments_reports_completeness(self, tmp_path, panel,
                                                judgments_incomplete):
        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "j", "panel": panel})
        r = client.put("/sessions/j/judgments/1",
                       json={"cells": judgments_incomplete[0]})
        assert r.status_code == 200
        assert r.json() == {"dm": 1, "complete": False}

    def test_put_judgments_bad_expert_is_422(self, tmp_path, panel,
                                             judgments_incomplete):
        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "j", "panel": panel})
        r = client.put("/sessions/j/judgments/11",
                       json={"cells": judgments_incomplete[0]})
        assert r.status_code == 422
        assert "11" in r.json()["detail"]

    def test_put_judgments_bad_shape_is_422(self, tmp_path, panel):
        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "j", "panel": panel})
        r = client.put("/sessions/j/judgments/1",
                       json={"cells": [[0.5, 0.6], [0.4, 0.5]]})
        assert r.status_code == 422

    def test_complete_returns_utilities(self, demo, u_intrinsic):
        # the session is already past completion, so this re-displays
        r = demo["client"].post("/sessions/demo/complete", json={})
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "completed"
        got = np.array(body["utilities"])
        assert got.shape == (10, 5)
        assert np.allclose(got, u_intrinsic, atol=2e-3)
        assert len(body["experts"]) == 10

    def test_complete_without_judgments_is_409(self, tmp_path):
        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "empty", "panel": {"n": 2, "m": 2}})
        r = client.post("/sessions/empty/complete", json={})
        assert r.status_code == 409

    def test_complete_reports_judgment_inconsistency(self, tmp_path):
        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "clash", "panel": {"n": 2, "m": 2}})
        client.put("/sessions/clash/judgments/1",
                   json={"cells": [[0.5, None], [None, 0.5]]})
        client.put("/sessions/clash/judgments/2",
                   json={"cells": [[0.5, 0.6], [0.4, 0.5]]})
        stmts = [
            {"dm": 1, "kind": "preference", "better": 1, "worse": 2},
            {"dm": 1, "kind": "preference", "better": 2, "worse": 1},
        ]
        client.post("/sessions/clash/intrinsic-statements", json=stmts)
        r = client.post("/sessions/clash/complete", json={})
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "inconsistent"
        assert body["failures"]  # names the offending statement sets


class TestStatementsAndFeasibility:
    def test_unknown_node_index_is_422_naming_field(self, demo):
        r = demo["client"].post("/sessions/demo/statements", json=[
            {"id": "bad", "source": "d1", "kind": "zero-weight",
             "i": 1, "j": 11}])
        assert r.status_code == 422
        body = r.json()
        assert body["field"] == "j"
        assert "11" in body["detail"]

    def test_malformed_statement_is_422(self, demo):
        r = demo["client"].post("/sessions/demo/statements", json=[
            {"id": "bad2", "source": "d1", "kind": "no-such-kind"}])
        assert r.status_code == 422

    def test_feasibility_reports_slack(self, demo):
        r = demo["client"].get("/sessions/demo/feasibility")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "feasible"
        assert abs(body["eps_star"] - 0.1840) < 1e-3

    def test_inconsistencies_on_feasible_session_is_409(self, demo):
        r = demo["client"].get("/sessions/demo/inconsistencies")
        assert r.status_code == 409

    def test_conflict_resolution_flow(self, tmp_path):
        client, root = make_client(tmp_path)
        client.post("/sessions", json={"id": "c", "panel": {"n": 2, "m": 2}})
        cells = [[0.5, 0.8], [0.2, 0.5]]
        for dm in (1, 2):
            client.put(f"/sessions/c/judgments/{dm}", json={"cells": cells})
        assert client.post("/sessions/c/complete",
                           json={}).json()["status"] == "completed"
        r = client.post("/sessions/c/statements", json=[
            {"id": "z", "source": "d1", "kind": "zero-weight", "i": 1, "j": 2},
            {"id": "f", "source": "d2", "kind": "weight-floor", "i": 1, "j": 2},
        ])
        assert r.status_code == 200
        r = client.get("/sessions/c/feasibility")
        assert r.json()["status"] == "infeasible"
        # relations are gated until the conflict is resolved
        r = client.get("/sessions/c/relations")
        assert r.status_code == 409
        assert "inconsistencies" in r.json()["detail"]
        r = client.get("/sessions/c/inconsistencies")
        assert r.status_code == 200
        sets = r.json()["sets"]
        assert sorted(sets) == [["f"], ["z"]]
        r = client.post("/sessions/c/resolutions", json={"set": 1})
        assert r.status_code == 200
        body = r.json()
        assert body["removed"] == [sets[0][0]]
        assert body["status"] == "feasible"
        assert store.load(root, "c").phase == "Resolved"
        assert client.get("/sessions/c/relations").status_code == 200

    def test_resolution_out_of_range_is_422(self, tmp_path):
        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "r", "panel": {"n": 2, "m": 2}})
        cells = [[0.5, 0.8], [0.2, 0.5]]
        for dm in (1, 2):
            client.put(f"/sessions/r/judgments/{dm}", json={"cells": cells})
        client.post("/sessions/r/complete", json={})
        client.post("/sessions/r/statements", json=[
            {"id": "z", "source": "d1", "kind": "zero-weight", "i": 1, "j": 2},
            {"id": "f", "source": "d2", "kind": "weight-floor", "i": 1, "j": 2},
        ])
        client.get("/sessions/r/feasibility")
        client.get("/sessions/r/inconsistencies")
        assert client.post("/sessions/r/resolutions",
                           json={"set": 9}).status_code == 422

    def test_statements_before_completion_is_409(self, tmp_path):
        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "early", "panel": {"n": 2, "m": 2}})
        r = client.post("/sessions/early/statements", json=[
            {"id": "z", "source": "d1", "kind": "zero-weight", "i": 1, "j": 2}])
        assert r.status_code == 409


class TestRelationsSelectWelfare:
    def test_relations_payload(self, demo):
        r = demo["client"].get("/sessions/demo/relations")
        assert r.status_code == 200
        body = r.json()
        assert body["n"] == 10
        assert body["cells"][0][1] == "possible-only"
        assert abs(body["eps_model2"][0][1] - 0.1840) < 1e-3
        assert body["cells"][1][2] == "necessary"

    def test_select_sparse(self, demo):
        r = demo["client"].post("/sessions/demo/select",
                                json={"target": "sparse"})
        assert r.status_code == 200
        body = r.json()
        assert body["objective"] == 11.0
        W = np.array(body["W"])
        off = (W >= 0.01 - 1e-12) & ~np.eye(10, dtype=bool)
        assert off.sum() == 1

    def test_select_star_with_center(self, demo):
        r = demo["client"].post("/sessions/demo/select",
                                json={"target": "star", "center": 3})
        assert r.status_code == 200
        assert abs(r.json()["objective"] - 0.1310161) < 1e-4

    def test_select_tree_requires_layers(self, demo):
        r = demo["client"].post("/sessions/demo/select", json={"target": "tree"})
        assert r.status_code == 422

    def test_select_unknown_target_is_422(self, demo):
        r = demo["client"].post("/sessions/demo/select", json={"target": "mesh"})
        assert r.status_code == 422

    def test_welfare_from_selections(self, demo):
        r = demo["client"].get("/sessions/demo/welfare")
        assert r.status_code == 200
        body = r.json()
        labels = [row["label"] for row in body["rows"]]
        assert labels[0] == "baseline"
        assert "sparse" in labels
        assert body["rows"][0]["best"] == 2

    def test_welfare_with_explicit_networks(self, demo, empathic_utilities,
                                            welfare_table):
        r = demo["client"].post(
            "/sessions/demo/welfare",
            json={"networks": published_networks(empathic_utilities)})
        assert r.status_code == 200
        rows = r.json()["rows"]
        assert len(rows) == len(welfare_table)
        for got, want in zip(rows, welfare_table):
            assert got["label"] == want["label"]
            assert np.allclose(got["sw"], want["sw"], atol=1e-3), want["label"]
            assert got["best"] == want["best"], want["label"]

    def test_export_dot(self, demo):
        r = demo["client"].get("/sessions/demo/export", params={"format": "dot"})
        assert r.status_code == 200
        body = r.json()
        assert any(name.endswith(".dot") for name in body["files"])
        dot = next(v for k, v in body["files"].items() if k.endswith(".dot"))
        assert dot.startswith("digraph")

    def test_export_csv_includes_figures(self, demo):
        r = demo["client"].get("/sessions/demo/export", params={"format": "csv"})
        assert r.status_code == 200
        body = r.json()
        assert "welfare.csv" in body["files"]
        assert body["files"]["welfare.csv"].startswith("network,")
        assert any(name.endswith(".png") for name in body["binary"])

    def test_export_bad_format_is_422(self, demo):
        r = demo["client"].get("/sessions/demo/export", params={"format": "xml"})
        assert r.status_code == 422

    def test_export_empty_session_is_409(self, tmp_path):
        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "e", "panel": {"n": 2, "m": 2}})
        r = client.get("/sessions/e/export", params={"format": "dot"})
        assert r.status_code == 409


class TestProtocol:
    def test_idempotency_key_replays_response(self, tmp_path):
        client, root = make_client(tmp_path)
        body = {"id": "idem", "panel": {"n": 2, "m": 2}}
        h = {"Idempotency-Key": "k1"}
        first = client.post("/sessions", json=body, headers=h)
        assert first.status_code == 201
        replay = client.post("/sessions", json=body, headers=h)
        assert replay.status_code == 201
        assert replay.json() == first.json()
        # same request without the key hits the duplicate guard
        assert client.post("/sessions", json=body).status_code == 409

    def test_idempotent_statements_not_double_recorded(self, tmp_path):
        client, root = make_client(tmp_path)
        client.post("/sessions", json={"id": "s", "panel": {"n": 2, "m": 2}})
        cells = [[0.5, 0.8], [0.2, 0.5]]
        for dm in (1, 2):
            client.put(f"/sessions/s/judgments/{dm}", json={"cells": cells})
        client.post("/sessions/s/complete", json={})
        stmt = [{"id": "w", "source": "d1", "kind": "weight-floor",
                 "i": 1, "j": 2}]
        h = {"Idempotency-Key": "once"}
        r1 = client.post("/sessions/s/statements", json=stmt, headers=h)
        r2 = client.post("/sessions/s/statements", json=stmt, headers=h)
        assert r1.json() == r2.json()
        assert len(store.load(root, "s").empathic_statements) == 1

    def test_locked_session_is_409(self, tmp_path, panel):
        client, root = make_client(tmp_path)
        client.post("/sessions", json={"id": "locked", "panel": {"n": 2, "m": 2}})
        lock = store.session_dir(root, "locked") / "lock"
        lock.write_text("999999")
        try:
            r = client.put("/sessions/locked/judgments/1",
                           json={"cells": [[0.5, 0.6], [0.4, 0.5]]})
            assert r.status_code == 409
            assert "lock" in r.json()["detail"].lower()
        finally:
            lock.unlink()

    def test_solver_failure_returns_incident_id(self, tmp_path, monkeypatch):
        from empathnet import service as svc
        from empathnet.errors import SolverFailure

        client, _ = make_client(tmp_path)
        client.post("/sessions", json={"id": "s", "panel": {"n": 2, "m": 2}})
        cells = [[0.5, 0.8], [0.2, 0.5]]
        for dm in (1, 2):
            client.put(f"/sessions/s/judgments/{dm}", json={"cells": cells})
        client.post("/sessions/s/complete", json={})

        def boom(*args, **kwargs):
            raise SolverFailure("synthetic failure")

        monkeypatch.setattr(svc.workflow, "feasibility", boom)
        r = client.get("/sessions/s/feasibility")
        assert r.status_code == 500
        body = r.json()
        assert body["incident"]
        assert "solver" in body["detail"].lower()

    def test_token_auth(self, tmp_path):
        client, _ = make_client(tmp_path, token="sekret")
        body = {"id": "a", "panel": {"n": 2, "m": 2}}
        assert client.post("/sessions", json=body).status_code == 401
        r = client.post("/sessions", json=body,
                        headers={"Authorization": "Bearer sekret"})
        assert r.status_code == 201

    def test_async_job_matches_sync_result(self, demo):
        client = demo["client"]
        sync = client.post("/sessions/demo/select",
                           json={"target": "distributed"}).json()
        r = client.post("/sessions/demo/select", params={"mode": "async"},
                        json={"target": "distributed"})
        assert r.status_code == 202
        job = r.json()["job"]
        deadline = time.time() + 60
        while time.time() < deadline:
            poll = client.get(f"/jobs/{job}")
            assert poll.status_code == 200
            body = poll.json()
            if body["status"] == "done":
                break
            assert body["status"] in ("pending", "running")
            time.sleep(0.05)
        else:
            pytest.fail("job did not finish in time")
        result = body["result"]
        assert result["target"] == "distributed"
        assert np.allclose(result["omega"], sync["omega"], atol=1e-6)

    def test_unknown_job_is_404(self, demo):
        assert demo["client"].get("/jobs/nope").status_code == 404


class TestCliEquivalence:
    """The same inputs through the CLI and the API land on equal state."""

    def test_walkthrough_states_match(self, tmp_path, panel,
                                      judgments_completed,
                                      intrinsic_statements,
                                      empathic_statements):
        api_client, api_root = make_client(tmp_path)
        create_demo(api_client, panel, judgments_completed,
                    intrinsic_statements, empathic_statements,
                    session_id="walk")
        api_client.get("/sessions/walk/relations")
        api_client.post("/sessions/walk/select", json={"target": "sparse"})
        api_client.get("/sessions/walk/welfare")

        cli_root = tmp_path / "cli-sessions"
        files = tmp_path / "inputs"
        files.mkdir()
        (files / "panel.json").write_text(json.dumps(panel))
        (files / "judgments.json").write_text(json.dumps(judgments_completed))
        (files / "intrinsic.json").write_text(json.dumps(intrinsic_statements))
        (files / "statements.json").write_text(json.dumps(empathic_statements))
        runner = CliRunner()

        def run(*args):
            res = runner.invoke(cli_main, ["--root", str(cli_root), *args],
                                catch_exceptions=False)
            assert res.exit_code == 0, res.output
            return res

        run("init", "walk", "--panel", str(files / "panel.json"),
            "--judgments", str(files / "judgments.json"),
            "--intrinsic-statements", str(files / "intrinsic.json"))
        run("complete-judgments", "walk")
        run("intrinsic", "walk")
        run("check", "walk", "--statements", str(files / "statements.json"))
        run("relations", "walk")
        run("select", "walk", "--target", "sparse")
        run("welfare", "walk")

        via_api = store._state(store.load(api_root, "walk"))
        via_cli = store._state(store.load(cli_root, "walk"))
        assert via_api == via_cli

    def test_welfare_payloads_match(self, tmp_path, panel,
                                    judgments_completed, intrinsic_statements,
                                    empathic_statements, empathic_utilities):
        client, _ = make_client(tmp_path)
        create_demo(client, panel, judgments_completed, intrinsic_statements,
                    empathic_statements, session_id="w")
        networks = published_networks(empathic_utilities)
        api = client.post("/sessions/w/welfare",
                          json={"networks": networks}).json()

        cli_root = tmp_path / "cli"
        files = tmp_path / "files"
        files.mkdir()
        (files / "panel.json").write_text(json.dumps(panel))
        (files / "judgments.json").write_text(json.dumps(judgments_completed))
        (files / "intrinsic.json").write_text(json.dumps(intrinsic_statements))
        (files / "statements.json").write_text(json.dumps(empathic_statements))
        net_files = []
        for k, blob in enumerate(networks):
            p = files / f"net{k}.json"
            p.write_text(json.dumps(blob))
            net_files.append(str(p))
        runner = CliRunner()

        def run(*args):
            res = runner.invoke(cli_main, ["--root", str(cli_root), *args],
                                catch_exceptions=False)
            assert res.exit_code == 0, res.output
            return res

        run("init", "w", "--panel", str(files / "panel.json"),
            "--judgments", str(files / "judgments.json"),
            "--intrinsic-statements", str(files / "intrinsic.json"))
        run("complete-judgments", "w")
        run("intrinsic", "w")
        run("check", "w", "--statements", str(files / "statements.json"))
        res = run("welfare", "w", "--json",
                  *[arg for f in net_files for arg in ("--networks", f)])
        assert json.loads(res.output) == api
