"""Record service responses for the UI contract tests.

Drives the real HTTP service (in-process ASGI transport, fresh storage
root) through two walkthroughs and saves every response verbatim:

* session ``demo`` — the demo panel's full pipeline: create with preloaded
  judgments and indirect statements, complete, record the six empathic
  statements, feasibility, relations (sync and as a polled job), three
  target selections, welfare over the nine candidate networks, DOT export;
* session ``clash`` — a two-expert session given a deliberately
  contradictory statement pair, to capture the infeasible verdict, the
  minimal-set report, a resolution, and the feasible verdict after it;
* two error shapes — a 422 for an out-of-range expert index and a 409 for
  requesting relations before the system is workable.

Each fixture file wraps the payload as {method, path, status, body} so the
tests can replay exact status codes.  Re-running the script overwrites the
fixtures in place; the walkthrough is deterministic, so a re-recording only
changes if the service itself changed.
"""

import json
import sys
import time
from pathlib import Path

from fastapi.testclient import TestClient

from empathnet.service import create_app

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"
PRIMARY_FIXTURES = HERE.parent.parent / "tests" / "fixtures"


def load(name):
    return json.loads((PRIMARY_FIXTURES / name).read_text())


def save(name, method, path, response):
    FIXTURES.mkdir(parents=True, exist_ok=True)
    doc = {
        "method": method,
        "path": path,
        "status": response.status_code,
        "body": response.json(),
    }
    out = FIXTURES / f"{name}.json"
    out.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"  {name}: {method} {path} -> {response.status_code}")
    return doc["body"]


def request(client, method, path, name=None, expect=None, **kwargs):
    response = getattr(client, method.lower())(path, **kwargs)
    if expect is not None and response.status_code != expect:
        raise SystemExit(
            f"{method} {path}: expected {expect}, got {response.status_code}: "
            f"{response.text[:300]}")
    if name is not None:
        return save(name, method, path, response)
    return response.json()


def demo_walkthrough(client):
    print("demo session:")
    panel = load("panel.json")
    judgments = load("judgments_incomplete.json")
    intrinsic = load("intrinsic_statements.json")
    statements = load("empathic_statements.json")

    request(client, "POST", "/sessions", name="session_created", expect=201,
            json={"id": "demo",
                  "panel": {"n": panel["n"], "m": panel["m"],
                            "experts": panel["experts"],
                            "alternatives": panel["alternatives"]},
                  "judgments": judgments,
                  "intrinsic_statements": intrinsic})
    request(client, "POST", "/sessions/demo/complete", name="complete",
            expect=200, json={})
    request(client, "POST", "/sessions/demo/statements",
            name="statements_recorded", expect=200, json=statements)
    (FIXTURES / "statements_input.json").write_text(
        json.dumps(statements, indent=1, sort_keys=True) + "\n")
    print("  statements_input: copied the six submitted statement bodies")

    feasibility = request(client, "GET", "/sessions/demo/feasibility",
                          name="feasibility", expect=200)
    assert feasibility["status"] == "feasible", feasibility
    request(client, "GET", "/sessions/demo", name="session_resolved",
            expect=200)

    request(client, "GET", "/sessions/demo/relations", name="relations",
            expect=200)
    request(client, "POST", "/sessions/demo/select", name="select_sparse",
            expect=200, json={"target": "sparse"})
    request(client, "POST", "/sessions/demo/select",
            name="select_discriminating", expect=200,
            json={"target": "discriminating"})
    request(client, "POST", "/sessions/demo/select", name="select_star",
            expect=200, json={"target": "star", "center": 3})

    networks = []
    utilities = load("empathic_utilities.json")
    for row in load("welfare_table.json")[1:]:
        label = row["label"]
        kind = ("global-empathic" if label == "resilient-global"
                else "local-empathic")
        networks.append({"label": label, "kind": kind,
                         "matrix": utilities[label.replace("-", "_")]})
    request(client, "POST", "/sessions/demo/welfare", name="welfare",
            expect=200, json={"networks": networks})

    request(client, "GET", "/sessions/demo/export?format=dot",
            name="export_dot", expect=200)
    request(client, "GET", "/sessions/demo", name="session_full", expect=200)


def job_walkthrough(client):
    print("async job (sparse selection rerun):")
    accepted = request(client, "POST", "/sessions/demo/select?mode=async",
                       name="job_accepted", expect=202,
                       json={"target": "sparse"})
    poll = accepted["poll"]
    first = request(client, "GET", poll, name="job_pending", expect=200)
    if first["status"] not in ("pending", "running"):
        raise SystemExit(
            f"first poll already terminal ({first['status']}); rerun to "
            "catch the job mid-flight")
    for _ in range(600):
        status = request(client, "GET", poll, expect=200)
        if status["status"] == "done":
            save_doc = client.get(poll)
            save("job_done", "GET", poll, save_doc)
            return
        if status["status"] == "failed":
            raise SystemExit(f"job failed: {status}")
        time.sleep(0.1)
    raise SystemExit("job did not settle within 60s")


def clash_walkthrough(client):
    print("clash session:")
    request(client, "POST", "/sessions", expect=201,
            json={"id": "clash",
                  "panel": {"n": 2, "m": 2},
                  "judgments": [[[0.5, 0.7], [0.3, 0.5]],
                                [[0.5, 0.4], [0.6, 0.5]]]})
    request(client, "POST", "/sessions/clash/complete", expect=200, json={})
    request(client, "POST", "/sessions/clash/statements", expect=200,
            json=[{"id": "pref", "source": "d1", "kind": "preference",
                   "dm": 1, "better": 1, "worse": 2, "strict": True},
                  {"id": "keep", "source": "analyst", "kind": "weight-floor",
                   "i": 1, "j": 2},
                  {"id": "cut", "source": "analyst", "kind": "zero-weight",
                   "i": 1, "j": 2}])
    verdict = request(client, "GET", "/sessions/clash/feasibility",
                      name="feasibility_infeasible", expect=200)
    assert verdict["status"] == "infeasible", verdict
    request(client, "GET", "/sessions/clash", name="clash_session",
            expect=200)
    request(client, "GET", "/sessions/clash/relations", name="error_409",
            expect=409)
    report = request(client, "GET", "/sessions/clash/inconsistencies",
                     name="inconsistencies", expect=200)
    assert report["sets"], report
    request(client, "POST", "/sessions/clash/resolutions", name="resolution",
            expect=200, json={"set": 1})
    after = request(client, "GET", "/sessions/clash/feasibility",
                    name="feasibility_after_resolve", expect=200)
    assert after["status"] == "feasible", after
    request(client, "GET", "/sessions/clash", name="clash_session_resolved",
            expect=200)


def error_fixture(client):
    print("validation error:")
    request(client, "POST", "/sessions/demo/statements", name="error_422",
            expect=422,
            json=[{"id": "bad", "source": "ui", "kind": "weight-floor",
                   "i": 99, "j": 1}])


def main():
    import tempfile

    with tempfile.TemporaryDirectory() as root:
        app = create_app(root)
        with TestClient(app) as client:
            demo_walkthrough(client)
            job_walkthrough(client)
            clash_walkthrough(client)
            error_fixture(client)
    print(f"fixtures written to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
