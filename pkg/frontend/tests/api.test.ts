/** Transport contract: headers, error envelopes, and job polling, checked
 * against recorded service responses.
 */

import { describe, expect, it } from "vitest";
import { ApiError, Client } from "../src/api";
import type {
  ExportPayload,
  JobAccepted,
  JobStatus,
  SelectionPayload,
  SessionView,
} from "../src/types";
import { body, fixture, route, routeSeq, stubFetch } from "./helpers";

const BASE = "http://stub";

function client(stub: ReturnType<typeof stubFetch>, token = ""): Client {
  return new Client({ baseUrl: BASE, token, fetchFn: stub.fn });
}

describe("request headers", () => {
  it("sends a bearer token when configured and none otherwise", async () => {
    const withToken = stubFetch([route("session_full")]);
    await client(withToken, "sesame").getSession("demo");
    expect(withToken.calls[0].headers["Authorization"]).toBe("Bearer sesame");

    const without = stubFetch([route("session_full")]);
    await client(without).getSession("demo");
    expect(without.calls[0].headers["Authorization"]).toBeUndefined();
  });

  it("attaches a fresh Idempotency-Key to POST and PUT but not GET", async () => {
    const stub = stubFetch([route("select_sparse"), route("session_full")]);
    const api = client(stub);
    await api.select("demo", { target: "sparse" });
    await api.select("demo", { target: "sparse" });
    await api.getSession("demo");

    const [first, second, get] = stub.calls;
    expect(first.headers["Idempotency-Key"]).toBeTruthy();
    expect(second.headers["Idempotency-Key"]).toBeTruthy();
    expect(first.headers["Idempotency-Key"]).not.toBe(second.headers["Idempotency-Key"]);
    expect(get.headers["Idempotency-Key"]).toBeUndefined();
    expect(first.body).toEqual({ target: "sparse" });
  });
});

describe("error envelopes", () => {
  it("surfaces a recorded validation error with its field", async () => {
    const stub = stubFetch([route("error_422")]);
    const recorded = fixture<{ detail: string; field: string }>("error_422");
    const err = await client(stub)
      .postStatements("demo", [])
      .then(() => null, (e: unknown) => e as ApiError);
    expect(err).toBeInstanceOf(ApiError);
    expect(err!.status).toBe(422);
    expect(err!.detail).toBe(recorded.body.detail);
    expect(err!.field).toBe(recorded.body.field);
  });

  it("surfaces a recorded phase conflict", async () => {
    const stub = stubFetch([route("error_409")]);
    const recorded = fixture<{ detail: string }>("error_409");
    const err = await client(stub)
      .relations("clash")
      .then(() => null, (e: unknown) => e as ApiError);
    expect(err!.status).toBe(409);
    expect(err!.detail).toBe(recorded.body.detail);
  });

  it("wraps a network failure as status 0", async () => {
    const api = new Client({
      baseUrl: BASE,
      fetchFn: async () => {
        throw new Error("connection refused");
      },
    });
    const err = await api.getSession("demo").then(
      () => null,
      (e: unknown) => e as ApiError,
    );
    expect(err!.status).toBe(0);
    expect(err!.detail).toContain("connection refused");
  });
});

describe("job polling", () => {
  it("polls the recorded job to completion and returns its result", async () => {
    const stub = stubFetch([routeSeq("job_pending", "job_done")]);
    const accepted = body<JobAccepted>("job_accepted");
    const ticks: string[] = [];
    const result = await client(stub).pollJob<SelectionPayload>(accepted, {
      sleep: async () => {},
      onTick: (status: JobStatus) => ticks.push(status.status),
    });
    const recorded = body<{ result: SelectionPayload }>("job_done").result;
    expect(result).toEqual(recorded);
    expect(ticks).toEqual(["running"]);
    expect(stub.calls.map((c) => c.path)).toEqual([accepted.poll, accepted.poll]);
  });

  it("raises the job error when the job fails", async () => {
    const accepted = body<JobAccepted>("job_accepted");
    const stub = stubFetch([
      {
        method: "GET",
        path: accepted.poll,
        responses: [{ status: 200, body: { status: "failed", error: "solver blew up" } }],
      },
    ]);
    const err = await client(stub)
      .pollJob(accepted, { sleep: async () => {} })
      .then(() => null, (e: unknown) => e as ApiError);
    expect(err!.status).toBe(500);
    expect(err!.detail).toBe("solver blew up");
  });
});

describe("recorded payload shapes", () => {
  it("export bundle names a DOT file per recorded network", async () => {
    const stub = stubFetch([route("export_dot")]);
    const bundle = await client(stub).exportBundle("demo", "dot");
    const recorded = body<ExportPayload>("export_dot");
    expect(Object.keys(bundle.files)).toEqual(Object.keys(recorded.files));
    expect(bundle.files["network-sparse.dot"]).toContain("digraph");
  });

  it("session view carries panel, phase, and caches straight through", async () => {
    const stub = stubFetch([route("session_full")]);
    const session = await client(stub).getSession("demo");
    const recorded = body<SessionView>("session_full");
    expect(session.panel.n).toBe(recorded.panel.n);
    expect(session.phase).toBe("Resolved");
    expect(Object.keys(session.selections)).toEqual(Object.keys(recorded.selections));
  });
});
