/** Shared plumbing for the contract tests.
 *
 * Fixtures are recorded request/response envelopes from the real service:
 * `{method, path, status, body}`.  The fetch stub replays them, so every
 * number a test sees on screen is asserted against the recorded payload —
 * if a rendered value ever disagrees with the service response, these
 * tests fail.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";

export interface Envelope<T = unknown> {
  method: string;
  path: string;
  status: number;
  body: T;
}

function read(name: string): string {
  // The test runner rewrites import.meta.url, so resolve from the package
  // root (the runner's working directory) instead.
  return readFileSync(join(process.cwd(), "tests", "fixtures", `${name}.json`), "utf8");
}

export function fixture<T = unknown>(name: string): Envelope<T> {
  return JSON.parse(read(name)) as Envelope<T>;
}

/** The response body of a recorded envelope. */
export function body<T>(name: string): T {
  return fixture<T>(name).body;
}

/** A fixture that is a raw payload rather than an envelope. */
export function rawFixture<T>(name: string): T {
  return JSON.parse(read(name)) as T;
}

export interface StubCall {
  method: string;
  path: string;
  headers: Record<string, string>;
  body: unknown;
}

interface StubResponse {
  status: number;
  body: unknown;
}

export interface StubRoute {
  method: string;
  path: string;
  /** Replay queue: calls consume entries in order; the last one repeats. */
  responses: StubResponse[];
}

/** Route serving one recorded envelope. */
export function route(name: string): StubRoute {
  const env = fixture(name);
  return {
    method: env.method,
    path: env.path,
    responses: [{ status: env.status, body: env.body }],
  };
}

/** Route replaying several envelopes for the same method and path, in order. */
export function routeSeq(...names: string[]): StubRoute {
  const envelopes = names.map((name) => fixture(name));
  const first = envelopes[0];
  for (const env of envelopes) {
    if (env.method !== first.method || env.path !== first.path) {
      throw new Error(
        `routeSeq mixes ${first.method} ${first.path} with ${env.method} ${env.path}`,
      );
    }
  }
  return {
    method: first.method,
    path: first.path,
    responses: envelopes.map((env) => ({ status: env.status, body: env.body })),
  };
}

export interface FetchStub {
  fn: typeof fetch;
  calls: StubCall[];
}

function respond(status: number, payload: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => JSON.parse(JSON.stringify(payload)),
  } as unknown as Response;
}

/** Scripted fetch: matches on "METHOD pathname?search", records every call. */
export function stubFetch(routes: StubRoute[]): FetchStub {
  const calls: StubCall[] = [];
  const live = routes.map((r) => ({ ...r, queue: [...r.responses] }));
  const fn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input));
    const method = init?.method ?? "GET";
    const path = url.pathname + url.search;
    calls.push({
      method,
      path,
      headers: { ...((init?.headers ?? {}) as Record<string, string>) },
      body: typeof init?.body === "string" ? JSON.parse(init.body) : null,
    });
    const match = live.find((r) => r.method === method && r.path === path);
    if (!match) {
      return respond(501, { detail: `no stub for ${method} ${path}` });
    }
    const next = match.queue.length > 1 ? match.queue.shift()! : match.queue[0];
    return respond(next.status, next.body);
  }) as typeof fetch;
  return { fn, calls };
}

/** Mirror of the on-screen number format, kept test-side on purpose. */
export function shown(value: number | null, digits = 4): string {
  return value === null ? "—" : value.toFixed(digits);
}
