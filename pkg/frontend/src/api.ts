/** Typed client for the session service.
 *
 * The only transport is this module: views never hold a URL or parse a
 * response themselves.  Mutating calls carry a fresh Idempotency-Key so a
 * network-level retry cannot double-apply; the service replays the cached
 * response for a repeated key.
 */

import type {
  CompletePayload,
  EmpathicStatementBlob,
  ExportPayload,
  FeasibilityPayload,
  InconsistencyReportBlob,
  IntrinsicStatementBlob,
  JobAccepted,
  JobStatus,
  JudgmentCell,
  NetworkEntryBlob,
  RelationPayload,
  ResolutionPayload,
  SelectionPayload,
  SelectRequest,
  SessionView,
  WelfarePayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly field?: string,
    readonly incident?: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface ClientOptions {
  baseUrl: string;
  token?: string;
  /** Injection point for tests; defaults to the runtime fetch. */
  fetchFn?: typeof fetch;
}

export interface PollOptions {
  intervalMs?: number;
  /** Called with each non-terminal status so the UI can show progress. */
  onTick?: (status: JobStatus, polls: number) => void;
  /** Injection point for tests; defaults to a real setTimeout wait. */
  sleep?: (ms: number) => Promise<void>;
}

function realSleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function freshKey(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `key-${Date.now()}-${Math.floor(Math.random() * 1e9)}`;
}

export class Client {
  private readonly baseUrl: string;
  private readonly token?: string;
  private readonly fetchFn: typeof fetch;

  constructor(options: ClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, "");
    this.token = options.token || undefined;
    this.fetchFn = options.fetchFn ?? ((...args) => fetch(...args));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { Accept: "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    if (method === "POST" || method === "PUT") {
      headers["Idempotency-Key"] = freshKey();
    }
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${(err as Error).message}`);
    }
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (!response.ok) {
      const blob = (payload ?? {}) as Record<string, unknown>;
      throw new ApiError(
        response.status,
        typeof blob.detail === "string" ? blob.detail : `HTTP ${response.status}`,
        typeof blob.field === "string" ? blob.field : undefined,
        typeof blob.incident === "string" ? blob.incident : undefined,
      );
    }
    return payload as T;
  }

  // ------------------------------------------------------------- sessions

  listSessions(): Promise<{ sessions: string[] }> {
    return this.request("GET", "/sessions");
  }

  createSession(body: {
    id?: string;
    panel: { n: number; m: number; experts?: string[]; alternatives?: string[] };
    thresholds?: Record<string, number>;
    seed?: number;
    judgments?: JudgmentCell[][][];
    intrinsic_statements?: IntrinsicStatementBlob[];
  }): Promise<SessionView> {
    return this.request("POST", "/sessions", body);
  }

  getSession(id: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${id}`);
  }

  putJudgments(
    id: string,
    dm: number,
    cells: JudgmentCell[][],
  ): Promise<{ dm: number; complete: boolean }> {
    return this.request("PUT", `/sessions/${id}/judgments/${dm}`, { cells });
  }

  postIntrinsicStatements(
    id: string,
    statements: IntrinsicStatementBlob[],
  ): Promise<{ recorded: number; total: number }> {
    return this.request("POST", `/sessions/${id}/intrinsic-statements`, statements);
  }

  complete(id: string): Promise<CompletePayload> {
    return this.request("POST", `/sessions/${id}/complete`, {});
  }

  // ----------------------------------------------------------- statements

  postStatements(
    id: string,
    statements: EmpathicStatementBlob[],
  ): Promise<{ recorded: number; total: number }> {
    return this.request("POST", `/sessions/${id}/statements`, statements);
  }

  feasibility(id: string): Promise<FeasibilityPayload> {
    return this.request("GET", `/sessions/${id}/feasibility`);
  }

  inconsistencies(id: string): Promise<InconsistencyReportBlob> {
    return this.request("GET", `/sessions/${id}/inconsistencies`);
  }

  resolve(id: string, setIndex: number): Promise<ResolutionPayload> {
    return this.request("POST", `/sessions/${id}/resolutions`, { set: setIndex });
  }

  // ------------------------------------------- relations/select/welfare

  relations(id: string): Promise<RelationPayload> {
    return this.request("GET", `/sessions/${id}/relations`);
  }

  relationsAsync(id: string): Promise<JobAccepted> {
    return this.request("GET", `/sessions/${id}/relations?mode=async`);
  }

  select(id: string, body: SelectRequest): Promise<SelectionPayload> {
    return this.request("POST", `/sessions/${id}/select`, body);
  }

  selectAsync(id: string, body: SelectRequest): Promise<JobAccepted> {
    return this.request("POST", `/sessions/${id}/select?mode=async`, body);
  }

  welfareFromSelections(id: string): Promise<WelfarePayload> {
    return this.request("GET", `/sessions/${id}/welfare`);
  }

  welfare(id: string, networks: NetworkEntryBlob[]): Promise<WelfarePayload> {
    return this.request("POST", `/sessions/${id}/welfare`, { networks });
  }

  exportBundle(id: string, format: "dot" | "csv" | "json"): Promise<ExportPayload> {
    return this.request("GET", `/sessions/${id}/export?format=${format}`);
  }

  // ------------------------------------------------------------------ jobs

  job(jobId: string): Promise<JobStatus> {
    return this.request("GET", `/jobs/${jobId}`);
  }

  /** Poll an accepted job until it settles; resolves with its result. */
  async pollJob<T>(accepted: JobAccepted, options: PollOptions = {}): Promise<T> {
    const interval = options.intervalMs ?? 500;
    const sleep = options.sleep ?? realSleep;
    for (let polls = 1; ; polls += 1) {
      const status = await this.job(accepted.job);
      if (status.status === "done") return status.result as T;
      if (status.status === "failed") {
        throw new ApiError(500, status.error ?? "job failed");
      }
      options.onTick?.(status, polls);
      await sleep(interval);
    }
  }
}
