/** Payload shapes of the session service's JSON API.
 *
 * These mirror the server's serializers one-to-one; the client never
 * re-derives a number from them, it only formats and places what the
 * service returned.
 */

export type Phase = "IntrinsicElicitation" | "EmpathicElicitation" | "Resolved";

export interface Panel {
  name?: string;
  n: number;
  m: number;
  experts: string[];
  alternatives: string[];
}

/** Missing pairwise judgments are null until the expert (or solver) fills them. */
export type JudgmentCell = number | null;

export interface IntrinsicStatementBlob {
  dm: number;
  kind: "preference" | "intensity";
  better?: number;
  worse?: number;
  high?: [number, number];
  low?: [number, number];
  strict?: boolean;
}

export type EmpathicKind =
  | "preference"
  | "indifference"
  | "intensity"
  | "intensity-indifference"
  | "zero-weight"
  | "weight-floor"
  | "weight-dominance"
  | "half-share"
  | "centrality-gap";

export interface EmpathicStatementBlob {
  id: string;
  source: string;
  kind: EmpathicKind;
  dm?: number;
  better?: number;
  worse?: number;
  high?: [number, number];
  low?: [number, number];
  i?: number;
  j?: number;
  k?: number;
  h?: number;
  factor?: number;
  strict?: boolean;
}

export interface InconsistencyReportBlob {
  sets: string[][];
  cardinality: number;
  exhausted: boolean;
}

export type RelationLabel = "necessary" | "possible-only" | "impossible" | "self-always";

export interface RelationPayload {
  n: number;
  cells: RelationLabel[][];
  eps_model2: (number | null)[][];
  eps_model3: (number | null)[][];
  borderline: [number, number][];
}

export interface NetworkDiagnostics {
  density: number;
  entropy: number;
  is_central: boolean;
  is_distributed: boolean;
  is_highly_resilient: boolean;
  is_irreducible: boolean;
  zero_centralities: number[];
}

export interface SelectionPayload {
  target: string;
  objective: number | null;
  kind: string;
  W: number[][];
  omega: number[];
  diagnostics: NetworkDiagnostics;
  certificate: Record<string, unknown>;
  global: number[][] | null;
  thresholds: Record<string, number>;
}

export interface WelfareRow {
  label: string;
  sw: number[];
  best: number;
}

export interface WelfarePayload {
  m: number;
  rows: WelfareRow[];
}

export interface SessionView {
  id: string;
  panel: Panel;
  thresholds: Record<string, number>;
  seed: number;
  phase: Phase;
  judgments: Record<string, JudgmentCell[][]>;
  completed_judgments: Record<string, { cells: number[][]; eps_star: number | null }>;
  intrinsic_statements: IntrinsicStatementBlob[];
  intrinsic_utilities: number[][] | null;
  empathic_statements: EmpathicStatementBlob[];
  inconsistency_reports: InconsistencyReportBlob[];
  resolutions_applied: { removed: string[] }[];
  relation_cache: RelationPayload | null;
  selections: Record<string, SelectionPayload>;
  welfare_reports: WelfarePayload[];
  events_recorded: number;
}

export interface FeasibilityPayload {
  status: "feasible" | "infeasible";
  eps_star: number | null;
  phase: Phase;
}

export interface ResolutionPayload {
  removed: string[];
  status: "feasible" | "infeasible";
  eps_star: number | null;
  phase: Phase;
}

export interface CompletionRow {
  expert: string;
  eps_star: number | null;
}

export interface CompletePayload {
  status: "completed" | "inconsistent";
  experts?: CompletionRow[];
  alternatives?: string[];
  utilities?: number[][];
  phase?: Phase;
  failures?: Record<string, number[][]>;
}

export interface ExportPayload {
  written: string[];
  files: Record<string, string>;
  binary: Record<string, string>;
}

export interface JobAccepted {
  job: string;
  poll: string;
}

export interface JobStatus {
  status: "pending" | "running" | "done" | "failed";
  result?: unknown;
  error?: string;
}

export interface SelectRequest {
  target: string;
  center?: number;
  direction?: "fwd" | "rev";
  tree?: Record<string, number>;
  seed?: number;
  thresholds?: Record<string, number>;
}

export interface NetworkEntryBlob {
  label: string;
  kind: "local" | "global" | "local-empathic" | "global-empathic";
  matrix: number[][];
}
