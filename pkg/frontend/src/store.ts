/** Minimal observable state shared by the wizard and its views.
 *
 * Every payload a step displays lives here (or on the session view), never
 * in a render closure: the wizard re-renders wholesale on each store
 * change, so results written anywhere else would land in detached nodes.
 */

import type { ApiError } from "./api";
import type {
  CompletePayload,
  FeasibilityPayload,
  InconsistencyReportBlob,
  RelationPayload,
  SelectionPayload,
  SessionView,
  WelfarePayload,
} from "./types";

export interface ViewCache {
  completion?: CompletePayload;
  feasibility?: FeasibilityPayload;
  inconsistencies?: InconsistencyReportBlob | null;
  relations?: RelationPayload;
  selection?: SelectionPayload;
  welfare?: WelfarePayload;
}

export interface AppState {
  baseUrl: string;
  token: string;
  session: SessionView | null;
  stepIndex: number;
  /** Latest payloads to display, freshest over the session's own caches. */
  view: ViewCache;
  /** Label of the request in flight, or null when idle. */
  busy: string | null;
  /** Progress line for a polled background job. */
  jobNote: string | null;
  error: ApiError | null;
  /** Re-runs the action that produced `error`. */
  retry: (() => void) | null;
}

export interface Store {
  get(): AppState;
  set(patch: Partial<AppState>): void;
  subscribe(listener: (state: AppState) => void): () => void;
}

export function createStore(initial: AppState): Store {
  let state = initial;
  const listeners = new Set<(state: AppState) => void>();
  return {
    get: () => state,
    set(patch) {
      state = { ...state, ...patch };
      for (const listener of listeners) listener(state);
    },
    subscribe(listener) {
      listeners.add(listener);
      return () => listeners.delete(listener);
    },
  };
}

export function initialState(baseUrl: string, token: string): AppState {
  return {
    baseUrl,
    token,
    session: null,
    stepIndex: 0,
    view: {},
    busy: null,
    jobNote: null,
    error: null,
    retry: null,
  };
}
