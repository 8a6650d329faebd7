/** Wizard shell: one step per pipeline stage, gated by the session phase.
 *
 * The session's phases only move forward (judgments → statements →
 * resolved), and the nav mirrors that: a step unlocks exactly when the
 * service-side phase allows the calls behind it, so the client cannot ask
 * for relations before a workable statement system exists.
 *
 * Rendering is store-driven: every store change re-renders the active
 * step, and everything a step displays comes from the store (the session
 * view plus the per-view payload cache), so long-running actions never
 * write into stale nodes.
 */

import { ApiError, Client } from "./api";
import { clear, download, el } from "./dom";
import { fmt } from "./format";
import type { Store, ViewCache } from "./store";
import type {
  EmpathicStatementBlob,
  JobAccepted,
  JudgmentCell,
  NetworkEntryBlob,
  Phase,
  RelationPayload,
  SelectionPayload,
  SelectRequest,
  SessionView,
} from "./types";
import { renderFeasibilityBadge, renderInconsistencyChooser } from "./views/feasibility";
import { graphToPng } from "./views/graph";
import { renderJudgmentGrid } from "./views/judgments";
import { renderRelationHeatmap } from "./views/relations";
import { renderSelectionResult, renderTargetSelector } from "./views/selection";
import { describeStatement, renderStatementBuilder } from "./views/statements";
import { renderWelfareTable } from "./views/welfare";

const PHASE_RANK: Record<Phase, number> = {
  IntrinsicElicitation: 0,
  EmpathicElicitation: 1,
  Resolved: 2,
};

export interface Step {
  title: string;
  /** Lowest phase at which the step's service calls are legal. */
  minPhase: Phase | null;
  render: (content: HTMLElement, ctx: AppContext) => void;
}

export function stepEnabled(step: Step, session: SessionView | null): boolean {
  if (step.minPhase === null) return true;
  if (!session) return false;
  return PHASE_RANK[session.phase] >= PHASE_RANK[step.minPhase];
}

export interface AppContext {
  store: Store;
  client: () => Client;
  /** Run a service call with busy/error bookkeeping. */
  act: (label: string, thunk: () => Promise<void>) => void;
  /** Merge fresh payloads into the display cache (triggers a re-render). */
  setView: (patch: Partial<ViewCache>) => void;
  /** Reload the session view from the service. */
  refreshSession: () => Promise<void>;
  /** Poll an accepted job to completion, reporting progress. */
  awaitJob: <T>(label: string, accepted: JobAccepted) => Promise<T>;
}

// ---------------------------------------------------------------- steps

function renderSessionStep(content: HTMLElement, ctx: AppContext): void {
  const state = ctx.store.get();
  const baseInput = el("input", { class: "base-url", value: state.baseUrl });
  const tokenInput = el("input", {
    class: "token",
    value: state.token,
    placeholder: "bearer token (optional)",
  });
  const applyButton = el("button", { class: "apply-config" }, ["Apply"]);
  applyButton.addEventListener("click", () => {
    ctx.store.set({ baseUrl: baseInput.value.trim(), token: tokenInput.value.trim() });
  });
  content.append(
    el("fieldset", { class: "service-config" }, [
      el("legend", {}, ["service"]),
      el("label", {}, ["URL ", baseInput]),
      el("label", {}, ["token ", tokenInput]),
      applyButton,
    ]),
  );

  const idInput = el("input", { class: "session-id", placeholder: "session id" });
  const openButton = el("button", { class: "open-session" }, ["Open"]);
  openButton.addEventListener("click", () => {
    const id = idInput.value.trim();
    if (!id) return;
    ctx.act("open session", async () => {
      const session = await ctx.client().getSession(id);
      ctx.store.set({ session, view: {}, stepIndex: 1 });
    });
  });
  content.append(
    el("fieldset", { class: "open-existing" }, [
      el("legend", {}, ["open an existing session"]),
      idInput,
      openButton,
    ]),
  );

  const newId = el("input", { class: "new-id", placeholder: "id (auto)" });
  const nInput = el("input", { class: "panel-n", value: "3" });
  const mInput = el("input", { class: "panel-m", value: "3" });
  const seedInput = el("input", { class: "seed", value: "0" });
  const preload = el("textarea", {
    class: "preload-json",
    placeholder:
      'optional preload JSON: {"judgments": [...], "intrinsic_statements": [...], "thresholds": {...}}',
  });
  const createButton = el("button", { class: "create-session" }, ["Create"]);
  createButton.addEventListener("click", () => {
    ctx.act("create session", async () => {
      let extra: Record<string, unknown> = {};
      if (preload.value.trim()) {
        try {
          extra = JSON.parse(preload.value);
        } catch (err) {
          throw new ApiError(0, `preload JSON does not parse: ${(err as Error).message}`);
        }
      }
      const session = await ctx.client().createSession({
        ...(newId.value.trim() ? { id: newId.value.trim() } : {}),
        panel: { n: Number(nInput.value), m: Number(mInput.value) },
        seed: Number(seedInput.value),
        ...extra,
      });
      ctx.store.set({ session, view: {}, stepIndex: 1 });
    });
  });
  content.append(
    el("fieldset", { class: "create-new" }, [
      el("legend", {}, ["create a session"]),
      el("label", {}, ["id ", newId]),
      el("label", {}, ["experts n ", nInput]),
      el("label", {}, ["alternatives m ", mInput]),
      el("label", {}, ["seed ", seedInput]),
      preload,
      createButton,
    ]),
  );
}

function emptyCells(m: number): JudgmentCell[][] {
  return Array.from({ length: m }, (_, i) =>
    Array.from({ length: m }, (_, j) => (i === j ? 0.5 : null)),
  );
}

function renderJudgmentsStep(content: HTMLElement, ctx: AppContext): void {
  const state = ctx.store.get();
  const session = state.session;
  if (!session) return;
  const sessionId = session.id;
  const { n, m, experts, alternatives } = session.panel;

  const expertPicker = el("select", { class: "expert-picker" });
  experts.forEach((label, k) => {
    const opt = el("option", { value: String(k + 1) }, [label]);
    if (k === 0) opt.selected = true;
    expertPicker.append(opt);
  });
  const gridBox = el("div", { class: "grid-box" });

  function syncGrid(): void {
    clear(gridBox);
    const dm = Number(expertPicker.value);
    const current = ctx.store.get().session;
    const cells = current?.judgments[String(dm)] ?? emptyCells(m);
    renderJudgmentGrid(gridBox, {
      expert: experts[dm - 1],
      m,
      cells,
      onSave: (updated) => {
        ctx.act("save judgments", async () => {
          await ctx.client().putJudgments(sessionId, dm, updated);
          await ctx.refreshSession();
        });
      },
    });
  }
  expertPicker.addEventListener("change", syncGrid);
  syncGrid();
  content.append(
    el("fieldset", { class: "judgment-entry" }, [
      el("legend", {}, ["pairwise judgments (blank = unknown; the solver fills gaps)"]),
      el("label", {}, ["expert ", expertPicker]),
      gridBox,
    ]),
  );

  const statementsArea = el("textarea", {
    class: "intrinsic-json",
    placeholder:
      'indirect judgment statements, e.g. [{"dm": 1, "kind": "preference", "better": 1, "worse": 3}]',
  });
  const postStatementsButton = el("button", { class: "post-intrinsic" }, [
    "Record statements",
  ]);
  postStatementsButton.addEventListener("click", () => {
    ctx.act("record indirect statements", async () => {
      let blobs;
      try {
        blobs = JSON.parse(statementsArea.value || "[]");
      } catch (err) {
        throw new ApiError(0, `statement JSON does not parse: ${(err as Error).message}`);
      }
      await ctx.client().postIntrinsicStatements(sessionId, blobs);
      await ctx.refreshSession();
    });
  });
  content.append(
    el("fieldset", { class: "intrinsic-statements" }, [
      el("legend", {}, [
        `indirect statements recorded: ${session.intrinsic_statements.length}`,
      ]),
      statementsArea,
      postStatementsButton,
    ]),
  );

  const completeButton = el("button", { class: "run-complete" }, [
    "Complete judgments and derive utilities",
  ]);
  completeButton.addEventListener("click", () => {
    ctx.act("complete judgments", async () => {
      const result = await ctx.client().complete(sessionId);
      await ctx.refreshSession();
      ctx.setView({ completion: result });
    });
  });
  const completionBox = el("div", { class: "completion-box" });
  const completion = state.view.completion;
  if (completion) {
    if (completion.status === "inconsistent") {
      const failureList = el("ul", { class: "completion-failures" });
      for (const [expert, sets] of Object.entries(completion.failures ?? {})) {
        failureList.append(
          el("li", {}, [
            `${expert}: mutually unsatisfiable statement groups ` +
              sets.map((indices) => `{${indices.join(", ")}}`).join(" / "),
          ]),
        );
      }
      completionBox.append(
        el("p", { class: "completion-status red" }, [
          "some experts' statements cannot all hold — drop one per group and retry",
        ]),
        failureList,
      );
    } else {
      const table = el("table", { class: "utilities-table" });
      const head = el("tr", {}, [el("th", {}, ["expert"])]);
      for (const alt of completion.alternatives ?? alternatives) {
        head.append(el("th", {}, [alt]));
      }
      head.append(el("th", {}, ["completion slack"]));
      table.append(el("thead", {}, [head]));
      const body = el("tbody");
      (completion.utilities ?? []).forEach((row, k) => {
        const tr = el("tr", {}, [el("th", {}, [experts[k]])]);
        for (const value of row) tr.append(el("td", {}, [fmt(value)]));
        tr.append(el("td", {}, [fmt(completion.experts?.[k]?.eps_star ?? null)]));
        body.append(tr);
      });
      table.append(body);
      completionBox.append(
        el("p", { class: "completion-status green" }, [
          `utilities derived for all ${n} experts`,
        ]),
        table,
      );
    }
  }
  content.append(
    el("fieldset", { class: "completion" }, [
      el("legend", {}, ["completion"]),
      completeButton,
      completionBox,
    ]),
  );
}

function renderStatementsStep(content: HTMLElement, ctx: AppContext): void {
  const session = ctx.store.get().session;
  if (!session) return;
  const sessionId = session.id;
  const builderBox = el("div", { class: "builder-box" });
  renderStatementBuilder(builderBox, {
    experts: session.panel.experts,
    alternatives: session.panel.alternatives,
    onSubmit: (statements: EmpathicStatementBlob[]) => {
      ctx.act("record statements", async () => {
        await ctx.client().postStatements(sessionId, statements);
        await ctx.refreshSession();
      });
    },
  });
  const recorded = el("ul", { class: "recorded-statements" });
  for (const blob of session.empathic_statements) {
    recorded.append(el("li", { "data-id": blob.id }, [describeStatement(blob)]));
  }
  content.append(
    el("fieldset", { class: "statement-builder" }, [
      el("legend", {}, ["add statements"]),
      builderBox,
    ]),
    el("fieldset", { class: "statements-recorded" }, [
      el("legend", {}, [`recorded statements: ${session.empathic_statements.length}`]),
      recorded,
    ]),
  );
}

function renderFeasibilityStep(content: HTMLElement, ctx: AppContext): void {
  const state = ctx.store.get();
  const session = state.session;
  if (!session) return;
  const sessionId = session.id;

  const checkButton = el("button", { class: "check-feasibility" }, ["Check feasibility"]);
  checkButton.addEventListener("click", () => {
    ctx.act("check feasibility", async () => {
      const verdict = await ctx.client().feasibility(sessionId);
      await ctx.refreshSession();
      if (verdict.status === "infeasible") {
        const report = await ctx.client().inconsistencies(sessionId);
        ctx.setView({ feasibility: verdict, inconsistencies: report });
      } else {
        ctx.setView({ feasibility: verdict, inconsistencies: null });
      }
    });
  });

  const badgeBox = el("div", { class: "badge-box" });
  if (state.view.feasibility) {
    renderFeasibilityBadge(badgeBox, state.view.feasibility);
  }
  const chooserBox = el("div", { class: "chooser-box" });
  if (state.view.inconsistencies) {
    renderInconsistencyChooser(chooserBox, {
      report: state.view.inconsistencies,
      statements: session.empathic_statements,
      onResolve: (setIndex) => {
        ctx.act("drop a minimal set", async () => {
          await ctx.client().resolve(sessionId, setIndex);
          await ctx.refreshSession();
          const after = await ctx.client().feasibility(sessionId);
          await ctx.refreshSession();
          ctx.setView({ feasibility: after, inconsistencies: null });
        });
      },
    });
  }

  content.append(
    el("fieldset", { class: "feasibility" }, [
      el("legend", {}, ["statement system"]),
      checkButton,
      badgeBox,
      chooserBox,
    ]),
  );
  if (session.resolutions_applied.length) {
    const list = el("ul", { class: "resolutions-applied" });
    for (const resolution of session.resolutions_applied) {
      list.append(el("li", {}, [`dropped: ${resolution.removed.join(", ")}`]));
    }
    content.append(
      el("fieldset", { class: "resolutions" }, [
        el("legend", {}, ["resolutions applied"]),
        list,
      ]),
    );
  }
}

function renderRelationsStep(content: HTMLElement, ctx: AppContext): void {
  const state = ctx.store.get();
  const session = state.session;
  if (!session) return;
  const sessionId = session.id;

  const runButton = el("button", { class: "run-relations" }, ["Classify all pairs"]);
  runButton.addEventListener("click", () => {
    ctx.act("classify relations", async () => {
      const relations = await ctx.client().relations(sessionId);
      await ctx.refreshSession();
      ctx.setView({ relations });
    });
  });
  const runJobButton = el("button", { class: "run-relations-job" }, ["Classify as job"]);
  runJobButton.addEventListener("click", () => {
    ctx.act("classify relations (job)", async () => {
      const accepted = await ctx.client().relationsAsync(sessionId);
      const relations = await ctx.awaitJob<RelationPayload>("relations", accepted);
      await ctx.refreshSession();
      ctx.setView({ relations });
    });
  });

  const heatmapBox = el("div", { class: "heatmap-box" });
  const relations = state.view.relations ?? session.relation_cache;
  if (relations) {
    renderRelationHeatmap(heatmapBox, relations, session.panel.experts);
  }
  content.append(
    el("fieldset", { class: "relations" }, [
      el("legend", {}, ["necessary / possible relations"]),
      el("div", { class: "row" }, [runButton, " ", runJobButton]),
      heatmapBox,
    ]),
  );
}

function renderNetworksStep(content: HTMLElement, ctx: AppContext): void {
  const state = ctx.store.get();
  const session = state.session;
  if (!session) return;
  const sessionId = session.id;

  const selectorBox = el("div", { class: "selector-box" });
  renderTargetSelector(selectorBox, {
    experts: session.panel.experts,
    onRun: (request: SelectRequest, asJob: boolean) => {
      ctx.act(`select ${request.target}`, async () => {
        let selection: SelectionPayload;
        if (asJob) {
          const accepted = await ctx.client().selectAsync(sessionId, request);
          selection = await ctx.awaitJob<SelectionPayload>(request.target, accepted);
        } else {
          selection = await ctx.client().select(sessionId, request);
        }
        await ctx.refreshSession();
        ctx.setView({ selection });
      });
    },
  });

  const recordedBox = el("div", { class: "recorded-selections" });
  const targets = Object.keys(session.selections);
  if (targets.length) {
    recordedBox.append("recorded: ");
    for (const target of targets) {
      const view = el("button", { class: "show-selection", "data-target": target }, [
        target,
      ]);
      view.addEventListener("click", () => {
        const current = ctx.store.get().session ?? session;
        ctx.setView({ selection: current.selections[target] });
      });
      recordedBox.append(view, " ");
    }
  }

  const resultBox = el("div", { class: "result-box" });
  const exportBox = el("div", { class: "export-box" });
  const lastTarget = targets.at(-1);
  const shown =
    state.view.selection ?? (lastTarget ? session.selections[lastTarget] : undefined);
  if (shown) {
    renderSelectionResult(resultBox, shown, session.panel.experts);
    const dotButton = el("button", { class: "export-dot" }, ["Download DOT"]);
    dotButton.addEventListener("click", () => {
      ctx.act("export DOT", async () => {
        const bundle = await ctx.client().exportBundle(sessionId, "dot");
        const name = `network-${shown.target}.dot`;
        const text = bundle.files[name];
        if (text === undefined) {
          throw new ApiError(0, `service export did not include ${name}`);
        }
        download(name, text, "text/vnd.graphviz");
      });
    });
    const pngButton = el("button", { class: "export-png" }, ["Download PNG"]);
    pngButton.addEventListener("click", () => {
      ctx.act("export PNG", async () => {
        const dataUrl = await graphToPng(resultBox);
        const anchor = el("a", {
          href: dataUrl,
          download: `network-${shown.target}.png`,
        });
        document.body.append(anchor);
        anchor.click();
        anchor.remove();
      });
    });
    exportBox.append(dotButton, " ", pngButton);
  }

  content.append(
    el("fieldset", { class: "networks" }, [
      el("legend", {}, ["target networks"]),
      selectorBox,
      recordedBox,
      resultBox,
      exportBox,
    ]),
  );
}

function renderWelfareStep(content: HTMLElement, ctx: AppContext): void {
  const state = ctx.store.get();
  const session = state.session;
  if (!session) return;
  const sessionId = session.id;

  const fromSelectionsButton = el("button", { class: "score-selections" }, [
    "Score recorded selections",
  ]);
  fromSelectionsButton.addEventListener("click", () => {
    ctx.act("score selections", async () => {
      const report = await ctx.client().welfareFromSelections(sessionId);
      await ctx.refreshSession();
      ctx.setView({ welfare: report });
    });
  });

  const networksArea = el("textarea", {
    class: "welfare-json",
    placeholder:
      'candidate networks, e.g. [{"label": "star", "kind": "local", "matrix": [[...]]}]',
  });
  const fromJsonButton = el("button", { class: "score-pasted" }, ["Score pasted networks"]);
  fromJsonButton.addEventListener("click", () => {
    ctx.act("score pasted networks", async () => {
      let blobs: NetworkEntryBlob[];
      try {
        blobs = JSON.parse(networksArea.value);
      } catch (err) {
        throw new ApiError(0, `network JSON does not parse: ${(err as Error).message}`);
      }
      const report = await ctx.client().welfare(sessionId, blobs);
      await ctx.refreshSession();
      ctx.setView({ welfare: report });
    });
  });

  const tableBox = el("div", { class: "welfare-box" });
  const report = state.view.welfare ?? session.welfare_reports.at(-1);
  if (report) {
    renderWelfareTable(tableBox, report, session.panel.alternatives);
  }
  content.append(
    el("fieldset", { class: "welfare" }, [
      el("legend", {}, ["social welfare"]),
      el("div", { class: "row" }, [fromSelectionsButton]),
      networksArea,
      fromJsonButton,
      tableBox,
    ]),
  );
}

export const STEPS: Step[] = [
  { title: "Session", minPhase: null, render: renderSessionStep },
  { title: "Judgments", minPhase: "IntrinsicElicitation", render: renderJudgmentsStep },
  { title: "Statements", minPhase: "EmpathicElicitation", render: renderStatementsStep },
  { title: "Feasibility", minPhase: "EmpathicElicitation", render: renderFeasibilityStep },
  { title: "Relations", minPhase: "Resolved", render: renderRelationsStep },
  { title: "Networks", minPhase: "Resolved", render: renderNetworksStep },
  { title: "Welfare", minPhase: "Resolved", render: renderWelfareStep },
];

// ----------------------------------------------------------------- shell

export function renderApp(root: HTMLElement, store: Store): void {
  const container = el("div", { class: "wizard" });
  const nav = el("nav", { class: "wizard-nav" });
  const status = el("div", { class: "status-strip" });
  const content = el("section", { class: "wizard-content" });
  container.append(nav, status, content);
  root.append(container);

  const ctx: AppContext = {
    store,
    client: () => {
      const state = store.get();
      return new Client({ baseUrl: state.baseUrl, token: state.token });
    },
    act(label, thunk) {
      store.set({ busy: label, error: null, retry: null });
      thunk()
        .then(() => store.set({ busy: null, jobNote: null }))
        .catch((err: unknown) => {
          const apiError =
            err instanceof ApiError ? err : new ApiError(0, (err as Error).message);
          store.set({
            busy: null,
            jobNote: null,
            error: apiError,
            retry: () => ctx.act(label, thunk),
          });
        });
    },
    setView(patch) {
      store.set({ view: { ...store.get().view, ...patch } });
    },
    async refreshSession() {
      const state = store.get();
      if (!state.session) return;
      const session = await ctx.client().getSession(state.session.id);
      store.set({ session });
    },
    awaitJob<T>(label: string, accepted: JobAccepted): Promise<T> {
      store.set({ jobNote: `job ${accepted.job} (${label}): submitted` });
      return ctx.client().pollJob<T>(accepted, {
        intervalMs: 750,
        onTick: (jobStatus, polls) => {
          store.set({
            jobNote: `job ${accepted.job} (${label}): ${jobStatus.status} — poll ${polls}`,
          });
        },
      });
    },
  };

  function sync(): void {
    const state = store.get();
    clear(nav);
    STEPS.forEach((step, index) => {
      const enabled = stepEnabled(step, state.session);
      const button = el(
        "button",
        { class: "wizard-step", "data-step": String(index) },
        [`${index + 1}. ${step.title}`],
      );
      button.disabled = !enabled;
      if (index === state.stepIndex) button.classList.add("active");
      button.addEventListener("click", () => {
        if (enabled) store.set({ stepIndex: index });
      });
      nav.append(button);
    });

    clear(status);
    if (state.session) {
      status.append(
        el("span", { class: "session-note" }, [
          `session ${state.session.id} — phase ${state.session.phase}`,
        ]),
      );
    }
    if (state.busy) {
      status.append(el("span", { class: "busy-note" }, [`${state.busy}…`]));
    }
    if (state.jobNote) {
      status.append(el("span", { class: "job-note" }, [state.jobNote]));
    }
    if (state.error) {
      const retryButton = el("button", { class: "retry" }, ["Retry"]);
      const savedRetry = state.retry;
      retryButton.addEventListener("click", () => savedRetry?.());
      status.append(
        el("span", { class: "error-note" }, [
          state.error.field
            ? `${state.error.detail} (field: ${state.error.field})`
            : state.error.incident
              ? `${state.error.detail} (incident ${state.error.incident})`
              : state.error.detail,
          " ",
          retryButton,
        ]),
      );
    }

    clear(content);
    const step = STEPS[state.stepIndex];
    if (stepEnabled(step, state.session)) {
      step.render(content, ctx);
    } else {
      content.append(
        el("p", { class: "locked-note" }, [
          "this step unlocks once the session reaches the required phase",
        ]),
      );
    }
  }

  sync();
  store.subscribe(sync);
}
