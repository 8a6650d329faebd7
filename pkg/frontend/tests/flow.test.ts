/** Wizard flow contract, driven against recorded service traffic: phase
 * gating, cached-payload display with zero client computation, the
 * inconsistency chooser round trip, job polling, and error surfacing.
 */

import { afterEach, describe, expect, it, vi } from "vitest";
import { renderApp } from "../src/app";
import { createStore, initialState } from "../src/store";
import type { SessionView } from "../src/types";
import { body, route, routeSeq, stubFetch } from "./helpers";
import type { StubRoute } from "./helpers";

function mount(routes: StubRoute[]) {
  const stub = stubFetch(routes);
  vi.stubGlobal("fetch", stub.fn);
  const store = createStore(initialState("http://stub", ""));
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.append(root);
  renderApp(root, store);
  return { stub, store, root };
}

afterEach(() => {
  vi.unstubAllGlobals();
});

function navDisabled(root: HTMLElement): boolean[] {
  return [...root.querySelectorAll<HTMLButtonElement>(".wizard-step")].map(
    (button) => button.disabled,
  );
}

describe("phase gating", () => {
  it("unlocks steps exactly as the session phase advances", () => {
    const { store, root } = mount([]);
    expect(navDisabled(root)).toEqual([false, true, true, true, true, true, true]);

    store.set({ session: body<SessionView>("session_created") });
    expect(navDisabled(root)).toEqual([false, false, true, true, true, true, true]);

    store.set({ session: body<SessionView>("session_resolved") });
    expect(navDisabled(root)).toEqual([false, false, false, false, false, false, false]);
  });

  it("shows a locked note if the selected step outruns the phase", () => {
    const { store, root } = mount([]);
    store.set({ session: body<SessionView>("session_created"), stepIndex: 4 });
    expect(root.querySelector(".locked-note")).not.toBeNull();
  });
});

describe("session creation", () => {
  it("posts the panel shape and lands on the judgments step", async () => {
    const { stub, store, root } = mount([route("session_created")]);
    root.querySelector<HTMLInputElement>(".new-id")!.value = "demo";
    root.querySelector<HTMLInputElement>(".panel-n")!.value = "10";
    root.querySelector<HTMLInputElement>(".panel-m")!.value = "5";
    root.querySelector<HTMLButtonElement>(".create-session")!.click();

    await vi.waitFor(() => {
      expect(root.querySelector(".session-note")!.textContent).toBe(
        "session demo — phase IntrinsicElicitation",
      );
    });
    expect(store.get().stepIndex).toBe(1);
    expect(stub.calls[0].body).toEqual({
      id: "demo",
      panel: { n: 10, m: 5 },
      seed: 0,
    });
  });
});

describe("cached payload display", () => {
  it("renders the session's relation cache without any service call", () => {
    const { stub, store, root } = mount([]);
    store.set({ session: body<SessionView>("session_full"), stepIndex: 4 });
    const cell = root.querySelector('.relation-heatmap [data-pair="1,2"]')!;
    expect(cell.getAttribute("data-relation")).toBe("PossibleOnly");
    expect(cell.querySelector("title")!.textContent).toContain("0.1840");
    expect(stub.calls.length).toBe(0);
  });

  it("browses recorded selections without any service call", () => {
    const { stub, store, root } = mount([]);
    store.set({ session: body<SessionView>("session_full"), stepIndex: 5 });
    // Last recorded selection shows by default: the star over d3.
    expect(
      root.querySelector(".selection-result")!.getAttribute("data-target"),
    ).toBe("star");
    expect(root.querySelectorAll(".arc").length).toBe(9);

    root
      .querySelector<HTMLButtonElement>('.show-selection[data-target="sparse"]')!
      .click();
    const result = root.querySelector(".selection-result")!;
    expect(result.getAttribute("data-target")).toBe("sparse");
    const arcs = root.querySelectorAll(".arc");
    expect(arcs.length).toBe(1);
    expect(arcs[0].getAttribute("data-arc")).toBe("2,3");
    expect(arcs[0].querySelector(".arc-weight")!.textContent).toBe("0.0100");
    expect(stub.calls.length).toBe(0);
  });

  it("renders the session's latest welfare report without any service call", () => {
    const { stub, store, root } = mount([]);
    store.set({ session: body<SessionView>("session_full"), stepIndex: 6 });
    const rows = root.querySelectorAll(".welfare-table tr[data-network]");
    expect(rows.length).toBe(10);
    const baseline = root.querySelector('tr[data-network="baseline"]')!;
    expect(baseline.querySelector(".best-label")!.textContent).toBe("a2");
    expect(stub.calls.length).toBe(0);
  });
});

describe("inconsistency chooser", () => {
  it("lists the minimal sets and one click flips the badge to feasible", async () => {
    const { store, root } = mount([
      routeSeq("feasibility_infeasible", "feasibility_after_resolve"),
      routeSeq("clash_session", "clash_session_resolved"),
      route("inconsistencies"),
      route("resolution"),
    ]);
    store.set({ session: body<SessionView>("clash_session"), stepIndex: 3 });

    root.querySelector<HTMLButtonElement>(".check-feasibility")!.click();
    await vi.waitFor(() => {
      expect(root.querySelector(".feasibility-badge.red")).not.toBeNull();
      expect(root.querySelectorAll(".minimal-set").length).toBe(2);
    });
    const firstSet = root.querySelector('.minimal-set[data-set="1"]')!;
    expect(
      firstSet.querySelector('.set-statement[data-id="cut"]')!.textContent,
    ).toContain("w(1,2) = 0");

    root.querySelector<HTMLButtonElement>('.drop-set[data-set="1"]')!.click();
    await vi.waitFor(() => {
      const badge = root.querySelector(".feasibility-badge.green");
      expect(badge).not.toBeNull();
      expect(badge!.textContent).toContain("0.2056");
    });
    expect(root.querySelector(".minimal-set")).toBeNull();
    expect(root.querySelector(".session-note")!.textContent).toContain(
      "phase Resolved",
    );
    expect(root.querySelector(".resolutions-applied")!.textContent).toContain("cut");
  });
});

describe("asynchronous selection job", () => {
  it("submits the job, polls to completion, and renders the result", async () => {
    const { stub, store, root } = mount([
      route("job_accepted"),
      routeSeq("job_pending", "job_done"),
      route("session_full"),
    ]);
    store.set({ session: body<SessionView>("session_resolved"), stepIndex: 5 });

    const picker = root.querySelector<HTMLSelectElement>(".target-picker")!;
    picker.value = "sparse";
    picker.dispatchEvent(new Event("change"));
    root.querySelector<HTMLButtonElement>(".run-select-job")!.click();

    await vi.waitFor(
      () => {
        const result = root.querySelector(".selection-result");
        expect(result).not.toBeNull();
        expect(result!.getAttribute("data-target")).toBe("sparse");
      },
      { timeout: 4000 },
    );
    expect(root.querySelectorAll(".arc").length).toBe(1);

    const paths = stub.calls.map((call) => `${call.method} ${call.path}`);
    expect(paths[0]).toBe("POST /sessions/demo/select?mode=async");
    expect(paths.filter((p) => p === "GET /jobs/2a90a0124b6c").length).toBe(2);
    expect(stub.calls[0].body).toEqual({ target: "sparse" });
  });
});

describe("error surfacing", () => {
  it("shows the recorded validation error inline and retries on demand", async () => {
    const { stub, store, root } = mount([route("error_422")]);
    store.set({ session: body<SessionView>("session_resolved"), stepIndex: 2 });

    root.querySelector<HTMLButtonElement>(".add-statement")!.click();
    root.querySelector<HTMLButtonElement>(".submit-statements")!.click();

    await vi.waitFor(() => {
      const note = root.querySelector(".error-note");
      expect(note).not.toBeNull();
      expect(note!.textContent).toContain("outside 1..10");
      expect(note!.textContent).toContain("(field: i)");
    });
    expect(stub.calls.length).toBe(1);

    root.querySelector<HTMLButtonElement>(".retry")!.click();
    await vi.waitFor(() => {
      expect(stub.calls.length).toBe(2);
    });
    expect(stub.calls[1].body).toEqual(stub.calls[0].body);
  });
});
