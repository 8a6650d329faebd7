/** Network graph contract: arcs, weights, and centralities come from the
 * recorded selection payloads; the layout is deterministic.
 */

import { describe, expect, it } from "vitest";
import { renderNetworkGraph, visibleArcs } from "../src/views/graph";
import { renderSelectionResult } from "../src/views/selection";
import type { SelectionPayload, SessionView } from "../src/types";
import { body, shown } from "./helpers";

const sparse = body<SelectionPayload>("select_sparse");
const star = body<SelectionPayload>("select_star");
const experts = body<SessionView>("session_full").panel.experts;

function render(selection: SelectionPayload): HTMLElement {
  const container = document.createElement("div");
  renderNetworkGraph(container, selection, experts);
  return container;
}

describe("sparse network graph", () => {
  it("draws exactly one off-diagonal arc, from d2 to d3, labeled verbatim", () => {
    const container = render(sparse);
    const arcs = container.querySelectorAll(".arc");
    expect(arcs.length).toBe(1);
    expect(arcs[0].getAttribute("data-arc")).toBe("2,3");
    const weight = sparse.W[1][2];
    expect(arcs[0].querySelector(".arc-weight")!.textContent).toBe(weight.toFixed(4));
    expect(arcs[0].querySelector("title")!.textContent).toContain(
      `${experts[1]} → ${experts[2]}: weight ${weight.toFixed(4)}`,
    );
  });

  it("shows one node per expert with recorded self weight and centrality", () => {
    const container = render(sparse);
    const nodes = container.querySelectorAll(".node");
    expect(nodes.length).toBe(sparse.W.length);
    nodes.forEach((node, k) => {
      expect(node.getAttribute("data-node")).toBe(String(k + 1));
      const tooltip = node.querySelector("title")!.textContent!;
      expect(tooltip).toContain(`self weight ${shown(sparse.W[k][k])}`);
      expect(tooltip).toContain(`centrality ω = ${shown(sparse.omega[k])}`);
      expect(node.querySelector(".node-self-weight")!.textContent).toBe(
        sparse.W[k][k].toFixed(2),
      );
    });
  });

  it("applies the service's own visibility floor to the recorded matrix", () => {
    const arcs = visibleArcs(sparse);
    expect(arcs).toEqual([{ i: 2, j: 3, weight: sparse.W[1][2] }]);
    const floor = sparse.thresholds.eps_prime;
    expect(sparse.W[1][2]).toBeGreaterThanOrEqual(floor - 1e-12);
  });

  it("renders deterministically for a fixed network", () => {
    expect(render(sparse).innerHTML).toBe(render(sparse).innerHTML);
  });
});

describe("star network graph", () => {
  it("draws every arc into the recorded center", () => {
    const container = render(star);
    const arcs = [...container.querySelectorAll(".arc")];
    expect(arcs.length).toBe(star.W.length - 1);
    for (const arc of arcs) {
      const [, target] = arc.getAttribute("data-arc")!.split(",");
      expect(target).toBe("3");
    }
  });
});

describe("selection result panel", () => {
  it("reports objective and diagnostics verbatim from the payload", () => {
    const container = document.createElement("div");
    renderSelectionResult(container, sparse, experts);
    const result = container.querySelector(".selection-result")!;
    expect(result.getAttribute("data-target")).toBe("sparse");
    const summary = result.querySelector(".selection-summary")!.textContent!;
    expect(summary).toContain(`objective ${shown(sparse.objective)}`);
    expect(summary).toContain(`density ${shown(sparse.diagnostics.density)}`);
    expect(summary).toContain(`entropy ${shown(sparse.diagnostics.entropy)}`);
  });
});
