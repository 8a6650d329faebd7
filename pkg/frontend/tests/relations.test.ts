/** Relation heatmap contract: every cell and tooltip value round-trips
 * from the recorded classification payload.
 */

import { describe, expect, it } from "vitest";
import { renderRelationHeatmap } from "../src/views/relations";
import type { RelationPayload, SessionView } from "../src/types";
import { body, shown } from "./helpers";

const relations = body<RelationPayload>("relations");
const experts = body<SessionView>("session_full").panel.experts;

function render(): HTMLElement {
  const container = document.createElement("div");
  renderRelationHeatmap(container, relations, experts);
  return container;
}

function cell(container: HTMLElement, i: number, j: number): Element {
  const found = container.querySelector(`[data-pair="${i},${j}"]`);
  expect(found, `cell (${i},${j})`).not.toBeNull();
  return found!;
}

describe("relation heatmap", () => {
  it("classifies pair (1,2) as PossibleOnly with its recorded slack", () => {
    const container = render();
    const target = cell(container, 1, 2);
    expect(target.getAttribute("data-relation")).toBe("PossibleOnly");
    const tooltip = target.querySelector("title")!.textContent!;
    expect(tooltip).toContain("0.1840");
    expect(tooltip).toContain(relations.eps_model2[0][1]!.toFixed(4));
    expect(tooltip).toContain(relations.eps_model3[0][1]!.toFixed(4));
  });

  it("classifies pair (2,3) as Necessary", () => {
    const container = render();
    expect(cell(container, 2, 3).getAttribute("data-relation")).toBe("Necessary");
  });

  it("renders one cell per ordered pair with the recorded label", () => {
    const container = render();
    expect(container.querySelectorAll(".cell").length).toBe(relations.n * relations.n);
    for (let i = 1; i <= relations.n; i += 1) {
      for (let j = 1; j <= relations.n; j += 1) {
        const label = cell(container, i, j).getAttribute("data-relation");
        if (i === j) {
          expect(label).toBe("Self");
        } else {
          expect(["Necessary", "PossibleOnly", "Impossible"]).toContain(label);
        }
      }
    }
  });

  it("shows both probe slacks verbatim in every off-diagonal tooltip", () => {
    const container = render();
    for (let i = 1; i <= relations.n; i += 1) {
      for (let j = 1; j <= relations.n; j += 1) {
        if (i === j) continue;
        const tooltip = cell(container, i, j).querySelector("title")!.textContent!;
        expect(tooltip).toContain(
          `slack without the arc ε* = ${shown(relations.eps_model2[i - 1][j - 1])}`,
        );
        expect(tooltip).toContain(
          `slack with the arc ε* = ${shown(relations.eps_model3[i - 1][j - 1])}`,
        );
      }
    }
  });

  it("includes a legend for all three relation kinds", () => {
    const container = render();
    const legend = container.querySelector(".legend")!.textContent!;
    expect(legend).toContain("Necessary");
    expect(legend).toContain("PossibleOnly");
    expect(legend).toContain("Impossible");
  });

  it("renders deterministically for a fixed payload", () => {
    expect(render().innerHTML).toBe(render().innerHTML);
  });
});
