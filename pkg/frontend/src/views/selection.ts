/** Target-network selector: pick one of the solver targets (plus its
 * parameters where the target takes any), run it — synchronously or as a
 * polled job — and render the returned network as a directed weighted
 * graph with its diagnostics.
 */

import { el, option } from "../dom";
import { fmt } from "../format";
import { renderNetworkGraph } from "./graph";
import type { SelectionPayload, SelectRequest } from "../types";

export const TARGETS = [
  "discriminating",
  "sparse",
  "central",
  "distributed",
  "resilient-local",
  "resilient-global",
  "star",
  "bus",
  "tree",
] as const;

export interface SelectorOptions {
  experts: string[];
  onRun: (request: SelectRequest, asJob: boolean) => void;
}

export function renderTargetSelector(
  container: HTMLElement,
  options: SelectorOptions,
): void {
  const form = el("div", { class: "target-form" });
  const targetSelect = el("select", { class: "target-picker" });
  for (const target of TARGETS) {
    targetSelect.append(option(target, target, target === "discriminating"));
  }

  const paramsBox = el("div", { class: "target-params" });

  function centerPicker(): HTMLSelectElement {
    const select = el("select", { class: "center-picker", "data-param": "center" });
    select.append(option("", "auto (solver picks)", true));
    options.experts.forEach((label, k) =>
      select.append(option(String(k + 1), label)),
    );
    return select;
  }

  function directionPicker(): HTMLSelectElement {
    const select = el("select", { class: "direction-picker", "data-param": "direction" });
    select.append(option("fwd", "forward", true));
    select.append(option("rev", "reverse"));
    return select;
  }

  function treeEditor(): HTMLElement {
    // child → parent map; the root is every expert that does not appear
    // as a child.  Row per expert with a parent picker (or "root").
    const box = el("div", { class: "tree-editor" });
    options.experts.forEach((label, childIdx) => {
      const picker = el("select", {
        class: "parent-picker",
        "data-child": String(childIdx + 1),
      });
      picker.append(option("", "root", childIdx === 0));
      options.experts.forEach((parentLabel, parentIdx) => {
        if (parentIdx !== childIdx) {
          picker.append(
            option(String(parentIdx + 1), parentLabel, childIdx > 0 && parentIdx === 0),
          );
        }
      });
      box.append(el("label", { class: "tree-row" }, [`${label} ← `, picker]));
    });
    return box;
  }

  function syncParams(): void {
    paramsBox.innerHTML = "";
    const target = targetSelect.value;
    if (target === "star") {
      paramsBox.append(el("label", {}, ["center ", centerPicker()]));
    } else if (target === "bus" || target === "resilient-global") {
      paramsBox.append(el("label", {}, ["direction ", directionPicker()]));
    } else if (target === "tree") {
      paramsBox.append(treeEditor());
    }
  }

  function readRequest(): SelectRequest {
    const target = targetSelect.value;
    const request: SelectRequest = { target };
    if (target === "star") {
      const picker = paramsBox.querySelector<HTMLSelectElement>(".center-picker");
      if (picker && picker.value !== "") request.center = Number(picker.value);
    } else if (target === "bus" || target === "resilient-global") {
      const picker = paramsBox.querySelector<HTMLSelectElement>(".direction-picker");
      if (picker) request.direction = picker.value as "fwd" | "rev";
    } else if (target === "tree") {
      const tree: Record<string, number> = {};
      paramsBox
        .querySelectorAll<HTMLSelectElement>(".parent-picker")
        .forEach((picker) => {
          if (picker.value !== "") {
            tree[picker.dataset.child ?? ""] = Number(picker.value);
          }
        });
      request.tree = tree;
    }
    return request;
  }

  const runButton = el("button", { class: "run-select" }, ["Solve"]);
  runButton.addEventListener("click", () => options.onRun(readRequest(), false));
  const runJobButton = el("button", { class: "run-select-job" }, ["Solve as job"]);
  runJobButton.addEventListener("click", () => options.onRun(readRequest(), true));

  targetSelect.addEventListener("change", syncParams);
  syncParams();
  form.append(
    el("div", { class: "row" }, ["target ", targetSelect]),
    paramsBox,
    el("div", { class: "row" }, [runButton, " ", runJobButton]),
  );
  container.append(form);
}

export function renderSelectionResult(
  container: HTMLElement,
  selection: SelectionPayload,
  experts: string[],
): void {
  const box = el("div", { class: "selection-result", "data-target": selection.target });
  const d = selection.diagnostics;
  const flags = [
    d.is_central ? "central" : null,
    d.is_distributed ? "distributed" : null,
    d.is_highly_resilient ? "highly resilient" : null,
    d.is_irreducible ? "irreducible" : null,
  ].filter((flag): flag is string => flag !== null);
  box.append(
    el("p", { class: "selection-summary" }, [
      `${selection.target}: objective ${fmt(selection.objective)}, ` +
        `density ${fmt(d.density)}, entropy ${fmt(d.entropy)}` +
        (flags.length ? ` — ${flags.join(", ")}` : ""),
    ]),
  );
  const graphBox = el("div", { class: "graph-box" });
  renderNetworkGraph(graphBox, selection, experts);
  box.append(graphBox);

  if (selection.global) {
    box.append(
      el("p", { class: "global-note" }, [
        "propagated (global) weights recorded alongside this network",
      ]),
    );
  }
  container.append(box);
}
