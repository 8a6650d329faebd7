/** Feasibility badge and the minimal-set chooser.
 *
 * The badge mirrors the service verdict; when the statement system is
 * infeasible the chooser lists every minimal repair set and one click drops
 * that set and re-checks, after which the badge re-renders from the fresh
 * verdict.
 */

import { el } from "../dom";
import { fmt } from "../format";
import { describeStatement } from "./statements";
import type {
  EmpathicStatementBlob,
  FeasibilityPayload,
  InconsistencyReportBlob,
} from "../types";

export function renderFeasibilityBadge(
  container: HTMLElement,
  verdict: FeasibilityPayload,
): void {
  const feasible = verdict.status === "feasible";
  const badge = el(
    "span",
    { class: `feasibility-badge ${feasible ? "green" : "red"}` },
    [
      feasible
        ? `feasible — shared slack ε* = ${fmt(verdict.eps_star)}`
        : "infeasible — resolve an inconsistency below",
    ],
  );
  container.append(badge);
}

export interface ChooserOptions {
  report: InconsistencyReportBlob;
  statements: EmpathicStatementBlob[];
  onResolve: (setIndex: number) => void;
}

export function renderInconsistencyChooser(
  container: HTMLElement,
  options: ChooserOptions,
): void {
  const byId = new Map(options.statements.map((blob) => [blob.id, blob]));
  const box = el("div", { class: "inconsistency-chooser" });
  box.append(
    el("p", { class: "chooser-note" }, [
      `${options.report.sets.length} minimal set(s) of cardinality ` +
        `${options.report.cardinality}` +
        (options.report.exhausted ? "" : " (enumeration stopped at the cap)") +
        " — drop any one set to restore feasibility:",
    ]),
  );
  options.report.sets.forEach((setIds, index) => {
    const items = setIds.map((id) => {
      const blob = byId.get(id);
      return el("li", { class: "set-statement", "data-id": id }, [
        blob ? describeStatement(blob) : id,
      ]);
    });
    const drop = el("button", { class: "drop-set", "data-set": String(index + 1) }, [
      `Drop set ${index + 1}`,
    ]);
    drop.addEventListener("click", () => options.onResolve(index + 1));
    box.append(
      el("div", { class: "minimal-set", "data-set": String(index + 1) }, [
        el("ul", {}, items),
        drop,
      ]),
    );
  });
  container.append(box);
}
