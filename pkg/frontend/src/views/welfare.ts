/** Welfare table: one row per candidate network (baseline first), social
 * welfare per alternative, and the service-chosen best alternative
 * highlighted.  Values land in the cells exactly as returned.
 */

import { el } from "../dom";
import { fmt } from "../format";
import type { WelfarePayload } from "../types";

export function renderWelfareTable(
  container: HTMLElement,
  report: WelfarePayload,
  alternatives: string[],
): void {
  const table = el("table", { class: "welfare-table" });
  const head = el("tr", {}, [el("th", {}, ["network"])]);
  for (let s = 1; s <= report.m; s += 1) {
    head.append(el("th", {}, [alternatives[s - 1] ?? `a${s}`]));
  }
  head.append(el("th", {}, ["best"]));
  table.append(el("thead", {}, [head]));

  const body = el("tbody");
  for (const row of report.rows) {
    const tr = el("tr", { "data-network": row.label }, [
      el("th", { class: "row-label" }, [row.label]),
    ]);
    row.sw.forEach((value, index) => {
      const cell = el("td", { class: "sw" }, [fmt(value)]);
      if (index + 1 === row.best) cell.classList.add("best");
      tr.append(cell);
    });
    tr.append(
      el("td", { class: "best-label" }, [alternatives[row.best - 1] ?? `a${row.best}`]),
    );
    body.append(tr);
  }
  table.append(body);
  container.append(table);
}
