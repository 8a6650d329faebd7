/** Relation heatmap: one cell per ordered expert pair, colored by whether
 * the arc holds in every compatible network, in at least one, or in none.
 * Slack values for both probes sit in the cell tooltip, verbatim from the
 * service payload.
 */

import * as d3 from "d3";
import { el } from "../dom";
import { fmt, relationDisplay } from "../format";
import type { RelationPayload } from "../types";

const CELL = 44;
const GUTTER = 56;

const COLOR = d3
  .scaleOrdinal<string, string>()
  .domain(["necessary", "possible-only", "impossible", "self-always"])
  .range(["#2e7d32", "#f9a825", "#c62828", "#eceff1"]);

const SHORT: Record<string, string> = {
  necessary: "N",
  "possible-only": "P",
  impossible: "I",
  "self-always": "",
};

export function renderRelationHeatmap(
  container: HTMLElement,
  relations: RelationPayload,
  experts: string[],
): void {
  const n = relations.n;
  const size = GUTTER + n * CELL;
  const borderline = new Set(relations.borderline.map(([i, j]) => `${i},${j}`));

  const svg = d3
    .select(container)
    .append("svg")
    .attr("class", "relation-heatmap")
    .attr("width", size)
    .attr("height", size)
    .attr("viewBox", `0 0 ${size} ${size}`);

  const scale = d3
    .scaleBand<number>()
    .domain(d3.range(1, n + 1))
    .range([GUTTER, size]);

  for (let i = 1; i <= n; i += 1) {
    svg
      .append("text")
      .attr("class", "axis-label")
      .attr("x", GUTTER - 6)
      .attr("y", (scale(i) ?? 0) + CELL / 2 + 4)
      .attr("text-anchor", "end")
      .text(experts[i - 1] ?? `d${i}`);
    svg
      .append("text")
      .attr("class", "axis-label")
      .attr("x", (scale(i) ?? 0) + CELL / 2)
      .attr("y", GUTTER - 8)
      .attr("text-anchor", "middle")
      .text(experts[i - 1] ?? `d${i}`);
  }

  for (let i = 1; i <= n; i += 1) {
    for (let j = 1; j <= n; j += 1) {
      const label = relations.cells[i - 1][j - 1];
      const absent = relations.eps_model2[i - 1][j - 1];
      const present = relations.eps_model3[i - 1][j - 1];
      const group = svg
        .append("g")
        .attr("class", `cell ${label}`)
        .attr("data-pair", `${i},${j}`)
        .attr("data-relation", relationDisplay(label));
      const title =
        label === "self-always"
          ? `${experts[i - 1]} → ${experts[j - 1]}: self weight, always present`
          : `${experts[i - 1]} → ${experts[j - 1]}: ${relationDisplay(label)}\n` +
            `slack without the arc ε* = ${fmt(absent)}\n` +
            `slack with the arc ε* = ${fmt(present)}` +
            (borderline.has(`${i},${j}`) ? "\nborderline: slack within tolerance of zero" : "");
      group.append("title").text(title);
      group
        .append("rect")
        .attr("x", scale(j) ?? 0)
        .attr("y", scale(i) ?? 0)
        .attr("width", CELL - 2)
        .attr("height", CELL - 2)
        .attr("fill", COLOR(label));
      group
        .append("text")
        .attr("class", "cell-mark")
        .attr("x", (scale(j) ?? 0) + (CELL - 2) / 2)
        .attr("y", (scale(i) ?? 0) + (CELL - 2) / 2 + 5)
        .attr("text-anchor", "middle")
        .text(SHORT[label] + (borderline.has(`${i},${j}`) ? "!" : ""));
    }
  }

  const legend = el("div", { class: "legend" });
  for (const key of ["necessary", "possible-only", "impossible"]) {
    const swatch = el("span", { class: "swatch" });
    swatch.style.background = COLOR(key);
    legend.append(
      el("span", { class: "legend-entry" }, [
        swatch,
        ` ${SHORT[key]} = ${relationDisplay(key)} `,
      ]),
    );
  }
  legend.append(el("span", { class: "legend-entry" }, ["! = borderline slack"]));
  container.append(legend);
}
