/** Directed weighted graph of a selected network.
 *
 * Layout is a fixed circle (nodes in expert order), so the same payload
 * always renders the same markup.  An arc i→j is drawn exactly when the
 * returned weight clears the intensity floor that the service reports with
 * the selection — the same visibility rule its DOT export applies — and the
 * arc label is that weight, formatted but not recomputed.
 */

import * as d3 from "d3";
import { fmt } from "../format";
import type { SelectionPayload } from "../types";

const SIZE = 460;
const NODE_R = 26;

export interface ArcSpec {
  i: number; // 1-based source
  j: number; // 1-based target
  weight: number;
}

/** Off-diagonal arcs at or above the intensity floor (display rule only). */
export function visibleArcs(selection: SelectionPayload): ArcSpec[] {
  const floor = selection.thresholds.eps_prime;
  const arcs: ArcSpec[] = [];
  selection.W.forEach((row, i) => {
    row.forEach((weight, j) => {
      if (i !== j && weight >= floor - 1e-12) {
        arcs.push({ i: i + 1, j: j + 1, weight });
      }
    });
  });
  return arcs;
}

function nodeCenter(index: number, n: number): [number, number] {
  const angle = -Math.PI / 2 + (2 * Math.PI * index) / n;
  const radius = SIZE / 2 - NODE_R - 30;
  return [SIZE / 2 + radius * Math.cos(angle), SIZE / 2 + radius * Math.sin(angle)];
}

export function renderNetworkGraph(
  container: HTMLElement,
  selection: SelectionPayload,
  experts: string[],
): void {
  const n = selection.W.length;
  const svg = d3
    .select(container)
    .append("svg")
    .attr("class", "network-graph")
    .attr("width", SIZE)
    .attr("height", SIZE)
    .attr("viewBox", `0 0 ${SIZE} ${SIZE}`);

  svg
    .append("defs")
    .append("marker")
    .attr("id", "arrow")
    .attr("viewBox", "0 0 10 10")
    .attr("refX", 9)
    .attr("refY", 5)
    .attr("markerWidth", 7)
    .attr("markerHeight", 7)
    .attr("orient", "auto-start-reverse")
    .append("path")
    .attr("d", "M 0 0 L 10 5 L 0 10 z")
    .attr("fill", "#37474f");

  const centers = d3.range(n).map((k) => nodeCenter(k, n));

  for (const arc of visibleArcs(selection)) {
    const [x1, y1] = centers[arc.i - 1];
    const [x2, y2] = centers[arc.j - 1];
    const dx = x2 - x1;
    const dy = y2 - y1;
    const dist = Math.hypot(dx, dy) || 1;
    // Trim the segment to the node rims and bow it slightly to one side so
    // opposite arcs of a reciprocal pair stay distinguishable.
    const sx = x1 + (dx / dist) * NODE_R;
    const sy = y1 + (dy / dist) * NODE_R;
    const tx = x2 - (dx / dist) * (NODE_R + 4);
    const ty = y2 - (dy / dist) * (NODE_R + 4);
    const mx = (sx + tx) / 2 - (dy / dist) * 14;
    const my = (sy + ty) / 2 + (dx / dist) * 14;
    const group = svg
      .append("g")
      .attr("class", "arc")
      .attr("data-arc", `${arc.i},${arc.j}`);
    group.append("title").text(
      `${experts[arc.i - 1]} → ${experts[arc.j - 1]}: weight ${fmt(arc.weight)}`,
    );
    group
      .append("path")
      .attr("d", `M ${sx} ${sy} Q ${mx} ${my} ${tx} ${ty}`)
      .attr("fill", "none")
      .attr("stroke", "#37474f")
      .attr("stroke-width", 1.6)
      .attr("marker-end", "url(#arrow)");
    group
      .append("text")
      .attr("class", "arc-weight")
      .attr("x", mx)
      .attr("y", my - 4)
      .attr("text-anchor", "middle")
      .text(fmt(arc.weight));
  }

  selection.W.forEach((row, k) => {
    const [cx, cy] = centers[k];
    const node = svg
      .append("g")
      .attr("class", "node")
      .attr("data-node", String(k + 1));
    node.append("title").text(
      `${experts[k]}: self weight ${fmt(row[k])}, centrality ω = ${fmt(selection.omega[k])}`,
    );
    node
      .append("circle")
      .attr("cx", cx)
      .attr("cy", cy)
      .attr("r", NODE_R)
      .attr("fill", "#eceff1")
      .attr("stroke", "#37474f")
      .attr("stroke-width", 1.4);
    node
      .append("text")
      .attr("class", "node-label")
      .attr("x", cx)
      .attr("y", cy - 1)
      .attr("text-anchor", "middle")
      .text(experts[k] ?? `d${k + 1}`);
    node
      .append("text")
      .attr("class", "node-self-weight")
      .attr("x", cx)
      .attr("y", cy + 12)
      .attr("text-anchor", "middle")
      .text(fmt(row[k], 2));
  });
}

/** Rasterize the rendered SVG to a PNG data URL (browser only). */
export function graphToPng(container: HTMLElement): Promise<string> {
  const svg = container.querySelector("svg.network-graph");
  if (!svg) return Promise.reject(new Error("no graph rendered"));
  const markup = new XMLSerializer().serializeToString(svg);
  const url = `data:image/svg+xml;charset=utf-8,${encodeURIComponent(markup)}`;
  return new Promise((resolve, reject) => {
    const image = new Image();
    image.onload = () => {
      const canvas = document.createElement("canvas");
      canvas.width = SIZE;
      canvas.height = SIZE;
      const context = canvas.getContext("2d");
      if (!context) {
        reject(new Error("canvas unavailable"));
        return;
      }
      context.fillStyle = "#ffffff";
      context.fillRect(0, 0, SIZE, SIZE);
      context.drawImage(image, 0, 0);
      resolve(canvas.toDataURL("image/png"));
    };
    image.onerror = () => reject(new Error("could not rasterize the graph"));
    image.src = url;
  });
}
