/** Pairwise judgment grid for one expert.
 *
 * Cells accept values in [0, 1]; the diagonal is pinned to 0.5 and the lower
 * mirror of an edited cell fills in live as its complement.  That mirror
 * fill is the one piece of arithmetic this client performs — it is entry
 * assistance on the input side (the grid is reciprocal by definition), and
 * the service re-validates the submitted matrix; every analysis number
 * shown anywhere in the UI comes from the service untouched.
 */

import { el } from "../dom";
import type { JudgmentCell } from "../types";

function parseCell(text: string): JudgmentCell {
  const trimmed = text.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  if (!Number.isFinite(value) || value < 0 || value > 1) return null;
  return value;
}

function mirror(value: number): number {
  return Number((1 - value).toFixed(10));
}

export interface JudgmentGridOptions {
  expert: string;
  m: number;
  cells: JudgmentCell[][];
  onSave: (cells: JudgmentCell[][]) => void;
}

export function renderJudgmentGrid(
  container: HTMLElement,
  options: JudgmentGridOptions,
): void {
  const { m } = options;
  const working: JudgmentCell[][] = options.cells.map((row) => [...row]);
  const inputs: HTMLInputElement[][] = [];

  const table = el("table", { class: "judgment-grid" });
  const head = el("tr", {}, [el("th", {}, [options.expert])]);
  for (let j = 1; j <= m; j += 1) head.append(el("th", {}, [`a${j}`]));
  table.append(el("thead", {}, [head]));

  const body = el("tbody");
  for (let i = 0; i < m; i += 1) {
    const tr = el("tr", {}, [el("th", {}, [`a${i + 1}`])]);
    inputs.push([]);
    for (let j = 0; j < m; j += 1) {
      const input = el("input", {
        class: "cell-input",
        "data-cell": `${i + 1},${j + 1}`,
        inputmode: "decimal",
      });
      if (i === j) {
        input.value = "0.5";
        input.disabled = true;
      } else if (working[i][j] !== null) {
        input.value = String(working[i][j]);
      }
      inputs[i].push(input);
      tr.append(el("td", {}, [input]));
    }
    body.append(tr);
  }
  table.append(body);

  for (let i = 0; i < m; i += 1) {
    for (let j = 0; j < m; j += 1) {
      if (i === j) continue;
      inputs[i][j].addEventListener("input", () => {
        const value = parseCell(inputs[i][j].value);
        working[i][j] = value;
        const twin = inputs[j][i];
        if (value === null) {
          working[j][i] = null;
          twin.value = "";
          twin.classList.remove("mirrored");
        } else {
          working[j][i] = mirror(value);
          twin.value = String(working[j][i]);
          twin.classList.add("mirrored");
        }
        inputs[i][j].classList.toggle(
          "invalid",
          inputs[i][j].value.trim() !== "" && value === null,
        );
      });
    }
  }

  const save = el("button", { class: "save-judgments" }, ["Save judgments"]);
  save.addEventListener("click", () => options.onSave(working.map((row) => [...row])));
  container.append(table, save);
}
