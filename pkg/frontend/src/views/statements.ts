/** Builder for empathic and node statements.
 *
 * One form per statement: pick a kind, the relevant expert/alternative
 * indices appear, and the built JSON accumulates in a pending list until
 * submitted in one batch.  Field sets per kind mirror the service schema.
 */

import { el, option } from "../dom";
import type { EmpathicKind, EmpathicStatementBlob } from "../types";

export const KIND_FIELDS: Record<EmpathicKind, string[]> = {
  preference: ["dm", "better", "worse", "strict"],
  indifference: ["dm", "better", "worse"],
  intensity: ["dm", "high", "low", "strict"],
  "intensity-indifference": ["dm", "high", "low"],
  "zero-weight": ["i", "j"],
  "weight-floor": ["i", "j"],
  "weight-dominance": ["i", "j", "k", "h", "factor", "strict"],
  "half-share": ["i", "j"],
  "centrality-gap": ["i", "j", "k", "h", "strict"],
};

export interface StatementForm {
  id: string;
  source: string;
  kind: EmpathicKind;
  dm?: number;
  better?: number;
  worse?: number;
  high?: [number, number];
  low?: [number, number];
  i?: number;
  j?: number;
  k?: number;
  h?: number;
  factor?: number;
  strict?: boolean;
}

/** Assemble the exact JSON blob the service expects for one statement. */
export function buildStatement(form: StatementForm): EmpathicStatementBlob {
  const fields = KIND_FIELDS[form.kind];
  const blob: EmpathicStatementBlob = {
    id: form.id,
    source: form.source,
    kind: form.kind,
  };
  for (const field of fields) {
    if (field === "strict") {
      blob.strict = form.strict ?? true;
    } else if (field === "factor") {
      blob.factor = form.factor ?? 1.0;
    } else {
      const value = form[field as "dm" | "better" | "worse" | "high" | "low" | "i" | "j" | "k" | "h"];
      if (value === undefined) {
        throw new Error(`statement ${form.id}: missing field ${field}`);
      }
      (blob as unknown as Record<string, unknown>)[field] = value;
    }
  }
  return blob;
}

export interface StatementBuilderOptions {
  experts: string[];
  alternatives: string[];
  onSubmit: (statements: EmpathicStatementBlob[]) => void;
}

function indexPicker(name: string, labels: string[]): HTMLSelectElement {
  const select = el("select", { class: "index-picker", "data-field": name });
  labels.forEach((label, k) => select.append(option(String(k + 1), label, k === 0)));
  return select;
}

function pairPicker(name: string, labels: string[]): HTMLSpanElement {
  return el("span", { class: "pair-picker", "data-pair": name }, [
    indexPicker(`${name}.0`, labels),
    " vs ",
    indexPicker(`${name}.1`, labels),
  ]);
}

export function renderStatementBuilder(
  container: HTMLElement,
  options: StatementBuilderOptions,
): void {
  const pending: EmpathicStatementBlob[] = [];
  let counter = 1;

  const form = el("div", { class: "statement-form" });
  const kindSelect = el("select", { class: "kind-picker" });
  for (const kind of Object.keys(KIND_FIELDS)) {
    kindSelect.append(option(kind, kind, kind === "preference"));
  }
  const idInput = el("input", { class: "statement-id", placeholder: "id (auto)" });
  const sourceInput = el("input", { class: "statement-source", value: "ui" });
  const fieldsBox = el("div", { class: "statement-fields" });
  const pendingList = el("ul", { class: "pending-statements" });
  const note = el("p", { class: "builder-note" });

  const fieldControls = new Map<string, HTMLElement>();

  function syncFields(): void {
    fieldsBox.innerHTML = "";
    fieldControls.clear();
    const kind = kindSelect.value as EmpathicKind;
    for (const field of KIND_FIELDS[kind]) {
      let control: HTMLElement;
      if (field === "strict") {
        const box = el("input", { type: "checkbox", "data-field": "strict" });
        box.checked = true;
        control = el("label", { class: "field strict" }, [box, " strict"]);
        fieldControls.set(field, box);
      } else if (field === "factor") {
        const input = el("input", { class: "factor-input", value: "1.0" });
        control = el("label", { class: "field factor" }, ["factor ", input]);
        fieldControls.set(field, input);
      } else if (field === "high" || field === "low") {
        const picker = pairPicker(field, options.alternatives);
        control = el("label", { class: `field ${field}` }, [`${field} `, picker]);
        fieldControls.set(field, picker);
      } else {
        const labels = field === "dm" ? options.experts : field === "better" || field === "worse" ? options.alternatives : options.experts;
        const picker = indexPicker(field, labels);
        control = el("label", { class: `field ${field}` }, [`${field} `, picker]);
        fieldControls.set(field, picker);
      }
      fieldsBox.append(control);
    }
  }

  function readForm(): StatementForm {
    const kind = kindSelect.value as EmpathicKind;
    const built: StatementForm = {
      id: idInput.value.trim() || `ui-${counter}`,
      source: sourceInput.value.trim() || "ui",
      kind,
    };
    for (const field of KIND_FIELDS[kind]) {
      const control = fieldControls.get(field);
      if (!control) continue;
      if (field === "strict") {
        built.strict = (control as HTMLInputElement).checked;
      } else if (field === "factor") {
        built.factor = Number((control as HTMLInputElement).value);
      } else if (field === "high" || field === "low") {
        const selects = control.querySelectorAll("select");
        built[field] = [
          Number((selects[0] as HTMLSelectElement).value),
          Number((selects[1] as HTMLSelectElement).value),
        ];
      } else {
        built[field as "dm" | "better" | "worse" | "i" | "j" | "k" | "h"] = Number(
          (control as HTMLSelectElement).value,
        );
      }
    }
    return built;
  }

  function syncPending(): void {
    pendingList.innerHTML = "";
    for (const blob of pending) {
      pendingList.append(
        el("li", { class: "pending-statement", "data-id": blob.id }, [
          describeStatement(blob),
        ]),
      );
    }
    note.textContent = pending.length
      ? `${pending.length} statement(s) ready to submit`
      : "no pending statements";
  }

  const addButton = el("button", { class: "add-statement" }, ["Add statement"]);
  addButton.addEventListener("click", () => {
    pending.push(buildStatement(readForm()));
    counter += 1;
    idInput.value = "";
    syncPending();
  });

  const submitButton = el("button", { class: "submit-statements" }, ["Submit batch"]);
  submitButton.addEventListener("click", () => {
    if (!pending.length) return;
    options.onSubmit(pending.splice(0, pending.length));
    syncPending();
  });

  kindSelect.addEventListener("change", syncFields);
  syncFields();
  syncPending();

  form.append(
    el("div", { class: "row" }, ["kind ", kindSelect, " id ", idInput, " source ", sourceInput]),
    fieldsBox,
    el("div", { class: "row" }, [addButton, " ", submitButton]),
    note,
    pendingList,
  );
  container.append(form);
}

export function describeStatement(blob: EmpathicStatementBlob): string {
  const strictness = blob.strict === undefined ? "" : blob.strict ? " (strict)" : " (weak)";
  switch (blob.kind) {
    case "preference":
      return `${blob.id}: d${blob.dm} prefers a${blob.better} over a${blob.worse}${strictness}`;
    case "indifference":
      return `${blob.id}: d${blob.dm} indifferent between a${blob.better} and a${blob.worse}`;
    case "intensity":
      return `${blob.id}: d${blob.dm} gap a${blob.high?.[0]}/a${blob.high?.[1]} exceeds a${blob.low?.[0]}/a${blob.low?.[1]}${strictness}`;
    case "intensity-indifference":
      return `${blob.id}: d${blob.dm} gap a${blob.high?.[0]}/a${blob.high?.[1]} equals a${blob.low?.[0]}/a${blob.low?.[1]}`;
    case "zero-weight":
      return `${blob.id}: w(${blob.i},${blob.j}) = 0`;
    case "weight-floor":
      return `${blob.id}: w(${blob.i},${blob.j}) at least the floor`;
    case "weight-dominance":
      return `${blob.id}: w(${blob.i},${blob.j}) ≥ ${blob.factor} × w(${blob.k},${blob.h})${strictness}`;
    case "half-share":
      return `${blob.id}: w(${blob.i},${blob.j}) is at least half of expert ${blob.j}'s total influence`;
    case "centrality-gap":
      return `${blob.id}: centrality of ${blob.i} minus ${blob.j} exceeds that of ${blob.k} minus ${blob.h}${strictness}`;
    default:
      return blob.id;
  }
}
