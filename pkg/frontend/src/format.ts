/** Display formatting only — every value shown comes from the service. */

export function fmt(value: number | null | undefined, digits = 4): string {
  if (value === null || value === undefined) return "—";
  if (!Number.isFinite(value)) return value > 0 ? "unbounded" : "-unbounded";
  return value.toFixed(digits);
}

const RELATION_DISPLAY: Record<string, string> = {
  necessary: "Necessary",
  "possible-only": "PossibleOnly",
  impossible: "Impossible",
  "self-always": "Self",
};

export function relationDisplay(label: string): string {
  return RELATION_DISPLAY[label] ?? label;
}
