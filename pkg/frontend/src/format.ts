/**
 * Number and CSV formatting that reproduces the service's CSV byte for
 * byte.  The service writes floats as `%.12e` with a sign and at least
 * two exponent digits; JavaScript's toExponential omits the zero padding,
 * so it is added back here.  Both sides hold identical IEEE-754 doubles
 * (JSON round trips are exact), so equal formatting means equal bytes.
 */

import type { RateEntry } from "./types.js";

export function fmtFloat(x: number): string {
  const s = x.toExponential(12);
  return s.replace(/e([+-])(\d)$/, "e$10$2");
}

/** Column order of the service's sweep CSV. */
export const SWEEP_HEADER = [
  "axis",
  "axis_value",
  "lambda_p",
  "lambda_dc",
  "frame_width",
  "bins_per_frame",
  "sigma_d",
  "downtime_bins",
  "p_occupy",
  "k_raw",
  "rod",
  "beta_r",
  "k_reconciled",
  "c_dr",
  "k_uniform",
  "k_secret",
  "valid_prob_iid",
  "valid_prob_chain",
  "r_raw",
  "r_adjusted",
  "r_secret",
  "r_secret_time",
  "clamped",
  "error",
] as const;

const INT_COLUMNS = new Set(["bins_per_frame", "downtime_bins"]);

function cell(column: string, entry: RateEntry): string {
  if (column === "axis") return entry.axis;
  if (column === "axis_value") return fmtFloat(entry.axis_value);
  if (column === "error") return entry.error ?? "";
  if (entry.error !== undefined) return ""; // failed points carry only the error
  if (column === "clamped") return entry.clamped ? "1" : "0";
  const fromParams = new Set(["lambda_p", "lambda_dc", "frame_width",
    "bins_per_frame", "sigma_d", "downtime_bins"]);
  const value = fromParams.has(column)
    ? (entry.params as unknown as Record<string, unknown>)[column]
    : (entry as unknown as Record<string, unknown>)[column];
  if (INT_COLUMNS.has(column)) return String(Math.round(value as number));
  return fmtFloat(value as number);
}

/** Render a response array exactly as the service's sweep CSV. */
export function buildSweepCsv(entries: RateEntry[]): string {
  const lines = [SWEEP_HEADER.join(",")];
  for (const entry of entries) {
    lines.push(SWEEP_HEADER.map((column) => cell(column, entry)).join(","));
  }
  return lines.join("\n") + "\n";
}
