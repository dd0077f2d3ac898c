/** Thin client for POST /v1/rates.  The UI never computes a rate itself;
 * every plotted number comes out of a response from this endpoint. */

import type { RateEntry, SweepSpec, SystemParams } from "./types.js";

export class RatesError extends Error {
  violations: string[];

  constructor(message: string, violations: string[] = []) {
    super(message);
    this.violations = violations;
  }
}

export async function fetchRates(
  baseUrl: string,
  params: SystemParams,
  spec: SweepSpec | null,
  fetchFn: typeof fetch = fetch,
): Promise<RateEntry[]> {
  const body: Record<string, unknown> = { params };
  if (spec) body.sweep = spec;
  const response = await fetchFn(`${baseUrl}/v1/rates`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  const payload = await response.json();
  if (!response.ok) {
    throw new RatesError(
      typeof payload.error === "string" ? payload.error : `HTTP ${response.status}`,
      Array.isArray(payload.violations) ? payload.violations : [],
    );
  }
  return payload as RateEntry[];
}

/** Field named by a validation message, for highlighting the input. */
export function offendingField(violation: string): string | null {
  const match = violation.match(/^([a-z_]+)/);
  return match ? match[1] : null;
}
