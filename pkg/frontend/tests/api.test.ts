import { describe, expect, it } from "vitest";

import { fetchRates, offendingField, RatesError } from "../src/api.js";
import type { SystemParams } from "../src/types.js";

const params: SystemParams = {
  lambda_p: 1e6,
  lambda_dc: 0,
  frame_width: 3.3e-7,
  bins_per_frame: 8,
  sigma_d: 0,
  downtime_bins: 0,
  downtime_seconds: null,
};

const fakeFetch = (status: number, payload: unknown): typeof fetch =>
  (async (_url: RequestInfo | URL, init?: RequestInit) => {
    expect(init?.method).toBe("POST");
    const body = JSON.parse(String(init?.body));
    expect(body.params.lambda_p).toBe(1e6);
    return {
      ok: status < 400,
      status,
      json: async () => payload,
    } as Response;
  }) as typeof fetch;

describe("fetchRates", () => {
  it("returns the response array on success", async () => {
    const entries = await fetchRates("", params, null,
      fakeFetch(200, [{ axis: "d", axis_value: 0, k_raw: 3 }]));
    expect(entries).toHaveLength(1);
    expect(entries[0].k_raw).toBe(3);
  });

  it("raises with violations on a validation error", async () => {
    const attempt = fetchRates("", params, null, fakeFetch(400, {
      error: "invalid parameters",
      violations: ["lambda_p must be > 0 (got -1)"],
    }));
    await expect(attempt).rejects.toThrow(RatesError);
    await expect(attempt).rejects.toMatchObject({
      violations: ["lambda_p must be > 0 (got -1)"],
    });
  });
});

describe("offendingField", () => {
  it("extracts the field name from a violation message", () => {
    expect(offendingField("lambda_p must be > 0 (got -1)")).toBe("lambda_p");
    expect(offendingField("downtime_bins must not exceed bins_per_frame")).toBe("downtime_bins");
  });
});
