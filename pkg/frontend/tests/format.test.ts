import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { buildSweepCsv, fmtFloat, SWEEP_HEADER } from "../src/format.js";
import type { RateEntry } from "../src/types.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const golden = (name: string) => readFileSync(join(HERE, name), "utf-8");

describe("fmtFloat", () => {
  it("matches the service float format on frozen reference values", () => {
    // pairs frozen from the service formatter (%.12e)
    const cases: Array<[number, string]> = [
      [0.0, "0.000000000000e+00"],
      [1.0, "1.000000000000e+00"],
      [3.3e-7, "3.300000000000e-07"],
      [3000000.0, "3.000000000000e+06"],
      [0.05999962050492, "5.999962050492e-02"],
      [1.517920098664, "1.517920098664e+00"],
      [4599757.874738, "4.599757874738e+06"],
      [3.397e-11, "3.397000000000e-11"],
      [9.87654321e99, "9.876543210000e+99"],
      [1.2345678901234e-100, "1.234567890123e-100"],
    ];
    for (const [value, expected] of cases) {
      expect(fmtFloat(value)).toBe(expected);
    }
  });

  it("pads single-digit exponents to two digits", () => {
    expect(fmtFloat(12.5)).toBe("1.250000000000e+01");
    expect(fmtFloat(0.125)).toBe("1.250000000000e-01");
  });
});

describe("buildSweepCsv", () => {
  it("reproduces the CLI sweep CSV byte for byte (dead-time sweep)", () => {
    const entries = JSON.parse(golden("golden_response.json")) as RateEntry[];
    expect(buildSweepCsv(entries)).toBe(golden("golden_sweep.csv"));
  });

  it("reproduces the CLI sweep CSV byte for byte (log jitter sweep)", () => {
    const entries = JSON.parse(golden("golden_response_sigma.json")) as RateEntry[];
    expect(buildSweepCsv(entries)).toBe(golden("golden_sweep_sigma.csv"));
  });

  it("writes failed points as an error cell with blanks elsewhere", () => {
    const entries: RateEntry[] = [
      { axis: "d", axis_value: 9, error: "downtime_bins must not exceed bins_per_frame" },
    ];
    const lines = buildSweepCsv(entries).trim().split("\n");
    const cells = lines[1].split(",");
    expect(cells[0]).toBe("d");
    expect(cells[cells.length - 1]).toContain("downtime_bins");
    expect(cells.slice(2, -1).every((c) => c === "")).toBe(true);
    expect(cells.length).toBe(SWEEP_HEADER.length);
  });
});

describe("d=0 trace", () => {
  it("keeps the compression ratio pinned at exactly 1 across the sweep", () => {
    const entries = JSON.parse(golden("golden_response_sigma.json")) as RateEntry[];
    // golden response swept jitter with no dead time
    for (const entry of entries) {
      expect(entry.c_dr).toBe(1.0);
    }
  });
});
