/** Explorer wiring: sliders in, one in-flight request per axis, curves out. */

import { fetchRates, offendingField, RatesError } from "./api.js";
import { buildSweepCsv } from "./format.js";
import { canonicalKey, debounce, ExplorerState } from "./state.js";
import { draw, layout, Series } from "./plot.js";
import { METRICS, MetricField, RateEntry, SweepAxis, SweepSpec, SystemParams } from "./types.js";

const COLORS = ["#1965b0", "#dc050c", "#4eb265", "#882e72", "#f1932d", "#777777"];
const AXIS_FIELDS: Record<SweepAxis, string[]> = {
  n: ["bins_per_frame", "downtime_seconds"],
  p: ["lambda_p"],
  d: ["downtime_bins", "downtime_seconds"],
  sigma_ratio: ["sigma_d"],
  dc_ratio: ["lambda_dc"],
};

const state = new ExplorerState();
let current: { key: string; entries: RateEntry[]; spec: SweepSpec } | null = null;

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

function readParams(): SystemParams {
  const n = 2 ** Number(el<HTMLInputElement>("n-exp").value);
  const frameWidth = Number(el<HTMLInputElement>("frame-ns").value) * 1e-9;
  const tau = frameWidth / n;
  const p = Number(el<HTMLInputElement>("occupancy").value);
  const d = Math.min(Number(el<HTMLInputElement>("downtime").value), n);
  const sigmaRatio = 10 ** Number(el<HTMLInputElement>("sigma-exp").value);
  const dcRatio = Number(el<HTMLInputElement>("dc-ratio").value);
  const lambdaP = -Math.log(1 - p) / tau;
  return {
    lambda_p: lambdaP,
    lambda_dc: dcRatio * lambdaP,
    frame_width: frameWidth,
    bins_per_frame: n,
    sigma_d: sigmaRatio * frameWidth,
    downtime_bins: d,
    downtime_seconds: null,
  };
}

function readSpec(params: SystemParams): SweepSpec {
  const axis = el<HTMLSelectElement>("axis").value as SweepAxis;
  const points = Number(el<HTMLInputElement>("points").value) || 17;
  switch (axis) {
    case "n":
      return { axis, from: 2, to: 512, points: 9, log: true };
    case "p":
      return { axis, from: 0.02, to: 0.98, points, log: false };
    case "d":
      return { axis, from: 0, to: Math.min(params.bins_per_frame, 12), points:
        Math.min(params.bins_per_frame, 12) + 1, log: false };
    case "sigma_ratio":
      return { axis, from: 1e-5, to: 1e-1, points, log: true };
    case "dc_ratio":
      return { axis, from: 0, to: 1, points, log: false };
  }
}

function selectedMetrics(): MetricField[] {
  return METRICS.filter((m) => el<HTMLInputElement>(`metric-${m.field}`).checked)
    .map((m) => m.field);
}

function status(text: string, isError = false): void {
  const node = el<HTMLElement>("status");
  node.textContent = text;
  node.className = isError ? "status error" : "status";
}

function checkEcho(sent: SystemParams, entries: RateEntry[], axis: SweepAxis): void {
  const first = entries.find((e) => e.params);
  if (!first || !first.params) return;
  const skip = new Set(AXIS_FIELDS[axis]);
  for (const [field, value] of Object.entries(sent)) {
    if (skip.has(field)) continue;
    const echoed = (first.params as unknown as Record<string, unknown>)[field];
    if (echoed !== value) {
      status(`service echoed ${field} = ${echoed}, sent ${value}`, true);
      return;
    }
  }
}

function seriesFrom(entries: RateEntry[], metrics: MetricField[], dashed: boolean,
                    labelPrefix: string, colorOffset = 0): Series[] {
  const good = entries.filter((e) => e.error === undefined);
  return metrics.map((field, i) => ({
    label: `${labelPrefix}${METRICS.find((m) => m.field === field)?.label ?? field}`,
    x: good.map((e) => e.axis_value),
    y: good.map((e) => (e as unknown as Record<string, number>)[field] ?? NaN),
    color: COLORS[(i + colorOffset) % COLORS.length],
    dashed,
  }));
}

function render(): void {
  if (!current) return;
  const metrics = selectedMetrics();
  const logY = el<HTMLInputElement>("log-y").checked;
  const logX = current.spec.log;
  const series = seriesFrom(current.entries, metrics, false, "");
  state.pinned().forEach((pin, i) => {
    series.push(...seriesFrom(pin.entries, metrics, true, `${pin.label} `, i + 1));
  });
  const canvas = el<HTMLCanvasElement>("plot");
  const geometry = layout(series, canvas.width, canvas.height, logX, logY);
  draw(canvas, geometry);
  el<HTMLElement>("legend").innerHTML = geometry.lines
    .map((l) => `<span style="color:${l.color}">${l.dashed ? "┄" : "─"} ${l.label}</span>`)
    .join("  ");
  const failed = current.entries.filter((e) => e.error !== undefined).length;
  if (failed > 0) status(`${failed} grid point(s) failed; see exported CSV for details`, true);
}

async function refresh(): Promise<void> {
  const params = readParams();
  const spec = readSpec(params);
  const key = canonicalKey(params, spec);
  const cached = state.cached(key);
  const seq = state.nextRequest(spec.axis);
  if (cached) {
    if (state.acceptResponse(spec.axis, seq)) {
      current = { key, entries: cached, spec };
      render();
      status(`cached trace (${cached.length} points)`);
    }
    return;
  }
  status("computing...");
  try {
    const entries = await fetchRates(baseUrl(), params, spec);
    if (!state.acceptResponse(spec.axis, seq)) return; // superseded while in flight
    state.store(key, entries);
    current = { key, entries, spec };
    checkEcho(params, entries, spec.axis);
    render();
    status(`trace over ${spec.axis} (${entries.length} points)`);
  } catch (err) {
    if (!state.acceptResponse(spec.axis, seq)) return;
    if (err instanceof RatesError) {
      const fields = err.violations.map(offendingField).filter(Boolean).join(", ");
      status(`${err.message}${fields ? ` [${fields}]` : ""}: ${err.violations.join("; ")}`, true);
    } else {
      status(`service unreachable: ${err}`, true);
    }
  }
}

function baseUrl(): string {
  const override = el<HTMLInputElement>("base-url").value.trim();
  return override || "";
}

function pinCurrent(): void {
  if (!current) {
    status("nothing to pin yet", true);
    return;
  }
  const label = `pin${state.pinned().length + 1}`;
  const { evicted } = state.pin({ key: current.key, label, entries: current.entries });
  status(evicted ? `pinned ${label}; evicted oldest (${evicted.label})` : `pinned ${label}`);
  render();
}

function exportCsv(): void {
  if (!current) {
    status("nothing to export yet", true);
    return;
  }
  const csv = buildSweepCsv(current.entries);
  el<HTMLTextAreaElement>("csv-out").value = csv;
  const blob = new Blob([csv], { type: "text/csv" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = "teqkd_sweep.csv";
  link.click();
  URL.revokeObjectURL(link.href);
  status("exported CSV (identical to `teqkd sweep` output for these parameters)");
}

function bind(): void {
  const requestRefresh = debounce(() => void refresh(), 150);
  for (const id of ["n-exp", "frame-ns", "occupancy", "downtime", "sigma-exp",
                    "dc-ratio", "axis", "points", "base-url"]) {
    el<HTMLElement>(id).addEventListener("input", () => {
      updateReadouts();
      requestRefresh();
    });
  }
  for (const metric of METRICS) {
    el<HTMLElement>(`metric-${metric.field}`).addEventListener("input", render);
  }
  el<HTMLElement>("log-y").addEventListener("input", render);
  el<HTMLElement>("pin").addEventListener("click", pinCurrent);
  el<HTMLElement>("clear-pins").addEventListener("click", () => {
    state.clearPins();
    render();
    status("cleared pinned traces");
  });
  el<HTMLElement>("export").addEventListener("click", exportCsv);
  updateReadouts();
  void refresh();
}

function updateReadouts(): void {
  const n = 2 ** Number(el<HTMLInputElement>("n-exp").value);
  el<HTMLElement>("n-readout").textContent = String(n);
  el<HTMLElement>("p-readout").textContent = el<HTMLInputElement>("occupancy").value;
  el<HTMLElement>("d-readout").textContent = el<HTMLInputElement>("downtime").value;
  el<HTMLElement>("sigma-readout").textContent =
    (10 ** Number(el<HTMLInputElement>("sigma-exp").value)).toExponential(1);
  el<HTMLElement>("dc-readout").textContent = el<HTMLInputElement>("dc-ratio").value;
}

document.addEventListener("DOMContentLoaded", bind);
