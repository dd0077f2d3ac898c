/** Canvas line plot.  Geometry is computed by pure functions so tests can
 * assert on scales and polylines without a DOM. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dashed: boolean;
}

export interface Scale {
  min: number;
  max: number;
  log: boolean;
}

export interface PlotGeometry {
  xScale: Scale;
  yScale: Scale;
  /** pixel polylines, one per series, NaN-separated segments dropped */
  lines: { points: Array<[number, number]>; color: string; dashed: boolean; label: string }[];
}

function finiteValues(values: number[], log: boolean): number[] {
  return values.filter((v) => Number.isFinite(v) && (!log || v > 0));
}

export function makeScale(values: number[], log: boolean): Scale {
  const usable = finiteValues(values, log);
  if (usable.length === 0) return { min: 0, max: 1, log: false };
  let min = Math.min(...usable);
  let max = Math.max(...usable);
  if (min === max) {
    // degenerate (a flat trace): pad so the line sits mid-panel
    if (log) {
      min /= 2;
      max *= 2;
    } else {
      const pad = Math.abs(min) * 0.1 || 0.5;
      min -= pad;
      max += pad;
    }
  }
  return { min, max, log };
}

export function project(value: number, scale: Scale, pixels: number, invert = false): number {
  const t = scale.log
    ? (Math.log(value) - Math.log(scale.min)) / (Math.log(scale.max) - Math.log(scale.min))
    : (value - scale.min) / (scale.max - scale.min);
  return invert ? pixels * (1 - t) : pixels * t;
}

export function layout(series: Series[], width: number, height: number,
                       logX: boolean, logY: boolean): PlotGeometry {
  const xScale = makeScale(series.flatMap((s) => s.x), logX);
  const yScale = makeScale(series.flatMap((s) => s.y), logY);
  const lines = series.map((s) => {
    const points: Array<[number, number]> = [];
    for (let i = 0; i < s.x.length; i++) {
      const xOk = Number.isFinite(s.x[i]) && (!logX || s.x[i] > 0);
      const yOk = Number.isFinite(s.y[i]) && (!logY || s.y[i] > 0);
      if (xOk && yOk) {
        points.push([
          project(s.x[i], xScale, width),
          project(s.y[i], yScale, height, true),
        ]);
      }
    }
    return { points, color: s.color, dashed: s.dashed, label: s.label };
  });
  return { xScale, yScale, lines };
}

export function ticks(scale: Scale, count = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i <= count; i++) {
    const t = i / count;
    out.push(
      scale.log
        ? Math.exp(Math.log(scale.min) + t * (Math.log(scale.max) - Math.log(scale.min)))
        : scale.min + t * (scale.max - scale.min),
    );
  }
  return out;
}

export function draw(canvas: HTMLCanvasElement, geometry: PlotGeometry): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#ccc";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  ctx.font = "11px sans-serif";
  ctx.fillStyle = "#666";
  for (const tick of ticks(geometry.yScale)) {
    const y = project(tick, geometry.yScale, height, true);
    ctx.fillText(tick.toPrecision(3), 4, Math.min(Math.max(y, 10), height - 2));
  }
  for (const line of geometry.lines) {
    if (line.points.length === 0) continue;
    ctx.strokeStyle = line.color;
    ctx.setLineDash(line.dashed ? [6, 4] : []);
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    line.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.stroke();
  }
  ctx.setLineDash([]);
}
