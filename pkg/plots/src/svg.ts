import type { Curve } from "./manifest.js";

export interface RenderOptions {
  title?: string;
  width?: number;
  height?: number;
  /** Shade mean +- one standard deviation behind each curve. */
  band?: boolean;
  /** Values at or below this are clipped to the bottom axis instead of
   *  stretching the scale (the CSV writer floors exact fits there). */
  floorDb?: number;
}

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

const DASHES = ["", "7 3", "2 2", "9 3 2 3", "5 5", "1 3"];

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

const fmt = (x: number) => {
  const s = x.toFixed(2);
  return s.replace(/\.?0+$/, "") || "0";
};

function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo;
  const rawStep = span / Math.max(count - 1, 1);
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const norm = rawStep / mag;
  // round to 1/2/5 at geometric midpoints so spans like 14 get step 2, not 5
  const step = (norm >= 7.07 ? 10 : norm >= 3.16 ? 5 : norm >= 1.41 ? 2 : 1) * mag;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

/** Render labeled learning curves (MSE dB over iterations) as an SVG string. */
export function renderFigure(curves: Curve[], opts: RenderOptions = {}): string {
  if (curves.length === 0) {
    throw new Error("nothing to draw: no curves given");
  }
  const width = opts.width ?? 760;
  const height = opts.height ?? 460;
  const band = opts.band ?? true;
  const floor = opts.floorDb ?? -Infinity;
  const margin = { top: opts.title ? 40 : 16, right: 16, bottom: 46, left: 58 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  // Domains: x across all iterations; y across mean+-std, ignoring floored
  // points so a single exact fit does not crush the axis.
  const xs: number[] = [];
  const ys: number[] = [];
  for (const c of curves) {
    xs.push(...c.iterations);
    c.mean.forEach((m, i) => {
      if (m > floor) {
        ys.push(m - (band ? (c.std[i] ?? 0) : 0));
        ys.push(m + (band ? (c.std[i] ?? 0) : 0));
      }
    });
  }
  const [xLo, xHi] = extent(xs);
  let [yLo, yHi] = extent(ys);
  const pad = (yHi - yLo) * 0.05;
  yLo -= pad;
  yHi += pad;

  const sx = (x: number) => margin.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) =>
    margin.top + plotH - ((Math.max(y, yLo) - yLo) / (yHi - yLo)) * plotH;
  const pt = (x: number, y: number) => `${sx(x).toFixed(2)},${sy(y).toFixed(2)}`;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  );
  if (opts.title) {
    parts.push(
      `<text class="title" x="${width / 2}" y="24" text-anchor="middle" ` +
        `font-size="15">${esc(opts.title)}</text>`,
    );
  }

  // grid and axes
  const xTicks = niceTicks(xLo, xHi);
  const yTicks = niceTicks(yLo, yHi);
  for (const t of yTicks) {
    const y = sy(t).toFixed(2);
    parts.push(
      `<line x1="${margin.left}" x2="${margin.left + plotW}" y1="${y}" y2="${y}" stroke="#ddd"/>`,
      `<text class="tick-label" x="${margin.left - 7}" y="${y}" dy="0.35em" ` +
        `text-anchor="end">${fmt(t)}</text>`,
    );
  }
  for (const t of xTicks) {
    const x = sx(t).toFixed(2);
    const y0 = margin.top + plotH;
    parts.push(
      `<line x1="${x}" x2="${x}" y1="${y0}" y2="${y0 + 5}" stroke="#444"/>`,
      `<text class="tick-label" x="${x}" y="${y0 + 18}" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${margin.left}" y="${margin.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#444"/>`,
    `<text x="${margin.left + plotW / 2}" y="${height - 8}" text-anchor="middle">iteration</text>`,
    `<text x="14" y="${margin.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 14 ${margin.top + plotH / 2})">MSE (dB)</text>`,
  );

  curves.forEach((c, ci) => {
    const color = PALETTE[ci % PALETTE.length];
    const dash = DASHES[ci % DASHES.length];
    if (band) {
      const upper = c.iterations.map((x, i) => pt(x, c.mean[i]! + (c.std[i] ?? 0)));
      const lower = c.iterations
        .map((x, i) => pt(x, c.mean[i]! - (c.std[i] ?? 0)))
        .reverse();
      parts.push(
        `<path class="band" d="M${upper.join(" L")} L${lower.join(" L")} Z" ` +
          `fill="${color}" opacity="0.12" stroke="none"/>`,
      );
    }
    const line = c.iterations.map((x, i) => pt(x, c.mean[i]!));
    parts.push(
      `<path class="curve" data-label="${esc(c.label)}" d="M${line.join(" L")}" ` +
        `fill="none" stroke="${color}" stroke-width="1.6"` +
        (dash ? ` stroke-dasharray="${dash}"` : "") +
        `/>`,
    );
  });

  // legend, top right inside the plot
  const legendW = Math.max(...curves.map((c) => c.label.length)) * 7 + 40;
  const lx = margin.left + plotW - legendW - 8;
  const ly = margin.top + 8;
  parts.push(
    `<g class="legend">`,
    `<rect x="${lx}" y="${ly}" width="${legendW}" height="${curves.length * 17 + 10}" ` +
      `fill="white" opacity="0.85" stroke="#bbb"/>`,
  );
  curves.forEach((c, ci) => {
    const color = PALETTE[ci % PALETTE.length];
    const dash = DASHES[ci % DASHES.length];
    const y = ly + 14 + ci * 17;
    parts.push(
      `<line x1="${lx + 6}" x2="${lx + 28}" y1="${y}" y2="${y}" stroke="${color}" ` +
        `stroke-width="1.6"` +
        (dash ? ` stroke-dasharray="${dash}"` : "") +
        `/>`,
      `<text class="legend-label" x="${lx + 34}" y="${y}" dy="0.35em">${esc(c.label)}</text>`,
    );
  });
  parts.push(`</g>`, `</svg>`);
  return parts.join("\n");
}
