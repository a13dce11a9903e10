/**
 * Deterministic SVG assembly for the figure tools.
 *
 * No timestamps, no randomness, fixed attribute order and fixed coordinate
 * rounding, so equal inputs always produce byte-identical files.  Panels are
 * framed boxes with outward ticks; log axes are handled by plotting log10
 * values on a linear scale with decade tick labels supplied by the caller.
 */
import { scaleLinear } from "d3-scale";
import { line as linePath } from "d3-shape";

export const FONT = "Helvetica, Arial, sans-serif";

export const STYLE = {
  sym: { stroke: "#1f77b4", dash: "" },
  antisym: { stroke: "#d62728", dash: "7 3" },
  single: { stroke: "#7f7f7f", dash: "2 3" },
  transit: { stroke: "#555555", dash: "8 3 2 3" },
  poleSym: "#d62728",
  poleAntisym: "#2ca02c",
};

const MARGIN = { left: 62, right: 14, top: 26, bottom: 44 };

export interface LineSeries {
  kind: "line";
  cls: string;
  stroke: string;
  dash: string;
  points: [number, number][];
}

export interface GlyphSeries {
  kind: "x" | "circle";
  cls: string;
  stroke: string;
  points: [number, number][];
}

export type PanelSeries = LineSeries | GlyphSeries;

export interface Tick {
  value: number;
  label: string;
}

export interface PanelSpec {
  tag: string;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  xDomain: [number, number];
  yDomain: [number, number];
  /** Overrides the automatic ticks; used for decade labels on log panels. */
  yTicks?: Tick[];
  series: PanelSeries[];
  vlines?: { x: number; cls: string; stroke: string; dash: string }[];
}

export function escapeText(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function round2(v: number): number {
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? 0 : r;
}

/** Shortest decimal form of x to the given significant digits. */
export function trimNumber(x: number, digits = 6): string {
  return String(Number(x.toPrecision(digits)));
}

function text(x: number, y: number, body: string, attrs = ""): string {
  return `<text x="${round2(x)}" y="${round2(y)}"${attrs}>${escapeText(body)}</text>`;
}

function seriesPath(s: PanelSeries, sx: (v: number) => number,
                    sy: (v: number) => number): string {
  if (s.kind === "line") {
    const gen = linePath<[number, number]>()
      .defined((p) => Number.isFinite(p[0]) && Number.isFinite(p[1]))
      .x((p) => round2(sx(p[0])))
      .y((p) => round2(sy(p[1])));
    const d = gen(s.points) ?? "";
    const dash = s.dash === "" ? "" : ` stroke-dasharray="${s.dash}"`;
    return `<path class="${s.cls}" d="${d}" fill="none" stroke="${s.stroke}"` +
      ` stroke-width="1.5"${dash}/>`;
  }
  const parts: string[] = [];
  if (s.kind === "x") {
    const a = 3.2;
    for (const [px, py] of s.points) {
      const x = round2(sx(px));
      const y = round2(sy(py));
      parts.push(`M${round2(x - a)} ${round2(y - a)}L${round2(x + a)} ${round2(y + a)}` +
        `M${round2(x + a)} ${round2(y - a)}L${round2(x - a)} ${round2(y + a)}`);
    }
  } else {
    const r = 2.7;
    for (const [px, py] of s.points) {
      const x = round2(sx(px));
      const y = round2(sy(py));
      parts.push(`M${round2(x - r)} ${y}a${r} ${r} 0 1 0 ${2 * r} 0` +
        `a${r} ${r} 0 1 0 ${-2 * r} 0`);
    }
  }
  return `<path class="${s.cls}" d="${parts.join("")}" fill="none"` +
    ` stroke="${s.stroke}" stroke-width="1"/>`;
}

/** One framed panel at figure position (x0, y0) inside a w-by-h cell. */
export function renderPanel(spec: PanelSpec, x0: number, y0: number,
                            w: number, h: number): string {
  const iw = w - MARGIN.left - MARGIN.right;
  const ih = h - MARGIN.top - MARGIN.bottom;
  const xs = scaleLinear().domain(spec.xDomain).range([0, iw]);
  const ys = scaleLinear().domain(spec.yDomain).range([ih, 0]);
  const sx = (v: number) => xs(v) as number;
  const sy = (v: number) => ys(v) as number;

  const out: string[] = [];
  out.push(`<g class="panel" transform="translate(${round2(x0 + MARGIN.left)} ` +
    `${round2(y0 + MARGIN.top)})">`);

  const xTicks = xs.ticks(5);
  const xFmt = xs.tickFormat(5);
  for (const v of xTicks) {
    const x = round2(sx(v));
    out.push(`<path d="M${x} ${round2(ih)}V${round2(ih + 4)}" stroke="#000"/>`);
    out.push(text(x, ih + 15, xFmt(v), ' text-anchor="middle"'));
  }
  const yTicks: Tick[] = spec.yTicks ??
    ys.ticks(4).map((v) => ({ value: v, label: ys.tickFormat(4)(v) }));
  for (const t of yTicks) {
    const y = round2(sy(t.value));
    out.push(`<path d="M0 ${y}H-4" stroke="#000"/>`);
    out.push(text(-7, y, t.label, ' text-anchor="end" dy="0.32em"'));
  }

  for (const vl of spec.vlines ?? []) {
    if (vl.x < spec.xDomain[0] || vl.x > spec.xDomain[1]) continue;
    out.push(`<path class="${vl.cls}" d="M${round2(sx(vl.x))} 0V${round2(ih)}"` +
      ` stroke="${vl.stroke}" stroke-dasharray="${vl.dash}"/>`);
  }
  for (const s of spec.series) {
    out.push(seriesPath(s, sx, sy));
  }

  out.push(`<rect x="0" y="0" width="${round2(iw)}" height="${round2(ih)}"` +
    ` fill="none" stroke="#000"/>`);
  out.push(text(5, 14, spec.tag, ' class="panel-tag" font-weight="bold"'));
  if (spec.title) {
    out.push(text(iw / 2, -9, spec.title,
      ' class="panel-title" text-anchor="middle"'));
  }
  if (spec.xLabel) {
    out.push(text(iw / 2, ih + 33, spec.xLabel, ' text-anchor="middle"'));
  }
  if (spec.yLabel) {
    out.push(`<text transform="translate(${round2(-46)} ${round2(ih / 2)}) ` +
      `rotate(-90)" text-anchor="middle">${escapeText(spec.yLabel)}</text>`);
  }
  out.push("</g>");
  return out.join("\n");
}

export interface LegendItem {
  label: string;
  kind: "line" | "x" | "circle";
  stroke: string;
  dash?: string;
}

/** A horizontal legend strip anchored at (x, y). */
export function renderLegend(items: LegendItem[], x: number, y: number,
                             spacing: number): string {
  const out: string[] = [`<g class="legend" transform="translate(${round2(x)} ${round2(y)})">`];
  let cx = 0;
  for (const item of items) {
    if (item.kind === "line") {
      const dash = item.dash ? ` stroke-dasharray="${item.dash}"` : "";
      out.push(`<path d="M${round2(cx)} 0H${round2(cx + 26)}"` +
        ` stroke="${item.stroke}" stroke-width="1.5"${dash}/>`);
    } else {
      const glyph: GlyphSeries = {
        kind: item.kind, cls: "legend-glyph", stroke: item.stroke,
        points: [[cx + 13, 0]],
      };
      out.push(seriesPath(glyph, (v) => v, (v) => v));
    }
    out.push(text(cx + 31, 0, item.label, ' dy="0.32em"'));
    cx += spacing;
  }
  out.push("</g>");
  return out.join("\n");
}

export function decadeTicks(lo: number, hi: number): Tick[] {
  const first = Math.ceil(lo);
  const last = Math.floor(hi);
  if (last < first) {
    return [{ value: (lo + hi) / 2, label: `1e${Math.round((lo + hi) / 2)}` }];
  }
  const step = Math.max(1, Math.ceil((last - first + 1) / 5));
  const out: Tick[] = [];
  for (let k = first; k <= last; k += step) {
    out.push({ value: k, label: `1e${k}` });
  }
  return out;
}

export function svgDocument(width: number, height: number, metaJson: string,
                            body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"` +
      ` viewBox="0 0 ${width} ${height}" font-family="${FONT}" font-size="11">`,
    `<metadata id="figure-meta">${escapeText(metaJson)}</metadata>`,
    `<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
