/**
 * Pole figure: one row of four panels per interatomic distance showing the
 * certified mode ladder of both symmetry sectors.  Panels give the decay
 * rate Re s and frequency Im s against mode index, then the shifted residue
 * magnitudes |alpha_bar| (level-2 weight) and |beta_bar| (level-3 weight)
 * against mode frequency on decade axes.  Symmetric modes are red crosses,
 * anti-symmetric modes green circles; a file with only one sector still
 * renders, with a warning.
 */
import { readdirSync, statSync } from "node:fs";
import { join } from "node:path";

import { ArtifactTable, MissingSeries, metaNumber, numberColumn,
         readArtifactCsv } from "./csv.js";
import { GlyphSeries, PanelSpec, STYLE, decadeTicks, renderLegend,
         renderPanel, svgDocument, trimNumber } from "./svg.js";
import { FigureResult } from "./dynamics.js";

const SECTORS = ["sym", "antisym"] as const;
export type Sector = (typeof SECTORS)[number];

const CELL_W = 285;
const CELL_H = 230;
const LEGEND_H = 26;
const PAD = 12;

/** Ratio of residue magnitudes kept on the decade axes; smaller values are
 * numerically zero at double precision and are dropped from log panels. */
const LOG_FLOOR = 1e-16;

export interface PoleRow {
  distanceKey: string;
  distance: number;
  omega23: number;
  velocity: number;
  bySector: Partial<Record<Sector, ArtifactTable>>;
}

export interface PoleDiscovery {
  rows: PoleRow[];
  warnings: string[];
  missing: string[];
}

function poleFiles(dir: string): string[] {
  const isPoleCsv = (name: string) => /^poles(_.+)?\.csv$/.test(name);
  const out: string[] = [];
  const entries = readdirSync(dir, { withFileTypes: true })
    .map((e) => e.name)
    .sort();
  for (const name of entries) {
    const full = join(dir, name);
    const st = statSync(full);
    if (st.isFile() && isPoleCsv(name)) {
      out.push(full);
    } else if (st.isDirectory()) {
      for (const inner of readdirSync(full).sort()) {
        if (isPoleCsv(inner)) out.push(join(full, inner));
      }
    }
  }
  return out;
}

/** Collect pole CSVs (in dir or one level down) into per-distance rows. */
export function discoverPoles(dir: string): PoleDiscovery {
  const warnings: string[] = [];
  const missing: string[] = [];
  const byDistance = new Map<string, PoleRow>();

  const files = poleFiles(dir);
  if (files.length === 0) {
    missing.push(`${dir}: no poles CSV found`);
  }
  for (const path of files) {
    const table = readArtifactCsv(path);
    const sector = table.meta["sector"];
    if (sector !== "sym" && sector !== "antisym") {
      warnings.push(`${path}: sector ${sector ?? "(absent)"} is not sym/antisym, skipped`);
      continue;
    }
    const key = table.meta["distance"];
    let row = byDistance.get(key);
    if (!row) {
      row = { distanceKey: key, distance: metaNumber(table, "distance"),
              omega23: metaNumber(table, "omega23"),
              velocity: metaNumber(table, "velocity"), bySector: {} };
      byDistance.set(key, row);
    }
    if (row.bySector[sector]) {
      warnings.push(`${path}: duplicate ${sector} sector at distance ${key}, ` +
        `keeping ${row.bySector[sector].path}`);
      continue;
    }
    row.bySector[sector] = table;
  }

  const rows = [...byDistance.values()].sort((a, b) => a.distance - b.distance);
  for (const row of rows) {
    for (const sector of SECTORS) {
      if (!row.bySector[sector]) {
        warnings.push(`only the ${row.bySector.sym ? "sym" : "antisym"} sector ` +
          `at distance ${row.distanceKey}; rendering one sector`);
        break;
      }
    }
  }
  return { rows, warnings, missing };
}

interface SectorData {
  sector: Sector;
  n: number[];
  reS: number[];
  imS: number[];
  alphaBar: number[];
  betaBar: number[];
}

function sectorData(sector: Sector, table: ArtifactTable): SectorData {
  const mag = (re: number[], im: number[]) =>
    re.map((v, i) => Math.hypot(v, im[i]));
  return {
    sector,
    n: numberColumn(table, "n"),
    reS: numberColumn(table, "re_s"),
    imS: numberColumn(table, "im_s"),
    alphaBar: mag(numberColumn(table, "re_alpha_bar"),
                  numberColumn(table, "im_alpha_bar")),
    betaBar: mag(numberColumn(table, "re_beta_bar"),
                 numberColumn(table, "im_beta_bar")),
  };
}

function glyph(sector: Sector, points: [number, number][]): GlyphSeries {
  return {
    kind: sector === "sym" ? "x" : "circle",
    cls: `glyph-${sector}`,
    stroke: sector === "sym" ? STYLE.poleSym : STYLE.poleAntisym,
    points,
  };
}

function padDomain(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = 0.05 * (hi - lo);
  return [lo - pad, hi + pad];
}

/** Scatter panel of y(x) per sector; log10 transform when decades is set. */
function polePanel(tag: string, title: string | undefined, xLabel: string,
                   yLabel: string, sectors: SectorData[],
                   pick: (d: SectorData) => { x: number[]; y: number[] },
                   decades: boolean): PanelSpec {
  let floor = 0;
  if (decades) {
    const grandMax = Math.max(...sectors.flatMap((d) => pick(d).y));
    floor = grandMax * LOG_FLOOR;
  }
  const series: GlyphSeries[] = [];
  const xsAll: number[] = [];
  const ysAll: number[] = [];
  // circles first so the crosses stay visible on top
  const drawOrder = [...sectors].sort((a) => (a.sector === "antisym" ? -1 : 1));
  for (const data of drawOrder) {
    const { x, y } = pick(data);
    const points: [number, number][] = [];
    for (let i = 0; i < x.length; i++) {
      if (decades) {
        if (!(y[i] > floor)) continue;
        points.push([x[i], Math.log10(y[i])]);
      } else {
        points.push([x[i], y[i]]);
      }
    }
    for (const [px, py] of points) {
      xsAll.push(px);
      ysAll.push(py);
    }
    series.push(glyph(data.sector, points));
  }
  const yDomain = padDomain(ysAll);
  return {
    tag, title, xLabel, yLabel,
    xDomain: padDomain(xsAll),
    yDomain,
    yTicks: decades ? decadeTicks(yDomain[0], yDomain[1]) : undefined,
    series,
  };
}

export function renderPoleFigure(dir: string): FigureResult {
  const { rows, warnings, missing } = discoverPoles(dir);
  if (missing.length > 0) {
    throw new MissingSeries(missing);
  }

  const body: string[] = [];
  body.push(renderLegend([
    { label: "symmetric", kind: "x", stroke: STYLE.poleSym },
    { label: "anti-symmetric", kind: "circle", stroke: STYLE.poleAntisym },
  ], PAD + 50, 16, 140));

  for (let r = 0; r < rows.length; r++) {
    const row = rows[r];
    const sectors = SECTORS.filter((s) => row.bySector[s])
      .map((s) => sectorData(s, row.bySector[s]!));
    const lambdaBeat = (2 * Math.PI * row.velocity) / Math.abs(row.omega23);
    const title = `d = ${trimNumber(row.distance / lambdaBeat)} λ_beat`;
    const tag = (c: number) => `(${String.fromCharCode(97 + 4 * r + c)})`;
    const specs = [
      polePanel(tag(0), title, "mode index", "Re s", sectors,
        (d) => ({ x: d.n, y: d.reS }), false),
      polePanel(tag(1), undefined, "mode index", "Im s", sectors,
        (d) => ({ x: d.n, y: d.imS }), false),
      polePanel(tag(2), undefined, "Im s", "|alpha_bar|", sectors,
        (d) => ({ x: d.imS, y: d.alphaBar }), true),
      polePanel(tag(3), undefined, "Im s", "|beta_bar|", sectors,
        (d) => ({ x: d.imS, y: d.betaBar }), true),
    ];
    for (let c = 0; c < specs.length; c++) {
      body.push(renderPanel(specs[c], PAD + c * CELL_W, LEGEND_H + r * CELL_H,
        CELL_W, CELL_H));
    }
  }

  const meta = {
    kind: "poles",
    rows: rows.map((row) => ({
      distance: row.distance,
      distance_over_lambda_beat: Number(
        (row.distance * Math.abs(row.omega23) /
         (2 * Math.PI * row.velocity)).toPrecision(10)),
      sectors: SECTORS.filter((s) => row.bySector[s]),
      mode_counts: Object.fromEntries(
        SECTORS.filter((s) => row.bySector[s])
          .map((s) => [s, row.bySector[s]!.rows.length])),
    })),
  };
  const width = 2 * PAD + 4 * CELL_W;
  const height = LEGEND_H + rows.length * CELL_H + 8;
  return { svg: svgDocument(width, height, JSON.stringify(meta), body), warnings };
}
