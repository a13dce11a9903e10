/**
 * Population and detector-intensity figure: one column of panels per
 * interatomic distance, rows showing level-2 population, level-3 population
 * (scaled by 10^3 so the beats are visible on a percent-level axis) and the
 * detector intensity, overlaying the symmetric, anti-symmetric and
 * isolated-atom runs.  A dash-dotted vertical line marks the transit time
 * d/v at which light from one atom first reaches the other.
 */
import { existsSync, readdirSync } from "node:fs";
import { basename, join } from "node:path";

import { ArtifactTable, MissingSeries, metaNumber, numberColumn,
         readArtifactCsv } from "./csv.js";
import { PanelSpec, PanelSeries, STYLE, renderLegend, renderPanel,
         svgDocument, trimNumber } from "./svg.js";

export const POP3_SCALE = 1000;

const ROLES = ["sym", "antisym", "single"] as const;
export type Role = (typeof ROLES)[number];

const CELL_W = 320;
const CELL_H = 230;
const LEGEND_H = 26;
const PAD = 12;

export interface ScenarioFiles {
  role: Role;
  scenario: string;
  amplitudes: ArtifactTable;
  intensity: ArtifactTable;
}

export interface DynamicsColumn {
  distanceKey: string;
  distance: number;
  velocity: number;
  transit: number;
  byRole: Partial<Record<Role, ScenarioFiles>>;
}

export interface DynamicsDiscovery {
  columns: DynamicsColumn[];
  warnings: string[];
  missing: string[];
}

function roleOf(scenario: string): Role | null {
  const head = scenario.split("_")[0];
  return (ROLES as readonly string[]).includes(head) ? (head as Role) : null;
}

/**
 * Scan dir for scenario subdirectories holding amplitudes.csv + intensity.csv
 * and group them into per-distance columns.  The run's role is taken from the
 * leading sym/antisym/single token of the scenario name recorded in the CSV
 * header (falling back to the directory name).
 */
export function discoverDynamics(dir: string): DynamicsDiscovery {
  const warnings: string[] = [];
  const missing: string[] = [];
  const byDistance = new Map<string, DynamicsColumn>();
  const subdirs = readdirSync(dir, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();

  let seenAny = false;
  for (const name of subdirs) {
    const ampPath = join(dir, name, "amplitudes.csv");
    if (!existsSync(ampPath)) continue;
    seenAny = true;
    const amplitudes = readArtifactCsv(ampPath);
    const scenario = amplitudes.meta["scenario"] ?? basename(name);
    const role = roleOf(scenario);
    if (role === null) {
      warnings.push(`${ampPath}: scenario ${scenario} is not sym/antisym/single, skipped`);
      continue;
    }
    const intPath = join(dir, name, "intensity.csv");
    if (!existsSync(intPath)) {
      missing.push(intPath);
      continue;
    }
    const distance = metaNumber(amplitudes, "distance");
    const velocity = metaNumber(amplitudes, "velocity");
    const key = amplitudes.meta["distance"];
    let column = byDistance.get(key);
    if (!column) {
      column = { distanceKey: key, distance, velocity,
                 transit: distance / velocity, byRole: {} };
      byDistance.set(key, column);
    }
    if (column.byRole[role]) {
      warnings.push(`${ampPath}: duplicate ${role} run at distance ${key}, ` +
        `keeping ${column.byRole[role].amplitudes.path}`);
      continue;
    }
    column.byRole[role] = {
      role, scenario, amplitudes, intensity: readArtifactCsv(intPath),
    };
  }

  if (!seenAny) {
    missing.push(`${dir}: no scenario subdirectory with amplitudes.csv`);
  }
  const columns = [...byDistance.values()].sort((a, b) => b.distance - a.distance);
  for (const column of columns) {
    for (const role of ROLES) {
      if (!column.byRole[role]) {
        missing.push(`${dir}: no ${role} run at distance ${column.distanceKey} ` +
          `(amplitudes.csv + intensity.csv)`);
      }
    }
  }
  return { columns, warnings, missing };
}

interface RowData {
  t: number[];
  y: number[];
}

function popRow(files: ScenarioFiles, level: 2 | 3): RowData {
  const a = numberColumn(files.amplitudes, `pop${level}A`);
  const b = numberColumn(files.amplitudes, `pop${level}B`);
  const scale = level === 3 ? POP3_SCALE : 1;
  return {
    t: numberColumn(files.amplitudes, "t"),
    y: a.map((v, i) => (v + b[i]) * scale),
  };
}

function intensityRow(files: ScenarioFiles): RowData {
  return {
    t: numberColumn(files.intensity, "t"),
    y: numberColumn(files.intensity, "intensity_normalized"),
  };
}

const ROW_LABELS = ["level-2 population", `level-3 population ×10³`,
                    "detector intensity"];

export interface FigureResult {
  svg: string;
  warnings: string[];
}

export function renderDynamicsFigure(dir: string): FigureResult {
  const { columns, warnings, missing } = discoverDynamics(dir);
  if (missing.length > 0) {
    throw new MissingSeries(missing);
  }

  // rows x columns of series, draw order single underneath, sym on top
  const rows: RowData[][][] = [[], [], []];
  for (const column of columns) {
    const order: Role[] = ["single", "antisym", "sym"];
    rows[0].push(order.map((r) => popRow(column.byRole[r]!, 2)));
    rows[1].push(order.map((r) => popRow(column.byRole[r]!, 3)));
    rows[2].push(order.map((r) => intensityRow(column.byRole[r]!)));
  }

  const tMax = Math.max(...rows.flat(2).map((d) => d.t[d.t.length - 1] ?? 0));
  const rowMax = rows.map((row) =>
    Math.max(...row.flat().map((d) => Math.max(...d.y))));

  const body: string[] = [];
  body.push(renderLegend([
    { label: "symmetric", kind: "line", ...STYLE.sym },
    { label: "anti-symmetric", kind: "line", ...STYLE.antisym },
    { label: "single atom", kind: "line", ...STYLE.single },
    { label: "t = d/v", kind: "line", ...STYLE.transit },
  ], PAD + 50, 16, 140));

  const order: Role[] = ["single", "antisym", "sym"];
  for (let r = 0; r < 3; r++) {
    for (let c = 0; c < columns.length; c++) {
      const column = columns[c];
      const series: PanelSeries[] = rows[r][c].map((data, i) => ({
        kind: "line",
        cls: `series-${order[i]}`,
        stroke: STYLE[order[i]].stroke,
        dash: STYLE[order[i]].dash,
        points: data.t.map((t, k) => [t, data.y[k]] as [number, number]),
      }));
      const ratio = lambdaBeatRatio(column);
      const spec: PanelSpec = {
        tag: `(${String.fromCharCode(97 + r * columns.length + c)})`,
        title: r === 0 && ratio !== null
          ? `d = ${trimNumber(ratio)} λ_beat` : undefined,
        xLabel: r === 2 ? "t" : undefined,
        yLabel: c === 0 ? ROW_LABELS[r] : undefined,
        xDomain: [0, tMax],
        yDomain: [0, 1.04 * (rowMax[r] || 1)],
        series,
        vlines: [{ x: column.transit, cls: "dv-marker", ...STYLE.transit }],
      };
      body.push(renderPanel(spec, PAD + c * CELL_W, LEGEND_H + r * CELL_H,
        CELL_W, CELL_H));
    }
  }

  const meta = {
    kind: "dynamics",
    pop3_scale: POP3_SCALE,
    columns: columns.map((column) => ({
      distance: column.distance,
      distance_over_lambda_beat: lambdaBeatRatio(column),
      transit_time: column.transit,
      scenarios: {
        sym: column.byRole.sym!.scenario,
        antisym: column.byRole.antisym!.scenario,
        single: column.byRole.single!.scenario,
      },
    })),
  };
  const width = 2 * PAD + columns.length * CELL_W;
  const height = LEGEND_H + 3 * CELL_H + 8;
  return { svg: svgDocument(width, height, JSON.stringify(meta), body), warnings };
}

/** d in beat wavelengths, from the omega23/velocity header fields. */
function lambdaBeatRatio(column: DynamicsColumn): number | null {
  const sym = column.byRole.sym ?? column.byRole.antisym ?? column.byRole.single;
  if (!sym) return null;
  const omega23 = Number(sym.amplitudes.meta["omega23"]);
  if (!Number.isFinite(omega23) || omega23 === 0) return null;
  const lambdaBeat = (2 * Math.PI * column.velocity) / Math.abs(omega23);
  return Number((column.distance / lambdaBeat).toPrecision(10));
}
