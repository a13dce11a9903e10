/**
 * Reading of the simulator's CSV artifacts.
 *
 * Every file starts with '# key=value' comment lines carrying the resolved
 * run parameters, followed by one header row and the data rows.  Floats are
 * written upstream with 17 significant digits, so Number() recovers them
 * exactly.
 */
import { readFileSync } from "node:fs";
import { csvParseRows } from "d3-dsv";

export interface ArtifactTable {
  path: string;
  meta: Record<string, string>;
  header: string[];
  rows: string[][];
}

/** A figure cannot be assembled because input CSVs are absent. */
export class MissingSeries extends Error {
  readonly paths: string[];

  constructor(paths: string[]) {
    super("missing input series:\n  " + paths.join("\n  "));
    this.name = "MissingSeries";
    this.paths = paths;
  }
}

export function readArtifactCsv(path: string): ArtifactTable {
  const text = readFileSync(path, "utf8");
  const meta: Record<string, string> = {};
  const dataLines: string[] = [];
  for (const line of text.split("\n")) {
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const eq = body.indexOf("=");
      if (eq >= 0) meta[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
    } else if (line.length > 0) {
      dataLines.push(line);
    }
  }
  if (dataLines.length === 0) {
    throw new Error(`${path}: no header row`);
  }
  const parsed = csvParseRows(dataLines.join("\n"));
  return { path, meta, header: parsed[0], rows: parsed.slice(1) };
}

export function numberColumn(table: ArtifactTable, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`${table.path}: missing column ${name}`);
  }
  return table.rows.map((row) => Number(row[idx]));
}

export function metaNumber(table: ArtifactTable, key: string): number {
  const raw = table.meta[key];
  const value = Number(raw);
  if (raw === undefined || raw === "" || Number.isNaN(value)) {
    throw new Error(`${table.path}: missing numeric header field ${key}`);
  }
  return value;
}
