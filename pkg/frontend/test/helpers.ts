/** Synthetic schema-exact CSV fixtures for the renderer tests. */
import { mkdirSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "qbeat-figures-"));
}

export const PARAM_META: Record<string, string | number> = {
  gamma22: 1, gamma33: 1, gamma23: 1, gamma32: 1,
  omega23: 50, omega21: 10000, velocity: 1,
  phi2_effective: 0, phi3_effective: 0,
};

export function artifactCsv(meta: Record<string, string | number>,
                            header: string[],
                            rows: (string | number)[][]): string {
  const lines = Object.entries(meta).map(([k, v]) => `# ${k}=${v}`);
  lines.push(header.join(","));
  for (const row of rows) {
    lines.push(row.join(","));
  }
  return lines.join("\n") + "\n";
}

const AMPLITUDE_HEADER = ["t", "re_cA2", "im_cA2", "re_cA3", "im_cA3",
  "re_cB2", "im_cB2", "re_cB3", "im_cB3",
  "pop2A", "pop3A", "pop2B", "pop3B", "provenance"];

function times(): number[] {
  return Array.from({ length: 21 }, (_, i) => i * 0.1);
}

export function writeAmplitudes(dir: string, scenario: string,
                                distance: number): void {
  const rows = times().map((t) => {
    const pop2 = 0.5 * Math.exp(-t);
    const pop3 = 1e-4 * Math.exp(-t) * Math.sin(25 * t) ** 2;
    return [t, Math.sqrt(pop2), 0, Math.sqrt(pop3), 0, 0, 0, 0, 0,
            pop2, pop3, pop2, pop3, "modes"];
  });
  mkdirSync(join(dir, scenario), { recursive: true });
  writeFileSync(join(dir, scenario, "amplitudes.csv"),
    artifactCsv({ ...PARAM_META, distance, scenario }, AMPLITUDE_HEADER, rows));
}

export function writeIntensity(dir: string, scenario: string,
                               distance: number): void {
  const rows = times().map((t) =>
    [t, 0.5 * distance + 1e-6, Math.exp(-2 * t), "modes"]);
  mkdirSync(join(dir, scenario), { recursive: true });
  writeFileSync(join(dir, scenario, "intensity.csv"),
    artifactCsv({ ...PARAM_META, distance, scenario, normalization: "gsq" },
      ["t", "x", "intensity_normalized", "provenance"], rows));
}

export function writeScenario(dir: string, scenario: string,
                              distance: number): void {
  writeAmplitudes(dir, scenario, distance);
  writeIntensity(dir, scenario, distance);
}

const POLE_HEADER = ["n", "re_s", "im_s", "re_alpha", "im_alpha",
  "re_beta", "im_beta", "re_alpha_bar", "im_alpha_bar",
  "re_beta_bar", "im_beta_bar"];

export function writePoles(dir: string, scenario: string, sector: string,
                           distance: number, modes = 21): void {
  const rows = Array.from({ length: modes }, (_, n) => {
    const im = 50 * (n - (modes - 1) / 2);
    const weight = Math.exp(-Math.abs(im) / 100);
    return [n, -1 - 0.01 * n, im, weight, 0, 0.1 * weight, 0,
            weight, 0, 0.1 * weight, 0];
  });
  mkdirSync(join(dir, scenario), { recursive: true });
  writeFileSync(join(dir, scenario, "poles.csv"),
    artifactCsv({ ...PARAM_META, distance, sector, scenario,
                  window_re_max: 200, window_im_max: 10000 },
      POLE_HEADER, rows));
}

/** Complete three-role set at the given distances, enough for a figure. */
export function writeDynamicsSet(dir: string, distances: number[]): void {
  for (const d of distances) {
    for (const role of ["sym", "antisym", "single"]) {
      writeScenario(dir, `${role}_d${d}x`, d);
    }
  }
}
