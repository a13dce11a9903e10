import { rmSync } from "node:fs";
import { afterEach, describe, expect, it } from "vitest";

import { MissingSeries } from "../src/csv.js";
import { renderPoleFigure } from "../src/poles.js";
import { tempDir, writePoles } from "./helpers.js";

const dirs: string[] = [];

function scratch(): string {
  const dir = tempDir();
  dirs.push(dir);
  return dir;
}

afterEach(() => {
  while (dirs.length > 0) {
    rmSync(dirs.pop()!, { recursive: true, force: true });
  }
});

function panelCount(svg: string): number {
  return (svg.match(/class="panel"/g) ?? []).length;
}

describe("renderPoleFigure", () => {
  it("renders four panels per distance with both sector glyphs", () => {
    const dir = scratch();
    writePoles(dir, "sym_da", "sym", 0.1);
    writePoles(dir, "antisym_da", "antisym", 0.1);
    const { svg, warnings } = renderPoleFigure(dir);
    expect(warnings).toEqual([]);
    expect(panelCount(svg)).toBe(4);
    expect(svg).toContain(">(d)<");
    expect(svg).toMatch(/class="glyph-sym"[^/]*stroke="#d62728"/);
    expect(svg).toMatch(/class="glyph-antisym"[^/]*stroke="#2ca02c"/);
    expect(svg).toContain("|alpha_bar|");
    expect(svg).toContain("|beta_bar|");
    expect(svg).not.toContain("NaN");
  });

  it("stacks distances as rows, smallest first", () => {
    const dir = scratch();
    for (const [scenario, d] of [["da", 0.1], ["db", 0.05]] as const) {
      writePoles(dir, `sym_${scenario}`, "sym", d);
      writePoles(dir, `antisym_${scenario}`, "antisym", d);
    }
    const { svg } = renderPoleFigure(dir);
    expect(panelCount(svg)).toBe(8);
    expect(svg).toContain(">(h)<");
    const meta = JSON.parse(/<metadata id="figure-meta">(.*)<\/metadata>/
      .exec(svg)![1]);
    expect(meta.rows.map((r: { distance: number }) => r.distance))
      .toEqual([0.05, 0.1]);
    expect(meta.rows[0].mode_counts).toEqual({ sym: 21, antisym: 21 });
  });

  it("renders a lone sector and warns", () => {
    const dir = scratch();
    writePoles(dir, "sym_da", "sym", 0.1);
    const { svg, warnings } = renderPoleFigure(dir);
    expect(panelCount(svg)).toBe(4);
    expect(warnings).toHaveLength(1);
    expect(warnings[0]).toMatch(/only the sym sector/);
    expect(svg).toContain('class="glyph-sym"');
    expect(svg).not.toContain('class="glyph-antisym"');
  });

  it("rejects a directory without pole tables", () => {
    const dir = scratch();
    expect(() => renderPoleFigure(dir)).toThrow(MissingSeries);
    expect(() => renderPoleFigure(dir)).toThrow(/no poles CSV/);
  });

  it("is deterministic", () => {
    const dir = scratch();
    writePoles(dir, "sym_da", "sym", 0.1);
    writePoles(dir, "antisym_da", "antisym", 0.1);
    expect(renderPoleFigure(dir).svg).toBe(renderPoleFigure(dir).svg);
  });
});
