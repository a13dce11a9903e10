/**
 * Command-line front end.
 *
 * Subcommands: render-dynamics, render-poles; both take --in DIR (the
 * simulator's CSV output) and --out FILE (SVG to write).  Exit codes:
 * 0 success, 1 usage, 2 missing input series, 3 unreadable or malformed
 * input.  Inputs are never modified.
 */
import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import yargs from "yargs";

import { MissingSeries } from "./csv.js";
import { FigureResult, renderDynamicsFigure } from "./dynamics.js";
import { renderPoleFigure } from "./poles.js";

export const EXIT_OK = 0;
export const EXIT_USAGE = 1;
export const EXIT_MISSING = 2;
export const EXIT_ERROR = 3;

class UsageError extends Error {}

interface IoArgs {
  in: string;
  out: string;
}

function emit(render: (dir: string) => FigureResult, args: IoArgs): void {
  const { svg, warnings } = render(resolve(args.in));
  for (const w of warnings) {
    console.error(`warning: ${w}`);
  }
  const out = resolve(args.out);
  mkdirSync(dirname(out), { recursive: true });
  writeFileSync(out, svg);
  console.log(`wrote ${out}`);
}

const ioOptions = {
  in: {
    type: "string" as const,
    demandOption: true as const,
    describe: "directory holding the simulator's CSV output",
  },
  out: {
    type: "string" as const,
    demandOption: true as const,
    describe: "SVG file to write",
  },
};

export function run(argv: string[]): number {
  const parser = yargs(argv)
    .scriptName("qbeat-figures")
    .command("render-dynamics", "population and detector-intensity panels, one column per distance",
      ioOptions, (a) => emit(renderDynamicsFigure, a as unknown as IoArgs))
    .command("render-poles", "mode ladder and residue-magnitude panels, one row per distance",
      ioOptions, (a) => emit(renderPoleFigure, a as unknown as IoArgs))
    .demandCommand(1, "specify render-dynamics or render-poles")
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      if (err) throw err;
      throw new UsageError(msg);
    });
  try {
    parser.parseSync();
    return EXIT_OK;
  } catch (exc) {
    if (exc instanceof UsageError) {
      console.error(`error: ${exc.message}`);
      return EXIT_USAGE;
    }
    if (exc instanceof MissingSeries) {
      console.error(`error: ${exc.message}`);
      return EXIT_MISSING;
    }
    console.error(`error: ${(exc as Error).message}`);
    return EXIT_ERROR;
  }
}
