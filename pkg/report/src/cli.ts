#!/usr/bin/env node
/**
 * Report CLI over heatopt run logs.
 *
 *   heatopt-report summary --logs a.csv b.csv
 *   heatopt-report plot --logs a.csv b.csv --out dir
 *   heatopt-report plot-measures --logs a.csv --tau-mor 1e-6 --out dir
 *
 * Run labels default to the log file basenames; --labels overrides them.
 */

import { mkdirSync, readFileSync } from "node:fs";
import { basename, join } from "node:path";
import { parseRunLog, RunLog } from "./csv.js";
import { plotConvergence, plotMorMeasures } from "./plots.js";
import { formatSummaryTable, summarizeRuns } from "./summary.js";

interface Args {
  command: string;
  logs: string[];
  labels: string[];
  out: string;
  tauMor: number | null;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { command: "", logs: [], labels: [], out: ".", tauMor: null };
  if (argv.length === 0) throw new Error("usage: heatopt-report <summary|plot|plot-measures> ...");
  args.command = argv[0];
  let i = 1;
  const collect = (): string[] => {
    const values: string[] = [];
    while (i < argv.length && !argv[i].startsWith("--")) values.push(argv[i++]);
    return values;
  };
  while (i < argv.length) {
    const flag = argv[i++];
    switch (flag) {
      case "--logs":
        args.logs = collect();
        break;
      case "--labels":
        args.labels = collect();
        break;
      case "--out":
        args.out = argv[i++] ?? ".";
        break;
      case "--tau-mor":
        args.tauMor = Number(argv[i++]);
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (args.logs.length === 0) throw new Error("--logs requires at least one CSV path");
  if (args.labels.length > 0 && args.labels.length !== args.logs.length) {
    throw new Error("--labels must match --logs in count");
  }
  return args;
}

function loadLogs(args: Args): RunLog[] {
  return args.logs.map((path, i) => {
    const label = args.labels[i] ?? basename(path).replace(/\.csv$/, "");
    return parseRunLog(readFileSync(path, "utf8"), label);
  });
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const logs = loadLogs(args);
    switch (args.command) {
      case "summary": {
        process.stdout.write(formatSummaryTable(summarizeRuns(logs)));
        return 0;
      }
      case "plot": {
        mkdirSync(args.out, { recursive: true });
        const outPath = join(args.out, "convergence.svg");
        plotConvergence(logs, outPath);
        console.log(`wrote ${outPath}`);
        return 0;
      }
      case "plot-measures": {
        if (args.tauMor === null || !Number.isFinite(args.tauMor) || args.tauMor <= 0) {
          console.error("error: plot-measures requires a positive --tau-mor");
          return 2;
        }
        mkdirSync(args.out, { recursive: true });
        let wrote = 0;
        for (const log of logs) {
          const outPath = join(args.out, `measures_${log.label}.svg`);
          if (plotMorMeasures(log, args.tauMor, outPath)) {
            console.log(`wrote ${outPath}`);
            wrote += 1;
          } else {
            console.log(
              `${log.label}: no surrogate measures recorded (pure full-order run), nothing to plot`,
            );
          }
        }
        return wrote > 0 || logs.length > 0 ? 0 : 1;
      }
      default:
        console.error(`error: unknown command ${JSON.stringify(args.command)}`);
        return 2;
    }
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const isDirectRun = process.argv[1] !== undefined && import.meta.url.endsWith(basename(process.argv[1]));
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
