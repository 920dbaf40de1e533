/**
 * Side-by-side strategy comparison table: final objective, total wall time,
 * speedup relative to the first run, and surrogate reduction counts.
 */

import type { RunLog } from "./csv.js";

export interface RunSummary {
  label: string;
  finalObjective: number;
  wallTime: number;
  speedup: number;
  forwardReductions: number;
  adjointReductions: number;
}

export function summarizeRuns(logs: RunLog[]): RunSummary[] {
  if (logs.length === 0) throw new Error("need at least one log to summarize");
  const reference = logs[0].walltimeS[logs[0].walltimeS.length - 1];
  return logs.map((log) => {
    const wallTime = log.walltimeS[log.walltimeS.length - 1];
    return {
      label: log.label,
      finalObjective: log.objective[log.objective.length - 1],
      wallTime,
      speedup: reference / wallTime,
      forwardReductions: log.kindFwd.filter((k) => k === "mor").length,
      adjointReductions: log.kindAdj.filter((k) => k === "mor").length,
    };
  });
}

function pad(value: string, width: number): string {
  return value.length >= width ? value : " ".repeat(width - value.length) + value;
}

export function formatSummaryTable(rows: RunSummary[]): string {
  const labelWidth = Math.max(8, ...rows.map((r) => r.label.length));
  const header =
    rows[0] === undefined
      ? ""
      : `${"run".padEnd(labelWidth)} ${pad("objective", 14)} ${pad("walltime [s]", 13)} ` +
        `${pad("speedup", 8)} ${pad("fwd red", 8)} ${pad("adj red", 8)}`;
  const lines = [header];
  for (const r of rows) {
    lines.push(
      `${r.label.padEnd(labelWidth)} ${pad(r.finalObjective.toFixed(2), 14)} ` +
        `${pad(r.wallTime.toFixed(2), 13)} ${pad(r.speedup.toFixed(2), 8)} ` +
        `${pad(String(r.forwardReductions), 8)} ${pad(String(r.adjointReductions), 8)}`,
    );
  }
  return lines.join("\n") + "\n";
}
