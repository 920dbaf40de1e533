import { REQUIRED_COLUMNS } from "../src/csv.js";

export interface SyntheticRow {
  iter: number;
  objective: number;
  constraint: number;
  wFwd?: number | null;
  wAdj?: number | null;
  kindFwd?: string;
  kindAdj?: string;
  cgFwd?: number;
  cgAdj?: number;
  matvecs?: number;
  basisFwd?: number;
  basisAdj?: number;
  walltimeS?: number;
}

/** Build CSV text in the run-log format from sparse row descriptions. */
export function syntheticCsv(rows: SyntheticRow[]): string {
  const lines = [REQUIRED_COLUMNS.join(",")];
  for (const row of rows) {
    lines.push(
      [
        row.iter,
        row.objective,
        row.constraint,
        row.wFwd == null ? "" : row.wFwd,
        row.wAdj == null ? "" : row.wAdj,
        row.kindFwd ?? "fom_full",
        row.kindAdj ?? "fom_full",
        row.cgFwd ?? 10,
        row.cgAdj ?? 10,
        row.matvecs ?? 42,
        row.basisFwd ?? 1,
        row.basisAdj ?? 1,
        row.walltimeS ?? row.iter * 0.5,
      ].join(","),
    );
  }
  return lines.join("\n") + "\n";
}

/** A plausible surrogate-accelerated run: measures shrink, kinds flip to mor. */
export function benchmarkLikeCsv(iterations: number, finalWalltime: number): string {
  const rows: SyntheticRow[] = [];
  for (let it = 1; it <= iterations; it++) {
    const useMor = it > 5 && it % 3 !== 0;
    rows.push({
      iter: it,
      objective: 1e7 / it,
      constraint: 0.01 / it - 1e-4,
      wFwd: it === 1 ? null : 1e-7 * (1 + (it % 7)),
      wAdj: it === 1 ? null : 2e-7 * (1 + (it % 5)),
      kindFwd: useMor ? "mor" : "fom_full",
      kindAdj: useMor && it % 2 === 0 ? "mor" : "fom_full",
      cgFwd: useMor ? 0 : 25,
      cgAdj: useMor && it % 2 === 0 ? 0 : 25,
      matvecs: useMor ? 4 : 60,
      basisFwd: Math.min(it, 10),
      basisAdj: Math.min(it, 10),
      walltimeS: (finalWalltime * it) / iterations,
    });
  }
  return syntheticCsv(rows);
}
