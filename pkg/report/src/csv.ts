/**
 * Parsing of heatopt iteration logs.
 *
 * One CSV per run with a fixed header; `w_fwd`/`w_adj` cells are empty for
 * iterations without a surrogate attempt and parse to null.
 */

export const REQUIRED_COLUMNS = [
  "iter",
  "objective",
  "constraint",
  "w_fwd",
  "w_adj",
  "kind_fwd",
  "kind_adj",
  "cg_fwd",
  "cg_adj",
  "matvecs",
  "basis_fwd",
  "basis_adj",
  "walltime_s",
] as const;

export interface RunLog {
  label: string;
  iter: number[];
  objective: number[];
  constraint: number[];
  wFwd: (number | null)[];
  wAdj: (number | null)[];
  kindFwd: string[];
  kindAdj: string[];
  cgFwd: number[];
  cgAdj: number[];
  matvecs: number[];
  basisFwd: number[];
  basisAdj: number[];
  walltimeS: number[];
}

function numberAt(cell: string, column: string, line: number): number {
  const value = Number(cell);
  if (cell.trim() === "" || !Number.isFinite(value)) {
    throw new Error(`line ${line}: column ${column} has non-numeric value ${JSON.stringify(cell)}`);
  }
  return value;
}

function optionalNumberAt(cell: string, column: string, line: number): number | null {
  if (cell.trim() === "") return null;
  return numberAt(cell, column, line);
}

export function parseRunLog(text: string, label: string): RunLog {
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== "");
  if (lines.length === 0) {
    throw new Error(`${label}: empty log file`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const index = new Map<string, number>();
  header.forEach((name, i) => index.set(name, i));
  const missing = REQUIRED_COLUMNS.filter((c) => !index.has(c));
  if (missing.length > 0) {
    throw new Error(`${label}: missing required columns: ${missing.join(", ")}`);
  }
  if (lines.length < 2) {
    throw new Error(`${label}: log has a header but no data rows`);
  }

  const log: RunLog = {
    label,
    iter: [],
    objective: [],
    constraint: [],
    wFwd: [],
    wAdj: [],
    kindFwd: [],
    kindAdj: [],
    cgFwd: [],
    cgAdj: [],
    matvecs: [],
    basisFwd: [],
    basisAdj: [],
    walltimeS: [],
  };
  const col = (cells: string[], name: string) => cells[index.get(name)!] ?? "";

  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    const lineNo = i + 1;
    log.iter.push(numberAt(col(cells, "iter"), "iter", lineNo));
    log.objective.push(numberAt(col(cells, "objective"), "objective", lineNo));
    log.constraint.push(numberAt(col(cells, "constraint"), "constraint", lineNo));
    log.wFwd.push(optionalNumberAt(col(cells, "w_fwd"), "w_fwd", lineNo));
    log.wAdj.push(optionalNumberAt(col(cells, "w_adj"), "w_adj", lineNo));
    log.kindFwd.push(col(cells, "kind_fwd").trim());
    log.kindAdj.push(col(cells, "kind_adj").trim());
    log.cgFwd.push(numberAt(col(cells, "cg_fwd"), "cg_fwd", lineNo));
    log.cgAdj.push(numberAt(col(cells, "cg_adj"), "cg_adj", lineNo));
    log.matvecs.push(numberAt(col(cells, "matvecs"), "matvecs", lineNo));
    log.basisFwd.push(numberAt(col(cells, "basis_fwd"), "basis_fwd", lineNo));
    log.basisAdj.push(numberAt(col(cells, "basis_adj"), "basis_adj", lineNo));
    log.walltimeS.push(numberAt(col(cells, "walltime_s"), "walltime_s", lineNo));
  }
  return log;
}
