/**
 * Figures rendered from run logs: convergence curves and the per-iteration
 * surrogate residual measures against their acceptance threshold.
 */

import { writeFileSync } from "node:fs";
import type { RunLog } from "./csv.js";
import { PALETTE, PanelSpec, Scale, SvgBuilder, fmt, linearScale, logScale } from "./svg.js";

const PANEL_W = 320;
const PANEL_H = 240;
const MARGIN_L = 64;
const MARGIN_T = 40;
const MARGIN_B = 56;
const GAP = 72;

function extent(series: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const values of series) {
    for (const v of values) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  return [lo, hi];
}

function chooseYScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  // log axis when everything is positive and spans more than a decade and a half
  if (lo > 0 && hi / lo > 30) return logScale(lo, hi, outLo, outHi);
  return linearScale(lo, hi, outLo, outHi);
}

/** Two-panel convergence figure (objective, constraint), one curve per run. */
export function plotConvergence(logs: RunLog[], outPath: string): void {
  if (logs.length === 0) throw new Error("need at least one log to plot");
  const width = MARGIN_L + PANEL_W + GAP + PANEL_W + 24;
  const legendRows = logs.length;
  const height = MARGIN_T + PANEL_H + MARGIN_B + 16 * legendRows;
  const svg = new SvgBuilder(width, height);

  const [itLo, itHi] = extent(logs.map((l) => l.iter));
  const panels: Array<[string, (l: RunLog) => number[]]> = [
    ["objective", (l) => l.objective],
    ["constraint", (l) => l.constraint],
  ];
  panels.forEach(([title, pick], p) => {
    const x0 = MARGIN_L + p * (PANEL_W + GAP);
    const [yLo, yHi] = extent(logs.map(pick));
    const xScale = linearScale(itLo, itHi, x0, x0 + PANEL_W);
    const yScale = chooseYScale(yLo, yHi, MARGIN_T + PANEL_H, MARGIN_T);
    const spec: PanelSpec = {
      x: x0,
      y: MARGIN_T,
      width: PANEL_W,
      height: PANEL_H,
      title,
      xLabel: "iteration",
      yLabel: title,
      xScale,
      yScale,
    };
    svg.panel(spec);
    logs.forEach((log, i) => {
      const values = pick(log);
      const points = log.iter.map(
        (it, k) => [xScale(it), yScale(values[k])] as [number, number],
      );
      svg.polyline(points, PALETTE[i % PALETTE.length]);
    });
  });
  svg.legend(
    MARGIN_L,
    MARGIN_T + PANEL_H + 48,
    logs.map((log, i) => [log.label, PALETTE[i % PALETTE.length]]),
  );
  writeFileSync(outPath, svg.render());
}

/**
 * Log-scale scatter of the surrogate residual measures for both equations
 * with a horizontal threshold line. Returns false (and writes nothing) when
 * the log contains no surrogate attempts at all.
 */
export function plotMorMeasures(log: RunLog, tauMor: number, outPath: string): boolean {
  const fwd: Array<[number, number]> = [];
  const adj: Array<[number, number]> = [];
  log.iter.forEach((it, k) => {
    const f = log.wFwd[k];
    const a = log.wAdj[k];
    if (f !== null && f > 0) fwd.push([it, f]);
    if (a !== null && a > 0) adj.push([it, a]);
  });
  if (fwd.length === 0 && adj.length === 0) {
    return false;
  }

  const width = MARGIN_L + 2 * PANEL_W + 24;
  const height = MARGIN_T + PANEL_H + MARGIN_B + 32;
  const svg = new SvgBuilder(width, height);
  const values = [...fwd.map(([, v]) => v), ...adj.map(([, v]) => v), tauMor];
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const [itLo, itHi] = extent([log.iter]);
  const xScale = linearScale(itLo, itHi, MARGIN_L, MARGIN_L + 2 * PANEL_W);
  const yScale = logScale(lo / 2, hi * 2, MARGIN_T + PANEL_H, MARGIN_T);
  svg.panel({
    x: MARGIN_L,
    y: MARGIN_T,
    width: 2 * PANEL_W,
    height: PANEL_H,
    title: `surrogate residual measures (${log.label})`,
    xLabel: "iteration",
    yLabel: "measure",
    xScale,
    yScale,
  });
  svg.dots(fwd.map(([it, v]) => [xScale(it), yScale(v)]), PALETTE[0]);
  svg.dots(adj.map(([it, v]) => [xScale(it), yScale(v)]), PALETTE[1]);
  const tauY = yScale(tauMor);
  svg.line(MARGIN_L, tauY, MARGIN_L + 2 * PANEL_W, tauY, "#2ca02c", 'stroke-dasharray="6,4" stroke-width="1.5"');
  svg.text(MARGIN_L + 2 * PANEL_W - 90, tauY - 6, `threshold ${fmt(tauMor)}`, 'fill="#2ca02c"');
  svg.legend(MARGIN_L, MARGIN_T + PANEL_H + 48, [
    ["forward", PALETTE[0]],
    ["adjoint", PALETTE[1]],
  ]);
  writeFileSync(outPath, svg.render());
  return true;
}
