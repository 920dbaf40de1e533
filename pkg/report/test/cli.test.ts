import { existsSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, describe, expect, it, vi } from "vitest";
import { main } from "../src/cli.js";
import { benchmarkLikeCsv, syntheticCsv } from "./helpers.js";

function writeLogs(dir: string): [string, string] {
  const a = join(dir, "one-shot.csv");
  const b = join(dir, "surrogate.csv");
  writeFileSync(a, benchmarkLikeCsv(25, 347.14));
  writeFileSync(b, benchmarkLikeCsv(25, 226.48));
  return [a, b];
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("cli", () => {
  it("summary prints the comparison table with the 1.53 speedup", () => {
    const dir = mkdtempSync(join(tmpdir(), "report-cli-"));
    const [a, b] = writeLogs(dir);
    const chunks: string[] = [];
    vi.spyOn(process.stdout, "write").mockImplementation((chunk) => {
      chunks.push(String(chunk));
      return true;
    });
    expect(main(["summary", "--logs", a, b])).toBe(0);
    const out = chunks.join("");
    expect(out).toContain("one-shot");
    expect(out).toContain("surrogate");
    expect(out).toContain("1.53");
  });

  it("plot writes a convergence image", () => {
    const dir = mkdtempSync(join(tmpdir(), "report-cli-"));
    const [a, b] = writeLogs(dir);
    const out = join(dir, "figs");
    expect(main(["plot", "--logs", a, b, "--out", out])).toBe(0);
    expect(existsSync(join(out, "convergence.svg"))).toBe(true);
  });

  it("plot-measures writes one image per log with surrogate data", () => {
    const dir = mkdtempSync(join(tmpdir(), "report-cli-"));
    const [a] = writeLogs(dir);
    const out = join(dir, "figs");
    expect(main(["plot-measures", "--logs", a, "--tau-mor", "1e-6", "--out", out])).toBe(0);
    expect(existsSync(join(out, "measures_one-shot.svg"))).toBe(true);
  });

  it("plot-measures explains when a pure run has nothing to plot", () => {
    const dir = mkdtempSync(join(tmpdir(), "report-cli-"));
    const pure = join(dir, "pure.csv");
    writeFileSync(
      pure,
      syntheticCsv([
        { iter: 1, objective: 2, constraint: 0 },
        { iter: 2, objective: 1, constraint: 0 },
      ]),
    );
    const logSpy = vi.spyOn(console, "log").mockImplementation(() => {});
    const out = join(dir, "figs");
    expect(main(["plot-measures", "--logs", pure, "--tau-mor", "1e-6", "--out", out])).toBe(0);
    expect(existsSync(join(out, "measures_pure.svg"))).toBe(false);
    expect(logSpy.mock.calls.flat().join(" ")).toMatch(/no surrogate measures/);
  });

  it("custom labels override file basenames", () => {
    const dir = mkdtempSync(join(tmpdir(), "report-cli-"));
    const [a, b] = writeLogs(dir);
    const chunks: string[] = [];
    vi.spyOn(process.stdout, "write").mockImplementation((chunk) => {
      chunks.push(String(chunk));
      return true;
    });
    expect(main(["summary", "--logs", a, b, "--labels", "MGCG_1", "MOR_2_MGCG_1"])).toBe(0);
    expect(chunks.join("")).toContain("MOR_2_MGCG_1");
  });

  it("reports parse failures with a nonzero exit code", () => {
    const dir = mkdtempSync(join(tmpdir(), "report-cli-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "iter,objective\n1,2\n");
    const errSpy = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main(["summary", "--logs", bad])).toBe(1);
    expect(errSpy.mock.calls.flat().join(" ")).toMatch(/missing required columns/);
  });

  it("rejects unknown flags and missing --logs", () => {
    const errSpy = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main(["summary", "--bogus"])).toBe(2);
    expect(main(["plot"])).toBe(2);
    expect(errSpy).toHaveBeenCalled();
  });
});
