/**
 * Minimal deterministic SVG plotting: fixed canvas sizes, no timestamps,
 * numbers printed with stable formatting so identical inputs give identical
 * bytes.
 */

export interface Scale {
  (value: number): number;
  ticks(): number[];
}

export function fmt(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 0.01 && abs < 10000) {
    return Number(value.toPrecision(4)).toString();
  }
  return value.toExponential(1).replace("e+", "e");
}

function px(value: number): string {
  return value.toFixed(2);
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi === lo) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const scale = ((value: number) => outLo + ((value - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  scale.ticks = () => {
    const span = hi - lo;
    const step = 10 ** Math.floor(Math.log10(span / 4));
    const mult = span / step > 20 ? 5 : span / step > 8 ? 2 : 1;
    const inc = step * mult;
    const first = Math.ceil(lo / inc) * inc;
    const out: number[] = [];
    for (let v = first; v <= hi + 1e-12 * span; v += inc) out.push(Math.abs(v) < inc * 1e-9 ? 0 : v);
    return out;
  };
  return scale;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (lo <= 0 || hi <= 0) throw new Error("log scale needs positive bounds");
  if (hi === lo) {
    hi = lo * 10;
    lo = lo / 10;
  }
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const scale = ((value: number) =>
    outLo + ((Math.log10(value) - llo) / (lhi - llo)) * (outHi - outLo)) as Scale;
  scale.ticks = () => {
    const out: number[] = [];
    const stride = Math.max(1, Math.round((Math.ceil(lhi) - Math.floor(llo)) / 8));
    for (let e = Math.ceil(llo); e <= Math.floor(lhi); e += stride) out.push(10 ** e);
    return out;
  };
  return scale;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export interface PanelSpec {
  x: number;
  y: number;
  width: number;
  height: number;
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
}

export class SvgBuilder {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  raw(piece: string): void {
    this.parts.push(piece);
  }

  text(x: number, y: number, content: string, attrs = ""): void {
    this.parts.push(`<text x="${px(x)}" y="${px(y)}" font-size="11" ${attrs}>${content}</text>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, attrs = ""): void {
    this.parts.push(
      `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" stroke="${stroke}" ${attrs}/>`,
    );
  }

  panel(spec: PanelSpec): void {
    const { x, y, width, height, xScale, yScale } = spec;
    this.parts.push(
      `<rect x="${px(x)}" y="${px(y)}" width="${px(width)}" height="${px(height)}" ` +
        `fill="none" stroke="#333" stroke-width="1"/>`,
    );
    this.text(x + width / 2 - 4 * spec.title.length / 2, y - 8, spec.title, 'font-size="13"');
    for (const tick of xScale.ticks()) {
      const tx = xScale(tick);
      if (tx < x - 0.5 || tx > x + width + 0.5) continue;
      this.line(tx, y + height, tx, y + height + 4, "#333");
      this.text(tx - 10, y + height + 16, fmt(tick));
    }
    for (const tick of yScale.ticks()) {
      const ty = yScale(tick);
      if (ty < y - 0.5 || ty > y + height + 0.5) continue;
      this.line(x - 4, ty, x, ty, "#333");
      this.text(x - 48, ty + 4, fmt(tick));
      this.line(x, ty, x + width, ty, "#eee");
    }
    this.text(x + width / 2 - 20, y + height + 32, spec.xLabel);
    this.parts.push(
      `<text x="${px(x - 52)}" y="${px(y + height / 2)}" font-size="11" ` +
        `transform="rotate(-90 ${px(x - 52)} ${px(y + height / 2)})">${spec.yLabel}</text>`,
    );
  }

  polyline(points: Array<[number, number]>, color: string, dash = ""): void {
    if (points.length === 0) return;
    const path = points.map(([a, b]) => `${px(a)},${px(b)}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.5"${dashAttr}/>`,
    );
  }

  dots(points: Array<[number, number]>, color: string, radius = 2.2): void {
    for (const [a, b] of points) {
      this.parts.push(`<circle cx="${px(a)}" cy="${px(b)}" r="${radius}" fill="${color}"/>`);
    }
  }

  legend(x: number, y: number, entries: Array<[string, string]>): void {
    entries.forEach(([label, color], i) => {
      const ly = y + i * 16;
      this.line(x, ly - 4, x + 22, ly - 4, color, 'stroke-width="2"');
      this.text(x + 28, ly, label);
    });
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}
