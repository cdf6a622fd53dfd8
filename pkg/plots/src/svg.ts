/**
 * Minimal hand-rolled SVG line charts (no runtime dependencies). Output is
 * deterministic for identical inputs: no timestamps or random ids.
 */

export interface Series {
  label: string;
  color: string;
  points: Array<[number, number]>; // already in axis coordinates
  dash?: string;
}

export interface Annotation {
  text: string;
  color?: string;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logX?: boolean;
  logY?: boolean;
  width?: number;
  height?: number;
  annotations?: Annotation[];
}

const MARGIN = { left: 64, right: 24, top: 40, bottom: 44 };

function ticks(lo: number, hi: number, log: boolean): number[] {
  if (log) {
    const out: number[] = [];
    const eLo = Math.ceil(Math.log10(lo) - 1e-9);
    const eHi = Math.floor(Math.log10(hi) + 1e-9);
    for (let e = eLo; e <= eHi; e++) out.push(10 ** e);
    if (out.length === 0) out.push(lo, hi);
    return out;
  }
  const span = hi - lo;
  const step = 10 ** Math.floor(Math.log10(span / 4));
  const mult = span / step > 8 ? 2 : 1;
  const out: number[] = [];
  for (let v = Math.ceil(lo / (step * mult)) * step * mult; v <= hi + 1e-12; v += step * mult) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) return String(Number(v.toPrecision(4)));
  return v.toExponential(0);
}

export function lineChart(series: Series[], opts: ChartOptions): string {
  const W = opts.width ?? 640;
  const H = opts.height ?? 420;
  const iw = W - MARGIN.left - MARGIN.right;
  const ih = H - MARGIN.top - MARGIN.bottom;

  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  const tx = (v: number) => (opts.logX ? Math.log10(v) : v);
  const ty = (v: number) => (opts.logY ? Math.log10(v) : v);
  const xLo = Math.min(...xs), xHi = Math.max(...xs);
  const yLo = Math.min(...ys), yHi = Math.max(...ys);
  const sx = (v: number) =>
    MARGIN.left + ((tx(v) - tx(xLo)) / (tx(xHi) - tx(xLo) || 1)) * iw;
  const sy = (v: number) =>
    MARGIN.top + ih - ((ty(v) - ty(yLo)) / (ty(yHi) - ty(yLo) || 1)) * ih;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
    `<rect width="${W}" height="${H}" fill="#ffffff"/>`,
    `<text x="${W / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14" font-weight="bold">${opts.title}</text>`,
  );

  for (const v of ticks(xLo, xHi, Boolean(opts.logX))) {
    if (v < xLo || v > xHi) continue;
    const x = sx(v);
    parts.push(
      `<line x1="${x.toFixed(1)}" y1="${MARGIN.top}" x2="${x.toFixed(1)}" y2="${MARGIN.top + ih}" stroke="#dddddd"/>`,
      `<text x="${x.toFixed(1)}" y="${MARGIN.top + ih + 16}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(v)}</text>`,
    );
  }
  for (const v of ticks(yLo, yHi, Boolean(opts.logY))) {
    if (v < yLo || v > yHi) continue;
    const y = sy(v);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y.toFixed(1)}" x2="${MARGIN.left + iw}" y2="${y.toFixed(1)}" stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 6}" y="${(y + 4).toFixed(1)}" text-anchor="end" font-family="sans-serif" font-size="11">${fmt(v)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${iw}" height="${ih}" fill="none" stroke="#444444"/>`,
    `<text x="${MARGIN.left + iw / 2}" y="${H - 8}" text-anchor="middle" font-family="sans-serif" font-size="12">${opts.xLabel}</text>`,
    `<text x="16" y="${MARGIN.top + ih / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 ${MARGIN.top + ih / 2})">${opts.yLabel}</text>`,
  );

  series.forEach((s, i) => {
    const pts = s.points
      .map((p) => `${sx(p[0]).toFixed(2)},${sy(p[1]).toFixed(2)}`)
      .join(" ");
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.8"${dash}/>`,
      `<text x="${MARGIN.left + iw - 6}" y="${MARGIN.top + 16 + 16 * i}" text-anchor="end" font-family="sans-serif" font-size="12" fill="${s.color}">${s.label}</text>`,
    );
  });

  (opts.annotations ?? []).forEach((a, i) => {
    parts.push(
      `<text x="${MARGIN.left + 8}" y="${MARGIN.top + 16 + 16 * i}" font-family="sans-serif" font-size="12" fill="${a.color ?? "#222222"}">${a.text}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
