/**
 * Inequality-ratio reporting: one max/median-vs-grid-size trend chart per
 * case plus a markdown table flagging grid-stable cases (max ratio moving
 * by less than 10% per refinement).
 */

import * as fs from "fs";
import * as path from "path";
import { parseRatioCsv, RatioRow } from "./csv.js";
import { lineChart, Series } from "./svg.js";

export interface CaseSummary {
  caseName: string;
  grids: number[];
  maxRatio: Map<number, number>;
  medianRatio: Map<number, number>;
  growth: number;
  gridStable: boolean;
}

export function summarizeCase(rows: RatioRow[]): CaseSummary {
  const caseName = rows[0].caseName;
  const grids = [...new Set(rows.map((r) => r.n))].sort((a, b) => a - b);
  const maxRatio = new Map<number, number>();
  const medianRatio = new Map<number, number>();
  for (const n of grids) {
    const ratios = rows.filter((r) => r.n === n).map((r) => r.ratio).sort((a, b) => a - b);
    maxRatio.set(n, ratios[ratios.length - 1]);
    medianRatio.set(n, ratios[Math.floor(ratios.length / 2)]);
  }
  let growth = 0;
  for (let i = 1; i < grids.length; i++) {
    const prev = maxRatio.get(grids[i - 1])!;
    const cur = maxRatio.get(grids[i])!;
    growth = Math.max(growth, (cur - prev) / prev);
  }
  return {
    caseName,
    grids,
    maxRatio,
    medianRatio,
    growth,
    gridStable: grids.length > 1 && growth < 0.1,
  };
}

export function renderRatioReport(caseCsvs: string[], outDir: string): {
  images: string[];
  markdown: string;
} {
  if (caseCsvs.length === 0) {
    throw new Error("no ratio CSVs supplied");
  }
  fs.mkdirSync(outDir, { recursive: true });
  const summaries: CaseSummary[] = [];
  const images: string[] = [];

  for (const file of caseCsvs) {
    const rows = parseRatioCsv(fs.readFileSync(file, "utf-8"));
    const s = summarizeCase(rows);
    summaries.push(s);
    const series: Series[] = [
      {
        label: "max ratio",
        color: "#d62728",
        points: s.grids.map((n) => [n, s.maxRatio.get(n)!]),
      },
      {
        label: "median ratio",
        color: "#1f77b4",
        points: s.grids.map((n) => [n, s.medianRatio.get(n)!]),
      },
    ];
    const svg = lineChart(series, {
      title: `${s.caseName}: ratio vs grid size`,
      xLabel: "n (points per axis)",
      yLabel: "LHS / RHS",
      logX: true,
      annotations: [
        { text: s.gridStable ? "grid-stable" : `growth ${(s.growth * 100).toFixed(1)}%` },
      ],
    });
    const out = path.join(outDir, `ratio_${s.caseName}.svg`);
    fs.writeFileSync(out, svg);
    images.push(out);
  }

  const lines = [
    "# Inequality ratio summary",
    "",
    "| case | " + summaries[0].grids.map((n) => `max @ n=${n}`).join(" | ")
      + " | median @ finest | growth | verdict |",
    "|---|" + summaries[0].grids.map(() => "---").join("|") + "|---|---|---|",
  ];
  for (const s of summaries) {
    const finest = s.grids[s.grids.length - 1];
    lines.push(
      `| ${s.caseName} | `
      + s.grids.map((n) => s.maxRatio.get(n)!.toPrecision(4)).join(" | ")
      + ` | ${s.medianRatio.get(finest)!.toPrecision(4)}`
      + ` | ${(s.growth * 100).toFixed(1)}%`
      + ` | ${s.gridStable ? "grid-stable" : "unstable"} |`,
    );
  }
  const markdown = lines.join("\n") + "\n";
  fs.writeFileSync(path.join(outDir, "ratio_summary.md"), markdown);
  return { images, markdown };
}
