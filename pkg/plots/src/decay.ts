/**
 * Decay-curve rendering: log-log curves from norms.csv with fitted slopes
 * and predicted-slope guide lines taken from report.json (the single source
 * of truth for exponents; nothing is recomputed here).
 */

import * as fs from "fs";
import * as path from "path";
import { parseNormsCsv, parseReport, DecayReport, NormPoint } from "./csv.js";
import { lineChart, Series, Annotation } from "./svg.js";

export interface PlotSpec {
  normsCsv: string;
  reportJson: string;
  quantities: string[];
  outFile: string;
  logLog?: boolean;
}

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

function guideLine(points: NormPoint[], exponent: number): Array<[number, number]> {
  // anchored at the first sample: value * (<t>/<t0>)^exponent
  const t0 = points[0].t;
  const v0 = points[0].value;
  const br = (t: number) => Math.sqrt(1 + t * t);
  return points.map((p) => [p.t, v0 * (br(p.t) / br(t0)) ** exponent]);
}

export function renderDecayPlot(spec: PlotSpec): string {
  const series = parseNormsCsv(fs.readFileSync(spec.normsCsv, "utf-8"));
  const report: DecayReport = parseReport(fs.readFileSync(spec.reportJson, "utf-8"));
  const byQuantity = new Map(report.rate_table.map((r) => [r.quantity, r]));

  const chartSeries: Series[] = [];
  const annotations: Annotation[] = [];
  spec.quantities.forEach((name, i) => {
    const pts = series.get(name);
    if (!pts || pts.length < 2) {
      throw new Error(`missing quantity '${name}' in ${spec.normsCsv}`);
    }
    const color = COLORS[i % COLORS.length];
    chartSeries.push({
      label: name,
      color,
      points: pts.map((p) => [p.t, p.value]),
    });
    const row = byQuantity.get(name);
    if (row) {
      chartSeries.push({
        label: `${name} ref ${row.predicted.toFixed(2)}`,
        color,
        dash: "6 4",
        points: guideLine(pts, row.predicted),
      });
      annotations.push({
        text: `${name}: fit ${row.fitted.toFixed(2)} (ref ${row.predicted.toFixed(2)})`,
        color,
      });
    }
  });

  const gapRow = byQuantity.get("slope_gap_a_minus_u");
  if (gapRow) {
    annotations.push({
      text: `slope gap (a - u): ${gapRow.fitted.toFixed(2)}, gap ${Math.abs(gapRow.fitted).toFixed(2)}`,
    });
  }

  const svg = lineChart(chartSeries, {
    title: "time decay of L2 norms",
    xLabel: "t",
    yLabel: "norm",
    logX: spec.logLog !== false,
    logY: spec.logLog !== false,
    annotations,
  });
  fs.mkdirSync(path.dirname(spec.outFile), { recursive: true });
  fs.writeFileSync(spec.outFile, svg);
  return spec.outFile;
}
