#!/usr/bin/env npx tsx
/**
 * Batch renderer for nsp-decay-lab artifacts.
 *
 * Usage:
 *   npx tsx src/cli.ts render --in <artifact dir> --out <image dir>
 *
 * The input directory is scanned for the decay artifacts (norms.csv +
 * report.json with a rate_table) and for per-case inequality ratio CSVs
 * (ineq_*.csv); whatever is present gets rendered.
 */

import * as fs from "fs";
import * as path from "path";
import { renderDecayPlot } from "./decay.js";
import { renderRatioReport } from "./ratio.js";
import { parseReport } from "./csv.js";

function parseArgs(argv: string[]): { cmd: string; inDir: string; outDir: string } {
  const cmd = argv[0];
  let inDir = "";
  let outDir = "";
  for (let i = 1; i < argv.length; i++) {
    if (argv[i] === "--in") inDir = argv[++i];
    else if (argv[i] === "--out") outDir = argv[++i];
    else throw new Error(`unknown argument '${argv[i]}'`);
  }
  if (cmd !== "render") throw new Error(`unknown command '${cmd ?? ""}' (expected 'render')`);
  if (!inDir || !outDir) throw new Error("render needs --in <dir> and --out <dir>");
  return { cmd, inDir, outDir };
}

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error(String(e instanceof Error ? e.message : e));
    return 2;
  }
  try {
    const produced: string[] = [];
    const normsCsv = path.join(args.inDir, "norms.csv");
    const reportJson = path.join(args.inDir, "report.json");
    if (fs.existsSync(normsCsv) && fs.existsSync(reportJson)) {
      const raw = JSON.parse(fs.readFileSync(reportJson, "utf-8"));
      if (Array.isArray(raw.rate_table)) {
        const report = parseReport(fs.readFileSync(reportJson, "utf-8"));
        const quantities = report.rate_table
          .map((r) => r.quantity)
          .filter((q) => !q.startsWith("slope_gap"));
        const out = renderDecayPlot({
          normsCsv,
          reportJson,
          quantities,
          outFile: path.join(args.outDir, "decay.svg"),
        });
        produced.push(out);
      }
    }
    const ratioCsvs = fs.existsSync(args.inDir)
      ? fs.readdirSync(args.inDir)
          .filter((f) => f.startsWith("ineq_") && f.endsWith(".csv"))
          .sort()
          .map((f) => path.join(args.inDir, f))
      : [];
    if (ratioCsvs.length > 0) {
      const { images } = renderRatioReport(ratioCsvs, args.outDir);
      produced.push(...images, path.join(args.outDir, "ratio_summary.md"));
    }
    if (produced.length === 0) {
      console.error(`no renderable artifacts found in ${args.inDir}`);
      return 1;
    }
    for (const p of produced) console.log(p);
    return 0;
  } catch (e) {
    console.error(String(e instanceof Error ? e.message : e));
    return 1;
  }
}

const isDirectRun = process.argv[1] !== undefined
  && path.resolve(process.argv[1]) === path.resolve(new URL(import.meta.url).pathname);
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
