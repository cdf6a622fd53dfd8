/**
 * Parsers for the artifact wire formats: norms.csv (t,name,value) and the
 * per-case inequality ratio CSVs (case,n,trial,seed,lhs,rhs,ratio).
 */

export interface NormPoint {
  t: number;
  value: number;
}

export type NormSeries = Map<string, NormPoint[]>;

export function parseNormsCsv(text: string): NormSeries {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0 || lines[0].trim() !== "t,name,value") {
    throw new Error("schema error: norms CSV must start with header 't,name,value'");
  }
  if (lines.length === 1) {
    throw new Error("no data rows");
  }
  const series: NormSeries = new Map();
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== 3) {
      throw new Error(`schema error: bad norms row '${line}'`);
    }
    const t = Number(parts[0]);
    const value = Number(parts[2]);
    if (!Number.isFinite(t) || !Number.isFinite(value)) {
      throw new Error(`schema error: non-numeric norms row '${line}'`);
    }
    const name = parts[1];
    if (!series.has(name)) series.set(name, []);
    series.get(name)!.push({ t, value });
  }
  return series;
}

export interface RatioRow {
  caseName: string;
  n: number;
  trial: number;
  ratio: number;
}

export function parseRatioCsv(text: string): RatioRow[] {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("no data rows");
  }
  const header = lines[0].trim().split(",");
  const need = ["case", "n", "trial", "seed", "lhs", "rhs", "ratio"];
  for (const col of need) {
    if (!header.includes(col)) {
      throw new Error(`schema error: missing column '${col}' in ratio CSV`);
    }
  }
  const ix = (c: string) => header.indexOf(c);
  const rows: RatioRow[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new Error(`schema error: bad ratio row '${line}'`);
    }
    rows.push({
      caseName: parts[ix("case")],
      n: Number(parts[ix("n")]),
      trial: Number(parts[ix("trial")]),
      ratio: Number(parts[ix("ratio")]),
    });
  }
  if (rows.length === 0) {
    throw new Error("no data rows");
  }
  return rows;
}

/** rate_table rows inside report.json; the single source of slope truth. */
export interface RateRow {
  quantity: string;
  predicted: number;
  fitted: number;
  stderr: number;
  tolerance: number;
  pass: boolean;
}

export interface DecayReport {
  kind: string;
  rate_table: RateRow[];
  window?: number[];
}

export function parseReport(text: string): DecayReport {
  const data = JSON.parse(text);
  if (!Array.isArray(data.rate_table)) {
    throw new Error("schema error: report.json carries no rate_table");
  }
  return data as DecayReport;
}
