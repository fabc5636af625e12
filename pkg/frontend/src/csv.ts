/**
 * Reader for the simulator's CSV artifacts.
 *
 * Schema: t_us,pr0,pr1,pr2,pr_ge3,pop_e_total,purity,trace_err,
 * per_atom_rr_0..N-1 with an optional trailing stderr_pr1 column.
 */

import { readFileSync } from "node:fs";

export interface Series {
  path: string;
  times: number[];
  /** Columns: P_r(0), P_r(1), P_r(2), P_r(>=3). */
  pr: [number[], number[], number[], number[]];
  popETotal: number[];
  purity: number[];
  traceErr: number[];
  perAtomRr: number[][]; // [atom][time]
  stderrPr1?: number[];
}

export class SchemaError extends Error {}

const FIXED = [
  "t_us",
  "pr0",
  "pr1",
  "pr2",
  "pr_ge3",
  "pop_e_total",
  "purity",
  "trace_err",
];

export function parseSeries(text: string, path: string): Series {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const header = lines[0].split(",");
  for (let i = 0; i < FIXED.length; i++) {
    if (header[i] !== FIXED[i]) {
      throw new SchemaError(
        `${path}: column ${i} is ${header[i] ?? "<missing>"}, expected ${FIXED[i]}`,
      );
    }
  }
  const rest = header.slice(FIXED.length);
  const hasStderr = rest.length > 0 && rest[rest.length - 1] === "stderr_pr1";
  const rrCols = hasStderr ? rest.slice(0, -1) : rest;
  rrCols.forEach((name, j) => {
    if (name !== `per_atom_rr_${j}`) {
      throw new SchemaError(`${path}: unexpected column ${name}`);
    }
  });

  const nAtoms = rrCols.length;
  const series: Series = {
    path,
    times: [],
    pr: [[], [], [], []],
    popETotal: [],
    purity: [],
    traceErr: [],
    perAtomRr: Array.from({ length: nAtoms }, () => []),
    stderrPr1: hasStderr ? [] : undefined,
  };
  for (let r = 1; r < lines.length; r++) {
    const cells = lines[r].split(",").map(Number);
    if (cells.length !== header.length || cells.some((v) => Number.isNaN(v))) {
      throw new SchemaError(`${path}: bad data row ${r + 1}`);
    }
    series.times.push(cells[0]);
    for (let k = 0; k < 4; k++) series.pr[k].push(cells[1 + k]);
    series.popETotal.push(cells[5]);
    series.purity.push(cells[6]);
    series.traceErr.push(cells[7]);
    for (let j = 0; j < nAtoms; j++) {
      series.perAtomRr[j].push(cells[FIXED.length + j]);
    }
    if (hasStderr) series.stderrPr1!.push(cells[header.length - 1]);
  }
  return series;
}

export function readSeries(path: string): Series {
  return parseSeries(readFileSync(path, "ascii"), path);
}

export interface SummaryRow {
  nAtoms: number;
  pr1End: number;
}

export function parseSummary(text: string, path: string): SummaryRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines[0] !== "n_atoms,pr1_end") {
    throw new SchemaError(`${path}: expected header n_atoms,pr1_end`);
  }
  return lines.slice(1).map((line, i) => {
    const [n, p] = line.split(",").map(Number);
    if (!Number.isInteger(n) || Number.isNaN(p)) {
      throw new SchemaError(`${path}: bad summary row ${i + 2}`);
    }
    return { nAtoms: n, pr1End: p };
  });
}

export function readSummary(path: string): SummaryRow[] {
  return parseSummary(readFileSync(path, "ascii"), path);
}
