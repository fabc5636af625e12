/**
 * Figure assembly: the six-panel excitation-number view (dissipative
 * thick, coherent thin) and the dephasing view (P_r(1) traces with a
 * final-value inset).
 */

import { existsSync } from "node:fs";
import { join } from "node:path";

import { readSeries, readSummary, type Series, type SummaryRow } from "./csv.js";
import { PngSurface } from "./raster.js";
import { formatTick, linearScale, ticks } from "./scale.js";
import { SvgSurface, type Surface } from "./surface.js";

export const FIG1C_ATOMS = [1, 2, 3, 4, 5, 6];

export interface FigureSpec {
  inputDir: string;
  panels: "fig1c" | "fig2";
  output: string;
  format: "svg" | "png";
}

export class MissingSeriesError extends Error {
  constructor(readonly missing: string[]) {
    super(
      `missing input series (${missing.length} file(s)):\n  ` +
        missing.join("\n  "),
    );
  }
}

const PR_COLORS = ["blue", "red", "green"]; // P_r(0), P_r(1), P_r(2)
const N_COLORS = ["blue", "orange", "green", "red", "purple", "brown"];

function findSeriesFile(dir: string, stem: string): string | null {
  for (const engine of ["me", "mcwf"]) {
    const p = join(dir, `${stem}_${engine}.csv`);
    if (existsSync(p)) return p;
  }
  return null;
}

export interface Fig1cInputs {
  dissipative: Map<number, Series>;
  coherent: Map<number, Series>;
}

export function collectFig1c(dir: string): Fig1cInputs {
  const missing: string[] = [];
  const dissipative = new Map<number, Series>();
  const coherent = new Map<number, Series>();
  for (const n of FIG1C_ATOMS) {
    for (const variant of ["dissipative", "coherent"] as const) {
      const stem = `fig1c_N${n}_${variant}`;
      const path = findSeriesFile(dir, stem);
      if (path === null) {
        missing.push(join(dir, `${stem}_me.csv`));
      } else {
        (variant === "dissipative" ? dissipative : coherent).set(n, readSeries(path));
      }
    }
  }
  if (missing.length > 0) throw new MissingSeriesError(missing);
  return { dissipative, coherent };
}

export interface Fig2Inputs {
  byAtoms: Map<number, Series>;
  summary: SummaryRow[];
}

export function collectFig2(dir: string): Fig2Inputs {
  const missing: string[] = [];
  const byAtoms = new Map<number, Series>();
  for (const n of FIG1C_ATOMS) {
    const path = findSeriesFile(dir, `fig2_N${n}`);
    if (path === null) {
      missing.push(join(dir, `fig2_N${n}_me.csv`));
    } else {
      byAtoms.set(n, readSeries(path));
    }
  }
  const summaryPath = join(dir, "fig2_summary.csv");
  if (!existsSync(summaryPath)) missing.push(summaryPath);
  if (missing.length > 0) throw new MissingSeriesError(missing);
  return { byAtoms, summary: readSummary(summaryPath) };
}

function makeSurface(spec: FigureSpec, width: number, height: number): Surface {
  return spec.format === "png"
    ? new PngSurface(width, height)
    : new SvgSurface(width, height);
}

interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

function drawFrame(s: Surface, f: Frame, tMax: number,
                   labels: { x?: string; y?: string }): {
  sx: (v: number) => number;
  sy: (v: number) => number;
} {
  const sx = linearScale([0, tMax], [f.x0, f.x0 + f.w]);
  const sy = linearScale([0, 1], [f.y0 + f.h, f.y0]);
  s.rect(f.x0, f.y0, f.w, f.h, { stroke: "black", width: 1 });
  for (const tv of ticks(0, tMax, 4)) {
    const x = sx(tv);
    s.line(x, f.y0 + f.h, x, f.y0 + f.h - 4, { color: "black" });
    s.text(x, f.y0 + f.h + 12, formatTick(tv), { anchor: "middle", size: 9 });
  }
  for (const pv of [0, 0.5, 1]) {
    const y = sy(pv);
    s.line(f.x0, y, f.x0 + 4, y, { color: "black" });
    s.text(f.x0 - 4, y + 3, formatTick(pv), { anchor: "end", size: 9 });
  }
  if (labels.x) {
    s.text(f.x0 + f.w / 2, f.y0 + f.h + 26, labels.x, { anchor: "middle", size: 10 });
  }
  if (labels.y) {
    s.text(f.x0 - 30, f.y0 + f.h / 2, labels.y, {
      anchor: "middle",
      size: 10,
      rotate: -90,
    });
  }
  return { sx, sy };
}

function seriesPath(series: Series, col: number[],
                    sx: (v: number) => number, sy: (v: number) => number):
    Array<[number, number]> {
  return series.times.map((t, i) => [sx(t), sy(Math.max(0, Math.min(1, col[i])))]);
}

export function renderFig1c(inputs: Fig1cInputs, format: "svg" | "png"): Buffer {
  const cols = 3;
  const rowsN = 2;
  const panelW = 250;
  const panelH = 170;
  const margin = { left: 60, right: 20, top: 40, bottom: 50 };
  const gapX = 46;
  const gapY = 44;
  const width = margin.left + cols * panelW + (cols - 1) * gapX + margin.right;
  const height = margin.top + rowsN * panelH + (rowsN - 1) * gapY + margin.bottom;
  const s = makeSurface({ format } as FigureSpec, width, height);

  s.text(width / 2, 18, "Rydberg excitation number probabilities", {
    anchor: "middle",
    size: 13,
  });

  FIG1C_ATOMS.forEach((n, idx) => {
    const ci = idx % cols;
    const ri = Math.floor(idx / cols);
    const f: Frame = {
      x0: margin.left + ci * (panelW + gapX),
      y0: margin.top + ri * (panelH + gapY),
      w: panelW,
      h: panelH,
    };
    const diss = inputs.dissipative.get(n)!;
    const coh = inputs.coherent.get(n)!;
    const tMax = diss.times[diss.times.length - 1];
    const { sx, sy } = drawFrame(s, f, tMax, {
      x: ri === rowsN - 1 ? "t (us)" : undefined,
      y: ci === 0 ? "P(n)" : undefined,
    });
    for (let k = 2; k >= 0; k--) {
      s.polyline(seriesPath(coh, coh.pr[k], sx, sy), {
        color: PR_COLORS[k],
        width: 0.9,
        opacity: 0.85,
      });
      s.polyline(seriesPath(diss, diss.pr[k], sx, sy), {
        color: PR_COLORS[k],
        width: 2.4,
      });
    }
    s.text(f.x0 + 8, f.y0 + 14, `N = ${n}`, { size: 11 });
  });

  // shared legend: line styles and excitation numbers
  const lx = margin.left;
  const ly = height - 16;
  s.line(lx, ly - 4, lx + 26, ly - 4, { color: "black", width: 2.4 });
  s.text(lx + 32, ly, "dissipative (thick)", { size: 10 });
  s.line(lx + 150, ly - 4, lx + 176, ly - 4, { color: "black", width: 0.9 });
  s.text(lx + 182, ly, "coherent (thin)", { size: 10 });
  ["n=0", "n=1", "n=2"].forEach((label, k) => {
    const x = lx + 330 + k * 70;
    s.line(x, ly - 4, x + 20, ly - 4, { color: PR_COLORS[k], width: 2.4 });
    s.text(x + 25, ly, label, { size: 10 });
  });
  return s.finish();
}

export function renderFig2(inputs: Fig2Inputs, format: "svg" | "png",
                           gammaLabel = "gamma_r = 0.63 rad/us"): Buffer {
  const width = 640;
  const height = 440;
  const margin = { left: 70, right: 30, top: 40, bottom: 60 };
  const s = makeSurface({ format } as FigureSpec, width, height);
  const f: Frame = {
    x0: margin.left,
    y0: margin.top,
    w: width - margin.left - margin.right,
    h: height - margin.top - margin.bottom,
  };
  const first = inputs.byAtoms.get(FIG1C_ATOMS[0])!;
  const tMax = first.times[first.times.length - 1];
  s.text(width / 2, 18, `Single-excitation probability with dephasing, ${gammaLabel}`, {
    anchor: "middle",
    size: 13,
  });
  const { sx, sy } = drawFrame(s, f, tMax, { x: "t (us)", y: "P(1)" });
  FIG1C_ATOMS.forEach((n, k) => {
    const series = inputs.byAtoms.get(n)!;
    s.polyline(seriesPath(series, series.pr[1], sx, sy), {
      color: N_COLORS[k],
      width: 1.8,
    });
  });
  // legend
  FIG1C_ATOMS.forEach((n, k) => {
    const x = f.x0 + 10;
    const y = f.y0 + 16 + k * 14;
    s.line(x, y - 4, x + 18, y - 4, { color: N_COLORS[k], width: 1.8 });
    s.text(x + 24, y, `N = ${n}`, { size: 10 });
  });

  // inset: final value versus atom number
  const ins: Frame = {
    x0: f.x0 + f.w - 200,
    y0: f.y0 + f.h - 150,
    w: 180,
    h: 130,
  };
  s.rect(ins.x0, ins.y0, ins.w, ins.h, { stroke: "black", width: 1, fill: "white" });
  const rows = [...inputs.summary].sort((a, b) => a.nAtoms - b.nAtoms);
  const pLo = Math.min(...rows.map((r) => r.pr1End));
  const pHi = Math.max(...rows.map((r) => r.pr1End));
  const pad = Math.max(0.01, (pHi - pLo) * 0.25);
  const ix = linearScale(
    [rows[0].nAtoms - 0.5, rows[rows.length - 1].nAtoms + 0.5],
    [ins.x0 + 34, ins.x0 + ins.w - 12],
  );
  const iy = linearScale([pLo - pad, Math.min(1, pHi + pad)],
                         [ins.y0 + ins.h - 24, ins.y0 + 10]);
  for (const r of rows) {
    s.circle(ix(r.nAtoms), iy(r.pr1End), 3, "red");
    s.text(ix(r.nAtoms), ins.y0 + ins.h - 10, String(r.nAtoms), {
      anchor: "middle",
      size: 9,
    });
  }
  s.polyline(rows.map((r) => [ix(r.nAtoms), iy(r.pr1End)] as [number, number]), {
    color: "red",
    width: 1,
    dash: [3, 3],
  });
  for (const pv of ticks(pLo - pad, Math.min(1, pHi + pad), 3)) {
    s.text(ins.x0 + 30, iy(pv) + 3, formatTick(pv), { anchor: "end", size: 8 });
  }
  s.text(ins.x0 + ins.w / 2, ins.y0 + ins.h + 12 - 2, "N (atoms), P(1) at t_end", {
    anchor: "middle",
    size: 9,
  });
  return s.finish();
}

export function render(spec: FigureSpec): Buffer {
  if (spec.panels === "fig1c") {
    return renderFig1c(collectFig1c(spec.inputDir), spec.format);
  }
  return renderFig2(collectFig2(spec.inputDir), spec.format);
}
