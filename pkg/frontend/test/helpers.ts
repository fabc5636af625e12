import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Synthetic artifact in the simulator's CSV schema. */
export function seriesCsv(nAtoms: number, samples = 40, stderr = false): string {
  const cols = [
    "t_us", "pr0", "pr1", "pr2", "pr_ge3",
    "pop_e_total", "purity", "trace_err",
    ...Array.from({ length: nAtoms }, (_, j) => `per_atom_rr_${j}`),
  ];
  if (stderr) cols.push("stderr_pr1");
  const lines = [cols.join(",")];
  for (let k = 0; k < samples; k++) {
    const t = (30 * k) / (samples - 1);
    const p1 = 0.5 * (1 - Math.cos((Math.PI * k) / (samples - 1)));
    const p2 = 1e-4 * Math.sin((Math.PI * k) / (samples - 1));
    const p0 = 1 - p1 - p2;
    const row = [
      t, p0, p1, p2, 0, 0.01 * p1, 1 - 0.3 * p1, 1e-12,
      ...Array.from({ length: nAtoms }, () => p1 / nAtoms),
    ];
    if (stderr) row.push(0.01);
    lines.push(row.map((v) => Number(v).toPrecision(9)).join(","));
  }
  return lines.join("\n") + "\n";
}

export function makeFig1cDir(skip: string[] = []): string {
  const dir = mkdtempSync(join(tmpdir(), "figs-"));
  for (let n = 1; n <= 6; n++) {
    for (const variant of ["dissipative", "coherent"]) {
      const name = `fig1c_N${n}_${variant}_me.csv`;
      if (skip.includes(name)) continue;
      writeFileSync(join(dir, name), seriesCsv(n));
    }
  }
  return dir;
}

export function makeFig2Dir(skip: string[] = []): string {
  const dir = mkdtempSync(join(tmpdir(), "figs-"));
  for (let n = 1; n <= 6; n++) {
    const name = `fig2_N${n}_me.csv`;
    if (skip.includes(name)) continue;
    writeFileSync(join(dir, name), seriesCsv(n));
  }
  if (!skip.includes("fig2_summary.csv")) {
    const rows = ["n_atoms,pr1_end"];
    for (let n = 1; n <= 6; n++) {
      rows.push(`${n},${(0.9 * n) / ((n - 1) * 0.9 + 1)}`);
    }
    writeFileSync(join(dir, "fig2_summary.csv"), rows.join("\n") + "\n");
  }
  return dir;
}
