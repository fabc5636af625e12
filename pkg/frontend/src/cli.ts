#!/usr/bin/env node
/**
 * superatom-figs: render figures from simulator CSV artifacts.
 *
 * Usage:
 *   superatom-figs --input <dir> --panels fig1c --out fig1c.svg
 *   superatom-figs --input <dir> --panels fig2 --out fig2.png --format png
 *
 * The format defaults to the output file extension (svg unless .png).
 * Exit codes: 0 ok, 1 render error (missing series, schema mismatch),
 * 2 usage error.
 */

import { writeFileSync } from "node:fs";

import { SchemaError } from "./csv.js";
import { MissingSeriesError, render, type FigureSpec } from "./panels.js";

function usage(): string {
  return (
    "usage: superatom-figs --input <dir> --panels <fig1c|fig2> " +
    "--out <file> [--format svg|png]"
  );
}

export function parseArgs(argv: string[]): FigureSpec {
  const opts: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const val = argv[i + 1];
    if (!key.startsWith("--") || val === undefined) {
      throw new Error(usage());
    }
    opts[key.slice(2)] = val;
  }
  const input = opts["input"];
  const panels = opts["panels"];
  const out = opts["out"];
  if (!input || !panels || !out) throw new Error(usage());
  if (panels !== "fig1c" && panels !== "fig2") {
    throw new Error(`unknown panels ${panels}; expected fig1c or fig2`);
  }
  let format = opts["format"];
  if (format === undefined) {
    format = out.toLowerCase().endsWith(".png") ? "png" : "svg";
  }
  if (format !== "svg" && format !== "png") {
    throw new Error(`unknown format ${format}; expected svg or png`);
  }
  return { inputDir: input, panels, output: out, format };
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const bytes = render(spec);
    writeFileSync(spec.output, bytes);
    console.log(`wrote ${spec.output} (${bytes.length} bytes)`);
    return 0;
  } catch (err) {
    if (err instanceof MissingSeriesError || err instanceof SchemaError) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
