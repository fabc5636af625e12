import { existsSync, mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterEach, describe, expect, it, vi } from "vitest";

import { main, parseArgs } from "../src/cli.js";
import { makeFig1cDir, makeFig2Dir } from "./helpers.js";

const dirs: string[] = [];
afterEach(() => {
  while (dirs.length) rmSync(dirs.pop()!, { recursive: true, force: true });
  vi.restoreAllMocks();
});

describe("argument parsing", () => {
  it("accepts the documented flags", () => {
    const spec = parseArgs(["--input", "d", "--panels", "fig1c", "--out", "f.svg"]);
    expect(spec).toEqual({
      inputDir: "d", panels: "fig1c", output: "f.svg", format: "svg",
    });
  });

  it("infers png from the extension", () => {
    const spec = parseArgs(["--input", "d", "--panels", "fig2", "--out", "f.PNG"]);
    expect(spec.format).toBe("png");
  });

  it("rejects unknown panel sets", () => {
    expect(() =>
      parseArgs(["--input", "d", "--panels", "fig3", "--out", "f.svg"]),
    ).toThrow(/fig3/);
  });
});

describe("cli main", () => {
  it("writes the requested figure", () => {
    const dir = makeFig1cDir();
    dirs.push(dir);
    const outDir = mkdtempSync(join(tmpdir(), "figs-out-"));
    dirs.push(outDir);
    const out = join(outDir, "fig1c.svg");
    vi.spyOn(console, "log").mockImplementation(() => {});
    const code = main(["--input", dir, "--panels", "fig1c", "--out", out]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
  });

  it("reports missing series with exit 1", () => {
    const dir = makeFig2Dir(["fig2_N4_me.csv"]);
    dirs.push(dir);
    const errors: string[] = [];
    vi.spyOn(console, "error").mockImplementation((msg) => errors.push(String(msg)));
    const code = main(["--input", dir, "--panels", "fig2", "--out", "/tmp/x.svg"]);
    expect(code).toBe(1);
    expect(errors.join("\n")).toContain("fig2_N4_me.csv");
  });

  it("usage errors exit 2", () => {
    vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main(["--panels", "fig1c"])).toBe(2);
  });
});
