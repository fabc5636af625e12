/**
 * Raster backend: draws into an RGBA buffer and encodes a PNG with
 * node's built-in zlib. No native imaging dependency is needed for the
 * simple line-plot geometry used here.
 */

import { deflateSync } from "node:zlib";

import { GLYPH_H, GLYPH_W, glyph, textWidth } from "./font.js";
import type { StrokeOptions, Surface, TextOptions } from "./surface.js";

const NAMED: Record<string, [number, number, number]> = {
  black: [0, 0, 0],
  white: [255, 255, 255],
  gray: [128, 128, 128],
  lightgray: [211, 211, 211],
  red: [214, 39, 40],
  blue: [31, 119, 180],
  green: [44, 160, 44],
  orange: [255, 127, 14],
  purple: [148, 103, 189],
  brown: [140, 86, 75],
};

export function parseColor(spec: string | undefined): [number, number, number] {
  if (!spec) return [0, 0, 0];
  if (spec.startsWith("#")) {
    const hex = spec.slice(1);
    const full = hex.length === 3 ? hex.split("").map((c) => c + c).join("") : hex;
    return [
      parseInt(full.slice(0, 2), 16),
      parseInt(full.slice(2, 4), 16),
      parseInt(full.slice(4, 6), 16),
    ];
  }
  return NAMED[spec] ?? [0, 0, 0];
}

export class PngSurface implements Surface {
  private pixels: Uint8Array;

  constructor(readonly width: number, readonly height: number) {
    this.pixels = new Uint8Array(width * height * 4);
    this.pixels.fill(255);
  }

  private blend(x: number, y: number, rgb: [number, number, number], alpha: number): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height || alpha <= 0) return;
    const k = (y * this.width + x) * 4;
    const a = Math.min(1, alpha);
    for (let c = 0; c < 3; c++) {
      this.pixels[k + c] = Math.round(this.pixels[k + c] * (1 - a) + rgb[c] * a);
    }
    this.pixels[k + 3] = 255;
  }

  /** Stamp a filled disc; thick lines are discs swept along the segment. */
  private stamp(cx: number, cy: number, radius: number,
                rgb: [number, number, number], alpha: number): void {
    const r = Math.max(radius, 0.5);
    const lo = Math.floor(-r - 1);
    const hi = Math.ceil(r + 1);
    for (let dy = lo; dy <= hi; dy++) {
      for (let dx = lo; dx <= hi; dx++) {
        const d = Math.hypot(dx, dy);
        const cover = Math.max(0, Math.min(1, r + 0.5 - d));
        if (cover > 0) {
          this.blend(Math.round(cx) + dx, Math.round(cy) + dy, rgb, cover * alpha);
        }
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, opts: StrokeOptions = {}): void {
    const rgb = parseColor(opts.color);
    const radius = (opts.width ?? 1) / 2;
    const alpha = opts.opacity ?? 1;
    const len = Math.hypot(x2 - x1, y2 - y1);
    const steps = Math.max(1, Math.ceil(len * 2));
    const dash = opts.dash;
    const period = dash ? dash.reduce((a, b) => a + b, 0) : 0;
    for (let s = 0; s <= steps; s++) {
      const f = s / steps;
      if (dash) {
        const pos = (f * len) % period;
        let acc = 0;
        let on = true;
        for (const seg of dash) {
          acc += seg;
          if (pos < acc) break;
          on = !on;
        }
        if (!on) continue;
      }
      this.stamp(x1 + f * (x2 - x1), y1 + f * (y2 - y1), radius, rgb, alpha);
    }
  }

  polyline(points: Array<[number, number]>, opts: StrokeOptions = {}): void {
    for (let i = 1; i < points.length; i++) {
      this.line(points[i - 1][0], points[i - 1][1], points[i][0], points[i][1], opts);
    }
  }

  rect(x: number, y: number, w: number, h: number,
       opts: { fill?: string; stroke?: string; width?: number } = {}): void {
    if (opts.fill && opts.fill !== "none") {
      const rgb = parseColor(opts.fill);
      for (let yy = Math.round(y); yy < Math.round(y + h); yy++) {
        for (let xx = Math.round(x); xx < Math.round(x + w); xx++) {
          this.blend(xx, yy, rgb, 1);
        }
      }
    }
    if (opts.stroke) {
      const so = { color: opts.stroke, width: opts.width ?? 1 };
      this.line(x, y, x + w, y, so);
      this.line(x + w, y, x + w, y + h, so);
      this.line(x + w, y + h, x, y + h, so);
      this.line(x, y + h, x, y, so);
    }
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.stamp(cx, cy, r, parseColor(fill), 1);
  }

  text(x: number, y: number, content: string, opts: TextOptions = {}): void {
    const size = opts.size ?? 11;
    const scale = Math.max(1, Math.round(size / 8));
    const rgb = parseColor(opts.color);
    const w = textWidth(content, scale);
    const anchor = opts.anchor ?? "start";
    const theta = ((opts.rotate ?? 0) * Math.PI) / 180;
    const cos = Math.cos(theta);
    const sin = Math.sin(theta);
    // Along-baseline offset for the anchor, then rotate about (x, y).
    const shift = anchor === "middle" ? -w / 2 : anchor === "end" ? -w : 0;
    for (let i = 0; i < content.length; i++) {
      const rows = glyph(content[i]);
      const gx0 = shift + i * (GLYPH_W + 1) * scale;
      for (let ry = 0; ry < GLYPH_H; ry++) {
        for (let rx = 0; rx < GLYPH_W; rx++) {
          if (rows[ry][rx] !== "#") continue;
          for (let sy = 0; sy < scale; sy++) {
            for (let sx = 0; sx < scale; sx++) {
              const px = gx0 + rx * scale + sx;
              const py = (ry - GLYPH_H + 1) * scale + sy; // baseline at y
              this.blend(
                Math.round(x + px * cos - py * sin),
                Math.round(y + px * sin + py * cos),
                rgb,
                1,
              );
            }
          }
        }
      }
    }
  }

  finish(): Buffer {
    return encodePng(this.width, this.height, this.pixels);
  }
}

// --- PNG container -------------------------------------------------------

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const out = Buffer.alloc(12 + data.length);
  out.writeUInt32BE(data.length, 0);
  out.write(type, 4, "ascii");
  Buffer.from(data).copy(out, 8);
  out.writeUInt32BE(crc32(out.subarray(4, 8 + data.length)), 8 + data.length);
  return out;
}

export function encodePng(width: number, height: number, rgba: Uint8Array): Buffer {
  const sig = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  // scanlines with filter byte 0
  const raw = Buffer.alloc(height * (1 + width * 4));
  for (let y = 0; y < height; y++) {
    const row = y * (1 + width * 4);
    raw[row] = 0;
    Buffer.from(rgba.buffer, rgba.byteOffset + y * width * 4, width * 4)
      .copy(raw, row + 1);
  }
  const idat = deflateSync(raw, { level: 6 });
  return Buffer.concat([
    sig,
    chunk("IHDR", ihdr),
    chunk("IDAT", idat),
    chunk("IEND", new Uint8Array(0)),
  ]);
}
