/**
 * Minimal 2D drawing surface with SVG and raster backends sharing one
 * interface, so figure layout code is format-agnostic.
 */

export type TextAnchor = "start" | "middle" | "end";

export interface TextOptions {
  size?: number;
  anchor?: TextAnchor;
  color?: string;
  rotate?: number; // degrees, about the text origin
}

export interface StrokeOptions {
  width?: number;
  color?: string;
  dash?: number[];
  opacity?: number;
}

export interface Surface {
  readonly width: number;
  readonly height: number;
  polyline(points: Array<[number, number]>, opts?: StrokeOptions): void;
  line(x1: number, y1: number, x2: number, y2: number, opts?: StrokeOptions): void;
  rect(x: number, y: number, w: number, h: number,
       opts?: { fill?: string; stroke?: string; width?: number }): void;
  circle(cx: number, cy: number, r: number, fill: string): void;
  text(x: number, y: number, content: string, opts?: TextOptions): void;
  finish(): Buffer;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export class SvgSurface implements Surface {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
        `height="${height}" viewBox="0 0 ${width} ${height}">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  polyline(points: Array<[number, number]>, opts: StrokeOptions = {}): void {
    if (points.length < 2) return;
    const pts = points
      .map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`)
      .join(" ");
    const dash = opts.dash ? ` stroke-dasharray="${opts.dash.join(" ")}"` : "";
    const op = opts.opacity !== undefined ? ` stroke-opacity="${opts.opacity}"` : "";
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${opts.color ?? "black"}" ` +
        `stroke-width="${opts.width ?? 1}"${dash}${op}/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, opts: StrokeOptions = {}): void {
    this.polyline([[x1, y1], [x2, y2]], opts);
  }

  rect(x: number, y: number, w: number, h: number,
       opts: { fill?: string; stroke?: string; width?: number } = {}): void {
    const fill = opts.fill ?? "none";
    const stroke = opts.stroke
      ? ` stroke="${opts.stroke}" stroke-width="${opts.width ?? 1}"`
      : "";
    this.parts.push(
      `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}" ` +
        `height="${h.toFixed(2)}" fill="${fill}"${stroke}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(
      `<circle cx="${cx.toFixed(2)}" cy="${cy.toFixed(2)}" r="${r}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, content: string, opts: TextOptions = {}): void {
    const size = opts.size ?? 11;
    const anchor = opts.anchor ?? "start";
    const rot = opts.rotate
      ? ` transform="rotate(${opts.rotate} ${x.toFixed(2)} ${y.toFixed(2)})"`
      : "";
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-family="Helvetica,Arial,sans-serif" ` +
        `font-size="${size}" fill="${opts.color ?? "black"}" ` +
        `text-anchor="${anchor}"${rot}>${esc(content)}</text>`,
    );
  }

  finish(): Buffer {
    return Buffer.from(this.parts.join("\n") + "\n</svg>\n", "utf8");
  }
}
