// Minimal deterministic SVG assembly: fixed precision, no timestamps.

import { STYLE } from "./style";

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toFixed(3);
  return s === "-0.000" ? "0.000" : s;
}

export interface Box {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export class Mapper {
  constructor(
    public box: Box,
    public width = STYLE.width,
    public height = STYLE.height,
    public margin = STYLE.margin,
  ) {}

  x(v: number): number {
    const { x0, x1 } = this.box;
    return this.margin + ((v - x0) / (x1 - x0)) * (this.width - 2 * this.margin);
  }

  y(v: number): number {
    const { y0, y1 } = this.box;
    return (
      this.height - this.margin - ((v - y0) / (y1 - y0)) * (this.height - 2 * this.margin)
    );
  }
}

export function polyline(
  xs: number[],
  ys: number[],
  m: Mapper,
  stroke: string,
  width = 1.5,
  close = false,
): string {
  const pts = xs.map((x, i) => `${fmt(m.x(x))},${fmt(m.y(ys[i]))}`).join(" ");
  const tag = close ? "polygon" : "polyline";
  return `<${tag} points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function polygon(
  xs: number[],
  ys: number[],
  m: Mapper,
  fill: string,
  opacity = 1.0,
): string {
  const pts = xs.map((x, i) => `${fmt(m.x(x))},${fmt(m.y(ys[i]))}`).join(" ");
  return `<polygon points="${pts}" fill="${fill}" fill-opacity="${fmt(opacity)}" stroke="none"/>`;
}

export function rect(
  x: number,
  y: number,
  w: number,
  h: number,
  fill: string,
): string {
  return `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`;
}

export function line(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  stroke: string,
  width = 1,
  dash = "",
): string {
  const d = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`;
}

export function text(
  x: number,
  y: number,
  s: string,
  anchor = "start",
  size = STYLE.fontSize,
): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" font-family="${STYLE.fontFamily}" font-size="${size}" text-anchor="${anchor}" fill="#222">${escapeXml(s)}</text>`;
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function arrow(
  x: number,
  y: number,
  dx: number,
  dy: number,
  stroke: string,
): string {
  const x2 = x + dx;
  const y2 = y + dy;
  const len = Math.hypot(dx, dy) || 1;
  const hx = dx / len;
  const hy = dy / len;
  const a1x = x2 - 4 * hx + 2 * hy;
  const a1y = y2 - 4 * hy - 2 * hx;
  const a2x = x2 - 4 * hx - 2 * hy;
  const a2y = y2 - 4 * hy + 2 * hx;
  return (
    line(x, y, x2, y2, stroke, 1) +
    line(x2, y2, a1x, a1y, stroke, 1) +
    line(x2, y2, a2x, a2y, stroke, 1)
  );
}

export function document(body: string[], title: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${STYLE.width}" height="${STYLE.height}" viewBox="0 0 ${STYLE.width} ${STYLE.height}">`,
    rect(0, 0, STYLE.width, STYLE.height, STYLE.background),
    text(STYLE.margin, 24, title, "start", 14),
    ...body,
    `</svg>`,
  ].join("\n");
}

export function axes(m: Mapper, xlabel: string, ylabel: string): string {
  const { margin, width, height } = m as unknown as {
    margin: number;
    width: number;
    height: number;
  };
  return [
    line(margin, height - margin, width - margin, height - margin, STYLE.axis),
    line(margin, margin, margin, height - margin, STYLE.axis),
    text(width - margin, height - margin + 28, xlabel, "end"),
    text(margin - 30, margin - 8, ylabel, "start"),
    text(margin, height - margin + 16, fmt(m.box.x0), "middle", 10),
    text(width - margin, height - margin + 16, fmt(m.box.x1), "middle", 10),
    text(margin - 6, height - margin, fmt(m.box.y0), "end", 10),
    text(margin - 6, margin + 4, fmt(m.box.y1), "end", 10),
  ].join("\n");
}
