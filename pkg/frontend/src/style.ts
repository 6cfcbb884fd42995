// Fixed visual conventions: the lighter fluid region light, the heavier dark,
// the mixing band hatched, band boundaries in a light blue hue.

export const STYLE = {
  width: 640,
  height: 640,
  margin: 48,
  background: "#ffffff",
  axis: "#444444",
  regionMinus: "#dce9f5", // upper/outer fluid
  regionPlus: "#3a6ea5", // lower/inner fluid
  mixFill: "#f3c98b",
  mixHatch: "#b07830",
  bandBoundary: "#55aadd", // the two non-mixing boundaries
  pseudoInterface: "#1f3f66",
  initialCurve: "#999999",
  quiver: "#222222",
  ladderPoint: "#1f3f66",
  ladderFit: "#cc4444",
  ladderTarget: "#44aa44",
  fontFamily: "Helvetica, Arial, sans-serif",
  fontSize: 12,
};

export function densityColor(rho: number): string {
  // -1 -> light, +1 -> dark, mid-band values interpolate
  const t = Math.max(0, Math.min(1, (rho + 1) / 2));
  const mix = (a: number, b: number) => Math.round(a + (b - a) * t);
  return `rgb(${mix(220, 58)},${mix(233, 110)},${mix(245, 165)})`;
}

export function pressureColor(p: number, lo: number, hi: number): string {
  const t = hi > lo ? Math.max(0, Math.min(1, (p - lo) / (hi - lo))) : 0.5;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * t);
  return `rgb(${mix(40, 250)},${mix(70, 240)},${mix(160, 200)})`;
}
