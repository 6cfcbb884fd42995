import {
  ChartSnapshot,
  CurveSnapshot,
  DiagnosticsTable,
  FieldSnapshot,
  LadderReport,
  RunData,
} from "./types";
import { STYLE, densityColor, pressureColor } from "./style";
import {
  Box,
  Mapper,
  arrow,
  axes,
  document,
  fmt,
  line,
  polygon,
  polyline,
  rect,
  text,
} from "./svg";

function curveBox(curves: CurveSnapshot[], margin = 0.25): Box {
  let x0 = Infinity,
    x1 = -Infinity,
    y0 = Infinity,
    y1 = -Infinity;
  for (const c of curves) {
    for (let i = 0; i < c.z1.length; i++) {
      x0 = Math.min(x0, c.z1[i]);
      x1 = Math.max(x1, c.z1[i]);
      y0 = Math.min(y0, c.z2[i]);
      y1 = Math.max(y1, c.z2[i]);
    }
  }
  const dx = (x1 - x0) * margin;
  const dy = (y1 - y0) * margin;
  return { x0: x0 - dx, x1: x1 + dx, y0: y0 - dy, y1: y1 + dy };
}

function chartRows(chart: ChartSnapshot, lambda: number) {
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < chart.lambda.length; i++) {
    if (Math.abs(chart.lambda[i] - lambda) < 1e-12) {
      xs.push(chart.z1[i]);
      ys.push(chart.z2[i]);
    }
  }
  return { xs, ys };
}

export function interfacePanel(run: RunData): string {
  const body: string[] = [];
  const m = new Mapper(curveBox(run.curves));
  body.push(axes(m, "x1", "x2"));
  const initial = run.curves[0];
  const final = run.curves[run.curves.length - 1];
  // shaded band between the outermost level rows of the last chart set
  const lastT = Math.max(...run.charts.map((c) => c.t), -Infinity);
  for (const chart of run.charts.filter((c) => c.t === lastT)) {
    const top = chartRows(chart, 1.0);
    const bot = chartRows(chart, -1.0);
    if (top.xs.length && bot.xs.length) {
      const xs = top.xs.concat([...bot.xs].reverse());
      const ys = top.ys.concat([...bot.ys].reverse());
      body.push(polygon(xs, ys, m, STYLE.mixFill, 0.8));
      body.push(polyline(top.xs, top.ys, m, STYLE.bandBoundary, 2));
      body.push(polyline(bot.xs, bot.ys, m, STYLE.bandBoundary, 2));
    }
  }
  body.push(
    polyline(initial.z1, initial.z2, m, STYLE.initialCurve, 1,
      initial.topology === "closed-bubble"),
  );
  body.push(
    polyline(final.z1, final.z2, m, STYLE.pseudoInterface, 1.5,
      final.topology === "closed-bubble"),
  );
  body.push(
    text(STYLE.width - STYLE.margin, 24,
      `t = ${final.t} (band shaded at t = ${lastT >= 0 ? lastT : "n/a"})`, "end"),
  );
  return document(body, "pseudo-interface and mixing band");
}

function fieldGrid(field: FieldSnapshot) {
  const xs = Array.from(new Set(field.x1)).sort((a, b) => a - b);
  const ys = Array.from(new Set(field.x2)).sort((a, b) => a - b);
  return { xs, ys };
}

export function fieldPanel(run: RunData): string {
  const field = run.fields[run.fields.length - 1];
  if (!field) throw new Error("no field snapshot available");
  const { xs, ys } = fieldGrid(field);
  const box: Box = {
    x0: xs[0],
    x1: xs[xs.length - 1],
    y0: ys[0],
    y1: ys[ys.length - 1],
  };
  const m = new Mapper(box);
  const body: string[] = [];
  const cw = (m.x(xs[1]) - m.x(xs[0])) * 1.02;
  const ch = (m.y(ys[0]) - m.y(ys[1])) * 1.02;
  for (let i = 0; i < field.x1.length; i++) {
    const color =
      field.label[i] === 0 ? STYLE.mixFill : densityColor(field.rho[i]);
    body.push(
      rect(m.x(field.x1[i]) - cw / 2, m.y(field.x2[i]) - ch / 2, cw, ch, color),
    );
  }
  // hatch mixing cells
  for (let i = 0; i < field.x1.length; i++) {
    if (field.label[i] === 0) {
      const x = m.x(field.x1[i]);
      const y = m.y(field.x2[i]);
      body.push(line(x - cw / 2, y + ch / 2, x + cw / 2, y - ch / 2,
        STYLE.mixHatch, 0.6));
    }
  }
  // quiver restricted to the non-mixing zones, subsampled
  const target = 24;
  const stepx = Math.max(1, Math.floor(xs.length / target));
  let vmax = 1e-12;
  for (let i = 0; i < field.v1.length; i++) {
    if (field.label[i] === 1 || field.label[i] === -1) {
      vmax = Math.max(vmax, Math.hypot(field.v1[i], field.v2[i]));
    }
  }
  const scale = (0.9 * (m.x(xs[stepx]) - m.x(xs[0]))) / vmax;
  const xi = new Map(xs.map((v, i) => [v, i] as const));
  const yi = new Map(ys.map((v, i) => [v, i] as const));
  for (let i = 0; i < field.x1.length; i++) {
    const ix = xi.get(field.x1[i]) ?? 0;
    const iy = yi.get(field.x2[i]) ?? 0;
    if (ix % stepx || iy % stepx) continue;
    if (field.label[i] !== 1 && field.label[i] !== -1) continue;
    body.push(
      arrow(
        m.x(field.x1[i]),
        m.y(field.x2[i]),
        field.v1[i] * scale,
        -field.v2[i] * scale,
        STYLE.quiver,
      ),
    );
  }
  body.push(axes(m, "x1", "x2"));
  return document(body, `density and coarse-grained velocity, t = ${field.t}`);
}

export function pressurePanel(run: RunData): string {
  const field = run.fields[run.fields.length - 1];
  if (!field) throw new Error("no field snapshot available");
  const { xs, ys } = fieldGrid(field);
  const box: Box = {
    x0: xs[0],
    x1: xs[xs.length - 1],
    y0: ys[0],
    y1: ys[ys.length - 1],
  };
  const m = new Mapper(box);
  const body: string[] = [];
  const lo = Math.min(...field.p);
  const hi = Math.max(...field.p);
  const cw = (m.x(xs[1]) - m.x(xs[0])) * 1.02;
  const ch = (m.y(ys[0]) - m.y(ys[1])) * 1.02;
  for (let i = 0; i < field.x1.length; i++) {
    body.push(
      rect(
        m.x(field.x1[i]) - cw / 2,
        m.y(field.x2[i]) - ch / 2,
        cw,
        ch,
        pressureColor(field.p[i], lo, hi),
      ),
    );
  }
  body.push(axes(m, "x1", "x2"));
  body.push(text(STYLE.width - STYLE.margin, 24,
    `p in [${fmt(lo)}, ${fmt(hi)}]`, "end"));
  return document(body, `macroscopic pressure, t = ${field.t}`);
}

export function ladderPanel(ladder: LadderReport): string {
  const log2 = (v: number) => Math.log2(Math.max(v, 1e-300));
  const ts = ladder.times.map(log2);
  let y0 = Infinity,
    y1 = -Infinity;
  for (const e of ladder.entries) {
    for (const v of e.values) {
      y0 = Math.min(y0, log2(v));
      y1 = Math.max(y1, log2(v));
    }
  }
  const box: Box = {
    x0: Math.min(...ts) - 0.5,
    x1: Math.max(...ts) + 0.5,
    y0: y0 - 1,
    y1: y1 + 1,
  };
  const m = new Mapper(box);
  const body: string[] = [axes(m, "log2 t", "log2 value")];
  const colors = ["#1f3f66", "#cc4444", "#44aa44", "#b07830", "#7755aa", "#2aa0a0"];
  ladder.entries.forEach((e, k) => {
    const color = colors[k % colors.length];
    const ys = e.values.map(log2);
    body.push(polyline(ladder.times.map(log2), ys, m, color, 1.5));
    // least-squares fit line and the target-order annotation
    const nfit = ts.length;
    const mx = ts.reduce((a, b) => a + b, 0) / nfit;
    const my = ys.reduce((a, b) => a + b, 0) / nfit;
    let num = 0,
      den = 0;
    for (let i = 0; i < nfit; i++) {
      num += (ts[i] - mx) * (ys[i] - my);
      den += (ts[i] - mx) ** 2;
    }
    const slope = den > 0 ? num / den : 0;
    const xa = box.x0 + 0.2;
    const xb = box.x1 - 0.2;
    body.push(
      line(m.x(xa), m.y(my + slope * (xa - mx)), m.x(xb),
        m.y(my + slope * (xb - mx)), STYLE.ladderFit, 1, "4,3"),
    );
    body.push(
      text(m.x(box.x1) - 4, m.y(ys[0]) + 4 + 14 * k,
        `${e.name}: slope ${fmt(e.slope)} (target ${fmt(e.target)})`, "end", 10),
    );
  });
  return document(body, "order ladders: fitted slopes vs targets");
}

export function diagnosticsPanel(diag: DiagnosticsTable): string {
  const ti = diag.columns.indexOf("t");
  const ei = diag.columns.indexOf("energy");
  const gi = diag.columns.indexOf("guard_margin_min");
  if (ti < 0 || ei < 0) throw new Error("diagnostics missing t/energy columns");
  const ts = diag.rows.map((r) => r[ti]);
  const es = diag.rows.map((r) => Math.log10(Math.max(r[ei], 1e-300)));
  const box: Box = {
    x0: Math.min(...ts),
    x1: Math.max(...ts) || 1,
    y0: Math.min(...es) - 0.5,
    y1: Math.max(...es) + 0.5,
  };
  const m = new Mapper(box);
  const body = [axes(m, "t", "log10 energy")];
  body.push(polyline(ts, es, m, STYLE.pseudoInterface, 1.5));
  if (gi >= 0) {
    const gs = diag.rows.map((r) => r[gi]);
    const gmin = Math.min(...gs);
    body.push(
      text(STYLE.width - STYLE.margin, 24,
        `min guard margin ${fmt(gmin)}`, "end"),
    );
  }
  return document(body, "energy and guard margins along the run");
}

export const PANELS: Record<string, (run: RunData) => string> = {
  interface: interfacePanel,
  field: fieldPanel,
  pressure: pressurePanel,
  ladder: (run) => {
    if (!run.ladder) throw new Error("no ladder report in manifest");
    return ladderPanel(run.ladder);
  },
  diagnostics: (run) => {
    if (!run.diagnostics) throw new Error("no diagnostics in manifest");
    return diagnosticsPanel(run.diagnostics);
  },
};
