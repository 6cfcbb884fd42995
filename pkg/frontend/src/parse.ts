import * as fs from "fs";
import * as path from "path";

import {
  ChartSnapshot,
  CurveSnapshot,
  DiagnosticsTable,
  FieldSnapshot,
  LadderReport,
  RunData,
} from "./types";

interface Table {
  header: Record<string, string>;
  columns: string[];
  data: number[][];
}

export function parseTable(text: string): Table {
  const header: Record<string, string> = {};
  let columns: string[] | null = null;
  const data: number[][] = [];
  for (const raw of text.split("\n")) {
    const line = raw.trimEnd();
    if (line.startsWith("# ")) {
      const idx = line.indexOf(": ");
      if (idx > 0) header[line.slice(2, idx)] = line.slice(idx + 2);
    } else if (line.length && columns === null) {
      columns = line.split("\t");
    } else if (line.length) {
      const row = line.split("\t").map(Number);
      if (row.some((v) => Number.isNaN(v))) {
        throw new Error(`unparseable data row: ${line.slice(0, 60)}`);
      }
      data.push(row);
    }
  }
  if (!columns) throw new Error("table has no column line");
  return { header, columns, data };
}

function col(t: Table, name: string): number[] {
  const i = t.columns.indexOf(name);
  if (i < 0) throw new Error(`missing column ${name}`);
  return t.data.map((r) => r[i]);
}

export function parseCurve(text: string): CurveSnapshot {
  const t = parseTable(text);
  if (t.header["format"] !== "curve-snapshot") {
    throw new Error("not a curve snapshot");
  }
  return {
    t: Number(t.header["t"]),
    topology: t.header["topology"],
    n: Number(t.header["n"]),
    ell: Number(t.header["ell"]),
    alpha: col(t, "alpha"),
    z1: col(t, "z1"),
    z2: col(t, "z2"),
  };
}

export function parseField(text: string): FieldSnapshot {
  const t = parseTable(text);
  if (t.header["format"] !== "field-snapshot") {
    throw new Error("not a field snapshot");
  }
  return {
    t: Number(t.header["t"]),
    x1: col(t, "x1"),
    x2: col(t, "x2"),
    label: col(t, "label"),
    rho: col(t, "rho"),
    v1: col(t, "v1"),
    v2: col(t, "v2"),
    m1: col(t, "m1"),
    m2: col(t, "m2"),
    p: col(t, "p"),
    psi: col(t, "psi"),
  };
}

export function parseChart(text: string): ChartSnapshot {
  const t = parseTable(text);
  if (t.header["format"] !== "mixing-chart") {
    throw new Error("not a mixing chart");
  }
  return {
    t: Number(t.header["t"]),
    alpha: col(t, "alpha"),
    lambda: col(t, "lambda"),
    z1: col(t, "z1"),
    z2: col(t, "z2"),
    gamma1: col(t, "gamma1"),
    gamma2: col(t, "gamma2"),
  };
}

export function parseLadder(text: string): LadderReport {
  const lines = text.split("\n");
  let times: number[] = [];
  const entries = [];
  for (const line of lines) {
    if (line.startsWith("# times:")) {
      times = line.slice(8).trim().split(/\s+/).map(Number);
    } else if (line.startsWith("#") || line.startsWith("name\t") || !line.trim()) {
      continue;
    } else {
      const parts = line.split("\t");
      entries.push({
        name: parts[0],
        target: Number(parts[1]),
        slope: Number(parts[2]),
        values: parts.slice(3).map(Number),
      });
    }
  }
  if (!times.length || !entries.length) throw new Error("empty ladder report");
  return { times, entries };
}

export function parseDiagnostics(text: string): DiagnosticsTable {
  const lines = text.split("\n").filter((l) => l.trim().length);
  const start = lines.findIndex((l) => !l.startsWith("#"));
  const columns = lines[start].split("\t");
  const rows = lines.slice(start + 1).map((l) => l.split("\t").map(Number));
  return { columns, rows };
}

export function readManifest(manifestPath: string): string[] {
  const text = fs.readFileSync(manifestPath, "utf-8");
  const names: string[] = [];
  for (const line of text.split("\n")) {
    if (line.startsWith("#") || !line.trim()) continue;
    names.push(line.split("\t")[0]);
  }
  return names;
}

export function loadRun(manifestPath: string): RunData {
  const dir = path.dirname(manifestPath);
  const names = readManifest(manifestPath);
  const read = (name: string) => fs.readFileSync(path.join(dir, name), "utf-8");
  const curves = names
    .filter((n) => n.startsWith("curve_t"))
    .map((n) => parseCurve(read(n)))
    .sort((a, b) => a.t - b.t);
  const fields = names
    .filter((n) => n.startsWith("fields_t"))
    .map((n) => parseField(read(n)))
    .sort((a, b) => a.t - b.t);
  const charts = names
    .filter((n) => n.startsWith("chart_t"))
    .map((n) => parseChart(read(n)))
    .sort((a, b) => a.t - b.t);
  const ladder = names.includes("ladder.txt")
    ? parseLadder(read("ladder.txt"))
    : null;
  const diagnostics = names.includes("diagnostics.txt")
    ? parseDiagnostics(read("diagnostics.txt"))
    : null;
  if (!curves.length) throw new Error("manifest lists no curve snapshots");
  return { dir, curves, fields, charts, ladder, diagnostics };
}
