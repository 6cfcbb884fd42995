export interface CurveSnapshot {
  t: number;
  topology: string;
  n: number;
  ell: number;
  alpha: number[];
  z1: number[];
  z2: number[];
}

export interface FieldSnapshot {
  t: number;
  x1: number[];
  x2: number[];
  label: number[]; // plus=1 minus=-1 mix=0 boundary=2
  rho: number[];
  v1: number[];
  v2: number[];
  m1: number[];
  m2: number[];
  p: number[];
  psi: number[];
}

export interface ChartSnapshot {
  t: number;
  alpha: number[];
  lambda: number[];
  z1: number[];
  z2: number[];
  gamma1: number[];
  gamma2: number[];
}

export interface LadderEntry {
  name: string;
  target: number;
  slope: number;
  values: number[];
}

export interface LadderReport {
  times: number[];
  entries: LadderEntry[];
}

export interface DiagnosticsTable {
  columns: string[];
  rows: number[][];
}

export interface RunData {
  dir: string;
  curves: CurveSnapshot[];
  fields: FieldSnapshot[];
  charts: ChartSnapshot[];
  ladder: LadderReport | null;
  diagnostics: DiagnosticsTable | null;
}
