"""Delimited-text output formats, config parsing, and the run manifest.

All numbers print with 17 significant digits so files round-trip float64
exactly; headers are `# key: value` lines above a tab-separated table.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

import numpy as np

from .curves import Curve

FMT = "%.17g"


def _fmt(x) -> str:
    return FMT % float(x)


def _write(path, header: dict, columns: list[str], rows: np.ndarray):
    lines = [f"# {k}: {v}" for k, v in header.items()]
    lines.append("\t".join(columns))
    for row in rows:
        lines.append("\t".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _read(path):
    header, columns, data = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                k, _, v = line[2:].partition(": ")
                header[k] = v
            elif columns is None:
                columns = line.split("\t")
            elif line:
                data.append([float(v) for v in line.split("\t")])
    return header, columns, np.asarray(data)


# ----------------------------------------------------------------------------
# curve snapshots


def write_curve(path, curve: Curve, t: float = 0.0):
    header = {
        "format": "curve-snapshot",
        "topology": curve.topology,
        "n": curve.n,
        "ell": _fmt(curve.ell),
        "speed": _fmt(curve.speed),
        "orientation": "clockwise" if curve.topology == "closed-bubble" else "left-to-right",
        "t": _fmt(t),
    }
    rows = np.column_stack([curve.alpha, curve.z.real, curve.z.imag])
    _write(path, header, ["alpha", "z1", "z2"], rows)


def read_curve(path) -> tuple[Curve, float]:
    header, _, data = _read(path)
    z = data[:, 1] + 1j * data[:, 2]
    curve = Curve(topology=header["topology"], ell=float(header["ell"]),
                  z=z, speed=float(header["speed"]))
    return curve, float(header["t"])


# ----------------------------------------------------------------------------
# growth profile


def write_profile(path, profile, curve: Curve):
    comps = ";".join(f"{_fmt(c.alpha1)},{_fmt(c.alpha2)}"
                     for c in profile.components)
    header = {
        "format": "growth-profile",
        "eta": _fmt(profile.eta),
        "s": _fmt(profile.s),
        "delta": _fmt(profile.delta),
        "r": _fmt(profile.r),
        "holder_seminorm": _fmt(profile.holder_seminorm),
        "components": comps,
    }
    rows = np.column_stack([curve.alpha, profile.c, profile.psi0, profile.psi1])
    _write(path, header, ["alpha", "c", "psi0", "psi1"], rows)


# ----------------------------------------------------------------------------
# diagnostics / operator dumps / ladders


def write_diagnostics(path, records: list[dict]):
    keys = []
    for rec in records:
        for k in rec:
            if k not in keys and not k.startswith("_"):
                keys.append(k)
    with open(path, "w") as fh:
        fh.write("# format: diagnostics\n")
        fh.write("\t".join(keys) + "\n")
        for rec in records:
            fh.write("\t".join(
                _fmt(rec[k]) if isinstance(rec.get(k), (int, float))
                else str(rec.get(k, "nan")) for k in keys) + "\n")


def write_operator_dump(path, t, alpha, E, B, D, H, h_values):
    header = {"format": "operator-dump", "t": _fmt(t),
              "h": ";".join(_fmt(v) for v in h_values)}
    rows = np.column_stack([alpha, E.real, E.imag, B.real, B.imag,
                            D.real, D.imag, H])
    _write(path, header, ["alpha", "E_1", "E_2", "B_1", "B_2", "D_1", "D_2", "H"],
           rows)


def write_ladder(path, rows: list[dict], slopes: dict, targets: dict):
    times = [r["t"] for r in rows]
    names = [k for k in rows[0] if k != "t"]
    with open(path, "w") as fh:
        fh.write("# format: ladder-report\n")
        fh.write("# times: " + " ".join(_fmt(t) for t in times) + "\n")
        cols = ["name", "target_slope", "fitted_slope"] + \
            [f"value_t{i}" for i in range(len(times))]
        fh.write("\t".join(cols) + "\n")
        for name in names:
            vals = [r[name] for r in rows]
            fh.write("\t".join([name, _fmt(targets.get(name, 0.0)),
                                _fmt(slopes.get(name, float("nan")))]
                               + [_fmt(v) for v in vals]) + "\n")


def read_ladder(path):
    out = {}
    times = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# times:"):
                times = [float(v) for v in line.split(":")[1].split()]
            elif line.startswith("#") or line.startswith("name\t"):
                continue
            elif line:
                parts = line.split("\t")
                out[parts[0]] = {
                    "target": float(parts[1]),
                    "slope": float(parts[2]),
                    "values": [float(v) for v in parts[3:]],
                }
    return times, out


# ----------------------------------------------------------------------------
# fields and charts


def write_field(path, t, sample):
    labels = {"plus": 1.0, "minus": -1.0, "mix": 0.0, "boundary": 2.0}
    lab = np.array([labels[str(v)] for v in sample.labels])
    header = {"format": "field-snapshot", "t": _fmt(t),
              "labels": "plus=1 minus=-1 mix=0 boundary=2"}
    p = sample.p if getattr(sample, "p", None) is not None \
        else np.zeros(sample.rho.size, dtype=complex)
    rows = np.column_stack([
        sample.points.real, sample.points.imag, lab, sample.rho,
        sample.v.real, sample.v.imag, sample.m.real, sample.m.imag,
        p.real, p.imag,
    ])
    _write(path, header, ["x1", "x2", "label", "rho", "v1", "v2",
                          "m1", "m2", "p", "psi"], rows)


def write_chart(path, chart):
    header = {"format": "mixing-chart", "t": _fmt(chart.t),
              "alpha1": _fmt(chart.component.alpha1),
              "alpha2": _fmt(chart.component.alpha2)}
    rows = []
    for i, lam in enumerate(chart.lambda_grid):
        for j, al in enumerate(chart.alphas):
            rows.append([al, lam, chart.z_lambda[i, j].real,
                         chart.z_lambda[i, j].imag, chart.G[-1, i, j],
                         chart.gamma[i, j].real, chart.gamma[i, j].imag])
    _write(path, header, ["alpha", "lambda", "z1", "z2", "G",
                          "gamma1", "gamma2"], np.asarray(rows))


def write_certificate(path, report):
    with open(path, "w") as fh:
        fh.write("# format: certificate\n")
        fh.write(f"# passed: {report.passed}\n")
        fh.write("name\tmeasured\tbound\tpassed\tnote\n")
        for e in report.entries:
            fh.write(f"{e.name}\t{_fmt(e.measured)}\t{_fmt(e.bound)}\t"
                     f"{int(e.passed)}\t{e.note}\n")
    # human-readable summary alongside
    with open(path + ".summary.txt", "w") as fh:
        width = max(len(e.name) for e in report.entries) + 2
        fh.write(f"certificate: {'PASS' if report.passed else 'FAIL'}\n")
        for e in report.entries:
            fh.write(f"{e.name.ljust(width)} {e.measured: .6e}  "
                     f"bound {e.bound: .3e}  "
                     f"{'pass' if e.passed else 'FAIL'}  {e.note}\n")


def read_certificate_passed(path) -> bool:
    with open(path) as fh:
        for line in fh:
            if line.startswith("# passed:"):
                return line.split(":")[1].strip() == "True"
    return False


# ----------------------------------------------------------------------------
# manifest


def write_manifest(out_dir):
    entries = []
    for name in sorted(os.listdir(out_dir)):
        if name == "MANIFEST.txt" or name.startswith("."):
            continue
        p = os.path.join(out_dir, name)
        if os.path.isfile(p):
            digest = hashlib.sha256(open(p, "rb").read()).hexdigest()
            entries.append((name, digest))
    with open(os.path.join(out_dir, "MANIFEST.txt"), "w") as fh:
        fh.write("# format: run-manifest\n")
        for name, digest in entries:
            fh.write(f"{name}\t{digest}\n")


def read_manifest(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            name, digest = line.rstrip("\n").split("\t")
            out[name] = digest
    return out


# ----------------------------------------------------------------------------
# config


@dataclass
class Config:
    scenario: str = "unit-circle"
    scenario_mode: int = 3
    scenario_amplitude: float = 0.1
    scenario_a1: float = 1.5
    scenario_a2: float = 0.4
    n: int = 512
    eta: float = 0.25
    s: float = 0.25
    delta: float = 1.0
    eps: float = 0.0
    dt: float = 2.5e-3
    t_final: float = 0.02
    output_times: tuple = (0.005, 0.01, 0.02)
    ladder_times: tuple = (0.02, 0.01, 0.005, 0.0025)
    n_levels: int = 1
    field_nx: int = 200
    field_ny: int = 200
    field_margin: float = 0.2
    weak_grids: tuple = (100, 200, 400)
    seed: int = 7
    output_dir: str = "runs/bubble"

    def scenario_params(self) -> dict:
        if self.scenario == "perturbed-circle":
            return {"mode": self.scenario_mode, "amplitude": self.scenario_amplitude}
        if self.scenario == "turned-graph":
            return {"a1": self.scenario_a1, "a2": self.scenario_a2}
        if self.scenario == "stable-graph":
            return {"mode": self.scenario_mode, "amplitude": self.scenario_amplitude}
        return {}


_SCHEMA = {
    "scenario": str, "scenario_mode": int, "scenario_amplitude": float,
    "scenario_a1": float, "scenario_a2": float,
    "n": int, "eta": float, "s": float, "delta": float, "eps": float,
    "dt": float, "t_final": float, "output_times": tuple,
    "ladder_times": tuple, "n_levels": int, "field_nx": int, "field_ny": int,
    "field_margin": float, "weak_grids": tuple, "seed": int, "output_dir": str,
}


class ConfigError(ValueError):
    pass


def parse_config(path_or_text: str, is_text: bool = False) -> Config:
    """Parse the `key = value` run configuration; unknown keys are errors."""
    text = path_or_text if is_text else open(path_or_text).read()
    cfg = Config()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        kind = _SCHEMA[key]
        try:
            if kind is tuple:
                if key == "weak_grids":
                    parsed = tuple(int(v) for v in val.split())
                else:
                    parsed = tuple(float(v) for v in val.split())
            elif kind is int:
                parsed = int(val)
            elif kind is float:
                parsed = float(val)
            else:
                parsed = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}")
        setattr(cfg, key, parsed)
    validate_config(cfg)
    return cfg


def validate_config(cfg: Config):
    if cfg.scenario not in ("unit-circle", "perturbed-circle", "turned-graph",
                            "stable-graph"):
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    if cfg.n < 8 or (cfg.n & (cfg.n - 1)):
        raise ConfigError("n must be a power of two >= 8")
    if not cfg.dt > 0:
        raise ConfigError("dt must be positive")
    if cfg.t_final < 0:
        raise ConfigError("t_final must be nonnegative")
    if cfg.eps < 0:
        raise ConfigError("eps must be nonnegative")
    if not (0 < cfg.eta < 1 and 0 < cfg.s < 1 / 3):
        raise ConfigError("require 0 < eta < 1 and 0 < s < 1/3")
    if cfg.n_levels < 1:
        raise ConfigError("n_levels >= 1 required")
    for t in cfg.output_times:
        if t < 0 or t > cfg.t_final + 1e-12:
            raise ConfigError(f"output time {t} outside [0, t_final]")
        steps = t / cfg.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError(f"output time {t} is not a multiple of dt")
    if len(cfg.ladder_times) >= 1 and len(cfg.ladder_times) < 2:
        raise ConfigError("ladder needs at least two times to fit a slope")


def write_config(path, cfg: Config):
    lines = []
    for key in _SCHEMA:
        val = getattr(cfg, key)
        if isinstance(val, tuple):
            val = " ".join(_fmt(v) if isinstance(v, float) else str(v) for v in val)
        lines.append(f"{key} = {val}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
