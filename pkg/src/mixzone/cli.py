"""Command-line entry points tying the pipeline together.

Subcommands: simulate | fields | verify | ladder.
Exit codes: 0 success, 2 configuration/schema error, 3 missing or
out-of-range inputs, 4 guard violation stopped the run, 5 certificate failed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import certify, evolution, fields, growth, io_formats, operators
from .curves import build_scenario
from .io_formats import Config, ConfigError, parse_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_GUARD = 4
EXIT_CERT = 5


def _load_config(args) -> Config:
    if args.config:
        cfg = parse_config(args.config)
    else:
        cfg = Config()
        io_formats.validate_config(cfg)
    if getattr(args, "output", None):
        cfg.output_dir = args.output
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "levels", None) is not None:
        cfg.n_levels = args.levels
    return cfg


def _build_pipeline(cfg: Config):
    curve = build_scenario(cfg.scenario, cfg.n, **cfg.scenario_params())
    profile = growth.build_profile(curve, cfg.eta, cfg.s, cfg.delta)
    ws = operators.make_workspace(curve, profile)
    return curve, profile, ws


def _run_config(cfg: Config) -> evolution.RunConfig:
    return evolution.RunConfig(dt=cfg.dt, t_final=cfg.t_final, eps=cfg.eps,
                               output_times=tuple(cfg.output_times),
                               ladder_times=tuple(cfg.ladder_times))


def _trajectory_paths(cfg: Config):
    times = sorted(set(list(cfg.output_times) + [0.0, cfg.t_final]))
    return {t: os.path.join(cfg.output_dir, f"curve_t{t:.6f}.txt") for t in times}


def cmd_simulate(args) -> int:
    try:
        cfg = _load_config(args)
        curve, profile, ws = _build_pipeline(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(cfg.output_dir, exist_ok=True)
    io_formats.write_config(os.path.join(cfg.output_dir, "config.txt"), cfg)
    io_formats.write_profile(os.path.join(cfg.output_dir, "profile.txt"),
                             profile, curve)
    traj = evolution.run(curve, profile, _run_config(cfg), ws=ws)
    paths = _trajectory_paths(cfg)
    for st in traj.states:
        for t, path in paths.items():
            if abs(st.t - t) <= 1e-9:
                io_formats.write_curve(path, _state_curve(st, ws), t=st.t)
    io_formats.write_diagnostics(os.path.join(cfg.output_dir, "diagnostics.txt"),
                                 traj.diagnostics)
    io_formats.write_manifest(cfg.output_dir)
    print(f"run: stop={traj.stop_reason} T={traj.achieved_T:g} "
          f"K={evolution.gronwall_rate(traj):.3g} -> {cfg.output_dir}")
    if traj.stop_reason != "completed":
        return EXIT_GUARD
    return EXIT_OK


def _state_curve(st, ws):
    from .curves import Curve
    return Curve(topology=ws.topology, ell=ws.ell, z=st.z,
                 speed=ws.curve0.speed)


def _load_trajectory(cfg: Config, ws):
    """Reload stored curve snapshots as interface states (recomputing F)."""
    paths = _trajectory_paths(cfg)
    states = []
    for t, path in sorted(paths.items()):
        if not os.path.exists(path):
            return None
        curve, t_read = io_formats.read_curve(path)
        F, snap = evolution.eval_F(t_read, curve.z, ws, return_info=True)
        states.append(evolution.InterfaceState(t=t_read, z=curve.z, dzdt=F,
                                               h=snap.h, energy={},
                                               guard_margins={}))
    return states


def cmd_fields(args) -> int:
    try:
        cfg = _load_config(args)
        curve, profile, ws = _build_pipeline(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t = args.time
    paths = _trajectory_paths(cfg)
    match = [tt for tt in paths if abs(tt - t) <= 1e-9]
    if not match or not os.path.exists(paths[match[0]]):
        print(f"no stored trajectory snapshot at t={t}", file=sys.stderr)
        return EXIT_MISSING
    curve_t, t_read = io_formats.read_curve(paths[match[0]])
    levels = fields.LevelSet(cfg.n_levels)
    sl = fields.FieldSlice(t=t_read, z=curve_t.z, ws=ws, levels=levels)
    charts = []
    if t_read > 0 and profile.components:
        F = evolution.eval_F(t_read, curve_t.z, ws)
        charts = [fields.eval_G_gamma(sl, comp, F) for comp in profile.components]
    box = certify.field_box(curve, cfg.field_margin)
    sample = certify.sample_fields(sl, box, cfg.field_nx, cfg.field_ny, charts,
                                   compute_pressure=ws.topology == "closed-bubble")
    field_path = os.path.join(cfg.output_dir,
                              f"fields_t{t_read:.6f}_N{cfg.n_levels}.txt")
    io_formats.write_field(field_path, t_read, sample)
    for i, chart in enumerate(charts):
        io_formats.write_chart(os.path.join(
            cfg.output_dir, f"chart_t{t_read:.6f}_c{i}.txt"), chart)
    io_formats.write_manifest(cfg.output_dir)
    print(f"fields at t={t_read:g} -> {field_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        cfg = _load_config(args)
        curve, profile, ws = _build_pipeline(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    states = _load_trajectory(cfg, ws)
    if states is None:
        print("missing trajectory snapshots; run simulate first", file=sys.stderr)
        return EXIT_MISSING
    run_cfg = _run_config(cfg)
    guards = evolution.default_guards(curve, profile, ws.tau, run_cfg, ws=ws)
    diagnostics = []
    for st in states:
        margins = evolution.evaluate_guards(st.t, st.z, ws, guards)
        energy = evolution.energy_terms(margins, st.z, ws)
        _, snap = evolution.eval_F(st.t, st.z, ws, return_info=True)
        diagnostics.append(evolution.step_diagnostics(
            st.t, st.z, st.dzdt, snap, ws, margins, energy))
    traj = evolution.Trajectory(states=states, diagnostics=diagnostics,
                                guards=guards, achieved_T=states[-1].t,
                                stop_reason="reloaded")
    levels = fields.LevelSet(cfg.n_levels)
    report = certify.subsolution_certificate(traj, ws, levels, seed=cfg.seed,
                                             grids=tuple(cfg.weak_grids))
    os.makedirs(cfg.output_dir, exist_ok=True)
    cert_path = os.path.join(cfg.output_dir, "certificate.txt")
    io_formats.write_certificate(cert_path, report)
    io_formats.write_manifest(cfg.output_dir)
    print(f"certificate: {'PASS' if report.passed else 'FAIL'} -> {cert_path}")
    return EXIT_OK if report.passed else EXIT_CERT


def cmd_ladder(args) -> int:
    try:
        cfg = _load_config(args)
        if len(cfg.ladder_times) < 2:
            raise ConfigError("ladder needs at least two dyadic times")
        curve, profile, ws = _build_pipeline(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    times = sorted(cfg.ladder_times)
    run_cfg = evolution.RunConfig(dt=cfg.dt, t_final=max(times),
                                  eps=cfg.eps, output_times=tuple(times))
    traj = evolution.run(curve, profile, run_cfg, ws=ws)
    if traj.stop_reason != "completed":
        print(f"run stopped early: {traj.stop_reason}", file=sys.stderr)
        return EXIT_GUARD
    rows = [evolution.ladder_quantities(st.t, st.z, ws)
            for st in traj.states if st.t > 0 and st.t in times]
    slopes = evolution.ladder_slopes(rows)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "ladder.txt")
    io_formats.write_ladder(path, rows, slopes, evolution.LADDER_TARGETS)
    io_formats.write_manifest(cfg.output_dir)
    for name, target in evolution.LADDER_TARGETS.items():
        print(f"{name}: slope {slopes[name]:.3f} (target >= {target})")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mixzone",
        description="mixing-zone subsolution simulator and verifier")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("simulate", cmd_simulate), ("fields", cmd_fields),
                     ("verify", cmd_verify), ("ladder", cmd_ladder)):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--output", default=None)
        p.add_argument("--seed", type=int, default=None)
        if name == "fields":
            p.add_argument("--time", type=float, required=True)
            p.add_argument("--levels", type=int, default=None)
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
