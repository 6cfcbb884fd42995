#!/usr/bin/env python3
"""Grid- and step-size self-convergence of the pseudo-interface evolution."""

import numpy as np

from mixzone import evolution, operators
from mixzone.curves import build_scenario
from mixzone.growth import build_profile


def dt_study(n=128, T=8e-3):
    curve = build_scenario("unit-circle", n)
    prof = build_profile(curve)
    ws = operators.make_workspace(curve, prof)
    finals = {}
    for dt in (1e-3, 5e-4, 2.5e-4, 1.25e-4):
        cfg = evolution.RunConfig(dt=dt, t_final=T)
        finals[dt] = evolution.run(curve, prof, cfg, ws=ws).states[-1].z
    ref = finals[1.25e-4]
    print("dt self-convergence (errors vs dt/8 reference):")
    for dt in (1e-3, 5e-4, 2.5e-4):
        print(f"  dt={dt:g}: {np.max(np.abs(finals[dt] - ref)):.3e}")


def grid_study(T=5e-3, dt=1.25e-3):
    print("grid self-convergence of the terminal curve (odd nodes match):")
    prev = None
    for n in (128, 256, 512):
        curve = build_scenario("unit-circle", n)
        prof = build_profile(curve)
        ws = operators.make_workspace(curve, prof)
        cfg = evolution.RunConfig(dt=dt, t_final=T)
        zT = evolution.run(curve, prof, cfg, ws=ws).states[-1].z
        if prev is not None:
            print(f"  n={n//2}->{n}: {np.max(np.abs(zT[::2] - prev)):.3e}")
        prev = zT


if __name__ == "__main__":
    import warnings
    warnings.simplefilter("ignore")
    dt_study()
    grid_study()
