import warnings

import numpy as np
import pytest

from mixzone import curves, evolution, growth, operators

warnings.filterwarnings("ignore", message="mollification radius")


@pytest.fixture(scope="session")
def circle256():
    curve = curves.build_scenario("unit-circle", 256)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        profile = growth.build_profile(curve)
    ws = operators.make_workspace(curve, profile)
    return curve, profile, ws


@pytest.fixture(scope="session")
def bubble512():
    curve = curves.build_scenario("unit-circle", 512)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        profile = growth.build_profile(curve)
    ws = operators.make_workspace(curve, profile)
    return curve, profile, ws


@pytest.fixture(scope="session")
def bubble512_traj(bubble512):
    curve, profile, ws = bubble512
    cfg = evolution.RunConfig(
        dt=2.5e-3, t_final=0.02,
        output_times=tuple(np.arange(1, 9) * 2.5e-3))
    traj = evolution.run(curve, profile, cfg, ws=ws)
    assert traj.stop_reason == "completed"
    return traj


@pytest.fixture(scope="session")
def turned512():
    curve = curves.build_scenario("turned-graph", 512)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        profile = growth.build_profile(curve)
    return curve, profile


@pytest.fixture(scope="session")
def circle128_run():
    curve = curves.build_scenario("unit-circle", 128)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        profile = growth.build_profile(curve)
    ws = operators.make_workspace(curve, profile)
    cfg = evolution.RunConfig(dt=5e-3, t_final=0.02, output_times=(0.01, 0.02))
    traj = evolution.run(curve, profile, cfg, ws=ws)
    return curve, profile, ws, traj
