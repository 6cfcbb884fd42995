import numpy as np
import pytest

from mixzone import certify, evolution, fields, operators
from mixzone.certify import (CertificateReport, TestFunction, cusp_divergence_check,
                             field_box, geometric_lemma_check, sample_fields,
                             seeded_test_functions, subsolution_certificate,
                             weak_form_residuals)
from mixzone.curves import build_scenario
from mixzone.fields import FieldSlice, LevelSet, eval_G_gamma
from mixzone.growth import build_profile


def test_test_functions_truncated_in_box():
    box = ((-2.0, 2.0), (-2.0, 2.0))
    tfs = seeded_test_functions(box, [0.0, 0.02], seed=7, count=20)
    assert len(tfs) == 20
    edge = np.array([2.0 + 0j, -2.0 + 0.5j, 1.0 + 2j, 0.3 - 2j])
    for tf in tfs:
        assert np.max(np.abs(tf(0.01, edge))) < 1e-12


def test_test_functions_reproducible():
    box = ((-2.0, 2.0), (-2.0, 2.0))
    a = seeded_test_functions(box, [0.0, 0.02], seed=9, count=5)
    b = seeded_test_functions(box, [0.0, 0.02], seed=9, count=5)
    assert all(x.center == y.center and x.width == y.width for x, y in zip(a, b))


def test_weak_form_single_interface_refines(circle256):
    # at the initial time the averaged velocity is the one-interface field;
    # the per-slice residual is pure quadrature error, halving under grid
    # refinement
    curve, prof, ws = circle256
    sl = FieldSlice(t=0.0, z=curve.z.copy(), ws=ws)
    box = field_box(curve)
    tfs = seeded_test_functions(box, [0.0, 1.0], seed=7, count=6)
    from mixzone.operators import dot
    res = {}
    for nx in (100, 200):
        s = sample_fields(sl, box, nx, nx)
        vals = [abs(np.sum(s.weights * dot(s.v, tf.grad(0.0, s.points))))
                for tf in tfs]
        res[nx] = float(np.sqrt(np.mean(np.square(vals))))
    assert res[200] <= res[100] / 2.0
    assert res[200] < 1e-5


def test_cusp_divergence_checks(bubble512, bubble512_traj):
    curve, prof, ws = bubble512
    st = bubble512_traj.state_at(0.02)
    sl = FieldSlice(t=st.t, z=st.z, ws=ws)
    box = field_box(curve)
    tfs = seeded_test_functions(box, [0.0, 0.02], seed=3, count=3)
    rep = cusp_divergence_check(sl, box, 200, tfs)
    assert rep.passed, [(e.name, e.measured) for e in rep.entries if not e.passed]


def test_geometric_lemma_margins_positive(bubble512, bubble512_traj):
    curve, prof, ws = bubble512
    rep = geometric_lemma_check(bubble512_traj.states[:2], ws,
                                bubble512_traj.guards)
    assert rep.passed, [(e.name, e.measured) for e in rep.entries if not e.passed]


def test_certificate_vacuous_on_stable_scenario():
    curve = build_scenario("stable-graph", 128, amplitude=1e-3, mode=3)
    prof = build_profile(curve)
    ws = operators.make_workspace(curve, prof)
    cfg = evolution.RunConfig(dt=5e-3, t_final=0.02,
                              output_times=(0.005, 0.01, 0.015, 0.02))
    traj = evolution.run(curve, prof, cfg, ws=ws)
    rep = subsolution_certificate(traj, ws, LevelSet(1), seed=7,
                                  grids=(40, 80, 160))
    assert rep.passed, [(e.name, e.measured, e.bound) for e in rep.entries
                        if not e.passed]
    assert not any("gamma" in e.name for e in rep.entries)


def test_corrupted_trajectory_detected(circle128_run):
    curve, prof, ws, traj = circle128_run
    st = traj.state_at(0.02)
    bad = st.z.copy()
    bad[17] *= 1.01  # bit-level corruption of one node
    guards = traj.guards
    margins = evolution.evaluate_guards(st.t, bad, ws, guards)
    assert evolution.violated_guard(margins) is not None


def test_guard_stop_matches_offline_check(circle128_run):
    # with an artificially small chord-arc budget, the inline guard and the
    # offline product-chord-arc verification fail at the same step
    curve, prof, ws, traj = circle128_run
    tight = evolution.GuardSet(A=0.5, C=0.1, S=traj.guards.S, R=traj.guards.R)
    cfg = evolution.RunConfig(dt=5e-3, t_final=0.01, output_times=(0.005,),
                              continue_past_guards=True)
    traj2 = evolution.run(curve, prof, cfg, ws=ws, guards=tight)
    inline_fail = [r["t"] for r in traj2.diagnostics if r["ca0_margin"] <= 0]
    offline = geometric_lemma_check(traj2.states, ws, tight)
    offline_fail = [e.name for e in offline.entries
                    if e.name.startswith("product_chord_arc") and not e.passed]
    assert inline_fail and inline_fail[0] == 0.0
    assert offline_fail  # same inequality, independently evaluated, also fails


def test_report_roundtrip(tmp_path):
    from mixzone.io_formats import read_certificate_passed, write_certificate
    rep = CertificateReport(entries=[])
    rep.add("alpha", 1.0, 2.0, True, note="fine")
    rep.add("beta", 3.0, 2.0, False, note="over")
    path = tmp_path / "cert.txt"
    write_certificate(str(path), rep)
    assert read_certificate_passed(str(path)) is False
    assert (tmp_path / "cert.txt.summary.txt").exists()
