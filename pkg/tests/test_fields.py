import numpy as np
import pytest

from mixzone import evolution, fields, operators, spectral
from mixzone.curves import build_scenario
from mixzone.fields import (LABEL_MIX, FieldSlice, LevelSet, boundary_traces,
                            eval_density, eval_G_gamma, eval_momentum,
                            eval_pressure_stream, eval_velocity,
                            gamma_at_points, staircase_density, winding_index)
from mixzone.growth import SCAN_REL, build_profile
from mixzone.operators import dot


@pytest.fixture(scope="module")
def slice512_t001(bubble512, bubble512_traj):
    curve, prof, ws = bubble512
    st = bubble512_traj.state_at(0.01)
    sl = FieldSlice(t=st.t, z=st.z, ws=ws)
    charts = [eval_G_gamma(sl, comp, st.dzdt) for comp in prof.components]
    return sl, charts


def test_levelset_lambdas_exact():
    ls = LevelSet(2)
    assert ls.lambdas == (-1.0, -1 / 3, 1 / 3, 1.0)
    assert ls.positive == (1 / 3, 1.0)
    for n in (1, 2, 5):
        pos = LevelSet(n).positive
        assert pos[-1] == 1.0
        assert np.mean(pos) == pytest.approx(n / (2 * n - 1), rel=1e-14)


def test_winding_anchors(circle256):
    curve, prof, ws = circle256
    sl = FieldSlice(t=0.0, z=curve.z.copy(), ws=ws)
    raw, rnd = winding_index(sl.curves[1.0], sl.dcurves[1.0], ws.ell,
                             ws.topology, np.array([0.0j, 3.0 + 0j]))
    assert rnd[0] == 1.0 and rnd[1] == 0.0
    assert np.max(np.abs(raw - rnd)) < 1e-10


def test_winding_periodic_below_half(turned512):
    curve, prof = turned512
    ws = operators.make_workspace(curve, prof)
    sl = FieldSlice(t=0.0, z=curve.z.copy(), ws=ws)
    raw, rnd = winding_index(sl.curves[1.0], sl.dcurves[1.0], ws.ell,
                             ws.topology, np.array([-5.0j, 5.0j]))
    assert rnd[0] == 0.5 and rnd[1] == -0.5
    assert np.max(np.abs(raw - rnd)) < 1e-8


def test_density_staircase_radial_oracle(slice512_t001, bubble512):
    # closed-form check: for the near-circular bubble, the band ordering is
    # radial, so the level position follows from the point radius
    curve, prof, ws = bubble512
    sl, charts = slice512_t001
    j = int(np.argmax(prof.c))
    al = curve.alpha[j]
    for n_lev in (1, 2):
        sln = FieldSlice(t=sl.t, z=sl.z, ws=ws, levels=LevelSet(n_lev))
        lams = (-0.99, -0.55, 0.0, 0.55, 0.99)
        pts = np.array([sl.z[j] - lam * sl.t * 1j * prof.c_tau[j] for lam in lams])
        rho, lab = eval_density(sln, pts, refine=True)
        expect = staircase_density(LevelSet(n_lev), np.array(lams))
        assert np.array_equal(rho, expect)
    # crossing one level curve changes the staircase by exactly 2/|L| = 1/N
    ls = LevelSet(2)
    vals = staircase_density(ls, np.array([-1.4, -0.66, 0.0, 0.66, 1.4]))
    assert np.allclose(vals, [-1.0, -0.5, 0.0, 0.5, 1.0])
    assert np.allclose(np.diff(vals), 1.0 / ls.n_levels)


def test_density_values_n2(slice512_t001, bubble512):
    curve, prof, ws = bubble512
    sl, _ = slice512_t001
    sln = FieldSlice(t=sl.t, z=sl.z, ws=ws, levels=LevelSet(2))
    j = int(np.argmax(prof.c))
    # probes outside, in each band, and inside
    lams = (1.5, 0.66, 0.0, -0.66, -1.5)
    pts = np.array([sl.z[j] - lam * sl.t * 1j * prof.c_tau[j] for lam in lams])
    rho, lab = eval_density(sln, pts, refine=True)
    assert np.allclose(rho, [1.0, 0.5, 0.0, -0.5, -1.0])


def test_velocity_anchor_and_far_field(circle256):
    curve, prof, ws = circle256
    sl = FieldSlice(t=0.0, z=curve.z.copy(), ws=ws)
    v0 = eval_velocity(sl, np.array([0.0j]))
    assert abs(v0[0] + 1j) < 1e-10
    vals = []
    for R in (10.0, 20.0, 40.0):
        vals.append(abs(eval_velocity(sl, np.array([R + 0j]))[0]))
    slope = np.polyfit(np.log(\
        [10.0, 20.0, 40.0]), np.log(vals), 1)[0]
    assert slope <= -1.9


def test_trace_identities(bubble512, bubble512_traj):
    curve, prof, ws = bubble512
    for t in (0.0, 0.01):
        z = curve.z.copy() if t == 0 else bubble512_traj.state_at(t).z
        sl = FieldSlice(t=t, z=z, ws=ws)
        tr = boundary_traces(sl)
        worst_normal = max(np.max(np.abs(v)) for v in tr.normal_resid.values())
        worst_jump = max(np.max(np.abs(v)) for v in tr.jump_resid.values())
        assert worst_normal <= 1e-8
        assert worst_jump <= 1e-12


def test_trace_offcurve_approach_first_order(slice512_t001):
    sl, charts = slice512_t001
    tr = boundary_traces(sl)
    j = int(np.argmax(sl.ws.profile.c))
    outward = sl.curves[-1.0][j] / abs(sl.curves[-1.0][j])
    errs = []
    ds = (4e-3, 2e-3, 1e-3)
    for d in ds:
        x = sl.curves[-1.0][j] + d * outward
        v = eval_velocity(sl, np.array([x]), refine_dist=1.0)
        errs.append(abs(v[0] - tr.v_minus_minus[j]))
    slope = np.polyfit(np.log(ds), np.log(errs), 1)[0]
    assert slope >= 0.9  # first-order approach in the distance


def test_gamma_chart_bounds(slice512_t001):
    sl, charts = slice512_t001
    for ch in charts:
        assert ch.max_gamma < 0.5
        assert ch.gpm_resid <= 1e-8
        assert ch.jacobian_min > 0


def test_gamma_lambda_derivative_two_paths(slice512_t001, bubble512):
    # dG/dlambda from the chart's linear structure against finite differences
    sl, charts = slice512_t001
    ch = charts[0]
    dlam = ch.lambda_grid[1] - ch.lambda_grid[0]
    fd = (ch.G[-1, 2, :] - ch.G[-1, 0, :]) / (2 * dlam)
    assert np.max(np.abs(fd - ch.G1[-1][ch.idx])) < 1e-11


def test_gamma_divergence_free(slice512_t001, bubble512):
    curve, prof, ws = bubble512
    sl, charts = slice512_t001
    ch = charts[0]
    scan = np.where(prof.c[ch.idx] >= 0.3 * prof.c.max())[0][::24]
    al = ch.alphas[scan]
    cv = spectral.trig_eval(prof.c, ws.ell, al).real
    pts = (spectral.trig_eval(sl.z, ws.ell, al)
           - 0.3 * sl.t * spectral.trig_eval(prof.c_tau, ws.ell, al) * 1j)
    h = 0.02 * sl.t * cv
    g = lambda q: gamma_at_points(sl, charts, q)[0]
    gx = (g(pts + h) - g(pts - h)) / (2 * h)
    gy = (g(pts + 1j * h) - g(pts - 1j * h)) / (2 * h)
    assert np.max(np.abs(gx.real + gy.imag)) <= 1e-4


def test_momentum_identities(slice512_t001, bubble512):
    curve, prof, ws = bubble512
    sl, charts = slice512_t001
    j = int(np.argmax(prof.c))
    mix_pt = sl.z[j]
    far_out = 3.0 + 0.0j
    deep_in = 0.05 + 0.05j
    m, rho, v, lab = eval_momentum(sl, np.array([far_out, deep_in, mix_pt]),
                                   charts, refine_velocity=True)
    assert rho[0] == -1 and np.max(np.abs(m[0] - rho[0] * v[0])) < 1e-14
    assert rho[1] == 1 and np.max(np.abs(m[1] - rho[1] * v[1])) < 1e-14
    assert lab[2] == LABEL_MIX and rho[2] == 0.0
    gam, found, _ = gamma_at_points(sl, charts, np.array([mix_pt]))
    assert found[0]
    assert abs(m[2] - (-(gam[0] + 0.5j))) < 1e-12


def test_hull_inequality_strict(slice512_t001, bubble512):
    curve, prof, ws = bubble512
    sl, charts = slice512_t001
    ch = charts[0]
    scan = prof.c[ch.idx] >= SCAN_REL * prof.c.max()
    al = ch.alphas[scan][::8]
    pts = np.concatenate([
        spectral.trig_eval(sl.z, ws.ell, al)
        - lam * sl.t * spectral.trig_eval(prof.c_tau, ws.ell, al) * 1j
        for lam in (-0.7, 0.0, 0.7)])
    m, rho, v, lab = eval_momentum(sl, pts, charts, refine_velocity=True)
    mix = lab == LABEL_MIX
    assert mix.sum() == pts.size
    lhs = np.abs(2 * (m - rho * v) + (1 - rho ** 2) * 1j)
    assert np.all(lhs[mix] < (1 - rho[mix] ** 2))


def test_velocity_divergence_and_curl_free(circle256):
    curve, prof, ws = circle256
    sl = FieldSlice(t=0.0, z=curve.z.copy(), ws=ws)
    rng = np.random.default_rng(3)
    pts = []
    while len(pts) < 20:
        x = rng.uniform(-1.8, 1.8) + 1j * rng.uniform(-1.8, 1.8)
        if abs(abs(x) - 1.0) > 0.15:
            pts.append(x)
    pts = np.array(pts)
    h = 1e-4
    vx = (eval_velocity(sl, pts + h) - eval_velocity(sl, pts - h)) / (2 * h)
    vy = (eval_velocity(sl, pts + 1j * h) - eval_velocity(sl, pts - 1j * h)) / (2 * h)
    assert np.max(np.abs(vx.real + vy.imag)) < 1e-6   # divergence
    assert np.max(np.abs(vy.real - vx.imag)) < 1e-6   # curl


def test_pressure_checks(slice512_t001):
    sl, charts = slice512_t001
    rng = np.random.default_rng(5)
    pts = []
    while len(pts) < 50:
        x = rng.uniform(-1.9, 1.9) + 1j * rng.uniform(-1.9, 1.9)
        if abs(abs(x) - 1.0) > 0.12:
            pts.append(x)
    pts = np.array(pts)
    h = 1e-4
    P = lambda q: eval_pressure_stream(sl, q)
    grad = (P(pts + h) - P(pts - h)) / (2 * h) \
        + 1j * (P(pts + 1j * h) - P(pts - 1j * h)) / (2 * h)
    rho, _ = eval_density(sl, pts)
    assert np.max(np.abs(grad + 1j * rho)) <= 1e-4
    psi = lambda q: eval_pressure_stream(sl, q).imag
    v_fd = -(psi(pts + 1j * h) - psi(pts - 1j * h)) / (2 * h) \
        + 1j * (psi(pts + h) - psi(pts - h)) / (2 * h)
    v = eval_velocity(sl, pts)
    assert np.max(np.abs(v_fd - v)) / np.max(np.abs(v)) <= 1e-4
    far = eval_pressure_stream(sl, np.array([40.0 + 0j, 80.0 + 0j]),
                               include_background=False)
    assert abs(far[1]) < abs(far[0]) < 0.1  # potential decays off closed curves


def test_dirac_density_identity(slice512_t001, bubble512):
    curve, prof, ws = bubble512
    sl, charts = slice512_t001
    x0, w = 0.3 + 0.8j, 0.35
    phi = lambda q: np.exp(-np.abs(q - x0) ** 2 / (2 * w * w))
    diffs = []
    for ngrid in (201, 401):
        gx = np.linspace(-1.8, 1.8, ngrid)
        G = (gx[:, None] + 1j * gx[None, :]).ravel()
        rho, _ = eval_density(sl, G)
        d1phi = (phi(G + 1e-6) - phi(G - 1e-6)) / 2e-6
        lhs = np.sum(rho * d1phi) * (gx[1] - gx[0]) ** 2
        h = ws.ell / curve.n
        rhs = -sum(np.sum(sl.dcurves[a].imag * phi(sl.curves[a])) * h
                   for a in (1.0, -1.0))
        diffs.append(abs(lhs - rhs))
    assert diffs[-1] < 2e-3
    assert diffs[-1] <= diffs[0]
