"""Numerical certification: weak-form residuals, divergence checks on the
cusped mixing domain, geometric inequalities, and the subsolution roll-up.

Every randomized ingredient is seeded; every tolerance is paired with a
refinement ratio so a miss can be classified as discretization-limited
rather than a violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .curves import GUARD_LAMBDAS, TOPOLOGY_CLOSED
from .evolution import GuardSet, eval_F
from .fields import (LABEL_BOUNDARY, LABEL_MIX, FieldSlice, LevelSet,
                     MixingChart, boundary_traces, eval_G_gamma, eval_density,
                     eval_momentum, eval_velocity, gamma_at_points)
from .growth import SCAN_REL, admissibility_scan, verify_growth_bounds
from .operators import OperatorWorkspace, dot


@dataclass(frozen=True)
class TestFunction:
    """Gaussian space-time bump, truncated below 1e-12 inside the box."""

    center: complex
    t_center: float
    width: float
    t_width: float
    amplitude: float = 1.0

    def __call__(self, t, x):
        u = np.abs(x - self.center) ** 2 / (2 * self.width ** 2)
        s = (t - self.t_center) ** 2 / (2 * self.t_width ** 2)
        return self.amplitude * np.exp(-(u + s))

    def dt(self, t, x):
        return self(t, x) * (-(t - self.t_center) / self.t_width ** 2)

    def grad(self, t, x):
        return self(t, x) * (-(x - self.center) / self.width ** 2)

    def grad_perp(self, t, x):
        return 1j * self.grad(t, x)


def seeded_test_functions(box, times, seed: int, count: int = 20):
    """Bumps supported (to 1e-12) inside the space-time box."""
    rng = np.random.default_rng(seed)
    (x0, x1), (y0, y1) = box
    t0, t1 = min(times), max(times)
    out = []
    # the 1e-12 envelope needs ~7.4 sigmas to the box edge; the time profile
    # is kept wide so the fixed snapshot quadrature resolves it
    sig = 7.4
    for _ in range(count):
        w = rng.uniform(0.025, 0.05) * min(x1 - x0, y1 - y0)
        cx = rng.uniform(x0 + sig * w, x1 - sig * w)
        cy = rng.uniform(y0 + sig * w, y1 - sig * w)
        tw = max((t1 - t0), 1e-6) * rng.uniform(4.0, 8.0)
        tc = rng.uniform(t0, t1)
        out.append(TestFunction(center=cx + 1j * cy, t_center=tc, width=w,
                                t_width=tw))
    return out


@dataclass
class CheckEntry:
    name: str
    measured: float
    bound: float
    passed: bool
    note: str = ""
    params: dict = field(default_factory=dict)


@dataclass
class CertificateReport:
    entries: list

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, name, measured, bound, passed, note="", **params):
        self.entries.append(CheckEntry(name=name, measured=float(measured),
                                       bound=float(bound), passed=bool(passed),
                                       note=note, params=params))

    def extend(self, other: "CertificateReport"):
        self.entries.extend(other.entries)


# ----------------------------------------------------------------------------
# field sampling on rectangular grids


def field_box(curve, margin: float = 0.2):
    z = curve.z
    x0, x1 = float(z.real.min()), float(z.real.max())
    y0, y1 = float(z.imag.min()), float(z.imag.max())
    dx, dy = x1 - x0, y1 - y0
    # nearly flat interfaces need fluid on both sides of the curve
    if dy < 0.4 * dx:
        pad = 0.2 * dx
        y0, y1 = y0 - pad, y1 + pad
        dy = y1 - y0
    if dx < 0.4 * dy:
        pad = 0.2 * dy
        x0, x1 = x0 - pad, x1 + pad
        dx = x1 - x0
    return ((x0 - margin * dx, x1 + margin * dx),
            (y0 - margin * dy, y1 + margin * dy))


@dataclass
class FieldSample:
    t: float
    points: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    m: np.ndarray
    labels: np.ndarray
    weights: np.ndarray  # tensor quadrature weights
    p: np.ndarray | None = None  # pressure + i*stream, when requested


def sample_fields(sl: FieldSlice, box, nx: int, ny: int,
                  charts: list[MixingChart] | None = None,
                  compute_pressure: bool = False) -> FieldSample:
    (x0, x1), (y0, y1) = box
    gx = np.linspace(x0, x1, nx)
    gy = np.linspace(y0, y1, ny)
    pts = (gx[:, None] + 1j * gy[None, :]).ravel()
    wx = np.full(nx, (x1 - x0) / (nx - 1))
    wx[[0, -1]] *= 0.5
    wy = np.full(ny, (y1 - y0) / (ny - 1))
    wy[[0, -1]] *= 0.5
    wts = (wx[:, None] * wy[None, :]).ravel()
    cell = max((x1 - x0) / (nx - 1), (y1 - y0) / (ny - 1))
    if charts is None:
        charts = []
    m, rho, v, labels = eval_momentum(sl, pts, charts, cell=cell)
    p = None
    if compute_pressure and sl.ws.topology == TOPOLOGY_CLOSED:
        from .fields import eval_pressure_stream
        p = eval_pressure_stream(sl, pts)
    return FieldSample(t=sl.t, points=pts, rho=rho, v=v, m=m, labels=labels,
                       weights=wts, p=p)


# ----------------------------------------------------------------------------
# weak-form residuals


def weak_form_residuals(samples: list[FieldSample], test_functions,
                        rho0_sample: FieldSample) -> dict:
    """RMS residuals of the three relaxed weak identities over the bumps."""
    times = [s.t for s in samples]
    res1, res2, res3 = [], [], []
    scale1 = scale2 = scale3 = 0.0
    for tf in test_functions:
        vals1, vals2, vals3 = [], [], []
        for s in samples:
            m_flux = (s.rho * tf.dt(s.t, s.points)
                      + dot(s.m, tf.grad(s.t, s.points)))
            vals1.append(np.sum(s.weights * m_flux))
            vals2.append(np.sum(s.weights * dot(s.v, tf.grad(s.t, s.points))))
            vals3.append(np.sum(s.weights * dot(s.v + 1j * s.rho,
                                                tf.grad_perp(s.t, s.points))))
            dt_span = max(times) - min(times) if len(times) > 1 else 1.0
            scale1 = max(scale1, np.sum(s.weights * np.abs(m_flux)) * dt_span)
            scale2 = max(scale2, np.sum(
                s.weights * np.abs(s.v) * np.abs(tf.grad(s.t, s.points))) * dt_span)
            scale3 = max(scale3, np.sum(
                s.weights * (np.abs(s.v) + 1) * np.abs(tf.grad(s.t, s.points)))
                * dt_span)
        t_arr = np.array(times)
        trap = getattr(np, "trapezoid", None) or np.trapz
        uniform = (t_arr.size >= 3 and t_arr.size % 2 == 1
                   and np.allclose(np.diff(t_arr), t_arr[1] - t_arr[0]))

        def time_int(vals):
            vals = np.array(vals)
            if uniform:  # composite Simpson
                dt_u = t_arr[1] - t_arr[0]
                return float(dt_u / 3 * (vals[0] + vals[-1]
                                         + 4 * vals[1:-1:2].sum()
                                         + 2 * vals[2:-2:2].sum()))
            return float(trap(vals, t_arr))
        s_end = samples[-1]
        side = (np.sum(s_end.weights * s_end.rho * tf(s_end.t, s_end.points))
                - np.sum(rho0_sample.weights * rho0_sample.rho
                         * tf(rho0_sample.t, rho0_sample.points)))
        res1.append(abs(time_int(vals1) - side))
        res2.append(abs(time_int(vals2)))
        res3.append(abs(time_int(vals3)))
    return {
        "transport": float(np.sqrt(np.mean(np.square(res1)))),
        "incompressibility": float(np.sqrt(np.mean(np.square(res2)))),
        "rotation": float(np.sqrt(np.mean(np.square(res3)))),
        "_scales": {"transport": scale1, "incompressibility": scale2,
                    "rotation": scale3},
    }


def weak_form_refinement(slices: list[FieldSlice], box, grids, seed: int,
                         charts_by_time=None, count: int = 20) -> CertificateReport:
    """Residual decay across space-grid halvings (the binding acceptance test)."""
    times = [sl.t for sl in slices]
    tfs = seeded_test_functions(box, times, seed, count)
    rows = {}
    for nx in grids:
        samples = []
        for sl in slices:
            charts = None if charts_by_time is None else charts_by_time.get(sl.t)
            samples.append(sample_fields(sl, box, nx, nx, charts))
        rows[nx] = weak_form_residuals(samples, tfs, samples[0])
    rep = CertificateReport(entries=[])
    for key in ("transport", "incompressibility", "rotation"):
        vals = [rows[nx][key] for nx in grids]
        ratios = [vals[i] / max(vals[i + 1], 1e-300) for i in range(len(vals) - 1)]
        scale = max(rows[nx]["_scales"][key] for nx in grids)
        rel = vals[-1] / max(scale, 1e-300)
        # a residual already at 1e-4 of the identity's own magnitude counts
        # as verified even when grid alignment masks the decay (flat graphs)
        small = rel <= 1e-4
        rep.add(f"weak_{key}_ratio", min(ratios), 2.0,
                small or min(ratios) >= 2.0,
                note=(f"relative residual {rel:.1e} at the finest grid; "
                      if small and min(ratios) < 2.0 else "")
                + f"residuals {['%.3e' % v for v in vals]} on grids {list(grids)}")
    return rep


# ----------------------------------------------------------------------------
# cusped-domain divergence checks


def cusp_divergence_check(sl: FieldSlice, box, nx: int, test_functions,
                          traces=None) -> CertificateReport:
    """Volume integrals against the two boundary lines of the splitting lemma."""
    rep = CertificateReport(entries=[])
    if traces is None:
        traces = boundary_traces(sl)
    sample = sample_fields(sl, box, nx, nx)
    prof = sl.ws.profile
    h = sl.ws.ell / sl.n
    stable = ~prof.support_mask
    mix = prof.support_mask
    za, zm = sl.curves[1.0], sl.curves[-1.0]
    dza, dzm = sl.dcurves[1.0], sl.dcurves[-1.0]
    for i, tf in enumerate(test_functions):
        phi = lambda x: tf(sl.t, x)
        # density as a horizontal vector field: both boundary curves carry
        # the jump (they coincide over the stable region)
        vol = np.sum(sample.weights * sample.rho * tf.grad(sl.t, sample.points).real)
        line = -np.sum(dza.imag * phi(za)) * h - np.sum(dzm.imag * phi(zm)) * h
        rep.add(f"cusp_density_{i}", abs(vol - line), 5e-3,
                abs(vol - line) < 5e-3,
                note="volume vs boundary line for the density field")
        # velocity: tangential jumps have zero normal component -> zero line
        volv = np.sum(sample.weights * dot(sample.v, tf.grad(sl.t, sample.points)))
        rep.add(f"cusp_velocity_{i}", abs(volv), 5e-3, abs(volv) < 5e-3)
        # rotated velocity: boundary line assembles the full vorticity sheet
        volw = np.sum(sample.weights * dot(1j * sample.v, tf.grad(sl.t, sample.points)))
        linew = -(np.sum(dza.imag * phi(za)) + np.sum(dzm.imag * phi(zm))) * h
        rep.add(f"cusp_rotated_velocity_{i}", abs(volw - linew), 5e-3,
                abs(volw - linew) < 5e-3)
    return rep


# ----------------------------------------------------------------------------
# geometric lemma and subsolution roll-up


def geometric_lemma_check(states, ws: OperatorWorkspace, guards: GuardSet,
                          lambdas=GUARD_LAMBDAS) -> CertificateReport:
    """Offline re-verification of the product chord-arc inequality and the
    level-family angle/stability margins at each output time."""
    rep = CertificateReport(entries=[])
    from .curves import _circulant_idx, _wrapped_offsets
    prof = ws.profile
    n = prof.c.size
    ell = ws.ell
    alpha = spectral.alpha_grid(n, ell)
    D = guards.ca0_factor
    idx_tab = _circulant_idx(n)
    beta = _wrapped_offsets(n, ell)[1:]
    for st in states:
        worst = np.inf
        zs = {}
        for lam in lambdas:
            zs[lam] = ws.level_curve(st.t, st.z, lam) - ws.slope * alpha
        for lam in lambdas:
            for mu in lambdas:
                sep2 = ((lam - mu) * st.t * prof.c) ** 2
                chord2 = np.abs(zs[lam][:, None] - zs[mu][idx_tab][:, 1:]
                                + ws.slope * beta[None, :]) ** 2
                rhs = D * (beta[None, :] ** 2 / (2 * guards.C) ** 2
                           + sep2[:, None])
                worst = min(worst, float(np.min(chord2 - rhs)))
        rep.add(f"product_chord_arc_t{st.t:g}", worst, 0.0, worst > 0,
                note=f"D={D:.4f}, C={guards.C:.4f}")
        # angle and stability of the level family
        a_best, s_best = -np.inf, -np.inf
        for lam in lambdas:
            dzl = spectral.deriv(zs[lam], ell) + ws.slope
            unit = dzl / np.abs(dzl)
            a_best = max(a_best, float(np.min(dot(unit, ws.tau.tau))))
            mask = prof.psi0 > 1e-14
            sig = 2.0 * dzl.real
            s_best = max(s_best, float(np.min(sig[mask])) if mask.any()
                         else float(np.min(sig)))
        rep.add(f"level_angle_t{st.t:g}", a_best, guards.A / 2,
                a_best > guards.A / 2)
        rep.add(f"level_stability_t{st.t:g}", s_best, guards.S / 2,
                s_best > guards.S / 2)
    return rep


def subsolution_certificate(traj, ws: OperatorWorkspace, levels: LevelSet,
                            seed: int = 7, field_grid: int = 200,
                            grids=(100, 200, 400)) -> CertificateReport:
    """Full roll-up: boundary conditions, perturbation bounds, hull scan,
    admissibility, weak forms, geometry."""
    rep = CertificateReport(entries=[])
    prof = ws.profile
    curve0 = ws.curve0
    states = [st for st in traj.states]
    # growth-rate inequalities and admissibility margins
    for entry in verify_growth_bounds(prof, curve0):
        rep.add("growth_" + entry["name"], entry["measured"], entry["bound"],
                entry["passed"], note=entry.get("note", ""))
    for entry in admissibility_scan(prof, curve0, levels.n_levels):
        rep.add(entry["name"], entry["measured"], 1.0, entry["passed"],
                note=f"weight {entry['weight']:.4f}")
    box = field_box(curve0)
    slices = []
    charts_by_time = {}
    for st in states:
        sl = FieldSlice(t=st.t, z=st.z, ws=ws, levels=levels)
        slices.append(sl)
        if st.t > 0 and prof.components:
            F = st.dzdt
            charts = [eval_G_gamma(sl, comp, F) for comp in prof.components]
            charts_by_time[st.t] = charts
            gmax = max(ch.max_gamma for ch in charts)
            rep.add(f"gamma_bound_t{st.t:g}", gmax, 0.5, gmax < 0.5,
                    note="max |gamma| over resolved chart")
            gpm = max(ch.gpm_resid for ch in charts)
            rep.add(f"potential_bc_t{st.t:g}", gpm, 1e-8, gpm <= 1e-8)
            jmin = min(ch.jacobian_min for ch in charts)
            rep.add(f"chart_jacobian_t{st.t:g}", jmin, 0.0, jmin > 0)
            # hull inequality at resolved chart probes through the momentum
            hull_margin = _hull_margin(sl, charts)
            rep.add(f"hull_margin_t{st.t:g}", hull_margin, 0.0, hull_margin > 0)
            # gamma divergence by central differences of the exact evaluation
            div = _gamma_divergence(sl, charts, seed)
            rep.add(f"gamma_divergence_t{st.t:g}", div, 1e-4, div <= 1e-4)
            # one-sided boundary conditions assembled through the traces
            bc2 = _bcond2_residual(sl, charts, F)
            rep.add(f"bcond2_t{st.t:g}", bc2, 1e-8, bc2 <= 1e-8)
        # stable-region evolution residual
        rec = [r for r in traj.diagnostics if abs(r["t"] - st.t) < 1e-12]
        if rec:
            rep.add(f"bcond1_t{st.t:g}", rec[0]["bcond1_resid"], 5e-4,
                    rec[0]["bcond1_resid"] <= 5e-4,
                    note="discretization floor set by the profile band limit")
    # weak forms with refinement ratios
    if len(slices) >= 3:
        rep.extend(weak_form_refinement(slices, box, grids, seed,
                                        charts_by_time))
    # product chord-arc / level margins
    rep.extend(geometric_lemma_check(states, ws, traj.guards))
    return rep


def _hull_margin(sl: FieldSlice, charts) -> float:
    from .spectral import trig_eval
    prof = sl.ws.profile
    worst = np.inf
    found_any = False
    for ch in charts:
        scan = prof.c[ch.idx] >= SCAN_REL * float(np.max(prof.c))
        if not scan.any():
            continue
        probe_a = ch.alphas[scan][::8]
        for lam in (-0.7, -0.3, 0.0, 0.3, 0.7):
            pts = (trig_eval(sl.z, sl.ws.ell, probe_a)
                   - lam * sl.t * trig_eval(prof.c_tau, sl.ws.ell, probe_a) * 1j)
            m, rho, v, lab = eval_momentum(sl, pts, charts, refine_velocity=True)
            mix = lab == LABEL_MIX
            if not mix.any():
                continue
            found_any = True
            lhs = np.abs(2 * (m - rho * v) + (1 - rho ** 2) * 1j)
            rhs = 1 - rho ** 2
            worst = min(worst, float(np.min((rhs - lhs)[mix])))
    return worst if found_any else np.inf


def _gamma_divergence(sl: FieldSlice, charts, seed: int) -> float:
    """Central-difference divergence of gamma at seeded mid-band points.

    The stencil must stay inside the band, so its spacing follows the local
    band half-width t*c(alpha)."""
    from .spectral import trig_eval
    prof = sl.ws.profile
    rng = np.random.default_rng(seed)
    worst = 0.0
    for ch in charts:
        scan = np.where(prof.c[ch.idx] >= 0.3 * float(np.max(prof.c)))[0]
        if scan.size == 0:
            continue
        take = rng.choice(scan, size=min(12, scan.size), replace=False)
        lam = rng.uniform(-0.4, 0.4, size=take.size)
        al = ch.alphas[take]
        cv = trig_eval(prof.c, sl.ws.ell, al).real
        pts = (trig_eval(sl.z, sl.ws.ell, al)
               - lam * sl.t * trig_eval(prof.c_tau, sl.ws.ell, al) * 1j)
        h_fd = 0.02 * sl.t * cv

        def g(q):
            return gamma_at_points(sl, charts, q)[0]
        gx = (g(pts + h_fd) - g(pts - h_fd)) / (2 * h_fd)
        gy = (g(pts + 1j * h_fd) - g(pts - 1j * h_fd)) / (2 * h_fd)
        div = np.abs(gx.real + gy.imag)
        worst = max(worst, float(np.max(div)))
    return worst


def _bcond2_residual(sl: FieldSlice, charts, F: np.ndarray) -> float:
    """Boundary condition at the band edges, via chart gamma at lambda=+-1
    against the one-sided operator trace route."""
    ws = sl.ws
    prof = ws.profile
    tr = boundary_traces(sl)
    worst = 0.0
    cmax = float(np.max(prof.c))
    for ch in charts:
        scan = prof.c[ch.idx] >= SCAN_REL * cmax
        if not scan.any():
            continue
        for a, B_a in ((1.0, tr.B_plus), (-1.0, tr.B_minus)):
            i_lam = int(np.argmin(np.abs(ch.lambda_grid - a)))
            gamma_a = ch.gamma[i_lam]
            dza = sl.dcurves[a][ch.idx]
            Fa = (F - a * 1j * prof.c_tau)[ch.idx]  # d/dt of the band boundary
            resid = dot(Fa - B_a[ch.idx] - a * (gamma_a + 0.5j), 1j * dza)
            worst = max(worst, float(np.max(np.abs(resid[scan]))))
    return worst
