"""Time advance of the pseudo-interface under the glued operator equation.

The update is a classical explicit fourth-order one-step method with fixed
time step; the component means are re-evaluated at every stage.  Geometry
guards (angle, chord-arc, stability, norm, and the product chord-arc lower
bound) are re-checked after every step and stop the run when violated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .curves import (Curve, GUARD_LAMBDAS, TangentField, angle_constant,
                     chord_arc_constant, stability_functions)
from .growth import GrowthProfile
from .operators import (OperatorWorkspace, dot, eval_E_mollified, make_workspace,
                        mollify, operator_snapshot)

SOBOLEV_ORDER = 4  # curves evolve in H^4 (two below the H^6 data class)

from .growth import SCAN_REL as COND_Z2_SCAN_REL


@dataclass(frozen=True)
class GuardSet:
    A: float                 # lower bound on the angle constant
    C: float                 # upper bound on the chord-arc constant
    S: float                 # lower bound on the stability constant
    R: float                 # upper bound on the H^4 norm

    @property
    def ca0_factor(self) -> float:
        return 1.0 - np.sqrt(1.0 - (self.A / 2.0) ** 2)


@dataclass(frozen=True)
class RunConfig:
    dt: float
    t_final: float
    eps: float = 0.0
    output_times: tuple = ()
    ladder_times: tuple = ()
    angle_factor: float = 0.5
    chord_factor: float = 2.0
    stab_factor: float = 0.5
    norm_factor: float = 4.0
    continue_past_guards: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")


@dataclass
class InterfaceState:
    t: float
    z: np.ndarray
    dzdt: np.ndarray
    h: np.ndarray
    energy: dict
    guard_margins: dict


@dataclass
class Trajectory:
    states: list            # InterfaceState at the configured output times
    diagnostics: list       # one record per accepted step (incl. t = 0)
    guards: GuardSet
    achieved_T: float
    stop_reason: str

    def state_at(self, t: float, tol: float = 1e-9) -> InterfaceState:
        for st in self.states:
            if abs(st.t - t) <= tol:
                return st
        raise KeyError(f"no stored state at t={t}")


# ----------------------------------------------------------------------------
# operator assembly


def _error_term(t, snap, ws):
    prof = ws.profile
    ini = ws.initial
    hpsi = np.zeros(prof.c.size)
    for h_i, comp in zip(snap.h, prof.components):
        hpsi[comp.idx] = h_i * prof.psi1[comp.idx]
    dz0 = ws.curve0.dz()
    return t * ini.kappa + 1j * (t * dot(ini.D0, prof.d_ctau) + hpsi) * dz0


def eval_F(t: float, z: np.ndarray, ws: OperatorWorkspace, return_info: bool = False):
    """Glued evolution operator at one time slice."""
    snap = operator_snapshot(t, z, ws)
    prof, ini = ws.profile, ws.initial
    F = prof.psi0 * snap.E + prof.psi1 * (ini.E0 + t * ini.E1) - _error_term(t, snap, ws)
    return (F, snap) if return_info else F


def eval_F_eps(t: float, z: np.ndarray, ws: OperatorWorkspace, eps: float,
               return_info: bool = False):
    """Mollified variant: numerator curve smoothed, whole operator smoothed."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    snap = operator_snapshot(t, z, ws)
    prof, ini = ws.profile, ws.initial
    E_eps = eval_E_mollified(t, z, ws, eps)
    F = prof.psi0 * E_eps + prof.psi1 * (ini.E0 + t * ini.E1) - _error_term(t, snap, ws)
    F = mollify(F, ws.ell, eps)
    return (F, snap) if return_info else F


# ----------------------------------------------------------------------------
# guards and energy


def _curve_at(z: np.ndarray, ws: OperatorWorkspace) -> Curve:
    return Curve(topology=ws.topology, ell=ws.ell, z=z, speed=ws.curve0.speed)


def default_guards(curve0: Curve, profile: GrowthProfile, tau: TangentField,
                   config: RunConfig, ws: OperatorWorkspace | None = None) -> GuardSet:
    a0 = angle_constant(curve0, tau)
    c0 = chord_arc_constant(curve0)
    sigma, _ = stability_functions(curve0)
    mask = profile.psi0 > 1e-14
    s0 = float(np.min(sigma[mask])) if mask.any() else float(np.min(sigma))
    r0 = spectral.sobolev_norm(curve0.periodic_part, SOBOLEV_ORDER, curve0.ell)
    r_budget = config.norm_factor * max(r0, 1.0)
    if ws is not None and ws.initial is not None and config.t_final > 0:
        # the mollified growth rate carries O(r^-4) fourth derivatives, so the
        # flow legitimately accumulates H^4 norm at the forcing rate; budget it
        # from a probe evaluation at mid-run (the t = 0 operator is smooth)
        f0 = eval_F(0.0, curve0.z.copy(), ws)
        tp = 0.5 * config.t_final
        fp = eval_F(tp, curve0.z + tp * f0, ws)
        r_budget += 4.0 * config.t_final * spectral.sobolev_norm(fp, SOBOLEV_ORDER,
                                                                 curve0.ell)
    return GuardSet(A=config.angle_factor * a0, C=config.chord_factor * c0,
                    S=config.stab_factor * s0, R=r_budget)


def ca0_margin(t: float, z: np.ndarray, ws: OperatorWorkspace, guards: GuardSet,
               lambdas=GUARD_LAMBDAS) -> float:
    """Min over the lattice of the product chord-arc inequality margin."""
    from .curves import _circulant_idx, _wrapped_offsets
    n, ell = z.size, ws.ell
    slope = ws.slope
    alpha = spectral.alpha_grid(n, ell)
    D = guards.ca0_factor
    C = guards.C
    c = ws.profile.c
    margin = np.inf
    zs = {lam: ws.level_curve(t, z, lam) - slope * alpha for lam in lambdas}
    idx = _circulant_idx(n)
    beta = _wrapped_offsets(n, ell)[1:]  # beta = 0 is degenerate equality
    for lam in lambdas:
        for mu in lambdas:
            sep2 = ((lam - mu) * t * c) ** 2
            chord2 = np.abs(zs[lam][:, None] - zs[mu][idx][:, 1:]
                            + slope * beta[None, :]) ** 2
            rhs = D * (beta[None, :] ** 2 / (2 * C) ** 2 + sep2[:, None])
            margin = min(margin, float(np.min(chord2 - rhs)))
    return margin


def evaluate_guards(t: float, z: np.ndarray, ws: OperatorWorkspace,
                    guards: GuardSet) -> dict:
    curve = _curve_at(z, ws)
    a_val = angle_constant(curve, ws.tau)
    c_val = chord_arc_constant(curve)
    sigma, _ = stability_functions(curve)
    mask = ws.profile.psi0 > 1e-14
    s_val = float(np.min(sigma[mask])) if mask.any() else float(np.min(sigma))
    r_val = spectral.sobolev_norm(curve.periodic_part, SOBOLEV_ORDER, ws.ell)
    return {
        "angle": a_val - guards.A,
        "chord_arc": guards.C - c_val,
        "stability": s_val - guards.S,
        "norm": guards.R - r_val,
        "ca0": ca0_margin(t, z, ws, guards),
        "_values": {"A": a_val, "C": c_val, "S": s_val, "R": r_val},
    }


def energy_terms(guard_values: dict, z: np.ndarray, ws: OperatorWorkspace) -> dict:
    vals = guard_values["_values"]
    sob = spectral.sobolev_norm(z - ws.slope * spectral.alpha_grid(z.size, ws.ell),
                                SOBOLEV_ORDER, ws.ell)
    terms = {
        "sobolev_sq": sob ** 2,
        "angle_inv": 1.0 / vals["A"],
        "chord": vals["C"],
        "stab_inv": 1.0 / vals["S"] if vals["S"] > 0 else np.inf,
    }
    terms["total"] = sum(terms.values())
    return terms


def violated_guard(margins: dict) -> str | None:
    for name in ("angle", "chord_arc", "stability", "norm", "ca0"):
        if margins[name] <= 0:
            return name
    return None


# ----------------------------------------------------------------------------
# step-level diagnostics


def step_diagnostics(t: float, z: np.ndarray, F: np.ndarray, snap,
                     ws: OperatorWorkspace, margins: dict, energy: dict) -> dict:
    prof = ws.profile
    n, ell = z.size, ws.ell
    dz = spectral.deriv(z - ws.slope * spectral.alpha_grid(n, ell), ell) + ws.slope
    rec = {
        "t": t,
        "A": margins["_values"]["A"],
        "C": margins["_values"]["C"],
        "S": margins["_values"]["S"],
        "sobolev_sq": energy["sobolev_sq"],
        "energy": energy["total"],
        "ca0_margin": margins["ca0"],
        "guard_margin_min": min(margins[k] for k in
                                ("angle", "chord_arc", "stability", "norm", "ca0")),
        "dtz_minus_B_plus": float(np.max(np.abs(F - snap.B_plus))),
        "dtz_minus_B_minus": float(np.max(np.abs(F - snap.B_minus))),
    }
    stable_mask = ~prof.support_mask
    if stable_mask.any():
        resid = dot(F - snap.B, 1j * dz)
        rec["bcond1_resid"] = float(np.max(np.abs(resid[stable_mask])))
    else:
        rec["bcond1_resid"] = 0.0
    rec["condz2_max"] = cond_z2_quotient(t, z, F, snap, ws)
    for i, h_i in enumerate(snap.h):
        rec[f"h_{i}"] = float(h_i)
    return rec


def cond_z2_quotient(t: float, z: np.ndarray, F: np.ndarray, snap,
                     ws: OperatorWorkspace) -> float:
    """Max over components of |int (dtz-B).dz_perp + t D.d(c tau)| / (t c)."""
    if t == 0 or not ws.profile.components:
        return 0.0
    prof = ws.profile
    n, ell = z.size, ws.ell
    dz = spectral.deriv(z - ws.slope * spectral.alpha_grid(n, ell), ell) + ws.slope
    integrand = dot(F - snap.B, 1j * dz) + t * dot(snap.D, prof.d_ctau)
    cmax = float(np.max(prof.c))
    worst = 0.0
    for comp in prof.components:
        cum = spectral.cumulative_from(integrand, ell, j0=comp.start).real
        vals = np.abs(cum[comp.idx])
        ci = prof.c[comp.idx]
        scan = ci >= COND_Z2_SCAN_REL * cmax
        if scan.any():
            worst = max(worst, float(np.max(vals[scan] / (t * ci[scan]))))
    return worst


# ----------------------------------------------------------------------------
# stepping


def _rhs(t: float, z: np.ndarray, ws: OperatorWorkspace, eps: float) -> np.ndarray:
    if eps > 0:
        return eval_F_eps(t, z, ws, eps)
    return eval_F(t, z, ws)


def step(state_t: float, z: np.ndarray, dt: float, ws: OperatorWorkspace,
         eps: float = 0.0) -> np.ndarray:
    """One classical fourth-order step; means re-evaluated at every stage."""
    k1 = _rhs(state_t, z, ws, eps)
    k2 = _rhs(state_t + dt / 2, z + dt / 2 * k1, ws, eps)
    k3 = _rhs(state_t + dt / 2, z + dt / 2 * k2, ws, eps)
    k4 = _rhs(state_t + dt, z + dt * k3, ws, eps)
    return z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _make_state(t, z, ws, guards):
    if ws.initial is None:
        raise RuntimeError("workspace missing initial operator data")
    F, snap = eval_F(t, z, ws, return_info=True)
    margins = evaluate_guards(t, z, ws, guards)
    energy = energy_terms(margins, z, ws)
    state = InterfaceState(t=t, z=z.copy(), dzdt=F, h=snap.h.copy(),
                           energy=energy, guard_margins=margins)
    rec = step_diagnostics(t, z, F, snap, ws, margins, energy)
    return state, rec


def run(curve0: Curve, profile: GrowthProfile, config: RunConfig,
        ws: OperatorWorkspace | None = None,
        guards: GuardSet | None = None) -> Trajectory:
    """Advance from the initial interface, stopping at the first guard violation."""
    if ws is None:
        ws = make_workspace(curve0, profile)
    if guards is None:
        guards = default_guards(curve0, profile, ws.tau, config, ws=ws)
    out_times = sorted(set(float(t) for t in config.output_times) | {0.0, config.t_final})
    for t_out in out_times:
        steps = t_out / config.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError(f"output time {t_out} is not a multiple of dt")
    states: list[InterfaceState] = []
    diagnostics: list[dict] = []
    t, z = 0.0, curve0.z.copy()
    state, rec = _make_state(t, z, ws, guards)
    diagnostics.append(rec)
    if 0.0 in out_times:
        states.append(state)
    stop_reason = "completed"
    n_steps = int(round(config.t_final / config.dt))
    for i_step in range(n_steps):
        z = step(t, z, config.dt, ws, config.eps)
        t = (i_step + 1) * config.dt
        state, rec = _make_state(t, z, ws, guards)
        diagnostics.append(rec)
        bad = violated_guard(state.guard_margins)
        if bad is not None:
            rec["guard_violated"] = bad
            if not config.continue_past_guards:
                stop_reason = f"guard:{bad}"
                states.append(state)
                return Trajectory(states=states, diagnostics=diagnostics,
                                  guards=guards, achieved_T=t, stop_reason=stop_reason)
        if any(abs(t - t_out) <= 1e-9 for t_out in out_times):
            states.append(state)
    return Trajectory(states=states, diagnostics=diagnostics, guards=guards,
                      achieved_T=t, stop_reason=stop_reason)


LADDER_EPS = 1e-12  # quotient regularizer for the order ladders


def ladder_quantities(t: float, z: np.ndarray, ws: OperatorWorkspace) -> dict:
    """Order-ladder quotients at one time slice.

    The first/second-order-in-t quotients are scanned over the discrete
    support of the growth rate (where the estimates live); outside it both
    numerator and denominator are band-limit ripple.
    """
    F, snap = eval_F(t, z, ws, return_info=True)
    prof, ini = ws.profile, ws.initial
    den = prof.c + np.abs(prof.d_c) + LADDER_EPS
    supp = prof.support_mask
    if not supp.any():
        supp = np.ones(z.size, dtype=bool)
    n, ell = z.size, ws.ell
    dz = spectral.deriv(z - ws.slope * spectral.alpha_grid(n, ell), ell) + ws.slope
    dz0 = ws.curve0.dz()
    rp = dot(dz, dz0)
    E1t = ini.E0 + t * ini.E1
    out = {
        "t": t,
        "E_minus_Ba": max(
            float(np.max((np.abs(snap.E - snap.B_plus) / den)[supp])),
            float(np.max((np.abs(snap.E - snap.B_minus) / den)[supp]))),
        "E_minus_B_kappa": float(np.max((np.abs(snap.E - snap.B - t * ini.kappa) / den)[supp])),
        "D_drift": float(np.max(np.abs(snap.D - ini.D0 * rp))),
        "h_mean": float(np.max(np.abs(snap.h))) if snap.h.size else 0.0,
        "E_firstorder_gap": float(np.max(np.abs(E1t - snap.E))),
        "cond_z2": cond_z2_quotient(t, z, F, snap, ws),
    }
    return out


LADDER_TARGETS = {
    "E_minus_Ba": 0.9,
    "E_minus_B_kappa": 1.8,
    "D_drift": 0.9,
    "h_mean": 1.8,
    "E_firstorder_gap": 1.8,
    "cond_z2": 0.9,
}


def ladder_slopes(rows: list[dict]) -> dict:
    """Least-squares log2 slopes over a dyadic time ladder."""
    ts = np.array([r["t"] for r in rows])
    out = {}
    for name in LADDER_TARGETS:
        vals = np.array([max(r[name], 1e-300) for r in rows])
        out[name] = float(np.polyfit(np.log2(ts), np.log2(vals), 1)[0])
    return out


def gronwall_rate(trajectory: Trajectory) -> float:
    """Measured K with E(t) <= E(0)(1 + K t) along the accepted run."""
    recs = trajectory.diagnostics
    e0 = recs[0]["energy"]
    best = 0.0
    for rec in recs[1:]:
        if rec["t"] > 0:
            best = max(best, (rec["energy"] / e0 - 1.0) / rec["t"])
    return best
