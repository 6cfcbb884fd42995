"""Singular integral operators driving the pseudo-interface.

All kernels are evaluated in offset form: the integral over the curve
parameter beta is rewritten with u = alpha - beta, curve increments
z(alpha) - z(alpha - u) come from stable Fourier factors, and cross-curve
gaps z_a(alpha) - z_b(alpha) are sample-exact, so no catastrophic
cancellation occurs at any mixing-band width.  The graded offset rule makes
every evaluation near machine precision uniformly in t*c, including the
principal values where the non-mixing boundaries touch.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import spectral
from .curves import Curve, TangentField, TOPOLOGY_PERIODIC
from .growth import GrowthProfile, bump, bump_mass
from .quadrature import OffsetRule, apply_rule, graded_offset_rule, panels_toward_endpoints


def dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Euclidean dot product of complex samples."""
    return u.real * v.real + u.imag * v.imag


def kernel1(w: np.ndarray, topology: str) -> np.ndarray:
    """Cauchy kernel 1/w, periodized to (1/2)cot(w/2) on the strip."""
    if topology == TOPOLOGY_PERIODIC:
        return 0.5 / np.tan(0.5 * w)
    return 1.0 / w


def kernel2(w: np.ndarray, topology: str) -> np.ndarray:
    """Squared kernel 1/w^2 (image sum 1/(4 sin^2(w/2)) on the strip)."""
    if topology == TOPOLOGY_PERIODIC:
        return 0.25 / np.sin(0.5 * w) ** 2
    return 1.0 / w ** 2


@dataclass
class LevelTables:
    """Samples and offset-increment tables for one level curve z_lambda(t)."""

    z: np.ndarray           # samples
    dz: np.ndarray          # d/dalpha samples
    inc_z: np.ndarray       # (m, n): z(alpha) - z(alpha - u)
    inc_dz: np.ndarray      # (m, n): dz(alpha) - dz(alpha - u)


def build_tables(z: np.ndarray, ell: float, slope: float, rule: OffsetRule) -> LevelTables:
    alpha = spectral.alpha_grid(z.size, ell)
    zp = z - slope * alpha
    dzp = spectral.deriv(zp, ell)
    inc_z = spectral.increment_table(zp, ell, rule.nodes) + slope * rule.nodes[:, None]
    inc_dz = spectral.increment_table(dzp, ell, rule.nodes)
    return LevelTables(z=z, dz=dzp + slope, inc_z=inc_z, inc_dz=inc_dz)


@dataclass
class InitialOperatorData:
    E0: np.ndarray          # leading interface velocity at t = 0
    E1: np.ndarray          # its first time correction
    z1_plus: np.ndarray     # initial velocities of the band boundaries
    z1_minus: np.ndarray
    kappa: np.ndarray       # curvature-driven drift of E - B
    D0: np.ndarray          # -i(c*tau + 1/2)


@dataclass
class OperatorWorkspace:
    """Precomputed context shared by all operator evaluations of one run."""

    curve0: Curve
    tau: TangentField
    profile: GrowthProfile
    rule: OffsetRule
    initial: InitialOperatorData | None = None

    @property
    def topology(self) -> str:
        return self.curve0.topology

    @property
    def ell(self) -> float:
        return self.curve0.ell

    @property
    def slope(self) -> float:
        return self.curve0.linear_slope

    def level_curve(self, t: float, z: np.ndarray, lam: float) -> np.ndarray:
        # z_lambda = z - lam*t*c*tau_perp; tau_perp = i*tau
        return z - lam * t * 1j * self.profile.c_tau

    def level_tables(self, t: float, z: np.ndarray, lam: float) -> LevelTables:
        return build_tables(self.level_curve(t, z, lam), self.ell, self.slope, self.rule)

    def level_gap(self, t: float, lam: float, mu: float) -> np.ndarray:
        """z_lambda(alpha) - z_mu(alpha), sample-exact."""
        return -(lam - mu) * t * 1j * self.profile.c_tau


def _self_operator(tables: LevelTables, topology: str, rule: OffsetRule,
                   prefactor: float) -> np.ndarray:
    k1 = kernel1(tables.inc_z, topology)
    return prefactor * apply_rule(rule, k1.real * tables.inc_dz)


def precompute_initial(curve0: Curve, profile: GrowthProfile, tau: TangentField,
                       rule: OffsetRule) -> InitialOperatorData:
    ell, topo = curve0.ell, curve0.topology
    t0 = build_tables(curve0.z, ell, curve0.linear_slope, rule)
    b_self = _self_operator(t0, topo, rule, 1.0 / (2 * np.pi))
    E0 = 2.0 * b_self
    k1 = kernel1(t0.inc_z, topo).real
    k2 = kernel2(t0.inc_z, topo)
    E1 = np.zeros_like(E0)
    z1 = {}
    for b in (+1.0, -1.0):
        z1_b = E0 - b * 1j * profile.c_tau
        z1[b] = z1_b
        inc_z1 = spectral.increment_table(z1_b, ell, rule.nodes)
        inc_dz1 = spectral.increment_table(spectral.deriv(z1_b, ell), ell, rule.nodes)
        E1 = E1 + apply_rule(rule, k1 * inc_dz1) / (2 * np.pi)
        E1 = E1 - apply_rule(rule, (inc_z1 * k2).real * t0.inc_dz) / (2 * np.pi)
    dz0 = t0.dz
    ddz0 = spectral.deriv(curve0.periodic_part, ell, 2)
    # time derivative of E - B at t = 0 (curvature channel + touching-point
    # residue channel); verified against forward differencing of the operators
    kappa = ddz0 * (profile.c_tau / dz0 ** 2).real \
        - 1j * (1.0 / dz0).imag * profile.d_ctau
    D0 = -1j * (profile.c_tau + 0.5)
    return InitialOperatorData(E0=E0, E1=E1, z1_plus=z1[+1.0], z1_minus=z1[-1.0],
                               kappa=kappa, D0=D0)


def make_workspace(curve0: Curve, profile: GrowthProfile,
                   tau: TangentField | None = None,
                   rule: OffsetRule | None = None) -> OperatorWorkspace:
    from .curves import tangent_field
    if tau is None:
        tau = tangent_field(curve0)
    if rule is None:
        rule = graded_offset_rule(curve0.ell, curve0.n)
    ws = OperatorWorkspace(curve0=curve0, tau=tau, profile=profile, rule=rule)
    ws.initial = precompute_initial(curve0, profile, tau, rule)
    return ws


# ----------------------------------------------------------------------------
# time-slice operators


def eval_E(t: float, z: np.ndarray, ws: OperatorWorkspace,
           tables: dict[float, LevelTables] | None = None) -> np.ndarray:
    """Sum of the two same-boundary interface operators."""
    if tables is None:
        tables = {b: ws.level_tables(t, z, b) for b in (+1.0, -1.0)}
    out = np.zeros(z.size, dtype=complex)
    for b in (+1.0, -1.0):
        out = out + _self_operator(tables[b], ws.topology, ws.rule, 1.0 / (2 * np.pi))
    return out


def eval_B_ab(t: float, a: float, b: float, z: np.ndarray, ws: OperatorWorkspace,
              tables: dict[float, LevelTables] | None = None,
              prefactor: float | None = None,
              touch_side: float = 0.0) -> np.ndarray:
    """One cross/self term of the averaged interface operator.

    Evaluated through the split into a same-curve-increment integral plus the
    tangential-derivative term; levels a, b may be any values in [-1, 1].
    Where the level curves touch (c = 0) that term's kernel integral has a
    half-residue jump: ``touch_side`` 0 takes the symmetric principal value
    (the evolution operator), +-1 the limit from the interior/exterior side
    (needed when matching one-sided velocity traces).
    """
    if tables is None:
        tables = {}
    if b not in tables:
        tables[b] = ws.level_tables(t, z, b)
    tb = tables[b]
    if prefactor is None:
        prefactor = 1.0 / (2 * np.pi)
    if a == b or t == 0.0 or not ws.profile.components:
        return _self_operator(tb, ws.topology, ws.rule, prefactor)
    gap = ws.level_gap(t, a, b)
    den = gap[None, :] + tb.inc_z
    k1 = kernel1(den, ws.topology)
    first = prefactor * apply_rule(ws.rule, k1.real * tb.inc_dz)
    c1 = apply_rule(ws.rule, k1)
    if touch_side != 0.0:
        touching = np.abs(a - b) * t * ws.profile.c == 0.0
        if touching.any():
            c1 = c1 + np.where(touching, touch_side * np.pi * 1j / tb.dz, 0.0)
    second = -1j * (a - b) * t * ws.profile.d_ctau * prefactor * c1.real
    return first + second


@dataclass
class OperatorSnapshot:
    t: float
    E: np.ndarray
    B_ab: dict
    B_plus: np.ndarray
    B_minus: np.ndarray
    B: np.ndarray
    D: np.ndarray
    H: np.ndarray
    h: np.ndarray           # one value per support component


def eval_h(t: float, z: np.ndarray, E: np.ndarray, B: np.ndarray, D: np.ndarray,
           ws: OperatorWorkspace) -> tuple[np.ndarray, np.ndarray]:
    """Component means forcing the mixing-band compatibility integral to close."""
    ini = ws.initial
    prof = ws.profile
    ell = ws.ell
    n = z.size
    dz = spectral.deriv(z - ws.slope * spectral.alpha_grid(n, ell), ell) + ws.slope
    dz0 = ws.curve0.dz()
    E1t = ini.E0 + t * ini.E1
    rp = dot(dz, dz0)
    H = dot(E - B - t * ini.kappa, 1j * dz) \
        + prof.psi1 * dot(E1t - E, 1j * dz) \
        + t * dot(D - ini.D0 * rp, prof.d_ctau)
    h_vals = np.zeros(len(prof.components))
    hgrid = ell / n
    for i, comp in enumerate(prof.components):
        num = float(np.sum(H[comp.idx])) * hgrid
        den = float(np.sum((prof.psi1 * rp)[comp.idx])) * hgrid
        if den <= 0:
            raise RuntimeError("vanishing mean denominator on a mixing component")
        h_vals[i] = num / den
    return h_vals, H


def operator_snapshot(t: float, z: np.ndarray, ws: OperatorWorkspace) -> OperatorSnapshot:
    tables = {b: ws.level_tables(t, z, b) for b in (+1.0, -1.0)}
    B_ab = {}
    for a in (+1.0, -1.0):
        for b in (+1.0, -1.0):
            B_ab[(a, b)] = eval_B_ab(t, a, b, z, ws, tables)
    E = B_ab[(1.0, 1.0)] + B_ab[(-1.0, -1.0)]
    B_plus = B_ab[(1.0, 1.0)] + B_ab[(1.0, -1.0)]
    B_minus = B_ab[(-1.0, 1.0)] + B_ab[(-1.0, -1.0)]
    B = 0.5 * (B_plus + B_minus)
    D = -0.5 * (B_plus - B_minus) + ws.initial.D0
    h, H = eval_h(t, z, E, B, D, ws)
    return OperatorSnapshot(t=t, E=E, B_ab=B_ab, B_plus=B_plus, B_minus=B_minus,
                            B=B, D=D, H=H, h=h)


# ----------------------------------------------------------------------------
# residue functions (closed topology)


@dataclass
class ResidueEval:
    direct: np.ndarray
    recursion: np.ndarray
    valid: np.ndarray       # nodes where the direct form is defined


def eval_residue(k: int, lam: float, mu: float, t: float, z: np.ndarray,
                 ws: OperatorWorkspace) -> ResidueEval:
    """Weighted chord-power integrals, by direct quadrature and by recursion.

    Both forms are exposed for cross-validation; the direct form is refused
    (NaN) wherever the two level curves coincide.
    """
    if ws.topology == TOPOLOGY_PERIODIC:
        raise NotImplementedError("residue functions are closed-topology tools")
    if k < 1:
        raise ValueError("k >= 1 required")
    if lam == mu:
        raise ValueError("distinct levels required")
    tmu = ws.level_tables(t, z, mu)
    gap = ws.level_gap(t, lam, mu)
    den = gap[None, :] + tmu.inc_z
    u = ws.rule.nodes[:, None]
    sep = np.abs(lam - mu) * t * ws.profile.c
    valid = sep > 1e-300
    direct = apply_rule(ws.rule, u ** (k - 1) / den ** k)
    direct = np.where(valid, direct, np.nan + 0j)
    # recursion with the half-period boundary terms
    n = z.size
    z_lam = ws.level_curve(t, z, lam)
    z_mu_half = np.roll(tmu.z, -(n // 2))
    half = ws.ell / 2
    rec = np.zeros(n, dtype=complex)
    for j in range(k):
        integral = apply_rule(ws.rule, u ** j * tmu.inc_dz / den ** (j + 1))
        if j >= 1 and j % 2 == 1:
            s_j = (-2.0 / j) * (half / (z_lam - z_mu_half)) ** j
        else:
            s_j = 0.0
        rec = rec + (integral + s_j) / tmu.dz ** (k - j)
    rec = rec + (1 + np.sign(lam - mu)) * np.pi * 1j / tmu.dz ** k
    return ResidueEval(direct=direct, recursion=rec, valid=valid)


# ----------------------------------------------------------------------------
# mollified variant and the half-Laplacian


@lru_cache(maxsize=1)
def _bump_ft_nodes():
    return panels_toward_endpoints(-1.0, 1.0, scale=1.0)


def bump_fourier(xi: np.ndarray) -> np.ndarray:
    """Fourier transform of the normalized bump (real, even)."""
    nodes, weights = _bump_ft_nodes()
    phi = bump(nodes) / bump_mass()
    xi = np.asarray(xi, dtype=float)
    return np.cos(np.multiply.outer(xi, nodes)) @ (weights * phi)


def mollify(f: np.ndarray, ell: float, eps: float) -> np.ndarray:
    """Convolution with the bump of radius eps (Fourier multiplier)."""
    if eps == 0.0:
        return f
    n = f.shape[-1]
    k = spectral.wavenumbers(n, ell)
    out = np.fft.ifft(np.fft.fft(f) * bump_fourier(eps * k))
    return out if np.iscomplexobj(f) else out.real


def eval_E_mollified(t: float, z: np.ndarray, ws: OperatorWorkspace,
                     eps: float) -> np.ndarray:
    """Same-boundary operator with the numerator curve mollified at radius eps."""
    out = np.zeros(z.size, dtype=complex)
    alpha = spectral.alpha_grid(z.size, ws.ell)
    for b in (+1.0, -1.0):
        zb = ws.level_curve(t, z, b)
        zp = zb - ws.slope * alpha
        inc_z = spectral.increment_table(zp, ws.ell, ws.rule.nodes) \
            + ws.slope * ws.rule.nodes[:, None]
        dz_mol = mollify(spectral.deriv(zp, ws.ell), ws.ell, eps)
        inc_dz_mol = spectral.increment_table(dz_mol, ws.ell, ws.rule.nodes)
        k1 = kernel1(inc_z, ws.topology)
        out = out + apply_rule(ws.rule, k1.real * inc_dz_mol) / (2 * np.pi)
    return out


def lambda_op(f: np.ndarray, ell: float = 2 * np.pi) -> np.ndarray:
    """Half-Laplacian (-Delta)^(1/2) as the Fourier multiplier |k|."""
    return spectral.half_laplacian(f, ell)
