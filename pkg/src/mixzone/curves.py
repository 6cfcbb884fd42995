"""Interface representation, scenarios, reparametrization, geometric constants.

A curve lives on a uniform grid over [-ell/2, ell/2).  Closed bubbles are
clockwise and arc-length parametrized (|dz/dalpha| = 1, ell = length).
x1-periodic graphs keep ell = 2*pi and are normalized to constant speed
nu = length/(2*pi); their stored samples are the full z(alpha), of which
z(alpha) - (alpha, 0) is periodic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import spectral


@lru_cache(maxsize=8)
def _circulant_idx(n: int) -> np.ndarray:
    j = np.arange(n)
    return (j[:, None] - j[None, :]) % n


@lru_cache(maxsize=8)
def _wrapped_offsets(n: int, ell: float) -> np.ndarray:
    beta = np.arange(n) * (ell / n)
    return np.where(beta > ell / 2, beta - ell, beta)

TOPOLOGY_CLOSED = "closed-bubble"
TOPOLOGY_PERIODIC = "periodic-graph"

CHORD_ARC_REJECT = 1.0e3  # sampled chord-arc constant above this means self-contact


@dataclass(frozen=True)
class Curve:
    topology: str
    ell: float
    z: np.ndarray          # complex samples z(alpha_j)
    speed: float = 1.0     # |dz/dalpha| after normalization

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def alpha(self) -> np.ndarray:
        return spectral.alpha_grid(self.n, self.ell)

    @property
    def linear_slope(self) -> float:
        return 1.0 if self.topology == TOPOLOGY_PERIODIC else 0.0

    @property
    def periodic_part(self) -> np.ndarray:
        if self.topology == TOPOLOGY_PERIODIC:
            return self.z - self.alpha
        return self.z

    def dz(self, order: int = 1) -> np.ndarray:
        d = spectral.deriv(self.periodic_part, self.ell, order)
        if order == 1:
            d = d + self.linear_slope
        return d


@dataclass(frozen=True)
class TangentField:
    tau: np.ndarray  # unit complex samples

    @property
    def tau_perp(self) -> np.ndarray:
        return 1j * self.tau


@dataclass(frozen=True)
class StabilityDiagnostics:
    sigma: np.ndarray
    varpi: np.ndarray
    A_const: float
    C_const: float
    S_const: float
    lattice_note: str = ""


def tangent_field(curve: Curve) -> TangentField:
    """Unit tangent of the initial curve (density jump rho_+ - rho_- > 0)."""
    return TangentField(tau=curve.dz() / curve.speed)


def signed_area(curve: Curve) -> float:
    z, dz = curve.z, curve.dz()
    integrand = z.real * dz.imag - z.imag * dz.real
    return 0.5 * float(spectral.integrate(integrand, curve.ell))


def ensure_clockwise(curve: Curve) -> Curve:
    """Reverse a closed curve if it is counterclockwise. Idempotent."""
    if curve.topology != TOPOLOGY_CLOSED or signed_area(curve) < 0:
        return curve
    idx = (-np.arange(curve.n)) % curve.n
    return replace(curve, z=curve.z[idx])


def chord_arc_constant(curve: Curve) -> float:
    """sup |beta / (z(alpha) - z(alpha-beta))| on the grid lattice.

    The beta -> 0 limit 1/|dz| is included analytically; beta is the wrapped
    parameter difference in (-ell/2, ell/2].
    """
    n, ell = curve.n, curve.ell
    zp = curve.periodic_part
    best = float(np.max(1.0 / np.abs(curve.dz())))
    beta = _wrapped_offsets(n, ell)[1:]
    chord = zp[:, None] - zp[_circulant_idx(n)][:, 1:] + curve.linear_slope * beta[None, :]
    d = np.abs(chord)
    if np.any(d < 1e-14):
        return np.inf
    return max(best, float(np.max(np.abs(beta)[None, :] / d)))


def angle_constant(curve: Curve, tau: TangentField) -> float:
    """inf over the grid of (dz/|dz|) . tau."""
    dz = curve.dz()
    unit = dz / np.abs(dz)
    return float(np.min(unit.real * tau.tau.real + unit.imag * tau.tau.imag))


def stability_functions(curve: Curve) -> tuple[np.ndarray, np.ndarray]:
    """Rayleigh-Taylor function and vorticity strength, rho_pm = +-1."""
    dz = curve.dz()
    return 2.0 * dz.real, -2.0 * dz.imag


GUARD_LAMBDAS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def level_curve(z: np.ndarray, t: float, lam: float, c: np.ndarray,
                tau_perp: np.ndarray) -> np.ndarray:
    return z - lam * t * c * tau_perp


def equi_constants(curve: Curve, tau: TangentField, c: np.ndarray, t: float,
                   lambdas=GUARD_LAMBDAS) -> tuple[float, float]:
    """Equi-angle and equi-chord-arc constants on the (lambda, mu) lattice."""
    n, ell = curve.n, curve.ell
    h = ell / n
    tp = tau.tau_perp
    zs = {lam: level_curve(curve.z, t, lam, c, tp) for lam in lambdas}
    a_best = np.inf
    for lam, zl in zs.items():
        dz = spectral.deriv(zl - curve.linear_slope * curve.alpha, ell) + curve.linear_slope
        unit = dz / np.abs(dz)
        a_best = min(a_best, float(np.min(unit.real * tau.tau.real + unit.imag * tau.tau.imag)))
    c_best = 0.0
    idx = _circulant_idx(n)
    beta = _wrapped_offsets(n, ell)[1:]
    for lam, zl in zs.items():
        zlp = zl - curve.linear_slope * curve.alpha
        dzl = spectral.deriv(zlp, ell) + curve.linear_slope
        # beta -> 0 analytic limits: 1/|dz_lambda| on the diagonal, exactly 1
        # for lambda != mu wherever t*c > 0
        c_best = max(c_best, float(np.max(1.0 / np.abs(dzl))))
        if t > 0 and np.any(c > 0):
            c_best = max(c_best, 1.0)
        for mu, zm in zs.items():
            zmp = zm - curve.linear_slope * curve.alpha
            chord = zlp[:, None] - zmp[idx][:, 1:] + curve.linear_slope * beta[None, :]
            num = np.sqrt(beta[None, :] ** 2 + (((lam - mu) * t * c) ** 2)[:, None])
            d = np.abs(chord)
            if np.any(d < 1e-15):
                return a_best, np.inf
            c_best = max(c_best, float(np.max(num / d)))
    return a_best, c_best


def geometric_constants(curve: Curve, tau: TangentField, profile=None,
                        t: float | None = None) -> StabilityDiagnostics:
    """Stability functions plus the angle/chord-arc/stability constants.

    With a growth profile and a time supplied, the equi-constants over the
    documented (lambda, mu) lattice are returned instead of the plain ones.
    """
    sigma, varpi = stability_functions(curve)
    if profile is not None and t is not None:
        a_const, c_const = equi_constants(curve, tau, profile.c, t)
        note = f"lattice lambdas={GUARD_LAMBDAS}, n={curve.n}"
    else:
        a_const = angle_constant(curve, tau)
        c_const = chord_arc_constant(curve)
        note = f"grid lattice, n={curve.n}"
    if profile is not None:
        mask = profile.psi0 > 1e-14
        s_const = float(np.min(sigma[mask])) if np.any(mask) else float(np.min(sigma))
    else:
        s_const = float(np.min(sigma))
    return StabilityDiagnostics(sigma=sigma, varpi=varpi, A_const=a_const,
                                C_const=c_const, S_const=s_const, lattice_note=note)


def sobolev_norm(curve_or_samples, k: int, ell: float | None = None) -> float:
    """H^k norm of a curve or a plain periodic grid function."""
    if isinstance(curve_or_samples, Curve):
        f = curve_or_samples.periodic_part
        ell = curve_or_samples.ell
    else:
        f = np.asarray(curve_or_samples)
        if ell is None:
            ell = 2 * np.pi
    frac = spectral.top_mode_fraction(f)
    if frac > 0.1:
        warnings.warn(f"top-octave energy fraction {frac:.2e} exceeds 0.1; "
                      f"H^{k} norm may be under-resolved", stacklevel=2)
    return spectral.sobolev_norm(f, k, ell)


# ----------------------------------------------------------------------------
# scenarios


def _arclength_map(curve: Curve, n_iter: int = 4) -> Curve:
    """Reparametrize to constant speed (unit speed for closed curves)."""
    n = curve.n
    for _ in range(n_iter):
        zp = curve.periodic_part
        ell = curve.ell
        sp = np.abs(curve.dz())
        length = float(spectral.integrate(sp, ell))
        if curve.topology == TOPOLOGY_CLOSED:
            new_ell, nu = length, 1.0
        else:
            new_ell, nu = 2 * np.pi, length / (2 * np.pi)
        # node j of the new grid sits at arclength j*L/n from the old seam
        target = np.arange(n) * length / n
        theta = curve.alpha.copy()
        for _ in range(40):
            s_th = _eval_cumulative(sp, ell, theta)
            d_th = spectral.trig_eval(sp, ell, theta).real
            step = (s_th - target) / d_th
            theta = theta - step
            if np.max(np.abs(step)) < 1e-15 * ell:
                break
        z_new = spectral.trig_eval(zp, ell, theta) + curve.linear_slope * theta
        curve = Curve(topology=curve.topology, ell=new_ell, z=np.asarray(z_new),
                      speed=nu)
    return curve


def _eval_cumulative(sp: np.ndarray, ell: float, theta: np.ndarray) -> np.ndarray:
    """Evaluate the arclength integral from node 0 to arbitrary points theta."""
    n = sp.size
    mean = float(np.mean(sp))
    c = np.fft.fft(sp) / n
    k = spectral.wavenumbers(n, ell)
    a = np.zeros_like(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        a[1:] = c[1:] / (1j * k[1:])
    if n % 2 == 0:
        a[n // 2] = 0.0
    # antiderivative of the periodic part, evaluated spectrally
    k_idx = np.fft.fftfreq(n, d=1.0 / n)
    coeff = a * np.exp(1j * np.pi * k_idx)
    anti = (np.exp(1j * np.multiply.outer(theta, k)) @ coeff).real
    alpha0 = -ell / 2
    anti0 = (np.exp(1j * alpha0 * k) @ coeff).real
    return anti - anti0 + mean * (theta - alpha0)


def reparametrize_arclength(curve: Curve, tol: float = 1e-10,
                            hard_tol: float = 1e-4) -> Curve:
    """Arc-length (closed) / constant-speed (periodic) reparametrization.

    The residual is limited by the band of the reparametrized curve at the
    given n; between ``tol`` and ``hard_tol`` a warning reports it, above
    ``hard_tol`` the map is considered non-convergent.
    """
    out = _arclength_map(curve)
    dev = float(np.max(np.abs(np.abs(out.dz()) - out.speed)))
    if dev > hard_tol * max(out.speed, 1.0):
        raise RuntimeError(f"arclength reparametrization did not converge: "
                           f"max||dz|-speed| = {dev:.3e}")
    if dev > tol * max(out.speed, 1.0):
        warnings.warn(f"constant-speed residual {dev:.2e} is truncation-limited "
                      f"at n={out.n}", stacklevel=2)
    return out


def polyline_self_intersects(z: np.ndarray, closed: bool = True) -> bool:
    """Exact segment-crossing test on the sampled polyline."""
    n = z.size
    p = np.column_stack([z.real, z.imag])
    q = np.roll(p, -1, axis=0)
    if not closed:
        p, q = p[:-1], q[:-1]
    m = p.shape[0]

    def cross(o, a, b):
        return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) \
            - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])

    i_idx, j_idx = np.triu_indices(m, k=2)
    adjacent = ((j_idx - i_idx) % m <= 1) | ((i_idx - j_idx) % m <= 1)
    i_idx, j_idx = i_idx[~adjacent], j_idx[~adjacent]
    p1, q1 = p[i_idx], q[i_idx]
    p2, q2 = p[j_idx], q[j_idx]
    d1 = cross(p2, q2, p1) * cross(p2, q2, q1)
    d2 = cross(p1, q1, p2) * cross(p1, q1, q2)
    return bool(np.any((d1 < 0) & (d2 < 0)))


def _finalize(curve: Curve) -> Curve:
    curve = ensure_clockwise(curve)
    cac = chord_arc_constant(curve)
    if (not np.isfinite(cac) or cac > CHORD_ARC_REJECT
            or polyline_self_intersects(curve.z,
                                        curve.topology == TOPOLOGY_CLOSED)):
        raise ValueError(f"scenario rejected: chord-arc scan failed "
                         f"(constant {cac:.3e}, curve self-intersects)")
    dev = float(np.max(np.abs(np.abs(curve.dz()) - curve.speed)))
    if dev > 1e-12:
        curve = reparametrize_arclength(curve)
    cac = chord_arc_constant(curve)
    if not np.isfinite(cac) or cac > CHORD_ARC_REJECT:
        raise ValueError(f"scenario rejected: chord-arc scan failed after "
                         f"reparametrization (constant {cac:.3e})")
    return curve


def build_scenario(name: str, n: int, **params) -> Curve:
    """Construct a named initial interface on an n-point grid.

    Scenarios: unit-circle, perturbed-circle(mode, amplitude),
    turned-graph(a1, a2), stable-graph(amplitude, mode).
    """
    if n & (n - 1):
        raise ValueError("grid size must be a power of two")
    alpha = spectral.alpha_grid(n, 2 * np.pi)
    if name == "unit-circle":
        z = np.sin(alpha) + 1j * np.cos(alpha)
        return Curve(topology=TOPOLOGY_CLOSED, ell=2 * np.pi, z=z, speed=1.0)
    if name == "perturbed-circle":
        k = int(params.get("mode", 3))
        a = float(params.get("amplitude", 0.1))
        r = 1.0 + a * np.cos(k * alpha)
        z = r * (np.sin(alpha) + 1j * np.cos(alpha))
        curve = Curve(topology=TOPOLOGY_CLOSED, ell=2 * np.pi, z=z, speed=1.0)
        return _finalize(curve)
    if name == "turned-graph":
        a1 = float(params.get("a1", 1.5))
        a2 = float(params.get("a2", 0.4))
        z = (alpha - a1 * np.sin(alpha)) + 1j * (a2 * np.sin(alpha))
        curve = Curve(topology=TOPOLOGY_PERIODIC, ell=2 * np.pi, z=z, speed=1.0)
        curve = _finalize(curve)
        turned = np.mean(curve.dz().real <= 0)
        if turned <= 0:
            raise ValueError("turned-graph scenario has no turned region on the grid")
        return curve
    if name == "stable-graph":
        a = float(params.get("amplitude", 1e-3))
        k = int(params.get("mode", 3))
        z = alpha + 1j * (a * np.cos(k * alpha))
        curve = Curve(topology=TOPOLOGY_PERIODIC, ell=2 * np.pi, z=z, speed=1.0)
        return _finalize(curve)
    raise ValueError(f"unknown scenario {name!r}")
