import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from mixzone import growth, spectral
from mixzone.curves import build_scenario
from mixzone.growth import (bump, bump_cdf, bump_mass, build_profile,
                            sublevel_family, sublevel_intervals,
                            verify_growth_bounds, admissibility_scan)


def test_bump_mass_oracle():
    val, _ = quad(lambda x: np.exp(-1.0 / (1.0 - x * x)), -1, 1,
                  limit=200, epsabs=1e-14)
    assert bump_mass() == pytest.approx(val, rel=1e-11)


def test_bump_cdf_endpoints():
    assert bump_cdf(np.array([-1.0]))[0] == pytest.approx(0.0, abs=1e-15)
    assert bump_cdf(np.array([1.0]))[0] == pytest.approx(1.0, rel=1e-12)
    assert bump_cdf(np.array([0.0]))[0] == pytest.approx(0.5, rel=1e-12)


def test_stable_input_gives_empty_profile():
    c = build_scenario("stable-graph", 128, amplitude=0.0)
    prof = build_profile(c)
    assert np.all(prof.c == 0)
    assert np.all(prof.psi0 == 1.0)
    assert len(prof.components) == 0


def test_circle_support_inside_sublevel(circle256):
    curve, prof, ws = circle256
    # supp c sits inside the closure of {cos(alpha) < eta}: sign scan of the
    # closed-form derivative, allowing the mollification smear r
    f = np.cos(curve.alpha)
    supp = prof.support_mask
    assert np.all(f[supp] < prof.eta + prof.holder_seminorm * prof.r * 1.0001)


def test_psi1_saturates_deep_inside(circle256):
    curve, prof, ws = circle256
    intervals = prof.sublevel
    assert len(intervals) == 1
    a_i, b_i = intervals[0]
    deep = []
    for j, al in enumerate(curve.alpha):
        pos = al if a_i <= al <= b_i else (al + 2 * np.pi if al < a_i else al)
        if a_i + 2 * prof.r < pos < b_i - 2 * prof.r:
            deep.append(j)
    assert deep
    assert np.max(np.abs(prof.psi1[deep] - 1.0)) < 1e-12


def test_psi1_pointwise_convolution_oracle(circle256):
    # direct adaptive quadrature of the convolution definition at a few nodes
    curve, prof, ws = circle256
    (a_i, b_i) = prof.sublevel[0]
    r = prof.r
    lo, hi = a_i + r, b_i - r  # support of the indicator
    for j in (40, 100, 181, 200):
        al = curve.alpha[j]

        def integrand(y):
            pos = al - y
            inside = (lo < pos < hi) or (lo < pos + 2 * np.pi < hi) \
                or (lo < pos - 2 * np.pi < hi)
            return bump(np.array([y / r]))[0] / (r * bump_mass()) * inside

        val, _ = quad(integrand, -r, r, limit=400, epsabs=1e-12)
        assert prof.psi1[j] == pytest.approx(val, abs=5e-9)


def test_growth_bounds_circle(circle256):
    curve, prof, ws = circle256
    rep = {e["name"]: e for e in verify_growth_bounds(prof, curve)}
    assert rep["hull_inequality_sup"]["measured"] <= 9 / 16 + 1e-12
    assert rep["hull_inequality_sup"]["passed"]
    assert rep["stable_region_slope_inf"]["measured"] >= 1 / 8 - 1e-12
    assert rep["growth_monotonicity"]["passed"]
    assert rep["c_dominates_psi1"]["passed"]


def test_mass_identity(circle256):
    # integral of c equals half of (eta * |{chi=1}| + integral of the
    # negative part of the slope)
    curve, prof, ws = circle256
    (a_i, b_i) = prof.sublevel[0]
    chi_measure = (b_i - prof.r) - (a_i + prof.r)
    neg_part, _ = quad(lambda t: max(-np.cos(t), 0.0), -np.pi, np.pi, limit=200)
    expected = 0.5 * (prof.eta * chi_measure + neg_part)
    measured = float(np.mean(prof.c) * curve.ell)
    # node-sum quadrature of the mollified profile carries its Gevrey tail
    assert measured == pytest.approx(expected, abs=2e-5)


def test_sublevel_family_chain(circle256):
    curve, prof, ws = circle256
    fam = sublevel_family(curve, [0.1, 0.25, 0.4])
    widths = []
    for ivs in fam.intervals:
        assert len(ivs) == 1
        widths.append(ivs[0][1] - ivs[0][0])
    assert widths[0] < widths[1] < widths[2]
    # distance bound between consecutive level boundaries
    h = curve.ell / curve.n
    for (lo_set, hi_set, d_eta) in [(fam.intervals[0][0], fam.intervals[1][0], 0.15),
                                    (fam.intervals[1][0], fam.intervals[2][0], 0.15)]:
        bound = (d_eta / prof.holder_seminorm) ** (1.0 / prof.delta)
        gap = min(lo_set[0] - hi_set[0], hi_set[1] - lo_set[1])
        assert gap >= bound - h


@settings(max_examples=8, deadline=None)
@given(eta=st.floats(0.15, 0.3), s=st.floats(0.1, 0.3))
def test_partition_invariants(eta, s):
    if eta * (2 + s) >= 1:
        return
    c = build_scenario("unit-circle", 128)
    prof = build_profile(c, eta=eta, s=s)
    assert np.all(prof.psi0 + prof.psi1 == 1.0)
    assert np.all((0 <= prof.psi1) & (prof.psi1 <= 1 + 1e-15))
    assert np.all(prof.c >= 0)
    assert np.min(prof.c - prof.psi1 * eta / 2) >= -1e-13
    # psi1 <= (2/eta) c sample-wise
    assert np.all(prof.psi1 <= (2 / eta) * prof.c + 1e-12)


def test_profile_rejects_bad_parameters():
    c = build_scenario("unit-circle", 128)
    with pytest.raises(ValueError):
        build_profile(c, eta=0.5, s=0.3)  # eta(2+s) >= 1
    with pytest.raises(ValueError):
        build_profile(c, eta=0.2, s=0.4)  # s >= 1/3


def test_admissibility_scan_weights(circle256):
    curve, prof, ws = circle256
    rep = admissibility_scan(prof, curve, n_levels=2)
    by_name = {e["name"]: e for e in rep}
    assert by_name["admissibility_N1"]["weight"] == 2.0
    assert by_name["admissibility_N2"]["weight"] == pytest.approx(4 / 3)
    assert 1.0 < by_name["admissibility_N2"]["weight"] < 2.0
    assert by_name["admissibility_N1"]["margin"] >= 7 / 16 - 1e-9
    # margins grow with N while the boundary region binds; the limit margin
    # is dominated by the fully unstable interior point and can dip back
    assert by_name["admissibility_N2"]["margin"] >= by_name["admissibility_N1"]["margin"]
    assert by_name["admissibility_limit"]["margin"] > 0


def test_turned_profile_bounds(turned512):
    curve, prof = turned512
    rep = {e["name"]: e for e in verify_growth_bounds(prof, curve)}
    assert rep["hull_inequality_sup"]["measured"] <= 9 / 16 + 1e-12
    assert rep["stable_region_slope_inf"]["measured"] >= 1 / 8 - 1e-12
