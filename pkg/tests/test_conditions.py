"""Weight checks, rho maps, cut-off families, interval schemes, the identity."""

import math

import numpy as np
import pytest

from qschro.coeffs import CoefficientField, PiecewisePoly
from qschro.conditions import (
    IntervalScheme,
    WeightFunction,
    build_cutoff,
    build_rho,
    check_growth,
    check_intervals,
    check_m,
    cutoff_invariants,
    verify_caccioppoli,
)
from qschro.errors import BadSchemeError, NonRealError
from qschro.propagate import integrate
from qschro.quasi import QuasiState, assemble

M_ABS = PiecewisePoly([0.0], [[1.0, -1.0], [1.0, 1.0]])  # 1 + |x|


def test_check_m_constant():
    rep = check_m(WeightFunction(PiecewisePoly.constant(1.0), 60.0))
    assert rep.verdict == "holds-on-horizon"
    assert rep.witnesses["I_right"] == pytest.approx(60.0, abs=1e-9)


def test_check_m_logarithmic_divergence():
    w = WeightFunction(M_ABS, 60.0)
    rep = check_m(w, probe_points=[math.e**4 - 1])
    assert rep.verdict == "holds-on-horizon"
    key = next(k for k in rep.witnesses if k.startswith("I("))
    assert rep.witnesses[key] == pytest.approx(4.0, abs=1e-6)


def test_check_m_saturating_quadratic():
    w = WeightFunction(PiecewisePoly.from_coeffs([1.0, 0.0, 1.0]), 2e6)
    rep = check_m(w)
    assert rep.verdict == "inconclusive"
    assert rep.witnesses["I_right"] == pytest.approx(math.pi / 2, abs=1e-6)


def test_check_m_below_one_fails_with_witness():
    w = WeightFunction(PiecewisePoly.from_coeffs([0.5, 0.0, 0.01]), 10.0)
    rep = check_m(w)
    assert rep.verdict == "fails"
    assert rep.witnesses["witness_value"] < 1.0
    assert "witness_x" in rep.witnesses


def test_weight_function_rejects_complex():
    with pytest.raises(NonRealError):
        WeightFunction(PiecewisePoly.constant(1 + 1j), 10.0)


def test_check_growth_linear_r1_holds():
    w = WeightFunction(M_ABS, 60.0)
    rep = check_growth(PiecewisePoly.from_coeffs([0.0, -1.0]), w)
    assert rep.verdict == "holds-on-horizon"
    assert rep.witnesses["C"] <= 1.01


def test_check_growth_signs_give_zero_constant():
    # r1 = x: the positive part vanishes toward -inf, negative toward +inf
    w = WeightFunction(PiecewisePoly.constant(1.0), 40.0)
    rep = check_growth(PiecewisePoly.from_coeffs([0.0, 1.0]), w)
    assert rep.verdict == "holds-on-horizon"
    assert rep.witnesses["C"] == 0.0


def test_check_growth_cubic_fails_at_horizon():
    w = WeightFunction(M_ABS, 60.0)
    rep = check_growth(PiecewisePoly.from_coeffs([0, 0, 0, -1.0]), w)
    assert rep.verdict == "fails"
    assert abs(rep.witnesses["witness_x"]) == pytest.approx(60.0, rel=0.2)


def test_check_growth_fails_monotone_in_horizon():
    # extending the horizon never flips a failure back to holds
    r1 = PiecewisePoly.from_coeffs([0, 0, 0, -1.0])
    for X in (20.0, 40.0, 80.0):
        m = PiecewisePoly([0.0], [[1.0, -1.0], [1.0, 1.0]])
        rep = check_growth(r1, WeightFunction(m, X))
        assert rep.verdict == "fails"


def test_build_rho_identity():
    rho = build_rho(WeightFunction(PiecewisePoly.constant(1.0), 20.0))
    for x in (-7.3, 0.0, 11.1):
        assert rho.rho(x) == pytest.approx(x, abs=1e-12)


def test_build_rho_logarithmic():
    rho = build_rho(WeightFunction(M_ABS, 60.0))
    assert rho.rho(math.e - 1) == pytest.approx(1.0, abs=1e-10)
    assert rho.rho(-(math.e - 1)) == pytest.approx(-1.0, abs=1e-10)


def test_rho_inverse_roundtrip():
    rho = build_rho(WeightFunction(M_ABS, 60.0))
    rng = np.random.default_rng(5)
    for x in rng.uniform(-55, 55, 100):
        assert rho.inverse(rho.rho(float(x))) == pytest.approx(float(x), abs=1e-10)


def test_cutoff_thmA():
    cut = build_cutoff("thmA", 3)
    assert cut.K == 1.5
    assert cut.phi.eval(0.0) == pytest.approx(1.0)
    assert cut.phi.eval(3.0) == pytest.approx(1.0)
    assert cut.phi.eval(4.0) == 0.0
    v, x_at = cut.phi.derivative().extreme_on(3.0, 4.0, "min")
    assert v == pytest.approx(-1.5)
    inv = cutoff_invariants(cut)
    assert all(inv[k] for k in ("range_ok", "core_ok", "support_ok", "sign_ok", "slope_ok"))


def test_cutoff_thmB_scaled_slope():
    scheme = IntervalScheme.unit_intervals(4)
    cut = build_cutoff("thmB", 2, scheme=scheme)
    inv = cutoff_invariants(cut)
    assert all(inv[k] for k in ("range_ok", "core_ok", "support_ok", "sign_ok", "slope_ok"))
    # unit intervals: |phi'| <= 1.5
    dmax, _ = cut.phi.derivative().extreme_on(*scheme.intervals[-2], "max")
    assert dmax <= 1.5 + 1e-12


def test_cutoff_thmA_rho_identity_weight():
    rho = build_rho(WeightFunction(PiecewisePoly.constant(1.0), 20.0))
    cut = build_cutoff("thmA-rho", 2, rho=rho)
    plain = build_cutoff("thmA", 2)
    for x in np.linspace(-3.5, 3.5, 101):
        assert cut.phi.eval(float(x)) == pytest.approx(
            plain.phi.eval(float(x)), abs=1e-9
        )


def test_cutoff_thmA_rho_chain_rule_bound():
    rho = build_rho(WeightFunction(M_ABS, 60.0))
    cut = build_cutoff("thmA-rho", 2, rho=rho)
    inv = cutoff_invariants(cut)
    assert inv["slope_ok"]
    # |phi'(x)| * m(x) <= K at mesh points
    lo, hi = cut.support
    for x in np.linspace(lo, hi, 301):
        bound = abs(cut.phi_prime(float(x))) * M_ABS.eval(float(x)).real
        assert bound <= cut.K * (1 + 1e-7)


def test_cutoff_bad_scheme():
    scheme = IntervalScheme.unit_intervals(2)
    with pytest.raises(BadSchemeError):
        build_cutoff("thmB", 3, scheme=scheme)
    with pytest.raises(BadSchemeError):
        IntervalScheme({1: (0.0, 1.0), 2: (0.5, 1.5)}, delta=1.0)


def test_check_intervals_zero_r1_ignores_spikes():
    # r1 = 0 on the intervals, arbitrary growth between them: C = 0
    scheme = IntervalScheme.unit_intervals(5)
    pieces = []
    bps = []
    for n in sorted(scheme.intervals):
        a, b = scheme.intervals[n]
        bps.extend([a, b])
    bps = sorted(bps)
    # huge quadratic bumps off the intervals, zero on them
    prev = None
    for i in range(len(bps) + 1):
        inside = i % 2 == 1
        pieces.append([0.0] if inside else [1e6, 0, 1e4])
    r1 = PiecewisePoly(bps, pieces, degree_cap=None)
    rep = check_intervals(r1, scheme)
    assert rep.verdict == "holds-on-horizon"
    assert rep.witnesses["C"] == 0.0


def test_check_intervals_growing_constants_fail():
    scheme = IntervalScheme.unit_intervals(5)
    rep = check_intervals(PiecewisePoly.from_coeffs([0.0, -1.0]), scheme)
    assert rep.verdict == "fails"
    assert rep.witnesses["witness_constant"] > 0


def test_check_intervals_proportional_lengths_hold():
    # geometric intervals [2^n, 2^n + 2^n]: sup r1^- / length stays ~2
    iv = {}
    for n in range(1, 6):
        iv[n] = (2.0**n, 2.0**n + 2.0**n)
        iv[-n] = (-(2.0**n) - 2.0**n, -(2.0**n))
    scheme = IntervalScheme(iv, delta=2.0)
    rep = check_intervals(PiecewisePoly.from_coeffs([0.0, -1.0]), scheme)
    assert rep.verdict == "holds-on-horizon"
    assert rep.witnesses["C"] == pytest.approx(2.0, abs=0.01)


def test_check_intervals_length_bound():
    scheme = IntervalScheme.unit_intervals(3)
    bad = IntervalScheme(dict(scheme.intervals), delta=1.5)
    rep = check_intervals(PiecewisePoly.zero(), bad)
    assert rep.verdict == "fails"
    assert "witness_length" in rep.witnesses


def test_caccioppoli_free_constant():
    free = CoefficientField.free()
    v = integrate(assemble(free, "adjoint", 0.0), QuasiState(-4.0, 1.0, 0.0), 4.0)
    assert verify_caccioppoli(free, v, build_cutoff("thmA", 2)) <= 1e-9


def test_caccioppoli_free_linear():
    free = CoefficientField.free()
    v = integrate(assemble(free, "adjoint", 0.0), QuasiState(-4.0, -4.0, 1.0), 4.0)
    assert verify_caccioppoli(free, v, build_cutoff("thmA", 2)) <= 1e-8


def test_caccioppoli_delta_well():
    dw = CoefficientField.delta_well(-2.0)
    v = integrate(assemble(dw, "adjoint", 0.0), QuasiState(-4.0, 1.0, 0.2), 4.0)
    assert verify_caccioppoli(dw, v, build_cutoff("thmA", 2)) <= 1e-7


def test_caccioppoli_linear_drift():
    c = CoefficientField(
        PiecewisePoly.zero(), PiecewisePoly.zero(), PiecewisePoly.from_coeffs([0, -1j])
    )
    v = integrate(assemble(c, "adjoint", 0.0), QuasiState(-4.0, 1.0, 0.1), 4.0)
    assert verify_caccioppoli(c, v, build_cutoff("thmA", 2)) <= 1e-7


def test_caccioppoli_rejects_direct_side():
    free = CoefficientField.free()
    v = integrate(assemble(free, "direct", 0.0), QuasiState(-4.0, 1.0, 0.0), 4.0)
    with pytest.raises(ValueError):
        verify_caccioppoli(free, v, build_cutoff("thmA", 2))


def test_energy_inequality_audit_normalized_instance():
    # s = 1 shifts the numerical range: Re(L u, u) >= ||u||^2, so for any
    # null solution the identity right side dominates the core mass
    c = CoefficientField(
        PiecewisePoly.constant(1.0), PiecewisePoly.zero(), PiecewisePoly.zero()
    )
    v = integrate(assemble(c, "adjoint", 0.0), QuasiState(-4.0, 1.0, 1.0), 4.0)
    for n in (1, 2, 3):
        cut = build_cutoff("thmA", n)
        lo, hi = cut.support
        v_pw = v.to_piecewise(0, lo, hi)
        vv = v_pw * v_pw.conj()
        phi = cut.phi
        dphi = phi.derivative()
        lhs = ((phi * phi) * vv).integrate(lo, hi).real
        rhs = ((dphi * dphi) * vv).integrate(lo, hi).real
        rhs += 2.0 * ((c.r1 * dphi * phi) * vv).integrate(lo, hi).real
        assert lhs <= rhs * (1 + 1e-9)
