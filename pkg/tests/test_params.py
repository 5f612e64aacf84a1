from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from chemolab.params import (
    CoefficientSpec,
    HypothesisError,
    ParameterSet,
    TheoreticalBounds,
    check_h1,
    check_h2,
    check_h3,
    comparison_envelope,
    cube_principal_pair,
    finite_time_floor,
    m_plus,
    mn_sequence,
    rectangle_bounds,
    small_mass_threshold,
    spreading_speeds,
)
from conftest import homogeneous

# Reference-set constants, frozen from hand evaluation of the closed forms
# (denominator D = (b_sup-cm)(b_inf-cm) - cm^2 = 5*4 - 1 = 19 for P1).
P1_M_LOWER = 0.10526315789473684   # 2/19
P1_M_UPPER = 0.47368421052631576   # 9/19
P1_C_PLUS = 3.0784271247461903     # 2*sqrt(2) + 1/4
P1_C_MINUS = 1.1642135623730951    # 2*sqrt(1/2) - 1/4
P1_H3_THRESHOLD = 3.118033988749895
# finite_time_floor(P1, 0.1, 0.1, 1, 1) = 0.1*exp(1 - 0.6*e^2)
FLOOR_EXAMPLE = 0.0032275925753584896


def with_b(p: ParameterSet, base: float, amp: float) -> ParameterSet:
    return ParameterSet(chi=p.chi, lam=p.lam, mu=p.mu, dims=p.dims, a=p.a,
                        b=CoefficientSpec(base=base, space_amplitude=amp,
                                          space_wavelength=p.b.space_wavelength))


class TestHypotheses:
    def test_h1_cases(self, p1):
        assert check_h1(p1) is True
        # equality is not enough
        assert check_h1(homogeneous(1.0, 1.0, chi=1.0, mu=1.0)) is False
        assert check_h1(homogeneous(1.0, 5.0)) is True

    def test_h2_cases(self, p1):
        assert check_h2(p1) is True          # threshold (1 + 2/1) * 1 = 3 < 5
        assert check_h2(with_b(p1, 3.5, 0.5)) is False   # b_inf = 3 is exactly at it

    def test_h3_cases(self, p1):
        assert check_h3(p1) is True
        # threshold for a in [1,2], lam = 1, N = 1 is 2 + sqrt(5)/2 ~ 3.1180
        assert check_h3(with_b(p1, 3.6, 0.5)) is False   # b_inf = 3.10
        assert check_h3(with_b(p1, 3.62, 0.5)) is True   # b_inf = 3.12
        thr = (1.0 + (1.0 + math.sqrt(1.25)) * 2.0 / 2.0) * 1.0
        assert thr == pytest.approx(P1_H3_THRESHOLD, abs=1e-15)

    def test_tiny_chi_passes_everything(self):
        p = homogeneous(1.0, 1.0, chi=1e-9)
        assert check_h1(p) and check_h2(p) and check_h3(p)


class TestRectangle:
    def test_p1_values(self, p1):
        lo, hi = rectangle_bounds(p1)
        assert lo == pytest.approx(P1_M_LOWER, rel=1e-12)
        assert hi == pytest.approx(P1_M_UPPER, rel=1e-12)
        assert hi < m_plus(p1) == pytest.approx(0.5, rel=1e-15)

    def test_homogeneous_collapses_to_ratio(self):
        p = homogeneous(1.3, 2.6, chi=0.2, mu=0.5)
        lo, hi = rectangle_bounds(p)
        assert lo == pytest.approx(0.5, rel=1e-14)
        assert hi == pytest.approx(0.5, rel=1e-14)

    def test_rejects_without_h2(self, p1):
        with pytest.raises(HypothesisError):
            rectangle_bounds(with_b(p1, 3.5, 0.5))

    def test_strict_refinement_over_naive_bounds(self, p1):
        lo, hi = rectangle_bounds(p1)
        cm = p1.chimu
        naive_hi = p1.a_sup / (p1.b_inf - cm)
        naive_lo = (p1.a_inf - cm * naive_hi) / (p1.b_sup - cm)
        assert lo > naive_lo
        assert hi < naive_hi


class TestMnSequence:
    def test_first_iterates(self, p1):
        seq = mn_sequence(p1, 2)
        assert seq[0] == (0.0, 0.5)
        assert seq[1][0] == pytest.approx(0.1, abs=1e-15)
        assert seq[1][1] == pytest.approx(0.475, abs=1e-15)
        assert seq[2][0] == pytest.approx(0.105, abs=1e-15)
        assert seq[2][1] == pytest.approx(0.47375, abs=1e-15)

    def test_converges_to_rectangle(self, p1):
        seq = mn_sequence(p1, 50)
        assert len(seq) == 51
        lo, hi = rectangle_bounds(p1)
        assert seq[50][0] == pytest.approx(lo, abs=1e-12)
        assert seq[50][1] == pytest.approx(hi, abs=1e-12)

    def test_contraction_rate(self, p1):
        # increments shrink by (chi*mu)^2/((b_inf-cm)(b_sup-cm)) = 1/20 per pair
        seq = mn_sequence(p1, 6)
        for k in range(1, 5):
            d1 = seq[k + 1][0] - seq[k][0]
            d0 = seq[k][0] - seq[k - 1][0]
            assert d1 / d0 == pytest.approx(0.05, rel=1e-9)

    def test_monotone_until_plateau(self, p1):
        seq = mn_sequence(p1, 200)
        for (lo0, hi0), (lo1, hi1) in zip(seq, seq[1:]):
            if (lo1, hi1) == (lo0, hi0):
                continue  # converged tail
            assert lo1 > lo0
            assert hi1 < hi0

    def test_rejects_without_h2(self, p1):
        with pytest.raises(HypothesisError):
            mn_sequence(with_b(p1, 3.5, 0.5), 10)


class TestSpreadingSpeeds:
    def test_p1_values(self, p1):
        cm, cp = spreading_speeds(p1)
        assert cp == pytest.approx(P1_C_PLUS, rel=1e-12)
        assert cm == pytest.approx(P1_C_MINUS, rel=1e-12)

    def test_vanishing_chemotaxis_limit(self):
        p = homogeneous(1.0, 1.0, chi=1e-12)
        cm, cp = spreading_speeds(p)
        assert cp == pytest.approx(2.0, abs=1e-9)
        assert cm == pytest.approx(2.0, abs=1e-9)
        het = ParameterSet(chi=1e-12, lam=1.0, mu=1.0, dims=1,
                           a=CoefficientSpec(1.5, 0.5, 10.0),
                           b=CoefficientSpec(5.5, 0.5, 10.0))
        cm, cp = spreading_speeds(het)
        assert cp == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-9)
        assert cm == pytest.approx(2.0, abs=1e-9)

    def test_rejects_without_h3(self, p1):
        with pytest.raises(HypothesisError):
            spreading_speeds(with_b(p1, 3.6, 0.5))


class TestFiniteTimeFloor:
    def test_reference_value(self, p1):
        val = finite_time_floor(p1, 0.1, 0.1, horizon=1.0, t=1.0)
        oneliner = 0.1 * math.exp(1.0 - 0.6 * math.e ** 2)
        assert val == pytest.approx(oneliner, rel=1e-14)
        assert val == pytest.approx(FLOOR_EXAMPLE, rel=1e-12)

    def test_zero_infimum_gives_zero(self, p1):
        assert finite_time_floor(p1, 0.0, 0.3, 2.0, 1.0) == 0.0

    def test_small_mass_keeps_floor_above_start(self, p1):
        horizon = 1.0
        thresh = small_mass_threshold(p1, horizon)
        assert thresh == pytest.approx(math.exp(-2.0) / 6.0, rel=1e-14)
        u0 = 0.9 * thresh
        for t in np.linspace(0.0, horizon, 21):
            assert finite_time_floor(p1, u0, u0, horizon, float(t)) >= u0 * (1 - 1e-12)

    def test_rejects_bad_window(self, p1):
        with pytest.raises(ValueError):
            finite_time_floor(p1, 0.1, 0.1, horizon=1.0, t=1.5)
        with pytest.raises(ValueError):
            finite_time_floor(p1, -0.1, 0.1, horizon=1.0, t=0.5)
        with pytest.raises(ValueError):
            finite_time_floor(p1, 0.2, 0.1, horizon=1.0, t=0.5)


class TestComparisonEnvelope:
    def test_matches_adaptive_ode(self, p1):
        # independent oracle: high-accuracy adaptive integration of the
        # scalar logistic equation ubar' = ubar (a_sup - (b_inf - cm) ubar)
        r = p1.a_sup
        s = p1.b_inf - p1.chimu
        for u0 in (0.05, 0.3, 0.7):
            sol = solve_ivp(lambda _, y: y * (r - s * y), (0.0, 6.0), [u0],
                            rtol=1e-12, atol=1e-14, dense_output=True)
            for t in (0.0, 0.3, 1.0, 6.0):
                assert comparison_envelope(p1, u0, t) == pytest.approx(
                    float(sol.sol(t)[0]), rel=1e-9, abs=1e-12)

    def test_limit_and_monotonicity(self, p1):
        t = np.linspace(0.0, 30.0, 200)
        env = comparison_envelope(p1, 0.05, t)
        rising = env[:-1] < 0.5 * (1.0 - 1e-12)   # strictly below the plateau
        assert np.all(np.diff(env)[rising] > 0)
        assert np.all(np.diff(env) >= 0)
        assert env[-1] == pytest.approx(0.5, abs=1e-8)
        env_dn = comparison_envelope(p1, 0.9, t)
        falling = env_dn[:-1] > 0.5 * (1.0 + 1e-12)
        assert np.all(np.diff(env_dn)[falling] < 0)
        assert np.all(np.diff(env_dn) <= 0)
        assert comparison_envelope(p1, 0.0, 5.0) == 0.0

    def test_rejects_without_h1(self):
        p = homogeneous(1.0, 1.0, chi=2.0)
        with pytest.raises(HypothesisError):
            comparison_envelope(p, 0.1, 1.0)


class TestCubePrincipalPair:
    def test_reference_value(self):
        sigma, phi = cube_principal_pair(1.0, math.pi, 1)
        assert sigma == pytest.approx(0.75, abs=1e-15)
        assert phi(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-15)
        assert abs(phi(np.array([math.pi]))[0]) < 1e-15
        assert abs(phi(np.array([-math.pi]))[0]) < 1e-15

    @pytest.mark.parametrize("half_width,n", [(math.pi, 129), (2.0, 201)])
    def test_against_dense_dirichlet_eigensolve(self, half_width, n):
        # oracle: smallest eigenvalue of the second-difference operator with
        # absorbing walls, dense symmetric eigensolve, second-order accurate
        a0 = 1.0
        h = 2.0 * half_width / (n + 1)
        main = np.full(n, 2.0 / h**2)
        off = np.full(n - 1, -1.0 / h**2)
        mat = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
        lam_min = np.linalg.eigvalsh(mat)[0]
        sigma, _ = cube_principal_pair(a0, half_width, 1)
        assert sigma == pytest.approx(a0 - lam_min, abs=5.0 * h**2)

    def test_two_dimensional(self):
        sigma, phi = cube_principal_pair(2.0, 1.0, 2)
        assert sigma == pytest.approx(2.0 - 2.0 * math.pi**2 / 4.0, rel=1e-15)
        assert phi(np.array([0.0]), np.array([0.0]))[0] == pytest.approx(1.0)
        # vanishes on each wall
        y = np.linspace(-1.0, 1.0, 11)
        assert np.all(np.abs(phi(np.array([1.0]), y)) < 1e-15)
        assert np.all(np.abs(phi(y, np.array([-1.0]))) < 1e-15)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            cube_principal_pair(1.0, -1.0, 1)
        with pytest.raises(ValueError):
            cube_principal_pair(1.0, 1.0, 3)


class TestCoefficientSpec:
    def test_extremes_and_sampling(self):
        spec = CoefficientSpec(base=2.0, space_amplitude=-0.5,
                               space_wavelength=4.0, time_amplitude=0.25,
                               time_period=3.0)
        assert spec.inf == pytest.approx(1.25)
        assert spec.sup == pytest.approx(2.75)
        x = np.linspace(-8.0, 8.0, 1601)
        for t in (0.0, 0.75, 1.5):
            vals = spec.sample((x,), t)
            assert vals.min() >= spec.inf - 1e-12
            assert vals.max() <= spec.sup + 1e-12
        # sup and inf are attained on a commensurate lattice at t = 0 / t = T/2
        assert spec.sample((np.array([2.0]),), 0.0)[0] == pytest.approx(spec.sup)
        assert spec.sample((np.array([0.0]),), 1.5)[0] == pytest.approx(spec.inf)

    def test_constant_shorthand(self):
        spec = CoefficientSpec.constant(1.0)
        assert spec.inf == spec.sup == 1.0
        assert spec.sample((np.array([3.7]),), 11.1)[0] == 1.0

    def test_rejects_nonpositive_infimum(self):
        with pytest.raises(ValueError):
            CoefficientSpec(base=1.0, space_amplitude=0.6, time_amplitude=0.4)
        with pytest.raises(ValueError):
            CoefficientSpec(base=1.0, space_wavelength=0.0)
        with pytest.raises(ValueError):
            CoefficientSpec(base=1.0, time_period=-2.0)


class TestParameterSetValidation:
    def test_rejects_nonpositive_rates(self):
        a, b = CoefficientSpec.constant(1.0), CoefficientSpec.constant(2.0)
        with pytest.raises(ValueError):
            ParameterSet(chi=0.0, lam=1.0, mu=1.0, dims=1, a=a, b=b)
        with pytest.raises(ValueError):
            ParameterSet(chi=1.0, lam=0.0, mu=1.0, dims=1, a=a, b=b)
        with pytest.raises(ValueError):
            ParameterSet(chi=1.0, lam=1.0, mu=-1.0, dims=1, a=a, b=b)
        with pytest.raises(ValueError):
            ParameterSet(chi=1.0, lam=1.0, mu=1.0, dims=3, a=a, b=b)


class TestTheoreticalBounds:
    def test_p1_fully_populated(self, p1):
        tb = TheoreticalBounds.from_params(p1)
        assert tb.h1 and tb.h2 and tb.h3
        assert tb.m_plus == pytest.approx(0.5)
        assert tb.m_lower == pytest.approx(P1_M_LOWER, rel=1e-12)
        assert tb.m_upper == pytest.approx(P1_M_UPPER, rel=1e-12)
        assert tb.c_minus == pytest.approx(P1_C_MINUS, rel=1e-12)
        assert tb.c_plus == pytest.approx(P1_C_PLUS, rel=1e-12)
        d = tb.to_dict()
        assert set(d) == {"h1", "h2", "h3", "m_plus", "m_lower", "m_upper",
                          "c_minus", "c_plus"}

    def test_gating_by_regime(self, p1):
        tb = TheoreticalBounds.from_params(with_b(p1, 2.25, 0.25))  # H1 only
        assert tb.h1 and not tb.h2 and not tb.h3
        assert tb.m_plus is not None and tb.c_plus is not None
        assert tb.m_lower is None and tb.m_upper is None and tb.c_minus is None

        tb = TheoreticalBounds.from_params(with_b(p1, 3.3, 0.25))  # H2, not H3
        assert tb.h2 and not tb.h3
        assert tb.m_lower is not None and tb.c_minus is None

        tb = TheoreticalBounds.from_params(
            homogeneous(1.0, 1.0, chi=2.0))  # nothing holds
        assert not tb.h1
        assert tb.m_plus is None and tb.c_plus is None


# ---------------------------------------------------------------------------
# property tests over randomly drawn admissible parameter sets

@st.composite
def param_sets(draw):
    chi = draw(st.floats(0.05, 3.0))
    lam = draw(st.floats(0.1, 4.0))
    mu = draw(st.floats(0.05, 3.0))
    dims = draw(st.sampled_from([1, 2]))
    a_base = draw(st.floats(0.5, 3.0))
    b_base = draw(st.floats(0.5, 9.0))
    fa = draw(st.floats(0.0, 0.4))
    ga = draw(st.floats(0.0, 0.4))
    fb = draw(st.floats(0.0, 0.4))
    return ParameterSet(
        chi=chi, lam=lam, mu=mu, dims=dims,
        a=CoefficientSpec(a_base, fa * a_base, 2.0, ga * a_base, 3.0),
        b=CoefficientSpec(b_base, fb * b_base, 2.0),
    )


@given(param_sets())
@settings(max_examples=200, deadline=None)
def test_hypothesis_chain_is_monotone(p):
    if check_h3(p):
        assert check_h2(p)
    if check_h2(p):
        assert check_h1(p)


@given(param_sets())
@settings(max_examples=200, deadline=None)
def test_rectangle_ordering_under_h2(p):
    # a machine-epsilon margin in the damping condition drowns the strict
    # refinement below in roundoff, so ask for a real one
    assume(p.b_inf > (1.0 + p.a_sup / p.a_inf) * p.chimu * (1.0 + 1e-9))
    lo, hi = rectangle_bounds(p)
    mp = m_plus(p)
    assert 0.0 < lo <= hi <= mp
    # strict refinement of the one-sided bounds
    cm = p.chimu
    assert hi < p.a_sup / (p.b_inf - cm)
    assert lo > (p.a_inf - cm * p.a_sup / (p.b_inf - cm)) / (p.b_sup - cm)


@given(param_sets())
@settings(max_examples=100, deadline=None)
def test_mn_sequence_contracts_to_rectangle(p):
    assume(check_h2(p))
    cm = p.chimu
    ratio = cm * cm / ((p.b_inf - cm) * (p.b_sup - cm))
    assume(ratio <= 0.85)  # geometric rate must resolve 1e-10 within 200 steps
    seq = mn_sequence(p, 200)
    lo, hi = rectangle_bounds(p)
    assert seq[-1][0] == pytest.approx(lo, abs=1e-10)
    assert seq[-1][1] == pytest.approx(hi, abs=1e-10)
    # strictly monotone until increments hit float resolution, monotone after
    for k, ((lo0, hi0), (lo1, hi1)) in enumerate(zip(seq, seq[1:])):
        assert lo1 >= lo0 and hi1 <= hi0
        if k == 0:
            assert lo1 > lo0 and hi1 < hi0  # first step is macroscopic under H2
        assert lo1 <= lo + 1e-12 and hi1 >= hi - 1e-12


@given(param_sets())
@settings(max_examples=200, deadline=None)
def test_speed_ordering_under_h3(p):
    assume(check_h3(p))
    cm, cp = spreading_speeds(p)
    assert 0.0 < cm <= cp
    tb = TheoreticalBounds.from_params(p)
    assert tb.c_minus == cm and tb.c_plus == cp
