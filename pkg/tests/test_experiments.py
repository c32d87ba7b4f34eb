import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whitney.classify import Outcome
from whitney.dynamics import ABSORBING, FREE, RodParams, State, smooth_stick
from whitney.experiments import (
    HALF_DEGREE,
    LITTLEWOOD_EXPONENT,
    TWO_WEEKS,
    deviation_demo,
    end_angle,
    end_map_sweep,
    smooth_stick_ivt,
    two_week_extrapolation,
)
from whitney.integrate import Options, integrate
from whitney.search import DecayFit, decay_fit, survival_bisect, survival_window

from conftest import CONST2, HALF_PI, PRESETS, REST, SINE

P = RodParams()


@pytest.fixture(scope="module")
def sine_bracket():
    return survival_bisect(P, SINE, 5.0, 1e-12)


def test_free_end_map_three_points():
    t = end_map_sweep(P, REST, FREE, 2.0, [0.0, HALF_PI, math.pi])
    a0, a1, a2 = t.finals()
    assert a0 < 0.0
    assert a1 == HALF_PI
    assert a2 > math.pi
    assert a2 - math.pi == pytest.approx(-a0, abs=1e-9)
    assert [r.outcome for r in t.rows] == [Outcome.FELL_FORWARD, Outcome.SURVIVED,
                                           Outcome.FELL_BACKWARD]


def test_end_map_rows_ordered_and_spacing():
    grid = np.linspace(0.2, 2.9, 28)
    t = end_map_sweep(P, SINE, ABSORBING, 3.0, grid)
    assert [r.alpha0 for r in t.rows] == [float(x) for x in grid]
    assert t.spacing == pytest.approx(0.1)


def test_absorbing_rows_stuck_exactly_on_floor(sine_bracket):
    s = sine_bracket.survivor
    grid = np.linspace(s - 3e-7, s + 3e-7, 61)
    t = end_map_sweep(P, SINE, ABSORBING, 5.0, grid)
    for r in t.rows:
        if r.outcome is Outcome.FELL_FORWARD:
            assert r.alpha_final == 0.0
        elif r.outcome is Outcome.FELL_BACKWARD:
            assert r.alpha_final == math.pi
        else:
            assert 0.0 < r.alpha_final < math.pi
    assert t.rows[0].alpha_final == 0.0 and t.rows[-1].alpha_final == math.pi


def test_absorbing_jump_is_pi_across_window(sine_bracket):
    w = survival_window(P, SINE, 5.0, 1e-12, bracket=sine_bracket)
    lo = end_angle(P, SINE, ABSORBING, w.below_alpha, 5.0)
    hi = end_angle(P, SINE, ABSORBING, w.above_alpha, 5.0)
    assert (lo, hi) == (0.0, math.pi)
    assert hi - lo == math.pi


def test_free_end_map_refinement(sine_bracket):
    s = sine_bracket.survivor
    jumps = []
    for n in (200, 400):
        grid = np.linspace(s - 2e-7, s + 2e-7, n + 1)
        jumps.append(end_map_sweep(P, SINE, FREE, 5.0, grid).max_adjacent_jump())
    assert 1.7 <= jumps[0] / jumps[1] <= 2.3


def test_smooth_stick_end_map_refinement(sine_bracket):
    # the map is steep (slope ~ e^(lambda T)), so refine where it is steepest
    s = sine_bracket.survivor
    jumps = []
    for n in (100, 200):
        grid = np.linspace(s - 2e-7, s + 2e-7, n + 1)
        jumps.append(end_map_sweep(P, SINE, smooth_stick(), 5.0, grid).max_adjacent_jump())
    assert 1.7 <= jumps[0] / jumps[1] <= 2.3


def test_end_map_validates_grid():
    with pytest.raises(ValueError):
        end_map_sweep(P, REST, FREE, 1.0, [0.5, 0.4])
    with pytest.raises(ValueError):
        end_map_sweep(P, REST, FREE, 1.0, [-0.1, 0.4])


def test_end_map_parallel_matches_serial():
    grid = list(np.linspace(0.3, 2.8, 9))
    assert end_map_sweep(P, SINE, FREE, 2.0, grid, jobs=2) == end_map_sweep(P, SINE, FREE, 2.0, grid)


def test_ivt_rest_is_upright():
    a = smooth_stick_ivt(P, REST, 5.0)
    assert a == pytest.approx(HALF_PI, abs=1e-8)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_ivt_hits_target(name):
    prof = PRESETS[name]
    a = smooth_stick_ivt(P, prof, 5.0, tol=1e-8)
    assert abs(end_angle(P, prof, smooth_stick(), a, 5.0) - HALF_PI) <= 1e-8


def test_ivt_const_accel_off_vertical_and_reverified():
    a = smooth_stick_ivt(P, CONST2, 5.0, tol=1e-8)
    assert abs(a - HALF_PI) > 1e-3
    tight = end_angle(P, CONST2, smooth_stick(), a, 5.0, Options(rtol=1e-12))
    assert abs(tight - HALF_PI) <= 1e-6


def test_ivt_rejects_other_modes():
    with pytest.raises(ValueError):
        smooth_stick_ivt(P, REST, 5.0, mode=ABSORBING)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_smooth_stick_never_completes_revolution(name):
    prof = PRESETS[name]
    for a in np.linspace(0.0, math.pi, 25):
        tr = integrate(P, prof, smooth_stick(), State(0.0, float(a)), 10.0)
        assert tr.max_deviation() < 2 * math.pi
        assert -math.pi < min(tr.alpha) and max(tr.alpha) < 2 * math.pi


def test_deviation_rest_is_zero():
    d = deviation_demo(P, REST, 5.0)
    assert d.max_dev <= 1e-9
    assert not d.exceeds_half_degree


def test_deviation_sinusoid_exceeds_half_degree():
    d = deviation_demo(P, SINE, 5.0)
    assert d.max_dev > 0.00873
    assert d.exceeds_half_degree
    assert HALF_DEGREE == pytest.approx(0.00873, abs=1e-5)


def test_deviation_const_accel_offset():
    d = deviation_demo(P, CONST2, 5.0)
    assert d.offset_from_vertical > HALF_DEGREE


def _fit(lam, c=0.0):
    return DecayFit(points=((1.0, 1.0), (2.0, 0.5)), lambda_fit=lam, intercept=c, residual=0.0)


def test_extrapolation_arithmetic():
    e = two_week_extrapolation(P, _fit(3.13))
    assert e.exponent == pytest.approx(3.13 * TWO_WEEKS / math.log(10.0))
    assert e.exponent == pytest.approx(1.6e6, rel=0.05)
    assert e.littlewood_exponent == LITTLEWOOD_EXPONENT == 1e5
    assert e.ratio_to_littlewood == pytest.approx(e.exponent / 1e5)
    assert not e.degenerate
    assert "not reconciled" in e.note()


def test_extrapolation_degenerate():
    e = two_week_extrapolation(P, _fit(0.0, c=-2.0))
    assert e.degenerate
    assert e.exponent == pytest.approx(2.0 / math.log(10.0))


def test_extrapolation_from_measured_fit():
    fit = decay_fit(P, REST, [1.0, 1.5, 2.0, 2.5, 3.0])
    e = two_week_extrapolation(P, fit)
    assert e.exponent >= 1e4
    assert e.lambda_linear == pytest.approx(math.sqrt(9.81))


def test_extrapolation_long_rod_measured():
    p = RodParams(length=10.0)
    lam = p.growth_rate
    fit = decay_fit(p, REST, [k / lam for k in (2.0, 3.0, 4.0, 5.0)])
    assert fit.lambda_fit == pytest.approx(lam, rel=0.1)
    assert two_week_extrapolation(p, fit).exponent >= 1e4


@settings(max_examples=100, deadline=None)
@given(length=st.floats(0.01, 10.0), c=st.floats(-5.0, 5.0))
def test_extrapolation_lower_bound_for_short_rods(length, c):
    p = RodParams(length=length)
    # a fitted rate within 10% of the linear growth rate
    e = two_week_extrapolation(p, _fit(0.9 * p.growth_rate, c))
    assert e.exponent >= 1e4
