import math

import numpy as np
import pytest

from whitney.classify import Outcome, classify
from whitney.dynamics import RodParams
from whitney.integrate import Options
from whitney.search import (
    ResolutionError,
    SearchError,
    decay_fit,
    openness_margin,
    predicted_window,
    survival_bisect,
    survival_window,
)

from conftest import CONST2, HALF_PI, PRESETS, REST, SINE

P = RodParams()
LAM = math.sqrt(9.81)


@pytest.fixture(scope="module")
def brackets():
    return {name: survival_bisect(P, prof, 5.0, 1e-12) for name, prof in PRESETS.items()}


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_bracket_postconditions(brackets, name):
    br = brackets[name]
    prof = PRESETS[name]
    assert br.alpha_lo < br.alpha_hi
    assert br.width <= 1e-12
    assert br.lo.outcome is Outcome.FELL_FORWARD
    assert br.hi.outcome is Outcome.FELL_BACKWARD
    assert br.survivor is not None
    assert br.alpha_lo <= br.survivor <= br.alpha_hi
    assert classify(P, prof, br.survivor, 5.0).outcome is Outcome.SURVIVED
    tight = classify(P, prof, br.survivor, 5.0, Options(rtol=1e-11))
    assert tight.outcome is Outcome.SURVIVED
    fine = classify(P, prof, br.survivor, 5.0, Options(method="rk4", h=1e-4))
    assert fine.outcome is Outcome.SURVIVED


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_bracket_invariant_over_history(brackets, name):
    br = brackets[name]
    hist = br.history
    for (lo0, hi0), (lo1, hi1) in zip(hist, hist[1:]):
        assert lo0 <= lo1 < hi1 <= hi0
    for lo, hi in hist:
        assert lo <= br.survivor <= hi


def test_rest_survivor_is_upright(brackets):
    br = brackets["rest"]
    assert br.alpha_lo <= HALF_PI <= br.alpha_hi


def test_const_accel_survivor_leans_forward(brackets):
    br = brackets["const_accel"]
    assert br.survivor < HALF_PI
    # scan oracle: one Forward->Backward transition, located at the bracket
    xs = np.linspace(0.01, math.pi - 0.01, 10_001)
    signs = np.array([classify(P, CONST2, float(x), 5.0).sign for x in xs])
    assert set(signs) <= {1, -1}
    flips = np.nonzero(np.diff(signs))[0]
    assert len(flips) == 1
    k = flips[0]
    assert signs[k] == 1 and signs[k + 1] == -1
    assert xs[k] <= br.survivor <= xs[k + 1]


def test_deterministic(brackets):
    again = survival_bisect(P, SINE, 5.0, 1e-12)
    assert again == brackets["sinusoid"]


def test_tol_below_floor_rejected():
    with pytest.raises(ValueError):
        survival_bisect(P, REST, 5.0, 1e-14)


def test_precision_envelope_refuses_long_horizon():
    assert predicted_window(P, REST, 20.0) < 1e-12
    with pytest.raises(ResolutionError):
        survival_bisect(P, REST, 20.0, 1e-12)


def test_window_rest_centered():
    w = survival_window(P, REST, 3.0, 1e-12)
    assert w.w_lo < HALF_PI < w.w_hi
    assert (HALF_PI - w.w_lo) == pytest.approx(w.w_hi - HALF_PI, rel=1e-3)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_window_edges_separate(brackets, name):
    prof = PRESETS[name]
    w = survival_window(P, prof, 5.0, 1e-12, bracket=brackets[name])
    assert w.w_lo <= w.survivor <= w.w_hi
    assert w.width > 0.0
    assert w.below_alpha < w.w_lo and w.w_lo - w.below_alpha <= 1e-12
    assert w.above_alpha > w.w_hi and w.above_alpha - w.w_hi <= 1e-12
    assert classify(P, prof, w.w_lo, 5.0).outcome is Outcome.SURVIVED
    assert classify(P, prof, w.w_hi, 5.0).outcome is Outcome.SURVIVED
    assert w.below.outcome is Outcome.FELL_FORWARD
    assert w.above.outcome is Outcome.FELL_BACKWARD


def test_window_log_width_linearization_oracle():
    # cosh(lambda t) growth: doubling lambda*T from 2 to 4 shrinks the width
    # by about cosh(4)/cosh(2) ~ e^2
    w2 = survival_window(P, REST, 2.0 / LAM, 1e-12).width
    w4 = survival_window(P, REST, 4.0 / LAM, 1e-12).width
    assert math.log(w4) - math.log(w2) == pytest.approx(-2.0, abs=0.2)


def test_window_width_non_increasing():
    for prof in (REST, SINE):
        widths = [survival_window(P, prof, T, 1e-12).width for T in (1.0, 2.0, 3.0, 4.0)]
        for a, b in zip(widths, widths[1:]):
            assert b <= a * (1 + 1e-6)


def test_openness_examples():
    assert openness_margin(P, REST, math.pi / 4, 10.0) >= 1e-3
    d = openness_margin(P, REST, HALF_PI - 1e-8, 10.0)
    assert 0.0 < d < 1e-8


def test_openness_random_fallen_sinusoid():
    rng = np.random.default_rng(3)
    for a in rng.uniform(0.0, math.pi, 25):
        a = float(a)
        if not classify(P, SINE, a, 5.0).fell:
            continue
        d = openness_margin(P, SINE, a, 5.0)
        assert d >= 1e-9
        base = classify(P, SINE, a, 5.0).outcome
        for x in (a - d, a + d, a - 0.5 * d, a + 0.5 * d):
            if 0.0 <= x <= math.pi:
                assert classify(P, SINE, x, 5.0).outcome is base


def test_openness_rejects_survivor():
    with pytest.raises(ValueError):
        openness_margin(P, REST, HALF_PI, 5.0)


def test_decay_rest_rate():
    fit = decay_fit(P, REST, [1.0, 1.5, 2.0, 2.5, 3.0])
    assert abs(fit.lambda_fit - LAM) / LAM <= 0.10
    assert fit.excluded == ()
    assert fit.residual < 0.1
    ws = [w for _, w in fit.points]
    assert all(w > 0 for w in ws)
    assert all(b <= a for a, b in zip(ws, ws[1:]))


def test_decay_sinusoid_property():
    fit = decay_fit(P, SINE, [1.0, 2.0, 3.0, 4.0])
    assert fit.lambda_fit > 0.0
    logs = [math.log(w) for _, w in fit.points]
    assert all(b <= a for a, b in zip(logs, logs[1:]))


def test_decay_needs_four_horizons():
    with pytest.raises(ValueError):
        decay_fit(P, REST, [1.0, 2.0, 3.0])


def test_decay_excludes_unresolvable_horizons(caplog):
    fit = decay_fit(P, REST, [1.0, 1.5, 2.0, 30.0])
    assert fit.excluded == (30.0,)
    assert "excluded" in caplog.text


def test_seeds_classify_for_short_horizons():
    for prof in PRESETS.values():
        br = survival_bisect(P, prof, 2.0, 1e-10)
        assert br.lo.outcome is Outcome.FELL_FORWARD
        assert br.hi.outcome is Outcome.FELL_BACKWARD
    assert issubclass(ResolutionError, SearchError)
