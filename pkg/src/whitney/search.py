"""Constructive search for never-falling initial angles.

Straddle bisection keeps one endpoint that falls forward and one that falls
backward.  Probes are followed past the horizon until they actually fall,
so the bracket closes in on the boundary between the two basins, i.e. on a
point that does not fall at all; the final midpoint survives the horizon.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .classify import (
    Classification,
    Outcome,
    classify,
    epsilon_threshold,
)
from .dynamics import RodParams
from .integrate import Options
from .profile import MotionProfile

__all__ = [
    "SearchError",
    "ResolutionError",
    "SurvivalBracket",
    "SurvivalWindow",
    "DecayFit",
    "predicted_window",
    "survival_bisect",
    "survival_window",
    "openness_margin",
    "decay_fit",
]

log = logging.getLogger(__name__)

# double precision cannot separate initial angles closer than this
RESOLUTION_FLOOR = 1e-13


class SearchError(RuntimeError):
    """The search cannot proceed (e.g. seed endpoints fall the same way)."""


class ResolutionError(SearchError):
    """The surviving window is below the requested angular resolution."""


@dataclass(frozen=True)
class SurvivalBracket:
    """Straddle around a never-falling angle.

    ``lo``/``hi`` are the endpoint classifications over ``probe_horizon``
    (the horizon extended until the probes fall).  ``survivor`` is a point
    strictly inside that survives ``horizon``.
    """

    alpha_lo: float
    alpha_hi: float
    horizon: float
    probe_horizon: float
    lo: Classification
    hi: Classification
    survivor: float | None
    n_probes: int
    surviving_probes: int
    history: tuple[tuple[float, float], ...] = field(default=(), repr=False)

    @property
    def width(self) -> float:
        return self.alpha_hi - self.alpha_lo


@dataclass(frozen=True)
class SurvivalWindow:
    w_lo: float
    w_hi: float
    survivor: float
    horizon: float
    tol: float
    below: Classification
    above: Classification
    below_alpha: float
    above_alpha: float

    @property
    def width(self) -> float:
        return self.w_hi - self.w_lo


@dataclass(frozen=True)
class DecayFit:
    points: tuple[tuple[float, float], ...]
    lambda_fit: float
    intercept: float
    residual: float
    excluded: tuple[float, ...] = ()

    def predict(self, horizon: float) -> float:
        return math.exp(-self.lambda_fit * horizon + self.intercept)


def _growth_bound(params: RodParams, a_max: float) -> float:
    return math.sqrt(math.hypot(params.g, a_max) / params.l_eff)


def predicted_window(params: RodParams, profile: MotionProfile, horizon: float) -> float:
    """Pessimistic window width pi * exp(-lambda_max * T)."""
    lam = _growth_bound(params, profile.max_abs_accel(0.0, horizon))
    return math.pi * math.exp(-lam * horizon)


def _default_extension(params: RodParams) -> float:
    # time for a 1e-17 offset to grow to O(1) at the upright growth rate
    return 40.0 / params.growth_rate


def survival_bisect(
    params: RodParams,
    profile: MotionProfile,
    horizon: float,
    tol: float = 1e-12,
    opts: Options | None = None,
    max_extension: float | None = None,
) -> SurvivalBracket:
    if tol < RESOLUTION_FLOOR:
        raise ValueError(f"tol must be >= {RESOLUTION_FLOOR}, got {tol!r}")
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    predicted = predicted_window(params, profile, horizon)
    if predicted < tol:
        raise ResolutionError(
            f"predicted surviving window {predicted:.3g} rad at horizon {horizon} s "
            f"is below tol={tol:g}; shorten the horizon"
        )
    t_probe = horizon + (max_extension if max_extension is not None else _default_extension(params))
    eps = epsilon_threshold(params, profile.max_abs_accel(0.0, t_probe)).epsilon
    n_probes = 0
    surviving = 0

    def probe(alpha: float) -> Classification:
        nonlocal n_probes, surviving
        n_probes += 1
        c = classify(params, profile, alpha, t_probe, opts)
        if c.t > horizon:
            surviving += 1
        return c

    lo, hi = 0.5 * eps, math.pi - 0.5 * eps
    c_lo, c_hi = probe(lo), probe(hi)
    if c_lo.outcome is not Outcome.FELL_FORWARD or c_hi.outcome is not Outcome.FELL_BACKWARD:
        raise SearchError(
            f"invalid seed bracket: classify({lo!r})={c_lo}, classify({hi!r})={c_hi}"
        )

    history = [(lo, hi)]
    anchor = None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        c = probe(mid)
        if c.outcome is Outcome.FELL_FORWARD:
            lo, c_lo = mid, c
        elif c.outcome is Outcome.FELL_BACKWARD:
            hi, c_hi = mid, c
        else:
            anchor = mid
            lo, c_lo = _edge(probe, lo, c_lo, mid, Outcome.FELL_FORWARD, 0.5 * tol)
            hi, c_hi = _edge(probe, hi, c_hi, mid, Outcome.FELL_BACKWARD, 0.5 * tol)
            history.append((lo, hi))
            break
        history.append((lo, hi))

    if hi - lo > tol:
        raise SearchError(
            f"bracket [{lo!r}, {hi!r}] could not be narrowed to {tol:g}: a set wider than "
            f"tol survives {t_probe:.3g} s; raise max_extension"
        )

    survivor = None
    for cand in (0.5 * (lo + hi), anchor):
        if cand is None or not lo < cand < hi:
            continue
        if not classify(params, profile, cand, horizon, opts).fell:
            survivor = cand
            break
    return SurvivalBracket(lo, hi, horizon, t_probe, c_lo, c_hi, survivor,
                           n_probes, surviving, tuple(history))


def _edge(probe, inside: float, c_in: Classification, outside: float, want: Outcome, tol: float):
    """Narrow toward the edge of the ``want`` basin; ``inside`` carries ``want``."""
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if mid in (inside, outside):
            break
        c = probe(mid)
        if c.outcome is want:
            inside, c_in = mid, c
        else:
            outside = mid
    return inside, c_in


def survival_window(
    params: RodParams,
    profile: MotionProfile,
    horizon: float,
    tol: float = 1e-12,
    opts: Options | None = None,
    bracket: SurvivalBracket | None = None,
) -> SurvivalWindow:
    """Interval of initial angles around the survivor that survive ``horizon``.

    Both edges are located to ``tol``; ``w_lo``/``w_hi`` are the outermost
    verified survivors and ``below``/``above`` classify the points just
    outside.  The window is measured locally around the survivor found by
    :func:`survival_bisect`.
    """
    bracket = bracket or survival_bisect(params, profile, horizon, tol, opts)
    s = bracket.survivor
    if s is None:
        raise ResolutionError(
            f"no survivor resolved at horizon {horizon} s; window below tol={tol:g}"
        )

    def cls(a: float) -> Classification:
        return classify(params, profile, min(max(a, 0.0), math.pi), horizon, opts)

    w_lo, below_a, below = _window_edge(cls, s, -1.0, tol)
    w_hi, above_a, above = _window_edge(cls, s, +1.0, tol)
    return SurvivalWindow(w_lo, w_hi, s, horizon, tol, below, above, below_a, above_a)


def _window_edge(cls, s: float, direction: float, tol: float):
    inner = s
    d = tol
    while True:
        x = s + direction * d
        c = cls(x)
        if c.fell or x <= 0.0 or x >= math.pi:
            outer, c_out = x, c
            break
        inner = x
        d *= 2.0
    while abs(outer - inner) > tol:
        mid = 0.5 * (inner + outer)
        if mid in (inner, outer):
            break
        c = cls(mid)
        if c.fell:
            outer, c_out = mid, c
        else:
            inner = mid
    return inner, outer, c_out


def openness_margin(
    params: RodParams,
    profile: MotionProfile,
    alpha0: float,
    horizon: float,
    opts: Options | None = None,
    d0: float = 0.05,
    shrink: float = 4.0,
    d_min: float = 1e-10,
) -> float:
    """Largest tested offset d such that every tested offset <= d keeps the
    fall side of ``alpha0`` on both sides.

    Offsets d0, d0/shrink, ... down to ``d_min`` are tested; points outside
    [0, pi] are skipped.
    """
    base = classify(params, profile, alpha0, horizon, opts)
    if not base.fell:
        raise ValueError(f"alpha0={alpha0!r} survives the horizon; no margin is claimed")
    ladder = []
    d = d0
    while d >= d_min:
        ladder.append(d)
        d /= shrink
    margin = 0.0
    for d in reversed(ladder):
        for x in (alpha0 - d, alpha0 + d):
            if 0.0 <= x <= math.pi and classify(params, profile, x, horizon, opts).outcome is not base.outcome:
                return margin
        margin = d
    return margin


def decay_fit(
    params: RodParams,
    profile: MotionProfile,
    horizons: list[float],
    tol: float = 1e-12,
    opts: Options | None = None,
) -> DecayFit:
    """Least-squares fit of log w(T) = -lambda T + c over the given horizons."""
    if len(horizons) < 4:
        raise ValueError(f"decay_fit needs at least 4 horizons, got {len(horizons)}")
    points, excluded = [], []
    for T in sorted(horizons):
        try:
            w = survival_window(params, profile, T, tol, opts).width
        except ResolutionError as exc:
            log.warning("horizon %g s excluded: %s", T, exc)
            excluded.append(T)
            continue
        if w <= 4.0 * tol:
            log.warning("horizon %g s excluded: width %g at resolution floor", T, w)
            excluded.append(T)
            continue
        points.append((T, w))
    if len(points) < 2:
        raise ResolutionError("fewer than 2 horizons with measurable window width")
    widths = [w for _, w in points]
    if any(b > a * (1 + 1e-6) for a, b in zip(widths, widths[1:])):
        log.warning("window widths are not non-increasing in horizon: %s", widths)
    T = np.array([p[0] for p in points])
    y = np.log(np.array(widths))
    slope, intercept = np.polyfit(T, y, 1)
    resid = y - (slope * T + intercept)
    return DecayFit(tuple(points), float(-slope), float(intercept),
                    float(np.sqrt(np.mean(resid ** 2))), tuple(excluded))
