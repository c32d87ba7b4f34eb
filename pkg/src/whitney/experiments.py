"""Scripted experiments on the end map and the surviving window."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .classify import Outcome, epsilon_threshold
from .dynamics import FREE, Mode, RodParams, State, smooth_stick
from .integrate import Options, Side, integrate
from .profile import MotionProfile
from .search import DecayFit, SearchError, survival_bisect

__all__ = [
    "EndMapRow",
    "EndMapTable",
    "end_map_sweep",
    "end_angle",
    "smooth_stick_ivt",
    "DeviationDemo",
    "deviation_demo",
    "Extrapolation",
    "two_week_extrapolation",
    "TWO_WEEKS",
    "LITTLEWOOD_EXPONENT",
]

TWO_WEEKS = 14 * 24 * 3600.0
# Littlewood quotes odds of about 1 : 10^(10^5) for two weeks upright
LITTLEWOOD_EXPONENT = 1e5
HALF_DEGREE = math.radians(0.5)


@dataclass(frozen=True)
class EndMapRow:
    alpha0: float
    alpha_final: float
    outcome: Outcome
    t_fall: float | None = None


@dataclass(frozen=True)
class EndMapTable:
    mode: Mode
    horizon: float
    rows: tuple[EndMapRow, ...]

    @property
    def spacing(self) -> float:
        a = [r.alpha0 for r in self.rows]
        return max((y - x for x, y in zip(a, a[1:])), default=0.0)

    def finals(self) -> list[float]:
        return [r.alpha_final for r in self.rows]

    def max_adjacent_jump(self) -> float:
        f = self.finals()
        return max((abs(y - x) for x, y in zip(f, f[1:])), default=0.0)


def _row(args: tuple) -> EndMapRow:
    params, profile, mode, horizon, alpha0, opts = args
    traj = integrate(params, profile, mode, State(0.0, alpha0, 0.0), horizon, opts, record=False)
    ev = traj.event
    if ev is None:
        return EndMapRow(alpha0, traj.final.alpha, Outcome.SURVIVED)
    outcome = Outcome.FELL_FORWARD if ev.side is Side.FORWARD else Outcome.FELL_BACKWARD
    return EndMapRow(alpha0, traj.final.alpha, outcome, ev.t_cross)


def end_map_sweep(
    params: RodParams,
    profile: MotionProfile,
    mode: Mode,
    horizon: float,
    grid: Sequence[float],
    opts: Options | None = None,
    jobs: int = 1,
) -> EndMapTable:
    """Final angle alpha(horizon) for each initial angle in ``grid``.

    Free mode reports the unwrapped angle; absorbing rows that fell end
    exactly on 0 or pi.  ``outcome`` is the first floor contact in every mode.
    """
    grid = [float(a) for a in grid]
    if any(not 0.0 <= a <= math.pi for a in grid):
        raise ValueError("grid must lie within [0, pi]")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be sorted")
    work = [(params, profile, mode, horizon, a, opts) for a in grid]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        rows = [_row(w) for w in work]
    return EndMapTable(mode, horizon, tuple(rows))


def end_angle(
    params: RodParams, profile: MotionProfile, mode: Mode, alpha0: float, horizon: float,
    opts: Options | None = None,
) -> float:
    return integrate(params, profile, mode, State(0.0, alpha0, 0.0), horizon, opts,
                     record=False).final.alpha


def smooth_stick_ivt(
    params: RodParams,
    profile: MotionProfile,
    horizon: float,
    target: float = 0.5 * math.pi,
    tol: float = 1e-8,
    mode: Mode | None = None,
    opts: Options | None = None,
) -> float:
    """Initial angle whose smooth-stick end angle equals ``target``.

    Bisection on the end map, which is continuous in this mode, between
    seeds half an epsilon-threshold away from either floor.
    """
    mode = mode or smooth_stick()
    if mode.kind != "smooth_stick":
        raise ValueError("smooth_stick_ivt needs a smooth_stick mode")
    eps = epsilon_threshold(params, profile.max_abs_accel(0.0, horizon)).epsilon
    lo, hi = 0.5 * eps, math.pi - 0.5 * eps
    g_lo = end_angle(params, profile, mode, lo, horizon, opts) - target
    g_hi = end_angle(params, profile, mode, hi, horizon, opts) - target
    if abs(g_lo) <= tol:
        return lo
    if abs(g_hi) <= tol:
        return hi
    if (g_lo > 0.0) == (g_hi > 0.0):
        raise SearchError(
            f"end map does not straddle target: g({lo!r})={g_lo + target!r}, g({hi!r})={g_hi + target!r}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        g_mid = end_angle(params, profile, mode, mid, horizon, opts) - target
        if abs(g_mid) <= tol:
            return mid
        if (g_mid > 0.0) == (g_lo > 0.0):
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    raise SearchError(
        f"end map resolution exhausted at [{lo!r}, {hi!r}]: |g - target| >= "
        f"{min(abs(g_lo), abs(g_hi)):.3g} > tol={tol:g}"
    )


@dataclass(frozen=True)
class DeviationDemo:
    survivor: float
    max_dev: float
    offset_from_vertical: float
    horizon: float

    @property
    def exceeds_half_degree(self) -> bool:
        return self.max_dev > HALF_DEGREE


def deviation_demo(
    params: RodParams,
    profile: MotionProfile,
    horizon: float,
    tol: float = 1e-12,
    opts: Options | None = None,
) -> DeviationDemo:
    """How far the never-falling rod swings from where it started."""
    br = survival_bisect(params, profile, horizon, tol, opts)
    if br.survivor is None:
        raise SearchError(f"no survivor resolved at horizon {horizon} s")
    traj = integrate(params, profile, FREE, State(0.0, br.survivor, 0.0), horizon, opts)
    return DeviationDemo(br.survivor, traj.max_deviation(),
                         abs(br.survivor - 0.5 * math.pi), horizon)


@dataclass(frozen=True)
class Extrapolation:
    exponent: float
    """Extrapolated log10(1 / window width) at ``t_target``."""
    t_target: float
    lambda_fit: float
    intercept: float
    lambda_linear: float
    littlewood_exponent: float = LITTLEWOOD_EXPONENT
    degenerate: bool = False

    @property
    def ratio_to_littlewood(self) -> float:
        return self.exponent / self.littlewood_exponent

    def note(self) -> str:
        return (
            f"window ~ 10^-{self.exponent:.4g} rad after {self.t_target:g} s "
            f"(lambda_fit={self.lambda_fit:.6g}/s); Littlewood's figure is 10^-{self.littlewood_exponent:g}; "
            "the two are reported side by side, not reconciled."
        )


def two_week_extrapolation(
    params: RodParams, decay: DecayFit, t_target: float = TWO_WEEKS
) -> Extrapolation:
    """Decimal digits of aim needed to stay up for ``t_target`` seconds."""
    ln10 = math.log(10.0)
    growth = decay.lambda_fit * t_target
    exponent = (growth - decay.intercept) / ln10
    return Extrapolation(exponent, t_target, decay.lambda_fit, decay.intercept,
                         params.growth_rate, degenerate=growth <= 0.0)
