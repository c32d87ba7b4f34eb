"""Which way does the rod fall?

``classify`` integrates the free field from rest at ``alpha0`` and reports
the first floor contact.  Courant and Robbins' sign convention is kept on
the result: falling forward is +1, backward -1 (survival is 0).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .dynamics import FREE, RodParams, State
from .integrate import Options, Side, integrate
from .profile import MotionProfile

__all__ = [
    "Outcome",
    "Classification",
    "EpsilonThreshold",
    "classify",
    "classify_state",
    "classify_many",
    "epsilon_threshold",
    "floor_distance",
]


class Outcome(str, Enum):
    FELL_FORWARD = "fell_forward"
    FELL_BACKWARD = "fell_backward"
    SURVIVED = "survived"


@dataclass(frozen=True)
class Classification:
    outcome: Outcome
    t: float
    """Fall time, or the horizon for a survivor."""

    @property
    def sign(self) -> int:
        return {Outcome.FELL_FORWARD: 1, Outcome.FELL_BACKWARD: -1}.get(self.outcome, 0)

    @property
    def fell(self) -> bool:
        return self.outcome is not Outcome.SURVIVED

    def __str__(self) -> str:
        return f"{self.outcome.value}({self.t!r})"


@dataclass(frozen=True)
class EpsilonThreshold:
    epsilon: float
    a_max: float


def floor_distance(alpha: float) -> float:
    """Angular distance H to the nearer floor, for alpha in [0, pi]."""
    return min(alpha, math.pi - alpha)


def classify_state(
    params: RodParams,
    profile: MotionProfile,
    state0: State,
    horizon: float,
    opts: Options | None = None,
) -> Classification:
    """Classify an arbitrary initial state (nonzero omega allowed)."""
    if not horizon > state0.t:
        raise ValueError(f"horizon must exceed the start time, got {horizon!r}")
    traj = integrate(params, profile, FREE, state0, horizon, opts,
                     stop_on_event=True, record=False)
    ev = traj.event
    if ev is None:
        return Classification(Outcome.SURVIVED, horizon)
    outcome = Outcome.FELL_FORWARD if ev.side is Side.FORWARD else Outcome.FELL_BACKWARD
    return Classification(outcome, ev.t_cross)


def classify(
    params: RodParams,
    profile: MotionProfile,
    alpha0: float,
    horizon: float,
    opts: Options | None = None,
) -> Classification:
    """Outcome of releasing the rod at rest at ``alpha0`` in [0, pi]."""
    if not (0.0 <= alpha0 <= math.pi):
        raise ValueError(f"alpha0 must lie in [0, pi], got {alpha0!r}")
    if not horizon > 0.0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    return classify_state(params, profile, State(0.0, alpha0, 0.0), horizon, opts)


def _classify_args(args: tuple) -> Classification:
    return classify(*args)


def classify_many(
    params: RodParams,
    profile: MotionProfile,
    alphas: Sequence[float],
    horizon: float,
    opts: Options | None = None,
    jobs: int = 1,
) -> list[Classification]:
    """Classify a batch; results are in input order regardless of ``jobs``."""
    work = [(params, profile, float(a), horizon, opts) for a in alphas]
    if jobs <= 1 or len(work) < 2:
        return [_classify_args(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_classify_args, work, chunksize=max(1, len(work) // (4 * jobs))))


def epsilon_threshold(params: RodParams, a_max: float) -> EpsilonThreshold:
    """Angle below which gravity beats any platform acceleration <= a_max.

    If H < epsilon, the rod is at rest or moving floorward and |f''| <= a_max
    from then on, H decreases until the rod reaches the floor.
    """
    if not a_max >= 0.0:
        raise ValueError(f"a_max must be >= 0, got {a_max!r}")
    if a_max == 0.0:
        return EpsilonThreshold(0.5 * math.pi, 0.0)
    return EpsilonThreshold(math.atan(params.g / a_max), a_max)
