"""Time stepping with floor-crossing events.

Two steppers are provided: fixed-step classical RK4 and the Dormand-Prince
5(4) embedded pair with step-size control.  Between accepted steps the
solution is represented by the quintic Hermite interpolant through
(alpha, omega, omega') at both ends; floor crossings are located on it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .dynamics import FREE, HALF_PI, Mode, RodParams, State, make_field
from .profile import MotionProfile

__all__ = [
    "IntegrationError",
    "StepUnderflowError",
    "NonFiniteStateError",
    "CrossingError",
    "Side",
    "FallEvent",
    "Options",
    "DenseSegment",
    "Trajectory",
    "integrate",
    "locate_crossing",
    "trajectory_csv",
]

Field = Callable[[float, float, float], float]


class IntegrationError(RuntimeError):
    def __init__(self, msg: str, last_state: State | None = None):
        super().__init__(msg)
        self.last_state = last_state


class StepUnderflowError(IntegrationError):
    pass


class NonFiniteStateError(IntegrationError):
    pass


class CrossingError(ValueError):
    """The segment handed to the crossing locator does not bracket the level."""


class Side(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    @classmethod
    def of_level(cls, level: float) -> Side:
        # even multiples of pi are the forward floor
        return cls.FORWARD if round(level / math.pi) % 2 == 0 else cls.BACKWARD


@dataclass(frozen=True)
class FallEvent:
    side: Side
    t_cross: float
    omega_at_cross: float
    level: float = 0.0


@dataclass(frozen=True)
class Options:
    method: str = "adaptive"
    h: float = 1e-3
    rtol: float = 1e-10
    atol: float | None = None
    h_max: float = 0.1
    h_min: float = 1e-13
    max_steps: int = 10_000_000
    crossing_tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.method not in ("rk4", "adaptive"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.h > 0.0 and self.rtol > 0.0 and self.h_max > 0.0):
            raise ValueError("step and tolerances must be positive")
        if self.atol is not None and not self.atol > 0.0:
            raise ValueError("atol must be positive")

    def tighter(self, factor: float = 10.0) -> Options:
        """Same method, tolerance (or fixed step) divided by ``factor``."""
        from dataclasses import replace

        atol = None if self.atol is None else self.atol / factor
        return replace(self, h=self.h / factor, rtol=self.rtol / factor, atol=atol)


@dataclass(frozen=True)
class DenseSegment:
    """One step of the solution: endpoint values and second derivatives."""

    t0: float
    t1: float
    alpha0: float
    alpha1: float
    omega0: float
    omega1: float
    acc0: float
    acc1: float

    def coefficients(self, level: float = 0.0) -> tuple[float, ...]:
        """Quintic in s = (t - t0)/h for alpha - level."""
        h = self.t1 - self.t0
        p0, p1 = self.alpha0 - level, self.alpha1 - level
        v0, v1 = h * self.omega0, h * self.omega1
        a0, a1 = h * h * self.acc0, h * h * self.acc1
        return (
            p0,
            v0,
            0.5 * a0,
            -10.0 * p0 - 6.0 * v0 - 1.5 * a0 + 0.5 * a1 - 4.0 * v1 + 10.0 * p1,
            15.0 * p0 + 8.0 * v0 + 1.5 * a0 - a1 + 7.0 * v1 - 15.0 * p1,
            -6.0 * p0 - 3.0 * v0 - 0.5 * a0 + 0.5 * a1 - 3.0 * v1 + 6.0 * p1,
        )

    def evaluate(self, t: float, level: float = 0.0) -> tuple[float, float]:
        """(alpha - level, omega) at time t inside the segment."""
        c = self.coefficients(level)
        h = self.t1 - self.t0
        s = (t - self.t0) / h
        return _poly(c, s), _dpoly(c, s) / h


def _poly(c: Sequence[float], s: float) -> float:
    return ((((c[5] * s + c[4]) * s + c[3]) * s + c[2]) * s + c[1]) * s + c[0]


def _dpoly(c: Sequence[float], s: float) -> float:
    return (((5.0 * c[5] * s + 4.0 * c[4]) * s + 3.0 * c[3]) * s + 2.0 * c[2]) * s + c[1]


def _root_on_segment(seg: DenseSegment, level: float, tol: float) -> tuple[float, float]:
    """Illinois regula falsi with bisection fallback; returns (t, omega)."""
    c = seg.coefficients(level)
    h = seg.t1 - seg.t0
    s_lo, s_hi = 0.0, 1.0
    q_lo, q_hi = c[0], _poly(c, 1.0)
    if q_hi == 0.0:
        return seg.t1, _dpoly(c, 1.0) / h
    if q_lo == 0.0:
        return seg.t0, c[1] / h
    if (q_lo > 0.0) == (q_hi > 0.0):
        raise CrossingError(
            f"no sign change of alpha - {level!r} on [{seg.t0!r}, {seg.t1!r}]"
        )
    side = 0
    s = 0.5
    for it in range(200):
        if it % 4 == 3:
            s = 0.5 * (s_lo + s_hi)
        else:
            s = s_hi - q_hi * (s_hi - s_lo) / (q_hi - q_lo)
            if not (s_lo < s < s_hi):
                s = 0.5 * (s_lo + s_hi)
        q = _poly(c, s)
        if abs(q) <= tol or q == 0.0:
            break
        if (q > 0.0) == (q_lo > 0.0):
            s_lo, q_lo = s, q
            if side == -1:
                q_hi *= 0.5
            side = -1
        else:
            s_hi, q_hi = s, q
            if side == 1:
                q_lo *= 0.5
            side = 1
        if seg.t0 + s_hi * h - (seg.t0 + s_lo * h) <= 4.0 * math.ulp(seg.t1):
            break
    return seg.t0 + s * h, _dpoly(c, s) / h


def locate_crossing(
    params: RodParams,
    profile: MotionProfile,
    segment: DenseSegment | tuple[State, State],
    level: float,
    mode: Mode = FREE,
    tol: float = 1e-12,
) -> FallEvent:
    """Time at which alpha passes ``level`` inside one step.

    ``segment`` is either a :class:`DenseSegment` or two states bracketing
    the crossing; in the latter case omega' at the ends comes from the field.
    """
    if not isinstance(segment, DenseSegment):
        s0, s1 = segment
        fld = make_field(params, profile, mode)
        segment = DenseSegment(
            s0.t, s1.t, s0.alpha, s1.alpha, s0.omega, s1.omega,
            fld(s0.t, s0.alpha, s0.omega), fld(s1.t, s1.alpha, s1.omega),
        )
    if not segment.t1 > segment.t0:
        raise CrossingError("segment must have t1 > t0")
    t, w = _root_on_segment(segment, level, tol)
    return FallEvent(Side.of_level(level), t, w, level)


@dataclass
class Trajectory:
    """Accepted steps of one integration.

    ``t``, ``alpha``, ``omega`` and ``acc`` (omega') are parallel lists.  In
    absorbing mode with an event the last sample is the stuck state.
    """

    t: list[float]
    alpha: list[float]
    omega: list[float]
    acc: list[float]
    mode: Mode
    event: FallEvent | None
    params: RodParams
    profile: MotionProfile
    n_rejected: int = 0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def samples(self) -> list[State]:
        return [State(t, a, w) for t, a, w in zip(self.t, self.alpha, self.omega)]

    @property
    def final(self) -> State:
        return State(self.t[-1], self.alpha[-1], self.omega[-1])

    @property
    def absorbed(self) -> bool:
        return self.mode.kind == "absorbing" and self.event is not None

    def state_at(self, t: float) -> State:
        """Interpolated state; after absorption the stuck state."""
        import bisect

        if t < self.t[0] or (t > self.t[-1] and not self.absorbed):
            raise ValueError(f"t={t!r} outside trajectory span")
        if t >= self.t[-1]:
            return State(t, self.alpha[-1], self.omega[-1])
        i = max(bisect.bisect_right(self.t, t) - 1, 0)
        seg = DenseSegment(self.t[i], self.t[i + 1], self.alpha[i], self.alpha[i + 1],
                           self.omega[i], self.omega[i + 1], self.acc[i], self.acc[i + 1])
        a, w = seg.evaluate(t)
        return State(t, a, w)

    def max_deviation(self) -> float:
        a0 = self.alpha[0]
        return max(abs(a - a0) for a in self.alpha)


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


def _levels(alpha: float) -> tuple[float, float]:
    k = math.floor(alpha / math.pi)
    return k * math.pi, (k + 1) * math.pi


def integrate(
    params: RodParams,
    profile: MotionProfile,
    mode: Mode,
    state0: State,
    t_end: float,
    opts: Options | None = None,
    *,
    stop_on_event: bool | None = None,
    record: bool = True,
) -> Trajectory:
    """Integrate from ``state0`` to ``t_end``.

    In absorbing mode integration stops at the first floor crossing and the
    rod stays at the floor level with zero velocity.  In the other modes the
    first crossing is reported as ``event`` and integration continues,
    unless ``stop_on_event`` is set.  ``record=False`` keeps only the first
    and last samples.
    """
    opts = opts or Options()
    if not t_end > state0.t:
        raise ValueError(f"t_end={t_end!r} must exceed the start time {state0.t!r}")
    if stop_on_event is None:
        stop_on_event = mode.kind == "absorbing"
    fld = make_field(params, profile, mode)
    t0, a0, w0 = state0.t, state0.alpha, state0.omega
    acc0 = fld(t0, a0, w0)
    traj = Trajectory([t0], [a0], [w0], [acc0], mode, None, params, profile)

    lo, hi = _levels(a0)
    if a0 % math.pi == 0.0:
        # starts lying on the floor: fallen at t0
        traj.event = FallEvent(Side.of_level(a0), t0, w0, a0)
        if stop_on_event:
            if mode.kind == "absorbing":
                traj.omega[0] = traj.acc[0] = 0.0
            return traj

    stepper = _dopri_steps if opts.method == "adaptive" else _rk4_steps
    watch = traj.event is None
    prev = (t0, a0, w0, acc0)
    for t, a, w, acc, n_rej in stepper(fld, t0, a0, w0, acc0, t_end, opts):
        traj.n_rejected = n_rej
        if watch and (a <= lo or a >= hi):
            level = lo if a <= lo else hi
            pt, pa, pw, pacc = prev
            seg = DenseSegment(pt, t, pa, a, pw, w, pacc, acc)
            # both floors bracketed in one step: earliest crossing wins
            events = [locate_crossing(params, profile, seg, lv, tol=opts.crossing_tol)
                      for lv in (lo, hi) if (a <= lv if lv == lo else a >= lv)]
            events.sort(key=lambda e: e.t_cross)
            if len(events) == 2 and events[1].t_cross - events[0].t_cross < 1e-12:
                traj.diagnostics.append("simultaneous crossing of both floor levels")
            ev = events[0]
            traj.event = ev
            watch = False
            if mode.kind == "absorbing":
                t_stick = ev.t_cross if ev.t_cross > traj.t[-1] else math.nextafter(traj.t[-1], math.inf)
                _append(traj, t_stick, ev.level, 0.0, 0.0, True)
                return traj
            if stop_on_event:
                _append(traj, ev.t_cross, ev.level, ev.omega_at_cross, fld(ev.t_cross, ev.level, ev.omega_at_cross), True)
                return traj
        prev = (t, a, w, acc)
        _append(traj, t, a, w, acc, record)
    return traj


def _append(traj: Trajectory, t: float, a: float, w: float, acc: float, record: bool) -> None:
    if record or len(traj.t) == 1:
        traj.t.append(t)
        traj.alpha.append(a)
        traj.omega.append(w)
        traj.acc.append(acc)
    else:
        traj.t[-1], traj.alpha[-1], traj.omega[-1], traj.acc[-1] = t, a, w, acc


def _check(t: float, a: float, w: float, last: tuple[float, float, float]) -> None:
    if not (math.isfinite(a) and math.isfinite(w)):
        raise NonFiniteStateError(
            f"non-finite state at t={t!r}", State(*last),
        )


def _rk4_steps(fld: Field, t0: float, a: float, w: float, acc: float, t_end: float, opts: Options):
    h0 = opts.h
    n = max(1, math.ceil((t_end - t0) / h0 - 1e-9))
    t = t0
    k1w = acc
    ca = cw = 0.0
    for i in range(1, n + 1):
        tn = t_end if i == n else t0 + i * h0
        h = tn - t
        hh = 0.5 * h
        k1a = w
        k2a = w + hh * k1w
        k2w = fld(t + hh, a + hh * k1a, k2a)
        k3a = w + hh * k2w
        k3w = fld(t + hh, a + hh * k2a, k3a)
        k4a = w + h * k3w
        k4w = fld(tn, a + h * k3a, k4a)
        # compensated summation keeps rounding below the O(h^4) truncation error
        da = h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) - ca
        dw = h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) - cw
        an = a + da
        wn = w + dw
        ca = (an - a) - da
        cw = (wn - w) - dw
        _check(tn, an, wn, (t, a, w))
        t, a, w = tn, an, wn
        k1w = fld(t, a, w)
        yield t, a, w, k1w, 0


def _initial_step(fld: Field, t: float, a: float, w: float, acc: float, opts: Options, atol: float) -> float:
    # Hairer-Norsett-Wanner starting step for a 5th-order method
    sa = atol + opts.rtol * abs(a - HALF_PI)
    sw = atol + opts.rtol * abs(w)
    d0 = max(abs(a - HALF_PI) / sa, abs(w) / sw)
    d1 = max(abs(w) / sa, abs(acc) / sw)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, opts.h_max)
    acc1 = fld(t + h0, a + h0 * w, w + h0 * acc)
    d2 = max(abs(acc * h0) / sa, abs(acc1 - acc) / sw) / h0
    dmax = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dmax <= 1e-15 else (0.01 / dmax) ** 0.2
    return min(100.0 * h0, h1, opts.h_max)


def _dopri_steps(fld: Field, t: float, a: float, w: float, acc: float, t_end: float, opts: Options):
    rtol = opts.rtol
    atol = rtol if opts.atol is None else opts.atol
    h = _initial_step(fld, t, a, w, acc, opts, atol)
    k1a, k1w = w, acc
    n_rej = 0
    rejected_last = False
    steps = 0
    while t < t_end:
        steps += 1
        if steps > opts.max_steps:
            raise IntegrationError(f"more than {opts.max_steps} steps", State(t, a, w))
        if h < opts.h_min * max(1.0, abs(t)):
            raise StepUnderflowError(f"step size underflow at t={t!r} (h={h!r})", State(t, a, w))
        if t + h >= t_end or t_end - (t + h) < 1e-12 * h:
            h = t_end - t
            tn = t_end
        else:
            tn = t + h

        ya = a + h * _A21 * k1a
        yw = w + h * _A21 * k1w
        k2a, k2w = yw, fld(t + _C2 * h, ya, yw)
        ya = a + h * (_A31 * k1a + _A32 * k2a)
        yw = w + h * (_A31 * k1w + _A32 * k2w)
        k3a, k3w = yw, fld(t + _C3 * h, ya, yw)
        ya = a + h * (_A41 * k1a + _A42 * k2a + _A43 * k3a)
        yw = w + h * (_A41 * k1w + _A42 * k2w + _A43 * k3w)
        k4a, k4w = yw, fld(t + _C4 * h, ya, yw)
        ya = a + h * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a)
        yw = w + h * (_A51 * k1w + _A52 * k2w + _A53 * k3w + _A54 * k4w)
        k5a, k5w = yw, fld(t + _C5 * h, ya, yw)
        ya = a + h * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a)
        yw = w + h * (_A61 * k1w + _A62 * k2w + _A63 * k3w + _A64 * k4w + _A65 * k5w)
        k6a, k6w = yw, fld(tn, ya, yw)
        an = a + h * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        wn = w + h * (_B1 * k1w + _B3 * k3w + _B4 * k4w + _B5 * k5w + _B6 * k6w)
        if not (math.isfinite(an) and math.isfinite(wn)):
            h *= 0.25
            rejected_last = True
            n_rej += 1
            continue
        k7a, k7w = wn, fld(tn, an, wn)
        ea = h * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        ew = h * (_E1 * k1w + _E3 * k3w + _E4 * k4w + _E5 * k5w + _E6 * k6w + _E7 * k7w)
        # angle error is scaled about the upright position, so mirrored
        # initial angles see identical step sequences
        sa = atol + rtol * max(abs(a - HALF_PI), abs(an - HALF_PI))
        sw = atol + rtol * max(abs(w), abs(wn))
        err = max(abs(ea) / sa, abs(ew) / sw)
        if err <= 1.0:
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if rejected_last:
                fac = min(fac, 1.0)
            t, a, w = tn, an, wn
            k1a, k1w = k7a, k7w
            rejected_last = False
            yield t, a, w, k7w, n_rej
            h = min(h * fac, opts.h_max)
        else:
            n_rej += 1
            rejected_last = True
            h *= max(0.2, 0.9 * err ** -0.2)


def trajectory_csv(traj: Trajectory, out: io.TextIOBase | None = None) -> str:
    """CSV with columns t, alpha, omega, f, ddf (17 significant digits)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "alpha", "omega", "f", "ddf"])
    for t, a, w in zip(traj.t, traj.alpha, traj.omega):
        f, _, ddf = traj.profile.eval(t)
        writer.writerow([_g17(t), _g17(a), _g17(w), _g17(f), _g17(ddf)])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def _g17(x: float) -> str:
    return f"{x + 0.0:.17g}"  # + 0.0 folds -0.0 into 0
