"""Equation of motion of a rod hinged on an accelerating platform.

Angles are measured from the forward floor direction, counterclockwise:
alpha = 0 is lying forward, alpha = pi lying backward, pi/2 upright.  In the
platform frame the rod feels gravity and the pseudo-force -m f''(t), giving

    L_eff * alpha'' = -g cos(alpha) + f''(t) sin(alpha)

with L_eff = L for a point mass at the tip and 2L/3 for a uniform rod.
A forward acceleration (f'' > 0) tips an upright rod backward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .profile import MotionProfile

__all__ = [
    "RodModel",
    "RodParams",
    "State",
    "Mode",
    "FREE",
    "ABSORBING",
    "smooth_stick",
    "rhs",
    "make_field",
    "energy",
    "cutoff",
]

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi


class RodModel(str, Enum):
    POINT_MASS = "point_mass"
    UNIFORM_ROD = "uniform_rod"


@dataclass(frozen=True)
class RodParams:
    g: float = 9.81
    length: float = 1.0
    rod_model: RodModel = RodModel.POINT_MASS

    def __post_init__(self) -> None:
        if not (math.isfinite(self.g) and self.g > 0.0):
            raise ValueError(f"gravity must be positive, got {self.g!r}")
        if not (math.isfinite(self.length) and self.length > 0.0):
            raise ValueError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "rod_model", RodModel(self.rod_model))

    @classmethod
    def with_effective_length(cls, l_eff: float, g: float = 9.81) -> RodParams:
        return cls(g=g, length=l_eff, rod_model=RodModel.POINT_MASS)

    @property
    def l_eff(self) -> float:
        if self.rod_model is RodModel.UNIFORM_ROD:
            return 2.0 * self.length / 3.0
        return self.length

    @property
    def k(self) -> float:
        """g / L_eff, the squared growth rate at the upright position."""
        return self.g / self.l_eff

    @property
    def coupling(self) -> float:
        return 1.0 / self.l_eff

    @property
    def growth_rate(self) -> float:
        return math.sqrt(self.k)


@dataclass(frozen=True)
class State:
    t: float
    alpha: float
    omega: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and math.isfinite(self.alpha) and math.isfinite(self.omega)):
            raise ValueError(f"non-finite state {self!r}")


@dataclass(frozen=True)
class Mode:
    """Boundary regime.

    ``free``: no floor, the rod may revolve.  ``absorbing``: the rod sticks
    on first contact (handled by the integrator).  ``smooth_stick``: inertial
    coupling is switched off smoothly within ``delta`` of the floor and the
    motion below the floor is damped at rate ``damping``.
    """

    kind: str = "free"
    delta: float = 0.05
    damping: float = 5.0

    def __post_init__(self) -> None:
        if self.kind not in ("free", "absorbing", "smooth_stick"):
            raise ValueError(f"unknown mode {self.kind!r}")
        if self.kind == "smooth_stick":
            if not (0.0 < self.delta < 0.25 * math.pi):
                raise ValueError("smooth_stick delta must lie in (0, pi/4)")
            if not (self.damping >= 0.0 and math.isfinite(self.damping)):
                raise ValueError("smooth_stick damping must be >= 0")

    @classmethod
    def parse(cls, name: str, delta: float = 0.05, damping: float = 5.0) -> Mode:
        name = name.lower().replace("-", "_")
        if name == "smooth_stick":
            return cls(name, delta, damping)
        return cls(name)

    def __str__(self) -> str:
        return self.kind


FREE = Mode("free")
ABSORBING = Mode("absorbing")


def smooth_stick(delta: float = 0.05, damping: float = 5.0) -> Mode:
    return Mode("smooth_stick", delta, damping)


def cutoff(alpha: float, delta: float) -> float:
    """C^2 switch: 1 on [delta, pi - delta], 0 outside (0, pi) (mod 2 pi)."""
    a = alpha % TWO_PI
    if a >= math.pi:
        return 0.0
    edge = min(a, math.pi - a)
    if edge >= delta:
        return 1.0
    s = edge / delta
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


def make_field(
    params: RodParams, profile: MotionProfile, mode: Mode = FREE
) -> Callable[[float, float, float], float]:
    """Angular acceleration as a fast closure ``(t, alpha, omega) -> omega'``.

    The gravity term is written as sin(pi/2 - alpha) so that the upright
    state alpha = pi/2 is an exact floating-point equilibrium.
    """
    g = params.g
    c = params.coupling
    accel = profile.accel

    if mode.kind != "smooth_stick":
        def field(t: float, alpha: float, omega: float) -> float:
            return (-g * math.sin(HALF_PI - alpha) + accel(t) * math.sin(alpha)) * c
        return field

    delta, damping = mode.delta, mode.damping

    def stick_field(t: float, alpha: float, omega: float) -> float:
        chi = cutoff(alpha, delta)
        if chi == 1.0:
            return (-g * math.sin(HALF_PI - alpha) + accel(t) * math.sin(alpha)) * c
        return ((-g * math.sin(HALF_PI - alpha) + chi * accel(t) * math.sin(alpha)) * c
                - damping * (1.0 - chi) * omega)
    return stick_field


def rhs(params: RodParams, profile: MotionProfile, mode: Mode, state: State) -> tuple[float, float]:
    """(alpha', omega') at ``state``."""
    if state.t < 0.0:
        raise ValueError(f"time must be >= 0, got {state.t!r}")
    field = make_field(params, profile, mode)
    return state.omega, field(state.t, state.alpha, state.omega)


def energy(params: RodParams, state: State) -> float:
    """Energy per unit mass, scaled to units of m^2/s^2."""
    l_eff = params.l_eff
    return 0.5 * (l_eff * state.omega) ** 2 + params.g * l_eff * math.sin(state.alpha)
