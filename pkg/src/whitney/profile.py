"""Train motion laws s = f(t).

A profile evaluates position, velocity and acceleration of the platform at
any t >= 0.  Presets are closed-form; a spline profile is the natural cubic
through user knots.  Past ``t_end`` every profile continues inertially
(f'' = 0, position extrapolated linearly).
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "ProfileError",
    "MotionProfile",
    "make_profile",
    "parse_profile",
    "load_profile",
    "save_profile",
    "profile_to_dict",
    "PRESETS",
]

PRESETS = {
    "rest": "platform at rest, f = 0",
    "const_accel": "const_accel:a[,duration]  f = a t^2 / 2",
    "sinusoid": "sinusoid:A,w[,phase[,duration]]  f = A sin(w t + phase)",
    "stop_forever": "file only: {'kind': 'stop_forever', 'base': {...}, 't_stop': T, 'blend': 1.0}",
    "spline": "file only: {'kind': 'spline', 'knots': [[t, f], ...]}",
}

# Gauss-Legendre nodes for integrating the blended velocity of stop_forever.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


class ProfileError(ValueError):
    """Invalid profile description or evaluation request."""


def _finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ProfileError(f"{name} must be finite, got {v!r}")


def _smoothstep5(s: float) -> tuple[float, float]:
    """Quintic smoothstep S(s) and S'(s) on [0, 1]."""
    s2 = s * s
    return s2 * s * (10.0 - 15.0 * s + 6.0 * s2), 30.0 * s2 * (1.0 - 2.0 * s + s2)


@dataclass(frozen=True)
class MotionProfile:
    """Immutable motion law.

    ``kind`` is one of ``rest``, ``const_accel``, ``sinusoid``,
    ``stop_forever`` or ``spline``; ``params`` holds the preset parameters
    and ``knots`` the spline data.  Use :func:`make_profile` to build one.
    """

    kind: str
    t_end: float = math.inf
    params: tuple[tuple[str, float], ...] = ()
    knots: tuple[tuple[float, float], ...] = ()
    base: MotionProfile | None = None
    _coef: tuple[tuple[float, ...], ...] = field(default=(), repr=False, compare=False)

    def param(self, name: str) -> float:
        return dict(self.params)[name]

    # -- evaluation -------------------------------------------------------

    def eval(self, t: float) -> tuple[float, float, float]:
        """Return (f, f', f'') at time ``t`` (seconds, t >= 0)."""
        if not math.isfinite(t) or t < 0.0:
            raise ProfileError(f"profile evaluated at invalid time t={t!r}")
        if t > self.t_end:
            f, df, _ = self._eval_inner(self.t_end)
            return f + df * (t - self.t_end), df, 0.0
        return self._eval_inner(t)

    def accel(self, t: float) -> float:
        """f''(t) without argument checks; used in the integrator hot loop."""
        if t > self.t_end:
            return 0.0
        kind = self.kind
        if kind == "rest":
            return 0.0
        if kind == "const_accel":
            return self._coef[0][0]
        if kind == "sinusoid":
            amp, w, ph = self._coef[0]
            return -amp * w * w * math.sin(w * t + ph)
        if kind == "stop_forever":
            t_stop, blend = self._coef[0]
            t0 = t_stop - blend
            if t <= t0:
                return self.base.accel(t)  # type: ignore[union-attr]
            _, v, a = self.base.eval(t)  # type: ignore[union-attr]
            s, ds = _smoothstep5((t - t0) / blend)
            return a * (1.0 - s) - v * ds / blend
        return self._eval_inner(t)[2]

    def _eval_inner(self, t: float) -> tuple[float, float, float]:
        kind = self.kind
        if kind == "rest":
            return 0.0, 0.0, 0.0
        if kind == "const_accel":
            a = self._coef[0][0]
            return 0.5 * a * t * t, a * t, a
        if kind == "sinusoid":
            amp, w, ph = self._coef[0]
            arg = w * t + ph
            s, c = math.sin(arg), math.cos(arg)
            return amp * s, amp * w * c, -amp * w * w * s
        if kind == "spline":
            return self._eval_spline(t)
        if kind == "stop_forever":
            return self._eval_stop(t)
        raise ProfileError(f"unknown profile kind {kind!r}")

    def _eval_spline(self, t: float) -> tuple[float, float, float]:
        ts = self._coef[0]
        i = min(max(bisect.bisect_right(ts, t) - 1, 0), len(ts) - 2)
        c3, c2, c1, c0 = self._coef[1 + i]
        x = t - ts[i]
        return (
            ((c3 * x + c2) * x + c1) * x + c0,
            (3.0 * c3 * x + 2.0 * c2) * x + c1,
            6.0 * c3 * x + 2.0 * c2,
        )

    def _eval_stop(self, t: float) -> tuple[float, float, float]:
        t_stop, blend = self.param("t_stop"), self.param("blend")
        t0 = t_stop - blend
        base = self.base
        assert base is not None
        if t <= t0:
            return base.eval(t)
        f0 = base.eval(t0)[0]
        if t >= t_stop:
            return f0 + self._blend_distance(t0, t_stop), 0.0, 0.0
        _, v, a = base.eval(t)
        s, ds = _smoothstep5((t - t0) / blend)
        return f0 + self._blend_distance(t0, t), v * (1.0 - s), a * (1.0 - s) - v * ds / blend

    def _blend_distance(self, t0: float, t: float) -> float:
        # Integral of the blended velocity v(u) (1 - S(u)) over [t0, t].
        if t <= t0:
            return 0.0
        blend = self.param("blend")
        half = 0.5 * (t - t0)
        total = 0.0
        for x, w in zip(_GL_X, _GL_W):
            u = t0 + half * (x + 1.0)
            s, _ = _smoothstep5((u - t0) / blend)
            total += w * self.base.eval(u)[1] * (1.0 - s)  # type: ignore[union-attr]
        return half * total

    # -- bounds -----------------------------------------------------------

    def max_abs_accel(self, t0: float, t1: float) -> float:
        """Upper bound on |f''| over [t0, t1] (exact for closed-form kinds)."""
        if not (math.isfinite(t0) and t0 >= 0.0 and t1 > t0):
            raise ProfileError(f"invalid interval [{t0!r}, {t1!r}]")
        if t0 >= self.t_end:
            return 0.0
        hi = min(t1, self.t_end)
        kind = self.kind
        if kind == "rest":
            return 0.0
        if kind == "const_accel":
            return abs(self._coef[0][0])
        if kind == "sinusoid":
            amp, w, ph = self._coef[0]
            peak = abs(amp) * w * w
            if w == 0.0:
                return abs(amp * w * w * math.sin(ph))
            a, b = sorted((w * t0 + ph, w * hi + ph))
            # |sin| reaches 1 at pi/2 + k pi
            k = math.ceil((a - 0.5 * math.pi) / math.pi)
            if 0.5 * math.pi + k * math.pi <= b:
                return peak
            return peak * max(abs(math.sin(a)), abs(math.sin(b)))
        if kind == "spline":
            cands = [t0, hi] + [t for t in self._coef[0] if t0 < t < hi]
            return max(abs(self._eval_spline(t)[2]) for t in cands)
        if kind == "stop_forever":
            t_blend = self.param("t_stop") - self.param("blend")
            out = 0.0
            if t0 < t_blend:
                out = self.base.max_abs_accel(t0, min(hi, t_blend))  # type: ignore[union-attr]
            lo_b, hi_b = max(t0, t_blend), min(hi, self.param("t_stop"))
            if hi_b > lo_b:
                out = max(out, _sampled_max(lambda u: abs(self.eval(u)[2]), lo_b, hi_b))
            return out
        raise ProfileError(f"unknown profile kind {kind!r}")


def _sampled_max(fn, a: float, b: float, n: int = 2001) -> float:
    from scipy.optimize import minimize_scalar

    ts = np.linspace(a, b, n)
    vals = [fn(float(t)) for t in ts]
    i = int(np.argmax(vals))
    lo, hi = float(ts[max(i - 1, 0)]), float(ts[min(i + 1, n - 1)])
    best = vals[i]
    if hi > lo:
        res = minimize_scalar(lambda u: -fn(u), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def make_profile(kind: str, **kw: Any) -> MotionProfile:
    """Build a profile.

    Examples::

        make_profile("rest")
        make_profile("const_accel", accel=2.0)
        make_profile("sinusoid", amplitude=3.0, omega=2.0, phase=0.0)
        make_profile("stop_forever", base=make_profile("sinusoid", ...), t_stop=4.0)
        make_profile("spline", knots=[(0, 0), (1, 1), (2, 0)])

    ``duration`` (seconds, default infinite) sets ``t_end`` for presets.
    """
    kind = kind.lower()
    duration = kw.pop("duration", None)
    t_end = math.inf if duration is None else float(duration)
    if duration is not None and not (t_end > 0.0):
        raise ProfileError(f"duration must be positive, got {duration!r}")

    if kind == "rest":
        _no_extra(kind, kw)
        return MotionProfile("rest", t_end)
    if kind == "const_accel":
        a = float(kw.pop("accel"))
        _no_extra(kind, kw)
        _finite("accel", a)
        return MotionProfile("const_accel", t_end, (("accel", a),), _coef=((a,),))
    if kind == "sinusoid":
        amp = float(kw.pop("amplitude"))
        w = float(kw.pop("omega"))
        ph = float(kw.pop("phase", 0.0))
        _no_extra(kind, kw)
        _finite("sinusoid parameter", amp, w, ph)
        return MotionProfile(
            "sinusoid", t_end, (("amplitude", amp), ("omega", w), ("phase", ph)),
            _coef=((amp, w, ph),),
        )
    if kind == "stop_forever":
        base = kw.pop("base")
        if isinstance(base, dict):
            base = parse_profile(base)
        t_stop = float(kw.pop("t_stop"))
        blend = float(kw.pop("blend", 1.0))
        _no_extra(kind, kw)
        _finite("stop_forever parameter", t_stop, blend)
        if not (blend > 0.0 and t_stop >= blend):
            raise ProfileError("stop_forever needs blend > 0 and t_stop >= blend")
        if base.t_end < t_stop:
            raise ProfileError("stop_forever base must be defined up to t_stop")
        return MotionProfile(
            "stop_forever", t_stop, (("t_stop", t_stop), ("blend", blend)), base=base,
            _coef=((t_stop, blend),),
        )
    if kind == "spline":
        knots = [(float(t), float(f)) for t, f in kw.pop("knots")]
        _no_extra(kind, kw)
        if duration is not None:
            raise ProfileError("spline duration is fixed by its last knot")
        return _make_spline(knots)
    raise ProfileError(f"unknown profile kind {kind!r}; choose from {sorted(PRESETS)}")


def _no_extra(kind: str, kw: dict) -> None:
    if kw:
        raise ProfileError(f"unexpected parameters for {kind}: {sorted(kw)}")


def _make_spline(knots: list[tuple[float, float]]) -> MotionProfile:
    if len(knots) < 2:
        raise ProfileError("spline needs at least 2 knots")
    ts = [t for t, _ in knots]
    fs = [f for _, f in knots]
    _finite("knot", *ts, *fs)
    if ts[0] != 0.0:
        raise ProfileError("spline knots must start at t = 0")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ProfileError("spline knot times must be strictly increasing")
    cs = CubicSpline(ts, fs, bc_type="natural")
    coef = tuple(tuple(float(c) for c in cs.c[:, i]) for i in range(len(ts) - 1))
    return MotionProfile(
        "spline", ts[-1], knots=tuple(knots), _coef=(tuple(ts),) + coef,
    )


# -- serialization ---------------------------------------------------------

def profile_to_dict(profile: MotionProfile) -> dict[str, Any]:
    d: dict[str, Any] = {"kind": profile.kind}
    if profile.kind == "spline":
        d["knots"] = [[t, f] for t, f in profile.knots]
        return d
    d.update(dict(profile.params))
    if profile.kind == "stop_forever":
        d["base"] = profile_to_dict(profile.base)  # type: ignore[arg-type]
    elif math.isfinite(profile.t_end):
        d["duration"] = profile.t_end
    return d


def parse_profile(obj: dict[str, Any] | str) -> MotionProfile:
    """Profile from a JSON-style dict or a ``name[:p1,p2,...]`` preset string."""
    if isinstance(obj, str):
        return _parse_preset_string(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ProfileError("profile object needs a 'kind' field")
    kw = {k: v for k, v in obj.items() if k != "kind"}
    if kw.get("duration", 0) is None:
        kw.pop("duration")
    try:
        return make_profile(obj["kind"], **kw)
    except (KeyError, TypeError) as exc:
        raise ProfileError(f"bad parameters for {obj['kind']!r}: {exc}") from None


def _parse_preset_string(text: str) -> MotionProfile:
    name, _, rest = text.partition(":")
    try:
        nums = [float(x) for x in rest.split(",")] if rest else []
    except ValueError:
        raise ProfileError(f"cannot parse preset parameters in {text!r}") from None
    name = name.strip().lower()
    names = {
        "rest": [],
        "const_accel": ["accel", "duration"],
        "sinusoid": ["amplitude", "omega", "phase", "duration"],
    }
    if name not in names:
        raise ProfileError(f"unknown preset {name!r}; presets: {', '.join(names)}")
    keys = names[name]
    if len(nums) > len(keys):
        raise ProfileError(f"too many parameters for {name}")
    return make_profile(name, **dict(zip(keys, nums)))


def load_profile(path: str | Path) -> MotionProfile:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProfileError(f"{path}: not valid JSON ({exc})") from None
    return parse_profile(obj)


def save_profile(profile: MotionProfile, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(profile_to_dict(profile), fh, indent=2, sort_keys=True)
        fh.write("\n")
