"""Command line front end.

    whitney simulate --profile sinusoid:3,2,0 --alpha0 1.2 --horizon 5
    whitney classify --profile rest --alpha0 1.5707963267948966 --horizon 10
    whitney search   --profile sinusoid:3,2,0 --horizon 5 --tol 1e-12
    whitney endmap   --profile sinusoid:3,2,0 --mode absorbing --horizon 5 --around-survivor 2e-7
    whitney decay    --profile rest --horizons 1,1.5,2,2.5,3 --points-csv points.csv
    whitney epsilon  --profile sinusoid:3,2,0 --horizon 5
    whitney profiles

Data goes to stdout (or --output); diagnostics go to stderr.  Exit status
is 0 on success, 1 on domain errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import report
from .classify import classify_many, epsilon_threshold
from .dynamics import Mode, RodModel, RodParams, State
from .experiments import end_map_sweep, two_week_extrapolation
from .integrate import IntegrationError, Options, integrate, trajectory_csv
from .profile import PRESETS, ProfileError, load_profile, parse_profile
from .search import SearchError, decay_fit, survival_bisect, survival_window

log = logging.getLogger("whitney")


class DomainError(Exception):
    pass


def radians(text: str) -> float:
    t = text.strip().lower()
    if t.endswith(("deg", "°", "d")) or "deg" in t:
        raise argparse.ArgumentTypeError(f"{text!r}: angles are accepted in radians only")
    try:
        value = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number (radians)") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return value


def positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not (math.isfinite(value) and value > 0.0):
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return value


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated list") from None


def _common(p: argparse.ArgumentParser, *, mode: bool = False, horizon: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--profile", help="preset: rest | const_accel:a[,T] | sinusoid:A,w[,phase[,T]]")
    src.add_argument("--profile-file", type=Path, help="JSON profile file")
    p.add_argument("--g", type=positive, default=9.81, help="gravity, m/s^2")
    p.add_argument("--length", type=positive, default=1.0, help="rod length, m")
    p.add_argument("--rod-model", choices=[m.value for m in RodModel], default="point_mass")
    p.add_argument("--method", choices=["adaptive", "rk4"], default="adaptive")
    p.add_argument("--rtol", type=positive, default=1e-10, help="adaptive relative tolerance")
    p.add_argument("--h", type=positive, default=1e-3, help="RK4 step, s")
    p.add_argument("--output", "-o", type=Path, help="write data here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    if horizon:
        p.add_argument("--horizon", type=positive, required=True, help="seconds")
    if mode:
        p.add_argument("--mode", choices=["free", "absorbing", "smooth_stick"], default="free")
        p.add_argument("--delta", type=positive, default=0.05, help="smooth_stick band, rad")
        p.add_argument("--damping", type=float, default=5.0, help="smooth_stick damping, 1/s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="whitney", description=(
        "Simulate a rod hinged on a moving platform and search for initial angles "
        "that keep it off the floor."))
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one trajectory (CSV)")
    _common(p, mode=True)
    p.add_argument("--alpha0", type=radians, required=True)
    p.add_argument("--omega0", type=float, default=0.0)

    p = sub.add_parser("classify", help="classify initial angles")
    _common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha0", type=radians, nargs="+")
    g.add_argument("--random", type=int, metavar="N", help="N uniform angles in (0, pi)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("search", help="survival bracket and window (JSON)")
    _common(p)
    p.add_argument("--tol", type=positive, default=1e-12)
    p.add_argument("--no-window", action="store_true", help="skip the window measurement")

    p = sub.add_parser("endmap", help="end map table (CSV)")
    _common(p, mode=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--grid", metavar="LO:HI:N", help="N+1 evenly spaced angles")
    g.add_argument("--around-survivor", type=positive, metavar="HALFWIDTH",
                   help="grid of half-width HALFWIDTH centred on the survivor")
    p.add_argument("--points", type=int, default=200, help="intervals for --around-survivor")
    p.add_argument("--tol", type=positive, default=1e-12)

    p = sub.add_parser("decay", help="window decay fit (JSON) and points (CSV)")
    _common(p, horizon=False)
    p.add_argument("--horizons", type=float_list, default=[1.0, 1.5, 2.0, 2.5, 3.0])
    p.add_argument("--tol", type=positive, default=1e-12)
    p.add_argument("--points-csv", type=Path)
    p.add_argument("--t-target", type=positive, default=1_209_600.0, help="extrapolation time, s")

    p = sub.add_parser("epsilon", help="epsilon threshold for a profile (JSON)")
    _common(p)

    sub.add_parser("profiles", help="list presets")
    return parser


def _params(a: argparse.Namespace) -> RodParams:
    return RodParams(g=a.g, length=a.length, rod_model=RodModel(a.rod_model))


def _profile(a: argparse.Namespace):
    if a.profile_file is not None:
        return load_profile(a.profile_file)
    return parse_profile(a.profile)


def _opts(a: argparse.Namespace) -> Options:
    return Options(method=a.method, rtol=a.rtol, h=a.h)


def _mode(a: argparse.Namespace) -> Mode:
    return Mode.parse(a.mode, a.delta, a.damping)


def _emit(a: argparse.Namespace, text: str) -> None:
    if a.output is not None:
        a.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _run(a: argparse.Namespace) -> None:
    if a.command == "profiles":
        sys.stdout.write("".join(f"{k}\t{v}\n" for k, v in PRESETS.items()))
        return
    params, profile, opts = _params(a), _profile(a), _opts(a)
    fmt = a.format

    if a.command == "simulate":
        traj = integrate(params, profile, _mode(a), State(0.0, a.alpha0, a.omega0), a.horizon, opts)
        if fmt == "json":
            ev = traj.event
            _emit(a, report.json_text({
                "final": {"t": traj.final.t, "alpha": traj.final.alpha, "omega": traj.final.omega},
                "event": None if ev is None else {
                    "side": ev.side.value, "t_cross": ev.t_cross, "omega_at_cross": ev.omega_at_cross},
                "n_samples": len(traj.t),
            }))
        else:
            _emit(a, trajectory_csv(traj))

    elif a.command == "classify":
        if a.random is not None:
            if a.random < 1:
                raise DomainError("--random needs N >= 1")
            rng = np.random.default_rng(a.seed)
            alphas = [float(x) for x in rng.uniform(0.0, math.pi, a.random)]
        else:
            alphas = a.alpha0
        if any(not 0.0 <= x <= math.pi for x in alphas):
            raise DomainError("alpha0 must lie in [0, pi]")
        res = classify_many(params, profile, alphas, a.horizon, opts, jobs=a.jobs)
        if fmt == "json":
            _emit(a, report.json_text([{"alpha0": x, **report.classification_dict(c)}
                                       for x, c in zip(alphas, res)]))
        else:
            _emit(a, report.csv_text(("alpha0", "outcome", "sign", "t"),
                                     ((x, c.outcome.value, c.sign, c.t) for x, c in zip(alphas, res))))

    elif a.command == "search":
        br = survival_bisect(params, profile, a.horizon, a.tol, opts)
        out = {"bracket": report.bracket_dict(br), "survivor": br.survivor}
        if not a.no_window:
            out["window"] = report.window_dict(survival_window(params, profile, a.horizon, a.tol, opts, br))
        _emit(a, report.json_text(out))

    elif a.command == "endmap":
        if a.grid is not None:
            try:
                lo, hi, n = a.grid.split(":")
                grid = np.linspace(float(lo), float(hi), int(n) + 1)
            except ValueError:
                raise DomainError(f"--grid expects LO:HI:N, got {a.grid!r}") from None
        else:
            br = survival_bisect(params, profile, a.horizon, a.tol, opts)
            if br.survivor is None:
                raise DomainError("no survivor resolved at this horizon")
            hw = a.around_survivor
            grid = np.linspace(br.survivor - hw, br.survivor + hw, a.points + 1)
        table = end_map_sweep(params, profile, _mode(a), a.horizon, [float(x) for x in grid],
                              opts, jobs=a.jobs)
        _emit(a, report.endmap_csv(table))

    elif a.command == "decay":
        fit = decay_fit(params, profile, a.horizons, a.tol, opts)
        ext = two_week_extrapolation(params, fit, a.t_target)
        if a.points_csv is not None:
            a.points_csv.write_text(report.decay_points_csv(fit), encoding="utf-8")
        if fmt == "csv":
            _emit(a, report.decay_points_csv(fit))
        else:
            _emit(a, report.json_text({"fit": report.decay_dict(fit),
                                       "extrapolation": report.extrapolation_dict(ext)}))

    elif a.command == "epsilon":
        eps = epsilon_threshold(params, profile.max_abs_accel(0.0, a.horizon))
        _emit(a, report.json_text(report.epsilon_dict(eps, a.horizon)))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        _run(a)
    except (DomainError, SearchError, ProfileError, IntegrationError, ValueError) as exc:
        print(f"whitney {a.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"whitney {a.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
