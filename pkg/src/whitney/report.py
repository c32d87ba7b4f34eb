"""CSV and JSON emission.

All floats are written with 17 significant digits (CSV) or Python's
shortest round-trip repr (JSON), keys sorted, so identical runs produce
identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict
from typing import Any, Iterable, Sequence

from .classify import Classification, EpsilonThreshold
from .experiments import EndMapTable, Extrapolation
from .search import DecayFit, SurvivalBracket, SurvivalWindow


def g17(x: float | None) -> str:
    if x is None:
        return ""
    return f"{x + 0.0:.17g}"  # + 0.0 folds -0.0 into 0


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([g17(v) if isinstance(v, float) or v is None else v for v in row])
    return buf.getvalue()


def json_text(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def classification_dict(c: Classification) -> dict[str, Any]:
    return {"outcome": c.outcome.value, "sign": c.sign, "t": c.t}


def bracket_dict(b: SurvivalBracket) -> dict[str, Any]:
    return {
        "alpha_lo": b.alpha_lo,
        "alpha_hi": b.alpha_hi,
        "width": b.width,
        "horizon": b.horizon,
        "probe_horizon": b.probe_horizon,
        "lo": classification_dict(b.lo),
        "hi": classification_dict(b.hi),
        "survivor": b.survivor,
        "n_probes": b.n_probes,
        "surviving_probes": b.surviving_probes,
    }


def window_dict(w: SurvivalWindow) -> dict[str, Any]:
    return {
        "w_lo": w.w_lo,
        "w_hi": w.w_hi,
        "width": w.width,
        "survivor": w.survivor,
        "horizon": w.horizon,
        "tol": w.tol,
        "below": {"alpha0": w.below_alpha, **classification_dict(w.below)},
        "above": {"alpha0": w.above_alpha, **classification_dict(w.above)},
    }


def decay_dict(d: DecayFit) -> dict[str, Any]:
    return {
        "lambda_fit": d.lambda_fit,
        "intercept": d.intercept,
        "residual": d.residual,
        "points": [{"horizon": t, "width": w} for t, w in d.points],
        "excluded": list(d.excluded),
    }


def extrapolation_dict(e: Extrapolation) -> dict[str, Any]:
    d = asdict(e)
    d["ratio_to_littlewood"] = e.ratio_to_littlewood
    d["note"] = e.note()
    return d


def epsilon_dict(e: EpsilonThreshold, horizon: float) -> dict[str, Any]:
    return {"epsilon": e.epsilon, "a_max": e.a_max, "horizon": horizon}


ENDMAP_HEADER = ("alpha0", "alpha_final", "outcome", "t_fall")


def endmap_csv(table: EndMapTable) -> str:
    return csv_text(
        ENDMAP_HEADER,
        ((r.alpha0, r.alpha_final, r.outcome.value, r.t_fall) for r in table.rows),
    )


def decay_points_csv(d: DecayFit) -> str:
    return csv_text(("horizon", "width", "log_width"),
                    ((t, w, math.log(w)) for t, w in d.points))
