"""File formats: survey CSV input and the coefficient export.

A coefficient export holds everything needed to evaluate a fitted density
and nothing about individual respondents::

    {
      "format_version": 1,
      "method": "truncated",
      "kind": "ht",
      "N": 1000, "n": 100, "delta": -0.01,
      "J": 3, "J_cap": 6,
      "scaling": {"a": -3.1, "b": 3.4},
      "theta": [theta_0, ..., theta_{2 J_cap}],
      "w": [w_1, ..., w_J],
      "projection": {"grid": 1024, "c": 0.0}
    }

Floats are written with ``repr`` precision, so reading an export back gives
bit-identical evaluations.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .basis import ScalingTransform
from .estimator import DensityEstimate, FourierCoefficients, ValidDensity, evaluate

FORMAT_VERSION = 1

EXPORT_KEYS = frozenset(
    {"format_version", "method", "kind", "N", "n", "delta", "J", "J_cap",
     "scaling", "theta", "w", "projection"}
)


class ExportError(ValueError):
    pass


class SurveyCSVError(ValueError):
    pass


def to_export(est: DensityEstimate, proj: ValidDensity | None = None) -> dict:
    c = est.coeffs
    doc = {
        "format_version": FORMAT_VERSION,
        "method": est.method,
        "kind": c.kind,
        "N": int(c.N),
        "n": int(c.n),
        "delta": float(c.delta),
        "J": est.J,
        "J_cap": c.j_max // 2,
        "scaling": {"a": est.scaling.a, "b": est.scaling.b},
        "theta": [float(v) for v in c.theta[: 2 * (c.j_max // 2) + 1]],
        "w": [float(v) for v in est.w],
    }
    if proj is not None:
        if proj.base is not est:
            raise ExportError("projection belongs to a different estimate")
        doc["projection"] = {"grid": int(proj.grid.size), "c": float(proj.c)}
    return doc


def validate_export(doc: dict) -> None:
    """Reject exports that are malformed or carry fields outside the schema."""
    if not isinstance(doc, dict):
        raise ExportError("export must be a JSON object")
    extra = set(doc) - EXPORT_KEYS
    if extra:
        raise ExportError(f"unexpected fields in export: {sorted(extra)}")
    required = EXPORT_KEYS - {"projection"}
    missing = required - set(doc)
    if missing:
        raise ExportError(f"missing fields in export: {sorted(missing)}")
    if doc["format_version"] != FORMAT_VERSION:
        raise ExportError(f"unsupported format_version {doc['format_version']!r}")
    J, cap = doc["J"], doc["J_cap"]
    if not (isinstance(J, int) and isinstance(cap, int) and 0 <= J <= cap):
        raise ExportError("J and J_cap must be integers with 0 <= J <= J_cap")
    if len(doc["theta"]) != 2 * cap + 1:
        raise ExportError(f"theta must have 2*J_cap+1 = {2 * cap + 1} entries")
    if len(doc["w"]) != J:
        raise ExportError(f"w must have J = {J} entries")
    if set(doc["scaling"]) != {"a", "b"}:
        raise ExportError("scaling must hold exactly 'a' and 'b'")
    if "projection" in doc and set(doc["projection"]) != {"grid", "c"}:
        raise ExportError("projection must hold exactly 'grid' and 'c'")
    if not all(math.isfinite(v) for v in doc["theta"] + doc["w"]):
        raise ExportError("coefficients must be finite")


def from_export(doc: dict) -> tuple[DensityEstimate, float | None]:
    """Rebuild the estimate and the projection constant (``None`` if absent)."""
    validate_export(doc)
    coeffs = FourierCoefficients(
        np.asarray(doc["theta"], dtype=float), doc["N"], doc["n"], doc["delta"],
        kind=doc["kind"],
    )
    scaling = ScalingTransform(doc["scaling"]["a"], doc["scaling"]["b"])
    est = DensityEstimate(coeffs, np.asarray(doc["w"], dtype=float), scaling, doc["method"])
    proj = doc.get("projection")
    return est, (None if proj is None else float(proj["c"]))


def write_export(path, est: DensityEstimate, proj: ValidDensity | None = None) -> dict:
    doc = to_export(est, proj)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return doc


def read_export(path) -> tuple[DensityEstimate, float | None]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ExportError(f"{path}: not valid JSON ({exc})") from None
    return from_export(doc)


def evaluate_projected(est: DensityEstimate, c: float | None, u):
    """``max(0, f_hat(u) - c)``, or the raw estimate when ``c`` is ``None``."""
    raw = np.asarray(evaluate(est, u))
    out = raw if c is None else np.maximum(0.0, raw - c)
    return float(out) if out.ndim == 0 else out


def read_survey_csv(path):
    """Read ``x`` plus optional ``weight`` and ``stratum`` columns.

    Returns ``(x, weights, strata)``; weights default to 1 and strata to
    ``None`` when the columns are absent.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "x" not in reader.fieldnames:
            raise SurveyCSVError(f"{path}: header row with an 'x' column is required")
        has_w = "weight" in reader.fieldnames
        has_s = "stratum" in reader.fieldnames
        xs, ws, ss = [], [], []
        for line, row in enumerate(reader, start=2):
            try:
                x = float(row["x"])
                w = float(row["weight"]) if has_w else 1.0
            except (TypeError, ValueError):
                raise SurveyCSVError(f"{path}:{line}: non-numeric x or weight") from None
            if not math.isfinite(x):
                raise SurveyCSVError(f"{path}:{line}: x must be finite")
            if not math.isfinite(w) or w <= 0:
                raise SurveyCSVError(f"{path}:{line}: weight must be a positive number")
            xs.append(x)
            ws.append(w)
            if has_s:
                ss.append(row["stratum"])
    if len(xs) < 2:
        raise SurveyCSVError(f"{path}: need at least 2 data rows")
    return np.asarray(xs), np.asarray(ws), (np.asarray(ss) if has_s else None)
