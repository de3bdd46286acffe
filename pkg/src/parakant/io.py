"""JSON and CSV formats for measures, instances, results and reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from fractions import Fraction

import numpy as np

from . import _numeric as num
from ._numeric import FLOAT, RATIONAL
from .measures import DiscreteMeasure, FiniteMetricSpace, MeasureError, ProductSpace
from .solver import SolveResult


class InputError(ValueError):
    """Malformed input document; the message names the offending field."""

    def __init__(self, field: str, problem: str):
        super().__init__(f"{field}: {problem}")
        self.field = field


def _numbers(values, mode: str, field: str):
    try:
        arr = np.array(values, dtype=object)
    except ValueError:
        raise InputError(field, "ragged array") from None
    if arr.dtype != object or arr.size == 0:
        raise InputError(field, "expected a nonempty array of numbers")
    out = np.empty(arr.shape, dtype=object)
    try:
        for k, x in enumerate(arr.flat):
            if isinstance(x, bool) or not isinstance(x, (int, float, str)):
                raise TypeError(f"{x!r} is not a number")
            out.flat[k] = num.parse_number(x, mode)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(field, str(exc)) from None
    return num.as_array(out, mode)


def _get(doc, key: str, field: str):
    if not isinstance(doc, dict):
        raise InputError(field, "expected an object")
    if key not in doc:
        raise InputError(f"{field}.{key}" if field else key, "missing")
    return doc[key]


def space_from_json(doc, mode: str, field: str = "space") -> FiniteMetricSpace:
    if not isinstance(doc, dict):
        raise InputError(field, "expected an object with 'points' or 'dist'")
    try:
        if "points" in doc:
            pts = doc["points"]
            if not isinstance(pts, list) or not pts:
                raise InputError(f"{field}.points", "expected a nonempty list")
            pts = [p if isinstance(p, list) else [p] for p in pts]
            return FiniteMetricSpace(points=_numbers(pts, mode, f"{field}.points"))
        if "dist" in doc:
            return FiniteMetricSpace(dist=_numbers(doc["dist"], mode, f"{field}.dist"))
        if "size" in doc:
            return FiniteMetricSpace.discrete(int(doc["size"]))
    except MeasureError as exc:
        raise InputError(field, str(exc)) from None
    raise InputError(field, "expected 'points', 'dist' or 'size'")


def space_to_json(space: FiniteMetricSpace) -> dict:
    if space.coords is not None:
        return {"points": num.format_array(space.coords)}
    return {"dist": num.format_array(space.dist)}


def measure_from_json(doc, mode: str, field: str = "measure") -> DiscreteMeasure:
    space = space_from_json(_get(doc, "space", field), mode, f"{field}.space")
    weights = _numbers(_get(doc, "weights", field), mode, f"{field}.weights")
    try:
        return DiscreteMeasure(space, weights, mode=mode)
    except MeasureError as exc:
        raise InputError(f"{field}.weights", str(exc)) from None


def measure_to_json(mu: DiscreteMeasure) -> dict:
    return {"space": space_to_json(mu.space), "weights": num.format_array(mu.weights)}


def joint_from_json(doc, mode: str, field: str) -> DiscreteMeasure:
    """Measure on a two-factor product: ``{"weights": [[...]], "left"?: space, "right"?: space}``."""
    w = _numbers(_get(doc, "weights", field), mode, f"{field}.weights")
    if w.ndim != 2:
        raise InputError(f"{field}.weights", "expected a matrix")
    left = space_from_json(doc["left"], mode, f"{field}.left") if "left" in doc \
        else FiniteMetricSpace.discrete(w.shape[0])
    right = space_from_json(doc["right"], mode, f"{field}.right") if "right" in doc \
        else FiniteMetricSpace.discrete(w.shape[1])
    if (len(left), len(right)) != w.shape:
        raise InputError(f"{field}.weights", "shape does not match the factor spaces")
    try:
        return DiscreteMeasure(ProductSpace(left, right), w.ravel(), mode=mode)
    except MeasureError as exc:
        raise InputError(f"{field}.weights", str(exc)) from None


def read_mode(doc, override: str | None) -> str:
    mode = override or (doc.get("mode") if isinstance(doc, dict) else None) or RATIONAL
    if mode not in num.MODES:
        raise InputError("mode", f"expected one of {list(num.MODES)}")
    return mode


def instance_from_json(doc, mode_override: str | None = None):
    mode = read_mode(doc, mode_override)
    cost = _numbers(_get(doc, "cost", ""), mode, "cost")
    mu = measure_from_json(_get(doc, "mu", ""), mode, "mu")
    nu = measure_from_json(_get(doc, "nu", ""), mode, "nu")
    if cost.ndim != 2 or cost.shape != (len(mu), len(nu)):
        raise InputError("cost", f"shape {cost.shape} does not match marginals ({len(mu)}, {len(nu)})")
    return cost, mu, nu, mode


def content_hash(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def result_to_json(result: SolveResult) -> dict:
    body = {
        "mode": result.mode,
        "K": num.format_number(result.cost),
        "gap": num.format_number(result.gap),
        "plan": num.format_array(result.plan.matrix),
        "phi": num.format_array(result.potentials.phi),
        "psi": num.format_array(result.potentials.psi),
        "plan_hash": result.plan.digest(),
    }
    body["hash"] = content_hash(body)
    return body


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _cell(x):
    if isinstance(x, (Fraction, np.integer)) or (isinstance(x, int) and not isinstance(x, bool)):
        return num.format_number(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def jsonable(x):
    """Recursively convert numbers, arrays and tuples into JSON-ready values."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return num.format_array(x)
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return num.format_number(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        return f if np.isfinite(f) else repr(f)
    return str(x)


__all__ = ["InputError", "measure_from_json", "measure_to_json", "joint_from_json", "space_from_json",
           "instance_from_json", "result_to_json", "content_hash", "csv_text", "dumps", "jsonable",
           "FLOAT", "RATIONAL"]
