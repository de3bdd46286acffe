"""Dual-mode scalar handling: exact rationals (object arrays) or float64."""

from __future__ import annotations

import numbers
from fractions import Fraction

import numpy as np

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

# float-mode tolerances
FEAS_TOL = 1e-12
OPT_TOL = 1e-9


def is_exact_scalar(x) -> bool:
    if isinstance(x, bool):
        return False
    return isinstance(x, (Fraction, numbers.Integral))


def to_fraction(x) -> Fraction:
    """Convert a scalar to ``Fraction``; floats go through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, numbers.Real):
        if not np.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    raise TypeError(f"cannot interpret {x!r} as a number")


def infer_mode(*arrays) -> str:
    for arr in arrays:
        a = np.asarray(arr, dtype=object) if not isinstance(arr, np.ndarray) else arr
        if a.dtype != object:
            if np.issubdtype(a.dtype, np.integer):
                continue
            return FLOAT
        if not all(is_exact_scalar(x) for x in a.flat):
            return FLOAT
    return RATIONAL


def as_array(values, mode: str) -> np.ndarray:
    """Return a fresh array of ``values`` in the representation of ``mode``."""
    if mode == RATIONAL:
        src = values if isinstance(values, np.ndarray) else np.array(values, dtype=object)
        out = np.empty(src.shape, dtype=object)
        flat = out.reshape(-1)
        for k, x in enumerate(src.reshape(-1)):
            flat[k] = to_fraction(x)
        return out
    if mode == FLOAT:
        if isinstance(values, np.ndarray) and values.dtype == object:
            return np.array([float(x) for x in values.flat], dtype=float).reshape(values.shape)
        src = np.array(values, dtype=object)
        return np.array([float(to_fraction(x)) if isinstance(x, str) else float(x)
                         for x in src.flat], dtype=float).reshape(src.shape)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def zero(mode: str):
    return Fraction(0) if mode == RATIONAL else 0.0


def one(mode: str):
    return Fraction(1) if mode == RATIONAL else 1.0


def total(arr: np.ndarray):
    if arr.dtype == object:
        return sum(arr.flat, Fraction(0))
    return float(np.sum(arr))


def dot(a: np.ndarray, b: np.ndarray):
    if a.dtype == object or b.dtype == object:
        return sum((x * y for x, y in zip(a.flat, b.flat)), Fraction(0))
    return float(np.dot(a.ravel(), b.ravel()))


def format_number(x) -> str | float:
    """Serialize a scalar: reduced fraction string when exact, float otherwise."""
    if is_exact_scalar(x):
        f = Fraction(x)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    return float(x)


def format_array(arr):
    if not isinstance(arr, np.ndarray):
        return format_number(arr)
    if arr.ndim == 0:
        return format_number(arr.item())
    return [format_array(a) for a in arr]


def parse_number(x, mode: str):
    if mode == RATIONAL:
        return to_fraction(x)
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)
