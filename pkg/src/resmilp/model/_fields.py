"""Normalisation helpers shared by the model dataclasses."""

from __future__ import annotations

import math
from numbers import Real


def as_float(value):
    if value is None:
        return None
    if isinstance(value, bool):
        raise TypeError(f"expected a number, got {value!r}")
    return float(value)


def as_floats(values) -> tuple[float, ...]:
    if isinstance(values, Real):
        return (float(values),)
    return tuple(float(v) for v in values)


def as_series(values):
    """Scalars stay scalars (broadcast over the horizon), sequences become tuples."""
    if values is None:
        return None
    if isinstance(values, Real) and not isinstance(values, bool):
        return float(values)
    return tuple(float(v) for v in values)


def expand(series, n: int) -> tuple[float, ...]:
    if series is None:
        return (math.inf,) * n
    if isinstance(series, float):
        return (series,) * n
    return tuple(series)


def series_problems(name: str, series, n: int, nonnegative: bool = True) -> list[tuple[str, str]]:
    if series is None or isinstance(series, float):
        values = () if series is None else (series,)
    else:
        values = series
        if n is not None and len(series) != n:
            return [(name, f"series has {len(series)} values, time index has {n} intervals")]
    out = []
    if any(not math.isfinite(v) for v in values):
        out.append((name, "series contains non-finite values"))
    elif nonnegative and any(v < 0 for v in values):
        out.append((name, "series contains negative values"))
    return out


def strictly_increasing(values) -> bool:
    return all(a < b for a, b in zip(values, values[1:]))
