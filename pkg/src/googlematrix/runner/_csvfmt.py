"""Locale-independent number formatting shared by the CSV writers."""

import math


def fmt(x) -> str:
    """``repr`` of a float (round-trips exactly); blank for NaN, ``inf`` for infinities."""
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def parse(s: str) -> float:
    return math.nan if s == "" else float(s)
