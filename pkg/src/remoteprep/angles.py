"""Parsing and formatting of pi-rational angle expressions like ``3pi/4``."""

from __future__ import annotations

import math
import re
from fractions import Fraction

_PI_EXPR = re.compile(
    r"""^\s*(?P<sign>[+-])?\s*
        (?P<coef>\d+(\.\d*)?|\.\d+)?\s*\*?\s*
        (pi|π)\s*
        (/\s*(?P<den>\d+(\.\d*)?))?\s*$""",
    re.VERBOSE | re.IGNORECASE,
)


def parse_angle(text: str) -> float:
    """Accept ``pi``, ``-pi/2``, ``3pi/4``, ``2*pi/3`` or a plain decimal."""
    m = _PI_EXPR.match(text)
    if m is None:
        try:
            return float(text)
        except ValueError:
            raise ValueError(f"cannot parse angle {text!r}") from None
    coef = float(m.group("coef")) if m.group("coef") else 1.0
    den = float(m.group("den")) if m.group("den") else 1.0
    if den == 0:
        raise ValueError(f"zero denominator in angle {text!r}")
    value = coef * math.pi / den
    return -value if m.group("sign") == "-" else value


def format_angle(value: float, max_den: int = 48, atol: float = 1e-12) -> str:
    """Render an angle as a pi fraction when it is one, else as a decimal."""
    ratio = value / math.pi
    frac = Fraction(ratio).limit_denominator(max_den)
    if abs(float(frac) - ratio) > atol:
        return repr(float(value))
    if frac == 0:
        return "0"
    num, den = frac.numerator, frac.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    head = "pi" if num == 1 else f"{num}pi"
    return f"{sign}{head}" if den == 1 else f"{sign}{head}/{den}"
