"""Boundary unit handling: parse quantity strings like "300um", "100ppm",
"854nm" into SI floats.

Everything internal is SI (m, rad, s, rad/s, m^3, dimensionless fractions).
Frequency suffixes (Hz, kHz, MHz, GHz) denote linear frequencies and are
converted to angular rates by 2 pi, matching the convention of quoting
kappa/2pi in MHz.
"""

from __future__ import annotations

import math
import re

from .errors import ValidationError

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")

_LENGTH = {"pm": 1e-12, "nm": 1e-9, "um": 1e-6, "µm": 1e-6, "mm": 1e-3, "cm": 1e-2, "m": 1.0}
_ANGLE = {"rad": 1.0, "mrad": 1e-3, "urad": 1e-6, "µrad": 1e-6, "deg": math.pi / 180.0}
_FRACTION = {"": 1.0, "ppm": 1e-6, "ppb": 1e-9, "%": 1e-2}
_TIME = {"ps": 1e-12, "ns": 1e-9, "us": 1e-6, "µs": 1e-6, "ms": 1e-3, "s": 1.0}
_VOLUME = {
    "fL": 1e-18,
    "pL": 1e-15,
    "nL": 1e-12,
    "uL": 1e-9,
    "µL": 1e-9,
    "mL": 1e-6,
    "mm3": 1e-9,
    "mm^3": 1e-9,
    "m3": 1.0,
    "m^3": 1.0,
}
_TWO_PI = 2.0 * math.pi
_RATE = {
    "rad/s": 1.0,
    "/s": 1.0,
    "1/s": 1.0,
    "Hz": _TWO_PI,
    "kHz": _TWO_PI * 1e3,
    "MHz": _TWO_PI * 1e6,
    "GHz": _TWO_PI * 1e9,
}
_DIMENSIONLESS = {"": 1.0, "ppm": 1e-6, "%": 1e-2}

DIMENSIONS: dict[str, dict[str, float]] = {
    "length": _LENGTH,
    "angle": _ANGLE,
    "fraction": _FRACTION,
    "time": _TIME,
    "volume": _VOLUME,
    "rate": _RATE,
    "dimensionless": _DIMENSIONLESS,
}


def parse_quantity(value, dimension: str, field: str = "value") -> float:
    """Convert a config value (number, or string with unit suffix) to SI.

    Raises ValidationError naming ``field`` for malformed numbers or unknown
    suffixes. Bare numbers are taken as already-SI.
    """
    if dimension not in DIMENSIONS:
        raise ValidationError(f"field {field!r}: unknown dimension {dimension!r}")
    if isinstance(value, bool):
        raise ValidationError(f"field {field!r}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValidationError(
            f"field {field!r}: expected a number or quantity string, got {type(value).__name__}"
        )
    match = _NUMBER.match(value)
    if not match:
        raise ValidationError(f"field {field!r}: malformed quantity {value!r}")
    number, suffix = match.groups()
    table = DIMENSIONS[dimension]
    if suffix not in table:
        known = ", ".join(repr(s) for s in table if s)
        raise ValidationError(
            f"field {field!r}: unknown {dimension} unit suffix {suffix!r} in {value!r}"
            f" (accepted: {known} or a bare SI number)"
        )
    return float(number) * table[suffix]
