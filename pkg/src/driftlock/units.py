"""Unit-suffixed quantity parsing.

Configuration files carry every physical value as a string with an explicit
unit suffix ("2 MHz", "40 ns", "-6 mV").  Internally everything is kept in
base units: seconds, hertz, Hz^2/Hz for spectral densities, millivolts for
gate voltages, mT/nm for field gradients and MHz/mT for gyromagnetic ratios.
A bare number is only accepted for dimensionless fields; a dimensional field
without a unit suffix is a configuration error, as is a suffix from the
wrong dimension.
"""

from __future__ import annotations


class UnitError(ValueError):
    """Raised when a quantity string cannot be resolved to the expected dimension."""


# Scale factors to the internal base unit of each dimension.
_SCALES: dict[str, dict[str, float]] = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "psd": {"Hz^2/Hz": 1.0, "kHz^2/Hz": 1e6, "MHz^2/Hz": 1e12},
    "voltage": {"V": 1e3, "mV": 1.0, "uV": 1e-3, "µV": 1e-3},
    "gradient": {"mT/nm": 1.0, "T/um": 1.0, "T/µm": 1.0},
    "gyromagnetic": {"MHz/mT": 1.0, "GHz/T": 1.0, "kHz/mT": 1e-3, "Hz/mT": 1e-6},
    "displacement": {"nm": 1.0, "pm": 1e-3, "um": 1e3, "µm": 1e3},
}

BASE_UNIT = {
    "time": "s",
    "frequency": "Hz",
    "psd": "Hz^2/Hz",
    "voltage": "mV",
    "gradient": "mT/nm",
    "gyromagnetic": "MHz/mT",
    "displacement": "nm",
}


def parse_quantity(value, dimension: str, field: str = "value") -> float:
    """Resolve a unit-suffixed string to the internal base unit of *dimension*.

    Parameters
    ----------
    value : str
        Quantity string, "<number> <unit>".  The unit must belong to
        *dimension*.
    dimension : str
        One of the keys of ``BASE_UNIT``.
    field : str
        Field name used in error messages.

    Returns
    -------
    float
        The value expressed in the base unit of the dimension.
    """
    try:
        scales = _SCALES[dimension]
    except KeyError:
        raise UnitError(f"{field}: unknown dimension {dimension!r}")
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise UnitError(f"{field}: expected a unit-suffixed string, got {type(value).__name__}")
    if isinstance(value, (int, float)):
        raise UnitError(
            f"{field}: missing unit suffix; expected a {dimension} quantity such as "
            f"\"1 {BASE_UNIT[dimension]}\""
        )
    parts = value.split()
    if len(parts) != 2:
        raise UnitError(f"{field}: malformed quantity {value!r}; expected \"<number> <unit>\"")
    magnitude, unit = parts
    try:
        number = float(magnitude)
    except ValueError:
        raise UnitError(f"{field}: non-numeric magnitude in {value!r}")
    if unit not in scales:
        for dim, table in _SCALES.items():
            if unit in table and dim != dimension:
                raise UnitError(
                    f"{field}: unit {unit!r} is a {dim} unit but a {dimension} quantity "
                    f"is required"
                )
        raise UnitError(f"{field}: unknown unit {unit!r} for dimension {dimension}")
    return number * scales[unit]


def parse_number(value, field: str = "value") -> float:
    """Accept a bare number for a dimensionless field."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UnitError(f"{field}: expected a bare number, got {value!r}")
    return float(value)
