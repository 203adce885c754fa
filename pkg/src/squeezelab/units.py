"""Unit conversions and quantity parsing.

Internal conventions: spectral kernels work in angular frequency (rad/s),
the fiber spectrometer works in (nm, ps), photon counting in pulses and
seconds.  Config files carry explicit unit suffixes and are converted to SI
on load.
"""

from __future__ import annotations

import math

from .errors import ConfigError

# Speed of light in vacuum, m/s.
C_LIGHT = 299_792_458.0

TWO_PI_C = 2.0 * math.pi * C_LIGHT

# FWHM of a Gaussian = 2*sqrt(2*ln 2) * sigma.
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def wavelength_to_omega(wavelength_m):
    """Vacuum wavelength (m) to angular frequency (rad/s)."""
    return TWO_PI_C / wavelength_m


def omega_to_wavelength(omega):
    """Angular frequency (rad/s) to vacuum wavelength (m)."""
    return TWO_PI_C / omega


def fwhm_to_sigma(fwhm):
    return fwhm / FWHM_PER_SIGMA


def sigma_to_fwhm(sigma):
    return sigma * FWHM_PER_SIGMA


def wavelength_width_to_omega_width(width_m, center_m):
    """Convert a small wavelength width to an angular-frequency width.

    First-order conversion |dw| = 2*pi*c*|dl|/l^2 about the given center.
    """
    return TWO_PI_C * width_m / center_m**2


def omega_width_to_wavelength_width(width, center_m):
    return width * center_m**2 / TWO_PI_C


# Multipliers to SI for the unit suffixes accepted in config files.
_UNIT_SCALE = {
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "nm": 1e-9,
    "pm": 1e-12,
    "s": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    "ns": 1e-9,
    "ps": 1e-12,
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
    "thz": 1e12,
}

_LENGTH_UNITS = {"m", "mm", "um", "nm", "pm"}
_TIME_UNITS = {"s", "ms", "us", "ns", "ps"}
_FREQ_UNITS = {"hz", "khz", "mhz", "ghz", "thz"}


def parse_quantity(text, key="value"):
    """Parse '5.35 nm' style config values into (si_value, kind).

    kind is one of 'length', 'time', 'frequency', 'dimensionless'.  Raises
    ConfigError with the offending key name on malformed input.
    """
    parts = str(text).strip().split()
    if not parts or len(parts) > 2:
        raise ConfigError(f"{key}: cannot parse quantity {text!r}")
    try:
        value = float(parts[0])
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse number in {text!r}") from exc
    if len(parts) == 1:
        return value, "dimensionless"
    unit = parts[1].lower()
    if unit not in _UNIT_SCALE:
        raise ConfigError(f"{key}: unknown unit {parts[1]!r} in {text!r}")
    if unit in _LENGTH_UNITS:
        kind = "length"
    elif unit in _TIME_UNITS:
        kind = "time"
    else:
        kind = "frequency"
    return value * _UNIT_SCALE[unit], kind


def parse_length(text, key="value"):
    value, kind = parse_quantity(text, key)
    if kind != "length":
        raise ConfigError(f"{key}: expected a length, got {text!r}")
    return value


def parse_time(text, key="value"):
    value, kind = parse_quantity(text, key)
    if kind != "time":
        raise ConfigError(f"{key}: expected a time, got {text!r}")
    return value
