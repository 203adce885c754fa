"""Dispersive-fiber time-of-flight spectrometer model and calibration.

Group delay vs wavelength is a cubic polynomial about a fixed reference
wavelength.  The delay curve has a single minimum at the zero-dispersion
wavelength; spectra fold about that point, so inversion needs an explicit
branch choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import (
    FitError,
    NoFoldError,
    UnphysicalDelayError,
    WavelengthRangeError,
)
from .units import FWHM_PER_SIGMA

# Expansion point for all group-delay polynomials (nm).
REFERENCE_WAVELENGTH_NM = 1319.0

_DERIVATIVE_TOL_PS_PER_NM = 1e-6


class Branch(Enum):
    ABOVE_FOLD = "above_fold"
    BELOW_FOLD = "below_fold"


@dataclass(frozen=True)
class DispersionModel:
    """Cubic group delay (ps) vs wavelength (nm) about the reference point.

    coeffs: (c0 ps, c1 ps/nm, c2 ps/nm^2, c3 ps/nm^3) in powers of
    (lambda - reference).  The zero-dispersion wavelength is the interior
    minimum of the curve; delay values are relative (c0 is an arbitrary
    offset, conventionally 0 for synthetic models).
    """

    coeffs: tuple
    zero_dispersion_nm: float
    range_nm: tuple
    reference_nm: float = REFERENCE_WAVELENGTH_NM
    residual_rms_ps: float = 0.0

    def __post_init__(self):
        if len(self.coeffs) != 4:
            raise ValueError("need exactly four polynomial coefficients")
        lo, hi = self.range_nm
        if not lo < self.zero_dispersion_nm < hi:
            raise ValueError("zero-dispersion wavelength must lie inside the range")
        slope_at_fold = self.local_dispersion(self.zero_dispersion_nm)
        if abs(slope_at_fold) > max(
            _DERIVATIVE_TOL_PS_PER_NM, 1e-9 * abs(self.local_dispersion(hi))
        ):
            raise ValueError("group-delay derivative does not vanish at lambda_0")
        # Convexity on the range: the second derivative of a cubic is linear,
        # so checking the endpoints suffices.
        for lam in self.range_nm:
            u = lam - self.reference_nm
            if 2 * self.coeffs[2] + 6 * self.coeffs[3] * u < 0:
                raise ValueError("group delay is not convex on the valid range")

    def delay_ps(self, wavelength_nm):
        u = np.asarray(wavelength_nm, dtype=float) - self.reference_nm
        c0, c1, c2, c3 = self.coeffs
        return c0 + u * (c1 + u * (c2 + u * c3))

    def local_dispersion(self, wavelength_nm):
        """d(delay)/d(wavelength) in ps/nm."""
        u = np.asarray(wavelength_nm, dtype=float) - self.reference_nm
        _, c1, c2, c3 = self.coeffs
        return c1 + u * (2 * c2 + u * 3 * c3)

    @property
    def min_delay_ps(self) -> float:
        return float(self.delay_ps(self.zero_dispersion_nm))

    def in_range(self, wavelength_nm) -> bool:
        lo, hi = self.range_nm
        return bool(np.all((wavelength_nm >= lo) & (wavelength_nm <= hi)))


@dataclass(frozen=True)
class DetectorModel:
    """Click detector characterized by jitter, dark rate, efficiency, deadtime."""

    jitter_fwhm_ps: float = 65.0
    dark_rate_hz: float = 1000.0
    efficiency: float = 1.0
    deadtime_ns: float = 0.0

    def __post_init__(self):
        if self.jitter_fwhm_ps < 0 or self.dark_rate_hz < 0 or self.deadtime_ns < 0:
            raise ValueError("detector parameters must be non-negative")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")

    @property
    def jitter_sigma_ps(self) -> float:
        return self.jitter_fwhm_ps / FWHM_PER_SIGMA


def fit_dispersion(points, reference_nm: float = REFERENCE_WAVELENGTH_NM):
    """Least-squares cubic fit of (wavelength nm, group delay ps) samples.

    Args:
        points: array-like of shape (N, 2); N >= 5 spanning both sides of
            the group-delay minimum.

    Returns:
        DispersionModel with the derivative root inside the data span as
        zero-dispersion wavelength and the fit residual RMS recorded.

    Raises:
        FitError: fewer than 5 points or rank-deficient design matrix.
        NoFoldError: the fitted derivative has no root inside the span.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 5:
        raise FitError("need at least 5 (wavelength, delay) points")
    lam = points[:, 0]
    delay = points[:, 1]
    # Fit in a scaled variable for conditioning, then rescale coefficients.
    scale = 100.0
    u = (lam - reference_nm) / scale
    design = np.vander(u, 4, increasing=True)
    coeffs_scaled, residuals, rank, _ = np.linalg.lstsq(design, delay, rcond=None)
    if rank < 4:
        raise FitError("rank-deficient design matrix; wavelengths too degenerate")
    coeffs = tuple(coeffs_scaled[k] / scale**k for k in range(4))

    # Root of the fitted derivative inside the span.
    _, c1, c2, c3 = coeffs
    roots = np.roots([3 * c3, 2 * c2, c1]) if c3 != 0 else np.roots([2 * c2, c1])
    roots = roots[np.isreal(roots)].real + reference_nm
    lo, hi = float(lam.min()), float(lam.max())
    inside = [
        r
        for r in roots
        if lo < r < hi and 2 * c2 + 6 * c3 * (r - reference_nm) > 0
    ]
    if not inside:
        raise NoFoldError("fitted group delay has no minimum inside the data span")
    lam0 = float(min(inside, key=lambda r: abs(r - 0.5 * (lo + hi))))

    fitted = design @ coeffs_scaled
    rms = float(np.sqrt(np.mean((fitted - delay) ** 2)))
    return DispersionModel(
        coeffs=coeffs,
        zero_dispersion_nm=lam0,
        range_nm=(lo, hi),
        reference_nm=reference_nm,
        residual_rms_ps=rms,
    )


def wavelength_to_delay(model: DispersionModel, wavelength_nm: float) -> float:
    """Group delay (ps) at a wavelength inside the model's valid range."""
    if not model.in_range(wavelength_nm):
        raise WavelengthRangeError(
            f"{wavelength_nm} nm outside valid range {model.range_nm}"
        )
    return float(model.delay_ps(wavelength_nm))


def delay_to_wavelength(
    model: DispersionModel, delay_ps: float, branch: Branch = Branch.ABOVE_FOLD
) -> float:
    """Invert the group delay on one monotone branch of the fold.

    Raises:
        UnphysicalDelayError: delay below the fold minimum.
        WavelengthRangeError: no solution on the requested branch in range.
    """
    min_delay = model.min_delay_ps
    if delay_ps < min_delay - 1e-9:
        raise UnphysicalDelayError(
            f"delay {delay_ps} ps below fold minimum {min_delay} ps"
        )
    delay_ps = max(delay_ps, min_delay)
    lam0 = model.zero_dispersion_nm
    lo, hi = model.range_nm
    end = hi if branch is Branch.ABOVE_FOLD else lo
    if delay_ps > model.delay_ps(end):
        raise WavelengthRangeError(
            f"delay {delay_ps} ps has no solution on branch {branch.value}"
        )
    if delay_ps == min_delay:
        return lam0

    def objective(lam):
        return model.delay_ps(lam) - delay_ps

    a, b = (lam0, end) if branch is Branch.ABOVE_FOLD else (end, lam0)
    return float(brentq(objective, a, b, xtol=1e-7))


def delays_to_wavelengths(model, delays_ps, branch: Branch = Branch.ABOVE_FOLD):
    """Vectorized branch inversion (dense table plus one Newton polish).

    Matches delay_to_wavelength to well below 1e-6 nm; delays outside the
    branch give NaN rather than raising, so callers can count them.
    """
    delays_ps = np.asarray(delays_ps, dtype=float)
    lam0 = model.zero_dispersion_nm
    lo, hi = model.range_nm
    end = hi if branch is Branch.ABOVE_FOLD else lo
    lam_table = np.linspace(lam0, end, 4096)
    delay_table = model.delay_ps(lam_table)
    if branch is Branch.BELOW_FOLD:
        lam_table = lam_table[::-1]
        delay_table = delay_table[::-1]
    valid = (delays_ps >= model.min_delay_ps - 1e-9) & (
        delays_ps <= model.delay_ps(end)
    )
    lam = np.interp(np.clip(delays_ps, model.min_delay_ps, None), delay_table, lam_table)
    # One Newton step sharpens the table interpolation.
    slope = model.local_dispersion(lam)
    safe = np.abs(slope) > 1e-12
    lam = np.where(safe, lam - (model.delay_ps(lam) - delays_ps) / np.where(safe, slope, 1.0), lam)
    lam = np.clip(lam, min(lam0, end), max(lam0, end))
    return np.where(valid, lam, np.nan)


def resolution(model: DispersionModel, detector: DetectorModel, wavelength_nm: float):
    """1-sigma wavelength uncertainty (nm) from timing jitter.

    Returns inf at the zero-dispersion wavelength where the local dispersion
    vanishes (divergent-resolution flag).
    """
    if not model.in_range(wavelength_nm):
        raise WavelengthRangeError(
            f"{wavelength_nm} nm outside valid range {model.range_nm}"
        )
    slope = abs(float(model.local_dispersion(wavelength_nm)))
    if slope == 0.0 or not np.isfinite(1.0 / slope):
        return math.inf
    return detector.jitter_sigma_ps / slope


def synthetic_dispersion_model(
    slope_at_1570_ps_per_nm: float = 24.4,
    zero_dispersion_nm: float = REFERENCE_WAVELENGTH_NM,
    range_nm: tuple = (1090.0, 1790.0),
) -> DispersionModel:
    """Default cubic with a realistic telecom-fiber dispersion profile.

    The curvature at 1570 nm scales with the requested slope the way the
    classic single-mode-fiber dispersion-slope model predicts, which keeps
    the shape physical for both the fast and slow paths.
    """
    u = 1570.0 - zero_dispersion_nm
    slope = slope_at_1570_ps_per_nm
    curvature = slope * 0.0746 / 24.4  # ps/nm^2 at 1570 nm
    c3 = (curvature * u - slope) / (3 * u**2)
    c2 = (curvature - 6 * c3 * u) / 2
    # Shift the expansion so the minimum sits exactly at lambda_0 with
    # delay 0 there (delays are relative to the fold arrival).
    coeffs = (0.0, 0.0, c2, c3)
    return DispersionModel(
        coeffs=coeffs,
        zero_dispersion_nm=zero_dispersion_nm,
        range_nm=range_nm,
        reference_nm=zero_dispersion_nm,
    )


def default_signal_model() -> DispersionModel:
    return synthetic_dispersion_model(24.4)


def default_idler_model() -> DispersionModel:
    return synthetic_dispersion_model(23.6)


def save_model(model: DispersionModel, path):
    """Serialize a model as flat key=value text."""
    lines = [
        f"reference_wavelength_nm = {model.reference_nm!r}",
        f"c0_ps = {model.coeffs[0]!r}",
        f"c1_ps_per_nm = {model.coeffs[1]!r}",
        f"c2_ps_per_nm2 = {model.coeffs[2]!r}",
        f"c3_ps_per_nm3 = {model.coeffs[3]!r}",
        f"zero_dispersion_nm = {model.zero_dispersion_nm!r}",
        f"range_min_nm = {model.range_nm[0]!r}",
        f"range_max_nm = {model.range_nm[1]!r}",
        f"residual_rms_ps = {model.residual_rms_ps!r}",
    ]
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def load_model(path) -> DispersionModel:
    values = {}
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, raw = line.partition("=")
            values[key.strip()] = float(raw.strip())
    return DispersionModel(
        coeffs=(
            values["c0_ps"],
            values["c1_ps_per_nm"],
            values["c2_ps_per_nm2"],
            values["c3_ps_per_nm3"],
        ),
        zero_dispersion_nm=values["zero_dispersion_nm"],
        range_nm=(values["range_min_nm"], values["range_max_nm"]),
        reference_nm=values["reference_wavelength_nm"],
        residual_rms_ps=values.get("residual_rms_ps", 0.0),
    )


def load_calibration_csv(path) -> np.ndarray:
    """Read (wavelength_nm, delay_ps) calibration points, '#' comments allowed."""
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
