"""Joint spectral amplitude construction, filtering and Schmidt analysis.

The two-photon amplitude is modeled as the product of a Gaussian pump
envelope in the sum frequency and a sinc phase-matching profile from a
first-order (group-index) expansion of the wavevector mismatch.  All spectral
objects live on a shared uniform grid in angular frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateEnvelopeError,
    EmptyOverlapError,
    GridMismatchError,
    NumericError,
)
from .units import (
    C_LIGHT,
    fwhm_to_sigma,
    omega_to_wavelength,
    wavelength_to_omega,
    wavelength_width_to_omega_width,
)

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform discretization of the signal/idler angular-frequency plane.

    Attributes:
        n_s, n_i: number of grid points per axis (>= 2).
        omega_s_min, omega_s_max: signal axis bounds (rad/s).
        omega_i_min, omega_i_max: idler axis bounds (rad/s).
    """

    n_s: int
    n_i: int
    omega_s_min: float
    omega_s_max: float
    omega_i_min: float
    omega_i_max: float

    def __post_init__(self):
        if self.n_s < 2 or self.n_i < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if not (self.omega_s_max > self.omega_s_min > 0):
            raise ValueError("signal axis bounds must satisfy 0 < min < max")
        if not (self.omega_i_max > self.omega_i_min > 0):
            raise ValueError("idler axis bounds must satisfy 0 < min < max")

    @property
    def omega_s(self) -> np.ndarray:
        return np.linspace(self.omega_s_min, self.omega_s_max, self.n_s)

    @property
    def omega_i(self) -> np.ndarray:
        return np.linspace(self.omega_i_min, self.omega_i_max, self.n_i)

    @property
    def d_omega_s(self) -> float:
        return (self.omega_s_max - self.omega_s_min) / (self.n_s - 1)

    @property
    def d_omega_i(self) -> float:
        return (self.omega_i_max - self.omega_i_min) / (self.n_i - 1)

    def same_axes(self, other: "FrequencyGrid") -> bool:
        return (
            self.n_s == other.n_s
            and self.n_i == other.n_i
            and self.omega_s_min == other.omega_s_min
            and self.omega_s_max == other.omega_s_max
            and self.omega_i_min == other.omega_i_min
            and self.omega_i_max == other.omega_i_max
        )

    @classmethod
    def centered(cls, center_s, center_i, half_span, n_s=256, n_i=256):
        """Grid of +/- half_span (rad/s) around per-axis centers."""
        return cls(
            n_s=n_s,
            n_i=n_i,
            omega_s_min=center_s - half_span,
            omega_s_max=center_s + half_span,
            omega_i_min=center_i - half_span,
            omega_i_max=center_i + half_span,
        )


@dataclass(frozen=True)
class SourceConfig:
    """Down-conversion source parameters.

    Lengths in meters.  ``signal_center_offset`` is the phenomenological
    signal/idler wavelength separation: the signal center is pulled below the
    degeneracy wavelength by half the offset and the idler pushed above it,
    so the marginal peaks end up separated by approximately the offset.
    ``pump_waist`` and ``confocal_parameter`` are descriptive metadata; the
    transverse pump geometry is not modeled here.
    """

    pump_center_wavelength: float = 785e-9
    pump_fwhm_bandwidth: float = 5.35e-9
    crystal_length: float = 2e-3
    poling_period: float = 46.55e-6
    group_index_pump: float = 1.811
    group_index_signal: float = 1.760
    group_index_idler: float = 1.862
    signal_center_offset: float = 0.0
    pump_waist: float = 50e-6
    confocal_parameter: float = 10e-3

    def __post_init__(self):
        positive = {
            "pump_center_wavelength": self.pump_center_wavelength,
            "pump_fwhm_bandwidth": self.pump_fwhm_bandwidth,
            "crystal_length": self.crystal_length,
            "poling_period": self.poling_period,
            "group_index_pump": self.group_index_pump,
            "group_index_signal": self.group_index_signal,
            "group_index_idler": self.group_index_idler,
            "pump_waist": self.pump_waist,
            "confocal_parameter": self.confocal_parameter,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.pump_fwhm_bandwidth < self.pump_center_wavelength:
            raise ValueError("pump_fwhm_bandwidth must be below the center wavelength")

    @property
    def pump_center_omega(self) -> float:
        return wavelength_to_omega(self.pump_center_wavelength)

    @property
    def degeneracy_wavelength(self) -> float:
        # Exactly twice the pump wavelength: omega_deg = omega_p / 2.
        return 2.0 * self.pump_center_wavelength

    @property
    def signal_center_omega(self) -> float:
        lam = self.degeneracy_wavelength - 0.5 * self.signal_center_offset
        return wavelength_to_omega(lam)

    @property
    def idler_center_omega(self) -> float:
        # Energy conservation pins the idler center once the signal is fixed.
        return self.pump_center_omega - self.signal_center_omega

    def pump_sigma_omega(self) -> float:
        """Std of the pump *intensity* spectrum in angular frequency."""
        sigma_lambda = fwhm_to_sigma(self.pump_fwhm_bandwidth)
        return wavelength_width_to_omega_width(
            sigma_lambda, self.pump_center_wavelength
        )


def default_grid(cfg: SourceConfig, n: int = 256, span_bandwidths: float = 5.0):
    """Common-axis grid spanning +/- span_bandwidths pump bandwidths.

    Both axes are centered on the degeneracy point so signal and idler
    spectra share a common axis, which overlap and interference integrals
    require.
    """
    center = 0.5 * cfg.pump_center_omega
    half_span = span_bandwidths * wavelength_width_to_omega_width(
        cfg.pump_fwhm_bandwidth, cfg.pump_center_wavelength
    )
    return FrequencyGrid.centered(center, center, half_span, n_s=n, n_i=n)


def build_pump_envelope(cfg: SourceConfig, grid: FrequencyGrid) -> Callable:
    """Gaussian pump amplitude envelope as a function of omega_s + omega_i.

    The configured bandwidth is the FWHM of the pump *intensity* spectrum;
    the returned amplitude envelope is its square root, so the intensity
    |alpha|^2 drops to 1/2 at half the FWHM from the pump center.

    Returns:
        Vectorized callable alpha(omega_sum) with peak value 1.

    Raises:
        DegenerateEnvelopeError: the envelope is below 1e-300 on the whole grid.
    """
    omega_p0 = cfg.pump_center_omega
    sigma_i = cfg.pump_sigma_omega()
    # Amplitude sigma is sqrt(2) times the intensity sigma.
    sigma_amp = math.sqrt(2.0) * sigma_i

    def envelope(omega_sum):
        detuning = np.asarray(omega_sum, dtype=float) - omega_p0
        return np.exp(-(detuning**2) / (2.0 * sigma_amp**2)).astype(complex)

    total = grid.omega_s[:, None] + grid.omega_i[None, :]
    if not np.any(np.abs(envelope(total)) > 1e-300):
        raise DegenerateEnvelopeError(
            "grid does not overlap the pump band; envelope vanishes everywhere"
        )
    return envelope


def build_phase_matching(cfg: SourceConfig, grid: FrequencyGrid) -> Callable:
    """Sinc phase-matching profile from the group-index expansion.

    The wavevector mismatch is expanded to first order about the configured
    phase-matched point (where the poling period compensates it exactly):

        dk = [n_gp*(w_s + w_i - w_p0) - n_gs*(w_s - w_s0) - n_gi*(w_i - w_i0)]/c

    Returns:
        Vectorized callable phi(omega_s, omega_i) = sinc(dk*L/2)*exp(i*dk*L/2).
    """
    del grid  # profile is grid independent; kept for interface symmetry
    n_gp = cfg.group_index_pump
    n_gs = cfg.group_index_signal
    n_gi = cfg.group_index_idler
    w_s0 = cfg.signal_center_omega
    w_i0 = cfg.idler_center_omega
    w_p0 = cfg.pump_center_omega
    half_length = 0.5 * cfg.crystal_length

    def phasematch(omega_s, omega_i):
        omega_s = np.asarray(omega_s, dtype=float)
        omega_i = np.asarray(omega_i, dtype=float)
        dk = (
            n_gp * (omega_s + omega_i - w_p0)
            - n_gs * (omega_s - w_s0)
            - n_gi * (omega_i - w_i0)
        ) / C_LIGHT
        x = dk * half_length
        # np.sinc(u) = sin(pi u)/(pi u); we need sin(x)/x.
        return np.sinc(x / np.pi) * np.exp(1j * x)

    return phasematch


@dataclass(frozen=True)
class JointSpectralAmplitude:
    """Complex two-photon amplitude on a frequency grid, unit L2 norm."""

    grid: FrequencyGrid
    amplitude: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=complex)
        if amp.shape != (self.grid.n_s, self.grid.n_i):
            raise ValueError("amplitude shape does not match grid")
        if not np.all(np.isfinite(amp.view(float))):
            raise NumericError("joint amplitude contains non-finite entries")
        norm_sq = float(
            np.sum(np.abs(amp) ** 2) * self.grid.d_omega_s * self.grid.d_omega_i
        )
        if abs(norm_sq - 1.0) > _NORM_TOL:
            raise ValueError(f"amplitude not normalized: |Psi|^2 integral = {norm_sq}")
        object.__setattr__(self, "amplitude", amp)

    @classmethod
    def from_kernel(cls, grid: FrequencyGrid, kernel) -> "JointSpectralAmplitude":
        """Normalize an arbitrary kernel (callable or matrix) onto the grid."""
        if callable(kernel):
            values = kernel(grid.omega_s[:, None], grid.omega_i[None, :])
        else:
            values = kernel
        values = np.asarray(values, dtype=complex)
        if not np.all(np.isfinite(values.view(float))):
            raise NumericError("kernel produced non-finite values")
        norm_sq = np.sum(np.abs(values) ** 2) * grid.d_omega_s * grid.d_omega_i
        if norm_sq <= 1e-300:
            raise EmptyOverlapError("kernel has zero norm on this grid")
        return cls(grid=grid, amplitude=values / math.sqrt(norm_sq))

    def intensity(self) -> np.ndarray:
        """Joint spectral probability density |Psi|^2."""
        return np.abs(self.amplitude) ** 2


def build_jsa(cfg: SourceConfig, grid: Optional[FrequencyGrid] = None):
    """Pump envelope times phase matching, normalized on the grid."""
    if grid is None:
        grid = default_grid(cfg)
    envelope = build_pump_envelope(cfg, grid)
    phasematch = build_phase_matching(cfg, grid)
    w_s = grid.omega_s[:, None]
    w_i = grid.omega_i[None, :]
    return JointSpectralAmplitude.from_kernel(grid, envelope(w_s + w_i) * phasematch(w_s, w_i))


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Schmidt weights and paired mode functions of a joint amplitude.

    weights are non-negative, descending and sum to 1; mode rows are
    orthonormal under the grid quadrature (sum |psi|^2 * d_omega = 1).
    """

    grid: FrequencyGrid
    weights: np.ndarray
    signal_modes: np.ndarray = field(repr=False)
    idler_modes: np.ndarray = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        """Sum of sqrt(weight) * psi_n(w_s) * phi_n(w_i)."""
        root = np.sqrt(self.weights)
        return np.einsum("n,nj,nk->jk", root, self.signal_modes, self.idler_modes)


def schmidt_decompose(jsa: JointSpectralAmplitude) -> SchmidtDecomposition:
    """SVD of the amplitude with quadrature weights folded in.

    Weights are the squared singular values renormalized to sum 1.  The mode
    pairs carry a deterministic phase convention: the first component of each
    signal mode with magnitude above 1e-12 of the mode peak is made real and
    positive, with the compensating phase moved into the idler mode.
    """
    amp = jsa.amplitude
    if not np.all(np.isfinite(amp.view(float))):
        raise NumericError("cannot decompose non-finite amplitude")
    ds, di = jsa.grid.d_omega_s, jsa.grid.d_omega_i
    weighted = amp * math.sqrt(ds * di)
    u, s, vh = np.linalg.svd(weighted, full_matrices=False)

    weights = s**2
    total = weights.sum()
    if total <= 0:
        raise NumericError("all Schmidt weights vanish")
    weights = weights / total

    signal_modes = (u / math.sqrt(ds)).T.copy()
    idler_modes = vh / math.sqrt(di)

    # Deterministic sign/phase convention per mode pair.
    for n in range(signal_modes.shape[0]):
        row = signal_modes[n]
        peak = np.max(np.abs(row))
        if peak == 0:
            continue
        idx = np.argmax(np.abs(row) > 1e-12 * peak)
        phase = row[idx] / abs(row[idx])
        signal_modes[n] = row / phase
        idler_modes[n] = idler_modes[n] * phase

    return SchmidtDecomposition(
        grid=jsa.grid,
        weights=weights,
        signal_modes=signal_modes,
        idler_modes=idler_modes,
    )


def effective_mode_number(dec: SchmidtDecomposition) -> float:
    """Participation ratio K = 1 / sum(weights^2) of the Schmidt weights."""
    weights = np.asarray(dec.weights, dtype=float)
    total_sq = float(np.sum(weights**2))
    if total_sq <= 0:
        raise NumericError("effective mode number undefined for all-zero weights")
    return 1.0 / total_sq


def k_abs(jsa: JointSpectralAmplitude) -> float:
    """Effective mode number of the phase-discarded amplitude |Psi|."""
    modulus = JointSpectralAmplitude.from_kernel(jsa.grid, np.abs(jsa.amplitude))
    return effective_mode_number(schmidt_decompose(modulus))


def matrix_mode_number(matrix) -> float:
    """Participation ratio of the singular values of a plain matrix.

    Equivalent to the gridded Schmidt mode number for uniform bins (the
    quadrature weight is a constant factor and cancels in the weight
    normalization).  This is the estimator applied to square-root count
    histograms.
    """
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise NumericError("matrix contains non-finite entries")
    s = np.linalg.svd(matrix, compute_uv=False)
    total = np.sum(s**2)
    if total <= 0:
        raise NumericError("mode number undefined for an all-zero matrix")
    weights = s**2 / total
    return float(1.0 / np.sum(weights**2))


class FilterShape(Enum):
    TOP_HAT = "top_hat"
    GAUSSIAN = "gaussian"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class SpectralFilter:
    """Intensity transmission vs wavelength.

    bandwidth is the full width for top_hat and the FWHM for gaussian, both
    in meters.  Tabulated filters interpolate (wavelength_m, transmission)
    pairs linearly and transmit nothing outside the table span.
    """

    shape: FilterShape = FilterShape.TOP_HAT
    center_wavelength: float = 1570e-9
    bandwidth: float = 8.6e-9
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.shape is FilterShape.TABULATED:
            if self.table is None:
                raise ValueError("tabulated filter needs a (wavelength, T) table")
            table = np.asarray(self.table, dtype=float)
            if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
                raise ValueError("table must be (N, 2) with N >= 2")
            if np.any(table[:, 1] < 0) or np.any(table[:, 1] > 1):
                raise ValueError("transmission values must lie in [0, 1]")
            order = np.argsort(table[:, 0])
            object.__setattr__(self, "table", table[order])
        else:
            if not (self.center_wavelength > 0 and self.bandwidth > 0):
                raise ValueError("filter center and bandwidth must be positive")

    @classmethod
    def all_pass(cls) -> "SpectralFilter":
        # Top hat far wider than any optical band of interest.
        return cls(shape=FilterShape.TOP_HAT, center_wavelength=1.0, bandwidth=2.0)

    def transmission(self, omega, d_omega=0.0) -> np.ndarray:
        """Intensity transmission at angular frequencies omega.

        For the top-hat shape a grid cell (width d_omega) that straddles a
        filter edge transmits exactly 0.5, which keeps the discretization
        bit-reproducible across platforms.
        """
        omega = np.asarray(omega, dtype=float)
        if self.shape is FilterShape.TOP_HAT:
            lam_lo = self.center_wavelength - 0.5 * self.bandwidth
            lam_hi = self.center_wavelength + 0.5 * self.bandwidth
            w_lo = wavelength_to_omega(lam_hi)
            w_hi = wavelength_to_omega(lam_lo)
            half = 0.5 * d_omega
            cell_lo = omega - half
            cell_hi = omega + half
            inside = (cell_lo >= w_lo) & (cell_hi <= w_hi)
            outside = (cell_hi < w_lo) | (cell_lo > w_hi)
            result = np.where(inside, 1.0, np.where(outside, 0.0, 0.5))
            return result.astype(float)
        lam = omega_to_wavelength(omega)
        if self.shape is FilterShape.GAUSSIAN:
            sigma = fwhm_to_sigma(self.bandwidth)
            return np.exp(-((lam - self.center_wavelength) ** 2) / (2.0 * sigma**2))
        return np.interp(lam, self.table[:, 0], self.table[:, 1], left=0.0, right=0.0)


@dataclass(frozen=True)
class FilterTransmissions:
    """Per-Schmidt-mode intensity transmissions, pre-filter mode basis."""

    signal: np.ndarray
    idler: np.ndarray


def apply_filter(
    jsa: JointSpectralAmplitude,
    filter_s: SpectralFilter,
    filter_i: SpectralFilter,
):
    """Filter both axes and report per-mode transmissions.

    The amplitude is multiplied by sqrt(T) on each axis and renormalized.
    Mode transmissions T_n = sum |psi_n|^2 T d_omega are evaluated on the
    decomposition of the *unfiltered* input, separately per axis.

    Returns:
        (filtered JointSpectralAmplitude, FilterTransmissions)

    Raises:
        EmptyOverlapError: the filters annihilate the state.
    """
    grid = jsa.grid
    t_s = filter_s.transmission(grid.omega_s, grid.d_omega_s)
    t_i = filter_i.transmission(grid.omega_i, grid.d_omega_i)

    dec = schmidt_decompose(jsa)
    trans_s = np.abs(dec.signal_modes) ** 2 @ t_s * grid.d_omega_s
    trans_i = np.abs(dec.idler_modes) ** 2 @ t_i * grid.d_omega_i

    filtered = jsa.amplitude * np.sqrt(t_s)[:, None] * np.sqrt(t_i)[None, :]
    norm = math.sqrt(
        float(np.sum(np.abs(filtered) ** 2) * grid.d_omega_s * grid.d_omega_i)
    )
    if norm < 1e-12:
        raise EmptyOverlapError("filters annihilate the state")
    return (
        JointSpectralAmplitude(grid=grid, amplitude=filtered / norm),
        FilterTransmissions(signal=trans_s, idler=trans_i),
    )


@dataclass(frozen=True)
class Spectrum:
    """A real 1D spectrum on an angular-frequency axis."""

    omega: np.ndarray
    values: np.ndarray

    @property
    def d_omega(self) -> float:
        return float(self.omega[1] - self.omega[0])

    @property
    def wavelength_nm(self) -> np.ndarray:
        return omega_to_wavelength(self.omega) * 1e9


def marginal_spectra(jsp: np.ndarray, grid: FrequencyGrid):
    """Row/column sums of a joint spectral probability matrix.

    Each marginal is normalized so sum(values) * d_omega = 1.

    Raises:
        NumericError: on negative or all-zero input.
    """
    jsp = np.asarray(jsp, dtype=float)
    if np.any(jsp < 0):
        raise NumericError("joint spectral probability must be non-negative")
    signal = jsp.sum(axis=1) * grid.d_omega_i
    idler = jsp.sum(axis=0) * grid.d_omega_s
    total_s = signal.sum() * grid.d_omega_s
    total_i = idler.sum() * grid.d_omega_i
    if total_s <= 0 or total_i <= 0:
        raise NumericError("marginals of an all-zero distribution are undefined")
    return (
        Spectrum(omega=grid.omega_s, values=signal / total_s),
        Spectrum(omega=grid.omega_i, values=idler / total_i),
    )


def to_amplitude(spectrum: Spectrum) -> Spectrum:
    """Square root of an intensity spectrum, normalized to unit L2 norm."""
    amp = np.sqrt(np.clip(spectrum.values, 0.0, None))
    norm = math.sqrt(float(np.sum(amp**2) * spectrum.d_omega))
    if norm <= 0:
        raise NumericError("cannot normalize an all-zero spectrum")
    return Spectrum(omega=spectrum.omega, values=amp / norm)


def overlap_integral(spec_a: Spectrum, spec_b: Spectrum) -> float:
    """Squared inner product of two amplitude-level spectra.

    Both inputs must be unit-L2-normalized amplitudes on identical axes.
    """
    if spec_a.omega.shape != spec_b.omega.shape or not np.array_equal(
        spec_a.omega, spec_b.omega
    ):
        raise GridMismatchError("spectra live on different axes")
    d_omega = spec_a.d_omega
    for name, spec in (("first", spec_a), ("second", spec_b)):
        norm = float(np.sum(spec.values**2) * d_omega)
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"{name} spectrum is not L2 normalized (norm^2={norm})")
    inner = float(np.sum(spec_a.values * spec_b.values) * d_omega)
    return inner**2


def hom_curve(jsa: JointSpectralAmplitude, delays) -> np.ndarray:
    """Single-pair beam-splitter coincidence probability vs relative delay.

    P_c(dt) = 1/2 * [1 - Re I(dt)] with I the exchange integral of the joint
    amplitude, I(dt) = sum Psi(w1,w2) conj(Psi(w2,w1)) exp(-i (w1-w2) dt).
    Requires identical signal/idler axes.
    """
    delays = np.atleast_1d(np.asarray(delays, dtype=float))
    if delays.size == 0:
        raise ValueError("delay list must not be empty")
    grid = jsa.grid
    if grid.n_s != grid.n_i or not np.array_equal(grid.omega_s, grid.omega_i):
        raise GridMismatchError("hom_curve needs identical signal and idler axes")

    omega = grid.omega_s
    cross = jsa.amplitude * np.conj(jsa.amplitude.T)
    weight = grid.d_omega_s * grid.d_omega_i
    result = np.empty(delays.size, dtype=float)
    for idx, delay in enumerate(delays):
        phase = np.exp(-1j * omega * delay)
        exchange = phase @ cross @ np.conj(phase) * weight
        result[idx] = 0.5 * (1.0 - exchange.real)
    return result


def hom_visibility(pc_values, baseline: float = 0.5) -> float:
    """1 - min(curve)/baseline; baseline defaults to the theory plateau 1/2."""
    pc_values = np.asarray(pc_values, dtype=float)
    if pc_values.size == 0:
        raise ValueError("empty coincidence curve")
    return 1.0 - float(pc_values.min()) / baseline


def spectrum_fwhm(spectrum: Spectrum) -> float:
    """Full width at half maximum by linear interpolation of the crossings."""
    values = np.asarray(spectrum.values, dtype=float)
    peak_idx = int(np.argmax(values))
    half = values[peak_idx] / 2.0
    axis = np.asarray(spectrum.omega, dtype=float)

    def _cross(lo_range):
        indices = lo_range
        for j in indices:
            if values[j] < half <= values[j + 1] or values[j] >= half > values[j + 1]:
                frac = (half - values[j]) / (values[j + 1] - values[j])
                return axis[j] + frac * (axis[j + 1] - axis[j])
        return None

    left = _cross(range(peak_idx - 1, -1, -1))
    right = _cross(range(peak_idx, len(values) - 1))
    if left is None or right is None:
        raise NumericError("spectrum does not cross half maximum on both sides")
    return abs(right - left)
