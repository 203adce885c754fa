"""Config-file parsing for sources, filters, detectors and run setups.

Flat INI sections with explicit unit suffixes (nm, mm, um, ps, ns, THz ...),
converted to SI on load.  Every parse error names the offending
section.key so the CLI can point at it.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .jsa import FilterShape, SourceConfig, SpectralFilter
from .montecarlo import Geometry, RunConfig
from .photon_stats import SqueezerSpec
from .spectrometer import (
    DetectorModel,
    DispersionModel,
    load_model,
    synthetic_dispersion_model,
)
from .units import parse_quantity


@dataclass(frozen=True)
class GridSpec:
    n: int = 256
    span_bandwidths: float = 5.0


@dataclass(frozen=True)
class HomScanSpec:
    delay_min_ps: float = -3.0
    delay_max_ps: float = 3.0
    n_delays: int = 41

    def delays_ps(self) -> np.ndarray:
        return np.linspace(self.delay_min_ps, self.delay_max_ps, self.n_delays)


@dataclass(frozen=True)
class AnalysisSpec:
    bin_min_nm: float = 1564.0
    bin_max_nm: float = 1576.0
    n_bins: int = 12
    n_side_peaks: int = 3

    def bin_edges(self) -> np.ndarray:
        return np.linspace(self.bin_min_nm, self.bin_max_nm, self.n_bins + 1)


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment description: source model plus run parameters."""

    source: SourceConfig
    grid: GridSpec = field(default_factory=GridSpec)
    filter_signal: Optional[SpectralFilter] = None
    filter_idler: Optional[SpectralFilter] = None
    detector_signal: DetectorModel = field(default_factory=DetectorModel)
    detector_idler: DetectorModel = field(default_factory=DetectorModel)
    dispersion_signal: DispersionModel = field(
        default_factory=lambda: synthetic_dispersion_model(24.4)
    )
    dispersion_idler: DispersionModel = field(
        default_factory=lambda: synthetic_dispersion_model(23.6)
    )
    geometry: Geometry = Geometry.TOF_MULTIPLEXED
    repetition_rate_hz: float = 456e3
    n_pulses: int = 1_000_000
    mean_photons_per_pulse: float = 0.11
    rng_seed: Optional[int] = None
    background_rate_per_pulse: float = 0.0
    path_latency_ps: float = 2000.0
    demux_delay_ps: float = 180_000.0
    tes_efficiencies: tuple = (0.95, 0.73)
    hom: HomScanSpec = field(default_factory=HomScanSpec)
    hom_enabled: bool = False
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)
    raw_text: str = ""

    def content_hash(self) -> str:
        return hashlib.sha256(self.raw_text.encode()).hexdigest()


def _get(parser, section, key, default=None, kind=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"{section}.{key}: missing required key")
        return default
    raw = parser.get(section, key)
    value, parsed_kind = parse_quantity(raw, key=f"{section}.{key}")
    if kind and parsed_kind not in (kind, "dimensionless"):
        raise ConfigError(f"{section}.{key}: expected a {kind}, got {raw!r}")
    return value


def _get_int(parser, section, key, default=None, required=False):
    value = _get(parser, section, key, default=default, required=required)
    if value is None:
        return None
    if float(value) != int(float(value)):
        raise ConfigError(f"{section}.{key}: expected an integer")
    return int(float(value))


def _load_source(parser) -> SourceConfig:
    if not parser.has_section("source"):
        return SourceConfig()
    section = "source"
    defaults = SourceConfig()
    try:
        return SourceConfig(
            pump_center_wavelength=_get(
                parser, section, "pump_center_wavelength", defaults.pump_center_wavelength
            ),
            pump_fwhm_bandwidth=_get(
                parser, section, "pump_fwhm_bandwidth", defaults.pump_fwhm_bandwidth
            ),
            crystal_length=_get(parser, section, "crystal_length", defaults.crystal_length),
            poling_period=_get(parser, section, "poling_period", defaults.poling_period),
            group_index_pump=_get(
                parser, section, "group_index_pump", defaults.group_index_pump
            ),
            group_index_signal=_get(
                parser, section, "group_index_signal", defaults.group_index_signal
            ),
            group_index_idler=_get(
                parser, section, "group_index_idler", defaults.group_index_idler
            ),
            signal_center_offset=_get(
                parser, section, "signal_center_offset", defaults.signal_center_offset
            ),
            pump_waist=_get(parser, section, "pump_waist", defaults.pump_waist),
            confocal_parameter=_get(
                parser, section, "confocal_parameter", defaults.confocal_parameter
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"source: {exc}") from exc


def _load_filter(parser, section) -> Optional[SpectralFilter]:
    if not parser.has_section(section):
        return None
    shape_name = parser.get(section, "shape", fallback="top_hat").strip().lower()
    try:
        shape = FilterShape(shape_name)
    except ValueError as exc:
        raise ConfigError(f"{section}.shape: unknown shape {shape_name!r}") from exc
    if shape is FilterShape.TABULATED:
        path = parser.get(section, "table_file", fallback=None)
        if path is None:
            raise ConfigError(f"{section}.table_file: required for tabulated filters")
        table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        return SpectralFilter(shape=shape, table=table)
    center = _get(parser, section, "center_wavelength", 1570e-9, kind="length")
    if not parser.has_option(section, "bandwidth"):
        raise ConfigError(f"{section}.bandwidth: missing required key")
    raw = parser.get(section, "bandwidth")
    value, kind = parse_quantity(raw, key=f"{section}.bandwidth")
    if kind == "frequency":
        # Convert a frequency full width to a wavelength width at the center.
        value = value * center**2 / 299792458.0
    elif kind not in ("length", "dimensionless"):
        raise ConfigError(f"{section}.bandwidth: expected a length or frequency")
    try:
        return SpectralFilter(shape=shape, center_wavelength=center, bandwidth=value)
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def _load_detector(parser, section) -> DetectorModel:
    if not parser.has_section(section):
        return DetectorModel()
    try:
        return DetectorModel(
            jitter_fwhm_ps=_get(parser, section, "jitter_fwhm", 65e-12, kind="time") * 1e12
            if parser.has_option(section, "jitter_fwhm")
            else 65.0,
            dark_rate_hz=_get(parser, section, "dark_rate", 1000.0, kind="frequency"),
            efficiency=_get(parser, section, "efficiency", 1.0),
            deadtime_ns=_get(parser, section, "deadtime", 0.0, kind="time") * 1e9
            if parser.has_option(section, "deadtime")
            else 0.0,
        )
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def _load_dispersion(parser, section, default_slope) -> DispersionModel:
    if not parser.has_section(section):
        return synthetic_dispersion_model(default_slope)
    if parser.has_option(section, "model_file"):
        return load_model(parser.get(section, "model_file"))
    slope = _get(parser, section, "slope_at_1570_ps_per_nm", default_slope)
    return synthetic_dispersion_model(slope)


def loads(text: str) -> ExperimentConfig:
    """Parse a config document into a resolved ExperimentConfig."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from exc

    source = _load_source(parser)
    grid = GridSpec(
        n=_get_int(parser, "grid", "n", 256) if parser.has_section("grid") else 256,
        span_bandwidths=_get(parser, "grid", "span_bandwidths", 5.0)
        if parser.has_section("grid")
        else 5.0,
    )

    geometry = Geometry.TOF_MULTIPLEXED
    rep_rate = 456e3
    n_pulses = 1_000_000
    mean_photons = 0.11
    seed = None
    background = 0.0
    latency_ps = 2000.0
    demux_ps = 180_000.0
    tes = (0.95, 0.73)
    if parser.has_section("run"):
        geometry_name = parser.get("run", "geometry", fallback="tof_multiplexed").strip()
        try:
            geometry = Geometry(geometry_name.lower())
        except ValueError as exc:
            raise ConfigError(f"run.geometry: unknown geometry {geometry_name!r}") from exc
        rep_rate = _get(parser, "run", "repetition_rate", rep_rate, kind="frequency")
        n_pulses = _get_int(parser, "run", "n_pulses", n_pulses)
        mean_photons = _get(parser, "run", "mean_photons_per_pulse", mean_photons)
        if parser.has_option("run", "rng_seed"):
            seed = _get_int(parser, "run", "rng_seed", required=True)
        background = _get(parser, "run", "background_rate_per_pulse", background)
        if parser.has_option("run", "path_latency"):
            latency_ps = _get(parser, "run", "path_latency", kind="time") * 1e12
        if parser.has_option("run", "demux_delay"):
            demux_ps = _get(parser, "run", "demux_delay", kind="time") * 1e12
        tes = (
            _get(parser, "run", "tes_efficiency_c", tes[0]),
            _get(parser, "run", "tes_efficiency_d", tes[1]),
        )

    hom = HomScanSpec()
    hom_enabled = parser.has_section("hom")
    if hom_enabled:
        hom = HomScanSpec(
            delay_min_ps=_get(parser, "hom", "delay_min", -3e-12, kind="time") * 1e12,
            delay_max_ps=_get(parser, "hom", "delay_max", 3e-12, kind="time") * 1e12,
            n_delays=_get_int(parser, "hom", "n_delays", 41),
        )

    analysis = AnalysisSpec()
    if parser.has_section("analysis"):
        analysis = AnalysisSpec(
            bin_min_nm=_get(parser, "analysis", "bin_min", 1564e-9, kind="length") * 1e9,
            bin_max_nm=_get(parser, "analysis", "bin_max", 1576e-9, kind="length") * 1e9,
            n_bins=_get_int(parser, "analysis", "n_bins", 12),
            n_side_peaks=_get_int(parser, "analysis", "n_side_peaks", 3),
        )

    return ExperimentConfig(
        source=source,
        grid=grid,
        filter_signal=_load_filter(parser, "filter.signal"),
        filter_idler=_load_filter(parser, "filter.idler"),
        detector_signal=_load_detector(parser, "detector.signal"),
        detector_idler=_load_detector(parser, "detector.idler"),
        dispersion_signal=_load_dispersion(parser, "dispersion.signal", 24.4),
        dispersion_idler=_load_dispersion(parser, "dispersion.idler", 23.6),
        geometry=geometry,
        repetition_rate_hz=rep_rate,
        n_pulses=n_pulses,
        mean_photons_per_pulse=mean_photons,
        rng_seed=seed,
        background_rate_per_pulse=background,
        path_latency_ps=latency_ps,
        demux_delay_ps=demux_ps,
        tes_efficiencies=tes,
        hom=hom,
        hom_enabled=hom_enabled,
        analysis=analysis,
        raw_text=text,
    )


def load(path) -> ExperimentConfig:
    with open(path) as handle:
        return loads(handle.read())


def build_run_config(
    cfg: ExperimentConfig,
    seed: Optional[int] = None,
    decomposition=None,
    schmidt_weights=None,
    hom_delays_ps=None,
    hom_coincidence_probs=None,
) -> RunConfig:
    """Assemble the Monte-Carlo RunConfig from a parsed experiment config."""
    actual_seed = seed if seed is not None else cfg.rng_seed
    if actual_seed is None:
        raise ConfigError("run.rng_seed: a seed is required (no ambient entropy)")
    source = SqueezerSpec(cfg.mean_photons_per_pulse, schmidt_weights)
    return RunConfig(
        rng_seed=actual_seed,
        n_pulses=cfg.n_pulses,
        source=source,
        repetition_rate_hz=cfg.repetition_rate_hz,
        geometry=cfg.geometry,
        decomposition=decomposition,
        filter_signal=cfg.filter_signal,
        filter_idler=cfg.filter_idler,
        detector_signal=cfg.detector_signal,
        detector_idler=cfg.detector_idler,
        dispersion_signal=cfg.dispersion_signal,
        dispersion_idler=cfg.dispersion_idler,
        tes_efficiencies=cfg.tes_efficiencies,
        background_rate_per_pulse=cfg.background_rate_per_pulse,
        path_latency_ps=cfg.path_latency_ps,
        demux_delay_ps=cfg.demux_delay_ps,
        hom_delays_ps=hom_delays_ps,
        hom_coincidence_probs=hom_coincidence_probs,
    )


def describe(cfg: ExperimentConfig) -> dict:
    """Plain-types echo of the resolved configuration for manifests."""

    def _filter(f):
        if f is None:
            return None
        return {
            "shape": f.shape.value,
            "center_wavelength_nm": f.center_wavelength * 1e9,
            "bandwidth_nm": f.bandwidth * 1e9,
        }

    def _detector(d):
        return {
            "jitter_fwhm_ps": d.jitter_fwhm_ps,
            "dark_rate_hz": d.dark_rate_hz,
            "efficiency": d.efficiency,
            "deadtime_ns": d.deadtime_ns,
        }

    def _dispersion(m):
        return {
            "coeffs": list(m.coeffs),
            "reference_nm": m.reference_nm,
            "zero_dispersion_nm": m.zero_dispersion_nm,
            "range_nm": list(m.range_nm),
        }

    src = cfg.source
    return {
        "source": {
            "pump_center_wavelength_nm": src.pump_center_wavelength * 1e9,
            "pump_fwhm_bandwidth_nm": src.pump_fwhm_bandwidth * 1e9,
            "crystal_length_mm": src.crystal_length * 1e3,
            "poling_period_um": src.poling_period * 1e6,
            "group_index_pump": src.group_index_pump,
            "group_index_signal": src.group_index_signal,
            "group_index_idler": src.group_index_idler,
            "signal_center_offset_nm": src.signal_center_offset * 1e9,
            "pump_waist_um": src.pump_waist * 1e6,
            "confocal_parameter_mm": src.confocal_parameter * 1e3,
        },
        "grid": {"n": cfg.grid.n, "span_bandwidths": cfg.grid.span_bandwidths},
        "filter_signal": _filter(cfg.filter_signal),
        "filter_idler": _filter(cfg.filter_idler),
        "detector_signal": _detector(cfg.detector_signal),
        "detector_idler": _detector(cfg.detector_idler),
        "dispersion_signal": _dispersion(cfg.dispersion_signal),
        "dispersion_idler": _dispersion(cfg.dispersion_idler),
        "run": {
            "geometry": cfg.geometry.value,
            "repetition_rate_hz": cfg.repetition_rate_hz,
            "n_pulses": cfg.n_pulses,
            "mean_photons_per_pulse": cfg.mean_photons_per_pulse,
            "rng_seed": cfg.rng_seed,
            "background_rate_per_pulse": cfg.background_rate_per_pulse,
            "path_latency_ps": cfg.path_latency_ps,
            "demux_delay_ps": cfg.demux_delay_ps,
            "tes_efficiencies": list(cfg.tes_efficiencies),
        },
        "hom": {
            "delay_min_ps": cfg.hom.delay_min_ps,
            "delay_max_ps": cfg.hom.delay_max_ps,
            "n_delays": cfg.hom.n_delays,
        },
        "analysis": {
            "bin_min_nm": cfg.analysis.bin_min_nm,
            "bin_max_nm": cfg.analysis.bin_max_nm,
            "n_bins": cfg.analysis.n_bins,
            "n_side_peaks": cfg.analysis.n_side_peaks,
        },
    }
