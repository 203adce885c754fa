"""Synthetic experiment runs: time-tag streams, TES records, interference scans.

Pulse-indexed generation with counter-based random streams keyed by
(seed, block, stage), so identical configurations replay bit-identically and
block-sharded execution would aggregate to the same result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ConfigError
from .fock import pair_fock_output_pmf
from .jsa import SchmidtDecomposition, SpectralFilter
from .photon_stats import SqueezerSpec, smsv_pn
from .spectrometer import DetectorModel, DispersionModel, default_idler_model, default_signal_model
from .tags import HomBackground, HomScan, TagStream
from .units import omega_to_wavelength

_BLOCK = 1 << 16
_MAX_TABULATED_PAIRS = 4

REPETITION_PRESETS_HZ = {
    "oscillator": 76e6,
    "cavity_dumped": 456e3,
    "cavity_dumped_slow": 360e3,
}


class Geometry(Enum):
    """Which detection layout a simulated run feeds.

    TOF_MULTIPLEXED: both photons through the dispersive fiber onto one
        time-multiplexed click detector.
    CROSS_HV: arm 0 sees the signal beam, arm 1 the idler beam.
    SPLIT_SIGNAL: the signal beam split 50/50 onto the two arms.
    SMSV_PORTS: the balanced-splitter output ports; photon-number records
        carry ports (c, d), click runs autocorrelate port c by splitting it
        50/50 onto the two arms.
    """

    TOF_MULTIPLEXED = "tof_multiplexed"
    CROSS_HV = "cross_hv"
    SPLIT_SIGNAL = "split_signal"
    SMSV_PORTS = "smsv_ports"


@dataclass(frozen=True, kw_only=True)
class RunConfig:
    """Everything a synthetic run needs; the seed is mandatory.

    For HOM scans, n_pulses applies per delay point and to the background
    run.  hom_coincidence_probs is the single-pair coincidence probability
    per delay (from the joint-amplitude interference curve).
    """

    rng_seed: int
    n_pulses: int
    source: SqueezerSpec
    repetition_rate_hz: float = 456e3
    geometry: Geometry = Geometry.TOF_MULTIPLEXED
    decomposition: Optional[SchmidtDecomposition] = None
    filter_signal: Optional[SpectralFilter] = None
    filter_idler: Optional[SpectralFilter] = None
    detector_signal: DetectorModel = field(default_factory=DetectorModel)
    detector_idler: DetectorModel = field(default_factory=DetectorModel)
    dispersion_signal: DispersionModel = field(default_factory=default_signal_model)
    dispersion_idler: DispersionModel = field(default_factory=default_idler_model)
    tes_efficiencies: tuple = (0.95, 0.73)
    background_rate_per_pulse: float = 0.0
    path_latency_ps: float = 2000.0
    demux_delay_ps: float = 180_000.0
    hom_delays_ps: Optional[np.ndarray] = None
    hom_coincidence_probs: Optional[np.ndarray] = None
    mode_mean_floor: float = 1e-6

    def __post_init__(self):
        if self.n_pulses <= 0:
            raise ConfigError("n_pulses must be positive")
        if self.repetition_rate_hz <= 0:
            raise ConfigError("repetition rate must be positive")
        if self.background_rate_per_pulse < 0:
            raise ConfigError("background rate must be non-negative")
        if not isinstance(self.rng_seed, (int, np.integer)):
            raise ConfigError("rng_seed must be an integer")
        if self.hom_delays_ps is not None:
            delays = np.asarray(self.hom_delays_ps, dtype=float)
            object.__setattr__(self, "hom_delays_ps", delays)
            if self.hom_coincidence_probs is not None:
                probs = np.asarray(self.hom_coincidence_probs, dtype=float)
                if probs.shape != delays.shape:
                    raise ConfigError("coincidence probs must match the delay list")
                if np.any(probs < 0) or np.any(probs > 1):
                    raise ConfigError("coincidence probabilities must lie in [0, 1]")
                object.__setattr__(self, "hom_coincidence_probs", probs)

    @property
    def clock_period_ps(self) -> float:
        return 1e12 / self.repetition_rate_hz

    @property
    def duration_s(self) -> float:
        return self.n_pulses / self.repetition_rate_hz


def _rng(seed: int, block: int, stage: int, context: int = 0) -> np.random.Generator:
    """Counter-based stream keyed by (seed, context, block, stage).

    context separates independent sub-runs (e.g. delay-scan points), block
    shards pulses, stage separates draw purposes within a block.
    """
    if not 0 <= stage < 256:
        raise ValueError("stage out of range")
    word = (np.uint64(context) << np.uint64(48)) | (
        np.uint64(block) << np.uint64(8)
    ) | np.uint64(stage)
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed), word]))


def _blocks(n_pulses: int):
    for block, start in enumerate(range(0, n_pulses, _BLOCK)):
        yield block, start, min(_BLOCK, n_pulses - start)


def _mode_means(cfg: RunConfig) -> np.ndarray:
    means = cfg.source.per_mode_means()
    total = means.sum()
    if total == 0:
        return means
    keep = means >= cfg.mode_mean_floor * total
    return means[keep]


def _draw_pair_counts(rng, means: np.ndarray, size: int) -> np.ndarray:
    """(size, n_modes) thermal pair counts; geometric(p) - 1 has mean mu."""
    counts = np.empty((size, means.size), dtype=np.int64)
    for column, mu in enumerate(means):
        if mu == 0:
            counts[:, column] = 0
        else:
            counts[:, column] = rng.geometric(1.0 / (1.0 + mu), size=size) - 1
    return counts


def _sample_from_density(rng, axis: np.ndarray, density: np.ndarray, size: int):
    """Inverse-CDF samples from a piecewise-constant density over grid cells."""
    weights = np.clip(density, 0.0, None)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="left")
    idx = np.clip(idx, 0, axis.size - 1)
    lower = np.where(idx > 0, cdf[idx - 1], 0.0)
    frac = (u - lower) / np.maximum(cdf[idx] - lower, 1e-300)
    step = axis[1] - axis[0]
    return axis[idx] + (frac - 0.5) * step


@dataclass(frozen=True)
class PairEmissions:
    """Per-pair records of one simulated run (before any detection)."""

    pulse_index: np.ndarray
    mode_index: np.ndarray
    omega_s: np.ndarray
    omega_i: np.ndarray
    n_pulses: int

    def pairs_per_pulse(self) -> np.ndarray:
        return np.bincount(self.pulse_index, minlength=self.n_pulses)


def simulate_pair_source(cfg: RunConfig) -> PairEmissions:
    """Draw pair emissions per pulse per Schmidt mode.

    Pair counts are thermal per mode; each pair's frequencies are sampled
    from the product of that mode's signal and idler intensity profiles.
    Requires a decomposition so mode profiles are available.
    """
    if cfg.decomposition is None:
        raise ConfigError("simulate_pair_source needs a Schmidt decomposition")
    dec = cfg.decomposition
    means = _mode_means(cfg)
    omega_s_axis = dec.grid.omega_s
    omega_i_axis = dec.grid.omega_i
    signal_profiles = np.abs(dec.signal_modes[: means.size]) ** 2
    idler_profiles = np.abs(dec.idler_modes[: means.size]) ** 2

    pulse_chunks, mode_chunks, ws_chunks, wi_chunks = [], [], [], []
    for block, start, size in _blocks(cfg.n_pulses):
        counts = _draw_pair_counts(_rng(cfg.rng_seed, block, 0), means, size)
        freq_rng = _rng(cfg.rng_seed, block, 1)
        for mode in range(means.size):
            per_pulse = counts[:, mode]
            total = int(per_pulse.sum())
            if total == 0:
                continue
            pulses = start + np.repeat(np.arange(size), per_pulse)
            pulse_chunks.append(pulses)
            mode_chunks.append(np.full(total, mode, dtype=np.int32))
            ws_chunks.append(
                _sample_from_density(freq_rng, omega_s_axis, signal_profiles[mode], total)
            )
            wi_chunks.append(
                _sample_from_density(freq_rng, omega_i_axis, idler_profiles[mode], total)
            )

    def _cat(chunks, dtype):
        if chunks:
            return np.concatenate(chunks)
        return np.empty(0, dtype=dtype)

    emissions = PairEmissions(
        pulse_index=_cat(pulse_chunks, np.int64).astype(np.int64),
        mode_index=_cat(mode_chunks, np.int32),
        omega_s=_cat(ws_chunks, float),
        omega_i=_cat(wi_chunks, float),
        n_pulses=cfg.n_pulses,
    )
    return emissions


@dataclass(frozen=True)
class RunCounters:
    n_pulses: int
    n_pairs_generated: int = 0
    n_multi_pair_pulses: int = 0
    n_photons_undetected: int = 0
    n_out_of_model_range: int = 0
    n_dark_counts: int = 0
    n_deadtime_dropped: int = 0
    n_tags: int = 0


def tof_demux_window(cfg: RunConfig, jitter_margin_sigmas: float = 5.0) -> tuple:
    """Offset window (ps) containing all dispersed band arrivals plus jitter."""
    if cfg.filter_signal is not None and cfg.filter_signal.shape.value != "tabulated":
        center = cfg.filter_signal.center_wavelength * 1e9
        width = cfg.filter_signal.bandwidth * 1e9
        band = (center - width, center + width)
    else:
        band = cfg.dispersion_signal.range_nm
    lam = np.linspace(*band, 512)
    lam = lam[
        (lam >= cfg.dispersion_signal.range_nm[0])
        & (lam <= cfg.dispersion_signal.range_nm[1])
    ]
    delays = cfg.dispersion_signal.delay_ps(lam)
    margin = jitter_margin_sigmas * cfg.detector_signal.jitter_sigma_ps
    lo = max(0.0, cfg.path_latency_ps + float(delays.min()) - margin)
    hi = cfg.path_latency_ps + float(delays.max()) + margin
    if hi - lo >= cfg.clock_period_ps:
        raise ConfigError("demux window does not fit inside the clock period")
    return (lo, hi)


def _apply_deadtime(times_ps: np.ndarray, deadtime_ps: float) -> np.ndarray:
    """Indices of tags surviving a non-paralyzable deadtime (input sorted)."""
    if deadtime_ps <= 0 or times_ps.size == 0:
        return np.arange(times_ps.size)
    keep = []
    last = -math.inf
    for i, t in enumerate(times_ps):
        if t - last >= deadtime_ps:
            keep.append(i)
            last = t
    return np.asarray(keep, dtype=np.int64)


def _dark_times(rng, rate_hz: float, duration_s: float) -> np.ndarray:
    n_dark = rng.poisson(rate_hz * duration_s)
    return rng.random(n_dark) * duration_s * 1e12


def simulate_tag_run(cfg: RunConfig):
    """Synthesize a click-detector tag stream for the configured geometry.

    Returns:
        (TagStream, RunCounters).  TOF runs emit a single multiplexed
        channel with idler tags shifted by the demux delay; correlation
        geometries emit channels 0 and 1.
    """
    if cfg.geometry is Geometry.TOF_MULTIPLEXED:
        return _simulate_tof_run(cfg)
    return _simulate_correlation_run(cfg)


def _simulate_tof_run(cfg: RunConfig):
    emissions = simulate_pair_source(cfg)
    per_pulse = emissions.pairs_per_pulse()
    n_pairs = int(emissions.pulse_index.size)
    n_multi = int(np.count_nonzero(per_pulse > 1))

    period = cfg.clock_period_ps
    lam_s_nm = omega_to_wavelength(emissions.omega_s) * 1e9
    lam_i_nm = omega_to_wavelength(emissions.omega_i) * 1e9

    # Filter and detection survival, drawn blockwise for determinism.
    survive_s = np.ones(n_pairs, dtype=bool)
    survive_i = np.ones(n_pairs, dtype=bool)
    jitter_s = np.zeros(n_pairs)
    jitter_i = np.zeros(n_pairs)
    for block, start, size in _blocks(cfg.n_pulses):
        in_block = (emissions.pulse_index >= start) & (
            emissions.pulse_index < start + size
        )
        count = int(in_block.sum())
        if count == 0:
            continue
        rng = _rng(cfg.rng_seed, block, 2)
        t_s = (
            cfg.filter_signal.transmission(emissions.omega_s[in_block])
            if cfg.filter_signal is not None
            else np.ones(count)
        )
        t_i = (
            cfg.filter_idler.transmission(emissions.omega_i[in_block])
            if cfg.filter_idler is not None
            else np.ones(count)
        )
        survive_s[in_block] = rng.random(count) < t_s * cfg.detector_signal.efficiency
        survive_i[in_block] = rng.random(count) < t_i * cfg.detector_idler.efficiency
        jrng = _rng(cfg.rng_seed, block, 3)
        jitter_s[in_block] = jrng.normal(0.0, cfg.detector_signal.jitter_sigma_ps, count)
        jitter_i[in_block] = jrng.normal(0.0, cfg.detector_idler.jitter_sigma_ps, count)

    model_s, model_i = cfg.dispersion_signal, cfg.dispersion_idler
    in_range_s = (lam_s_nm >= model_s.range_nm[0]) & (lam_s_nm <= model_s.range_nm[1])
    in_range_i = (lam_i_nm >= model_i.range_nm[0]) & (lam_i_nm <= model_i.range_nm[1])

    keep_s = survive_s & in_range_s
    keep_i = survive_i & in_range_i
    time_s = (
        emissions.pulse_index[keep_s] * period
        + cfg.path_latency_ps
        + model_s.delay_ps(lam_s_nm[keep_s])
        + jitter_s[keep_s]
    )
    time_i = (
        emissions.pulse_index[keep_i] * period
        + cfg.path_latency_ps
        + model_i.delay_ps(lam_i_nm[keep_i])
        + jitter_i[keep_i]
        + cfg.demux_delay_ps
    )

    dark_rng = _rng(cfg.rng_seed, 0, 4)
    darks = _dark_times(dark_rng, cfg.detector_signal.dark_rate_hz, cfg.duration_s)

    times = np.concatenate([time_s, time_i, darks])
    times = times[(times >= 0) & (times < cfg.duration_s * 1e12)]
    times.sort(kind="stable")
    kept = _apply_deadtime(times, cfg.detector_signal.deadtime_ns * 1e3)
    dropped = times.size - kept.size
    times = times[kept]

    stream = TagStream.from_absolute(
        channel=np.zeros(times.size, dtype=np.uint16),
        time_ps=times,
        clock_period_ps=period,
        duration_s=cfg.duration_s,
        channel_names=("multiplexed",),
    )
    counters = RunCounters(
        n_pulses=cfg.n_pulses,
        n_pairs_generated=n_pairs,
        n_multi_pair_pulses=n_multi,
        n_photons_undetected=int((~survive_s).sum() + (~survive_i).sum()),
        n_out_of_model_range=int((~in_range_s & survive_s).sum() + (~in_range_i & survive_i).sum()),
        n_dark_counts=int(darks.size),
        n_deadtime_dropped=int(dropped),
        n_tags=len(stream),
    )
    return stream, counters


def _photon_numbers_per_pulse(cfg: RunConfig, block: int, size: int, view: str):
    """True per-pulse photon numbers on the two arms, before any loss.

    view='ports' gives the physical beams a number-resolving detector pair
    would see; view='arms' gives the click-detector arms, which for the
    single-beam autocorrelation layouts involve a 50/50 split.
    """
    rng = _rng(cfg.rng_seed, block, 0)
    if cfg.geometry is Geometry.SMSV_PORTS:
        pmf = smsv_pn(cfg.source.mean_total_photons, nmax=32).probs
        cdf = np.cumsum(pmf)
        cdf /= cdf[-1]
        n_c = np.searchsorted(cdf, rng.random(size)).astype(np.int64)
        n_d = np.searchsorted(cdf, rng.random(size)).astype(np.int64)
        pairs = (n_c + n_d) // 2
        if view == "ports":
            return n_c, n_d, pairs
        half = rng.binomial(n_c, 0.5)
        return half, n_c - half, pairs

    counts = _draw_pair_counts(rng, _mode_means(cfg), size)
    pairs = counts.sum(axis=1)
    if cfg.geometry is Geometry.CROSS_HV:
        return pairs.copy(), pairs.copy(), pairs
    if cfg.geometry is Geometry.SPLIT_SIGNAL:
        half = rng.binomial(pairs, 0.5)
        return half, pairs - half, pairs
    raise ConfigError(f"unsupported photon-number geometry {cfg.geometry}")


def _simulate_correlation_run(cfg: RunConfig):
    period = cfg.clock_period_ps
    eta_c = cfg.detector_signal.efficiency
    eta_d = cfg.detector_idler.efficiency

    chunks = []
    n_pairs_total = 0
    n_multi = 0
    for block, start, size in _blocks(cfg.n_pulses):
        n_c, n_d, pairs = _photon_numbers_per_pulse(cfg, block, size, view="arms")
        n_pairs_total += int(pairs.sum())
        n_multi += int(np.count_nonzero(pairs > 1))
        rng = _rng(cfg.rng_seed, block, 2)
        det_c = rng.binomial(n_c, eta_c)
        det_d = rng.binomial(n_d, eta_d)
        jrng = _rng(cfg.rng_seed, block, 3)
        for channel, det, detector in (
            (0, det_c, cfg.detector_signal),
            (1, det_d, cfg.detector_idler),
        ):
            total = int(det.sum())
            if total == 0:
                continue
            pulses = start + np.repeat(np.arange(size), det)
            jitter = jrng.normal(0.0, detector.jitter_sigma_ps, total)
            times = pulses * period + cfg.path_latency_ps + jitter
            chunks.append((channel, times))

    all_channels = [np.full(t.size, ch, dtype=np.uint16) for ch, t in chunks]
    all_times = [t for _, t in chunks]

    n_darks = 0
    for channel, detector in ((0, cfg.detector_signal), (1, cfg.detector_idler)):
        rng = _rng(cfg.rng_seed, 0, 8 + channel)
        darks = _dark_times(rng, detector.dark_rate_hz, cfg.duration_s)
        n_darks += darks.size
        all_channels.append(np.full(darks.size, channel, dtype=np.uint16))
        all_times.append(darks)

    channel = np.concatenate(all_channels) if all_channels else np.empty(0, np.uint16)
    times = np.concatenate(all_times) if all_times else np.empty(0)
    good = (times >= 0) & (times < cfg.duration_s * 1e12)
    channel, times = channel[good], times[good]

    # Deadtime per channel.
    keep_masks = []
    dropped = 0
    for ch, detector in ((0, cfg.detector_signal), (1, cfg.detector_idler)):
        mask = channel == ch
        t_ch = np.sort(times[mask], kind="stable")
        kept = _apply_deadtime(t_ch, detector.deadtime_ns * 1e3)
        dropped += t_ch.size - kept.size
        keep_masks.append((np.full(kept.size, ch, dtype=np.uint16), t_ch[kept]))
    channel = np.concatenate([m[0] for m in keep_masks])
    times = np.concatenate([m[1] for m in keep_masks])

    stream = TagStream.from_absolute(
        channel=channel,
        time_ps=times,
        clock_period_ps=period,
        duration_s=cfg.duration_s,
        channel_names=("detector_c", "detector_d"),
    )
    counters = RunCounters(
        n_pulses=cfg.n_pulses,
        n_pairs_generated=n_pairs_total,
        n_multi_pair_pulses=n_multi,
        n_dark_counts=int(n_darks),
        n_deadtime_dropped=int(dropped),
        n_tags=len(stream),
    )
    return stream, counters


@dataclass(frozen=True)
class TesRecords:
    """Photon-number records per pulse; all-zero pulses are omitted."""

    clock_index: np.ndarray
    n_c: np.ndarray
    n_d: np.ndarray
    n_pulses: int

    def counts_histogram(self, nmax: int = 32):
        """Joint (n_c, n_d) occurrence counts including the omitted zeros."""
        hist = np.zeros((nmax + 1, nmax + 1), dtype=np.int64)
        np.add.at(hist, (np.clip(self.n_c, 0, nmax), np.clip(self.n_d, 0, nmax)), 1)
        hist[0, 0] += self.n_pulses - self.clock_index.size
        return hist


def simulate_tes_run(cfg: RunConfig) -> TesRecords:
    """Photon-number-resolving records: binomial thinning plus background."""
    indices, counts_c, counts_d = [], [], []
    for block, start, size in _blocks(cfg.n_pulses):
        n_c, n_d, _ = _photon_numbers_per_pulse(cfg, block, size, view="ports")
        rng = _rng(cfg.rng_seed, block, 5)
        det_c = rng.binomial(n_c, cfg.tes_efficiencies[0])
        det_d = rng.binomial(n_d, cfg.tes_efficiencies[1])
        if cfg.background_rate_per_pulse > 0:
            det_c = det_c + rng.poisson(cfg.background_rate_per_pulse, size)
            det_d = det_d + rng.poisson(cfg.background_rate_per_pulse, size)
        nonzero = (det_c > 0) | (det_d > 0)
        indices.append(start + np.nonzero(nonzero)[0])
        counts_c.append(det_c[nonzero])
        counts_d.append(det_d[nonzero])
    return TesRecords(
        clock_index=np.concatenate(indices) if indices else np.empty(0, np.int64),
        n_c=np.concatenate(counts_c).astype(np.int64) if counts_c else np.empty(0, np.int64),
        n_d=np.concatenate(counts_d).astype(np.int64) if counts_d else np.empty(0, np.int64),
        n_pulses=cfg.n_pulses,
    )


def _hom_pair_tables():
    tables = {}
    for k in range(2, _MAX_TABULATED_PAIRS + 1):
        pmf = pair_fock_output_pmf(k)
        tables[k] = (pmf.shape[0], np.cumsum(pmf.ravel()))
    return tables


def simulate_hom_run(cfg: RunConfig):
    """Two-detector coincidence scan across the configured delay list.

    Single-pair pulses follow the configured interference curve; multi-pair
    pulses use the exact indistinguishable-photon splitter table up to four
    pairs (higher multiplicities are truncated to four).  The background
    run repeats the pulse budget with the source off.

    Returns:
        (HomScan, HomBackground, n_truncated_multipair)
    """
    if cfg.hom_delays_ps is None or cfg.hom_coincidence_probs is None:
        raise ConfigError("HOM run needs hom_delays_ps and hom_coincidence_probs")
    delays = cfg.hom_delays_ps
    pc_curve = cfg.hom_coincidence_probs
    eta_c, eta_d = cfg.tes_efficiencies
    tables = _hom_pair_tables()
    mu = cfg.source.mean_total_photons

    coincidences = np.zeros(delays.size, dtype=np.int64)
    singles_c = np.zeros(delays.size, dtype=np.int64)
    singles_d = np.zeros(delays.size, dtype=np.int64)
    pulses = np.full(delays.size, cfg.n_pulses, dtype=np.int64)
    n_truncated = 0

    def _point(context, pair_mean, p_coincidence):
        nonlocal n_truncated
        got_c = np.zeros(0, dtype=np.int64)
        got_d = np.zeros(0, dtype=np.int64)
        for block, start, size in _blocks(cfg.n_pulses):
            rng = _rng(cfg.rng_seed, block, 0, context=context)
            if pair_mean > 0:
                k = rng.geometric(1.0 / (1.0 + pair_mean), size=size) - 1
            else:
                k = np.zeros(size, dtype=np.int64)
            over = k > _MAX_TABULATED_PAIRS
            n_truncated += int(over.sum())
            k = np.minimum(k, _MAX_TABULATED_PAIRS)

            n_c = np.zeros(size, dtype=np.int64)
            n_d = np.zeros(size, dtype=np.int64)
            one = k == 1
            if one.any():
                u = rng.random(int(one.sum()))
                v = rng.random(int(one.sum()))
                coincide = u < p_coincidence
                bunch_up = v < 0.5
                n_c[one] = np.where(coincide, 1, np.where(bunch_up, 2, 0))
                n_d[one] = np.where(coincide, 1, np.where(bunch_up, 0, 2))
            for pairs, (dim, cdf) in tables.items():
                sel = k == pairs
                if not sel.any():
                    continue
                flat = np.searchsorted(cdf, rng.random(int(sel.sum())) * cdf[-1])
                n_c[sel] = flat // dim
                n_d[sel] = flat % dim

            det_c = rng.binomial(n_c, eta_c)
            det_d = rng.binomial(n_d, eta_d)
            if cfg.background_rate_per_pulse > 0:
                det_c = det_c + rng.poisson(cfg.background_rate_per_pulse, size)
                det_d = det_d + rng.poisson(cfg.background_rate_per_pulse, size)
            got_c = np.concatenate([got_c, det_c])
            got_d = np.concatenate([got_d, det_d])
        return got_c, got_d

    for i in range(delays.size):
        det_c, det_d = _point(2 + i, mu, pc_curve[i])
        coincidences[i] = int(np.count_nonzero((det_c >= 1) & (det_d >= 1)))
        singles_c[i] = int(np.count_nonzero(det_c >= 1))
        singles_d[i] = int(np.count_nonzero(det_d >= 1))

    bg_c, bg_d = _point(1, 0.0, 0.0)
    background = HomBackground(
        n_pulses=cfg.n_pulses,
        coincidences=int(np.count_nonzero((bg_c >= 1) & (bg_d >= 1))),
        singles_c=int(np.count_nonzero(bg_c >= 1)),
        singles_d=int(np.count_nonzero(bg_d >= 1)),
    )
    scan = HomScan(
        delays_ps=delays,
        coincidences=coincidences,
        n_pulses=pulses,
        singles_c=singles_c,
        singles_d=singles_d,
    )
    return scan, background, n_truncated
