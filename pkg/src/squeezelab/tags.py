"""Time-tag stream processing: demultiplexing, spectra, correlations.

Tags are indexed by pump pulse (clock_index) with an arrival offset inside
the clock period.  Coincidences are defined per pulse: two channels firing
at the same clock_index, never a floating time window.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    BaselineError,
    ConfigError,
    InsufficientStatisticsError,
    StreamAlignmentError,
)
from .spectrometer import Branch, DispersionModel, delays_to_wavelengths


@dataclass(frozen=True)
class TagStream:
    """Ordered detector records: (channel, clock_index, time_offset_ps).

    Records are kept sorted by absolute arrival time.  clock_period_ps and
    duration_s describe the run; channel_names is cosmetic metadata for
    reports.
    """

    channel: np.ndarray
    clock_index: np.ndarray
    time_offset_ps: np.ndarray
    clock_period_ps: float
    duration_s: float
    channel_names: tuple = ()

    def __post_init__(self):
        channel = np.asarray(self.channel, dtype=np.uint16)
        clock = np.asarray(self.clock_index, dtype=np.int64)
        offset = np.asarray(self.time_offset_ps, dtype=np.float64)
        if not (channel.shape == clock.shape == offset.shape):
            raise ValueError("channel, clock_index and time_offset_ps must align")
        if self.clock_period_ps <= 0:
            raise ValueError("clock period must be positive")
        if offset.size and (offset.min() < 0 or offset.max() >= self.clock_period_ps):
            raise ValueError("time offsets must lie in [0, clock period)")
        order = np.argsort(clock * self.clock_period_ps + offset, kind="stable")
        object.__setattr__(self, "channel", channel[order])
        object.__setattr__(self, "clock_index", clock[order])
        object.__setattr__(self, "time_offset_ps", offset[order])

    def __len__(self):
        return self.channel.size

    def absolute_time_ps(self) -> np.ndarray:
        return self.clock_index * self.clock_period_ps + self.time_offset_ps

    def select_channel(self, channel: int) -> "TagStream":
        mask = self.channel == channel
        return replace(
            self,
            channel=self.channel[mask],
            clock_index=self.clock_index[mask],
            time_offset_ps=self.time_offset_ps[mask],
        )

    @classmethod
    def from_absolute(cls, channel, time_ps, clock_period_ps, duration_s, channel_names=()):
        time_ps = np.asarray(time_ps, dtype=np.float64)
        clock = np.floor_divide(time_ps, clock_period_ps).astype(np.int64)
        offset = time_ps - clock * clock_period_ps
        # Guard against roundoff pushing an offset to exactly one period.
        bump = offset >= clock_period_ps
        clock[bump] += 1
        offset[bump] -= clock_period_ps
        return cls(
            channel=np.asarray(channel, dtype=np.uint16),
            clock_index=clock,
            time_offset_ps=offset,
            clock_period_ps=clock_period_ps,
            duration_s=duration_s,
            channel_names=tuple(channel_names),
        )


@dataclass(frozen=True)
class DemuxResult:
    signal: TagStream
    idler: TagStream
    n_discarded: int


def demux_polarization(
    stream: TagStream,
    delay_ps: float = 180_000.0,
    window_ps: tuple = (0.0, 10_000.0),
) -> DemuxResult:
    """Split a time-multiplexed single-detector stream into signal and idler.

    Tags whose in-period offset falls in window_ps are signal; tags whose
    arrival minus delay_ps maps into the window of some clock edge become
    idler tags at that edge.  Everything else is discarded (counted).

    Raises:
        ConfigError: the delayed window overlaps the prompt one modulo the
            clock period, which would make assignment ambiguous.
    """
    period = stream.clock_period_ps
    lo, hi = window_ps
    if not 0 <= lo < hi:
        raise ConfigError("demux window must satisfy 0 <= lo < hi")
    if hi - lo >= period:
        raise ConfigError("demux window spans a full clock period")
    # Idler window position within the period after the delay shift.
    shift = delay_ps % period
    idler_lo, idler_hi = (lo + shift) % period, (hi + shift) % period
    if idler_lo < idler_hi:
        overlap = (lo < idler_hi) and (idler_lo < hi)
    else:  # idler window wraps around the period boundary
        overlap = (lo < idler_hi) or (idler_lo < hi)
    if overlap:
        raise ConfigError("demux windows overlap; increase delay or shrink window")

    offset = stream.time_offset_ps
    signal_mask = (offset >= lo) & (offset < hi)

    shifted = stream.absolute_time_ps() - delay_ps
    shifted_clock = np.floor_divide(shifted, period).astype(np.int64)
    shifted_offset = shifted - shifted_clock * period
    idler_mask = (~signal_mask) & (shifted_offset >= lo) & (shifted_offset < hi)

    def _pick(mask, clock, offs):
        return TagStream(
            channel=np.zeros(int(mask.sum()), dtype=np.uint16),
            clock_index=clock[mask],
            time_offset_ps=offs[mask],
            clock_period_ps=period,
            duration_s=stream.duration_s,
            channel_names=("signal",),
        )

    signal = _pick(signal_mask, stream.clock_index, offset)
    idler = _pick(idler_mask, shifted_clock, shifted_offset)
    idler = replace(idler, channel_names=("idler",))
    n_discarded = int(len(stream) - len(signal) - len(idler))
    return DemuxResult(signal=signal, idler=idler, n_discarded=n_discarded)


@dataclass(frozen=True)
class SinglesSpectrum:
    """Wavelength histogram of one tag stream with conservation counters.

    binned + out-of-bin (alias band) + unphysical = input tags.  Tags whose
    delay has no solution on the chosen branch within the model range count
    as unphysical; tags mapping outside the requested bins are reported as
    alias-band candidates because the time-of-flight fold makes their true
    wavelength ambiguous.
    """

    edges_nm: np.ndarray
    counts: np.ndarray
    n_binned: int
    n_alias: int
    n_unphysical: int

    @property
    def centers_nm(self) -> np.ndarray:
        return 0.5 * (self.edges_nm[:-1] + self.edges_nm[1:])


def singles_spectrum(
    stream: TagStream,
    dispersion: DispersionModel,
    bins,
    path_latency_ps: float = 0.0,
    branch: Branch = Branch.ABOVE_FOLD,
) -> SinglesSpectrum:
    """Histogram tag arrival offsets as wavelengths through the fiber model."""
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bins must be strictly increasing edges")
    delays = stream.time_offset_ps - path_latency_ps
    lam = delays_to_wavelengths(dispersion, delays, branch)
    unphysical = ~np.isfinite(lam)
    lam_ok = lam[~unphysical]
    counts, _ = np.histogram(lam_ok, bins=edges)
    n_binned = int(counts.sum())
    return SinglesSpectrum(
        edges_nm=edges,
        counts=counts.astype(np.int64),
        n_binned=n_binned,
        n_alias=int(lam_ok.size - n_binned),
        n_unphysical=int(unphysical.sum()),
    )


@dataclass(frozen=True)
class Histogram2D:
    """Coincidence counts over (signal, idler) wavelength bins."""

    edges_s_nm: np.ndarray
    edges_i_nm: np.ndarray
    counts: np.ndarray = field(repr=False)
    n_pairs: int = 0
    n_binned: int = 0
    n_out_of_bins: int = 0
    n_multi_tag_pulses: int = 0

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if np.any(np.diff(self.edges_s_nm) <= 0) or np.any(np.diff(self.edges_i_nm) <= 0):
            raise ValueError("bin edges must be strictly increasing")


def _per_pulse_groups(stream: TagStream):
    """Unique clock indices with slices into the (sorted) tag arrays."""
    clock = stream.clock_index
    unique, starts, counts = np.unique(clock, return_index=True, return_counts=True)
    return unique, starts, counts


def joint_spectrum(
    signal: TagStream,
    idler: TagStream,
    dispersion_signal: DispersionModel,
    dispersion_idler: DispersionModel,
    bins_s,
    bins_i,
    path_latency_ps: float = 0.0,
    branch: Branch = Branch.ABOVE_FOLD,
) -> Histogram2D:
    """Per-pulse coincidence histogram over wavelength pairs.

    Every clock index with at least one tag in each stream contributes all
    signal-idler pairings; pulses with more than one tag on either side are
    counted in n_multi_tag_pulses.

    Raises:
        StreamAlignmentError: the streams' clock ranges do not overlap.
    """
    if len(signal) and len(idler):
        if (
            signal.clock_index.max() < idler.clock_index.min()
            or idler.clock_index.max() < signal.clock_index.min()
        ):
            raise StreamAlignmentError("tag streams cover disjoint clock ranges")

    uniq_s, start_s, count_s = _per_pulse_groups(signal)
    uniq_i, start_i, count_i = _per_pulse_groups(idler)
    shared, pos_s, pos_i = np.intersect1d(uniq_s, uniq_i, return_indices=True)

    ks = count_s[pos_s]
    ki = count_i[pos_i]
    n_multi = int(np.count_nonzero((ks > 1) | (ki > 1)))

    # All pairings per shared pulse, built index-wise.
    sig_idx = []
    idl_idx = []
    for pulse in range(shared.size):
        s0, sn = start_s[pos_s[pulse]], ks[pulse]
        i0, in_ = start_i[pos_i[pulse]], ki[pulse]
        s_range = np.arange(s0, s0 + sn)
        i_range = np.arange(i0, i0 + in_)
        sig_idx.append(np.repeat(s_range, in_))
        idl_idx.append(np.tile(i_range, sn))
    if sig_idx:
        sig_idx = np.concatenate(sig_idx)
        idl_idx = np.concatenate(idl_idx)
    else:
        sig_idx = np.empty(0, dtype=int)
        idl_idx = np.empty(0, dtype=int)

    lam_s = delays_to_wavelengths(
        dispersion_signal, signal.time_offset_ps[sig_idx] - path_latency_ps, branch
    )
    lam_i = delays_to_wavelengths(
        dispersion_idler, idler.time_offset_ps[idl_idx] - path_latency_ps, branch
    )
    good = np.isfinite(lam_s) & np.isfinite(lam_i)
    edges_s = np.asarray(bins_s, dtype=float)
    edges_i = np.asarray(bins_i, dtype=float)
    counts, _, _ = np.histogram2d(lam_s[good], lam_i[good], bins=(edges_s, edges_i))
    n_pairs = int(sig_idx.size)
    n_binned = int(counts.sum())
    return Histogram2D(
        edges_s_nm=edges_s,
        edges_i_nm=edges_i,
        counts=counts.astype(np.int64),
        n_pairs=n_pairs,
        n_binned=n_binned,
        n_out_of_bins=n_pairs - n_binned,
        n_multi_tag_pulses=n_multi,
    )


@dataclass(frozen=True)
class G2Estimate:
    value: float
    sigma: float
    zero_peak_area: float
    side_peak_areas: np.ndarray


def _pair_delays_for_shift(start: TagStream, stop: TagStream, shift: int):
    """Offset differences for all tag pairs with stop_clock = start_clock + shift."""
    uniq_a, start_a, count_a = _per_pulse_groups(start)
    uniq_b, start_b, count_b = _per_pulse_groups(stop)
    shared, pos_a, pos_b = np.intersect1d(uniq_a + shift, uniq_b, return_indices=True)
    diffs = []
    for pulse in range(shared.size):
        a0, an = start_a[pos_a[pulse]], count_a[pos_a[pulse]]
        b0, bn = start_b[pos_b[pulse]], count_b[pos_b[pulse]]
        off_a = start.time_offset_ps[a0 : a0 + an]
        off_b = stop.time_offset_ps[b0 : b0 + bn]
        diffs.append((off_b[None, :] - off_a[:, None]).ravel())
    if diffs:
        return np.concatenate(diffs)
    return np.empty(0)


def g2_peak_ratio(
    start: TagStream,
    stop: TagStream,
    clock_period_ps: Optional[float] = None,
    n_side_peaks: int = 3,
) -> G2Estimate:
    """Zero-peak to side-peak area ratio of the start-stop delay histogram.

    Peak k collects pair delays in [k*T - T/2, k*T + T/2).  The estimate is
    A_0 / mean(A_side) with Poisson error propagation; side peaks are the
    n_side_peaks on each side of zero.

    Raises:
        InsufficientStatisticsError: empty side peaks or a span too short to
            contain them.
    """
    if n_side_peaks < 1:
        raise ValueError("need at least one side peak")
    period = clock_period_ps or start.clock_period_ps
    if len(start) == 0 or len(stop) == 0:
        raise InsufficientStatisticsError("empty tag stream")
    span = max(start.clock_index.max(), stop.clock_index.max()) - min(
        start.clock_index.min(), stop.clock_index.min()
    )
    if span < 2 * (n_side_peaks + 1):
        raise InsufficientStatisticsError(
            "streams too short to contain the requested side peaks"
        )

    areas = {}
    for k in range(-n_side_peaks - 1, n_side_peaks + 2):
        diffs = _pair_delays_for_shift(start, stop, k)
        tau = k * period + diffs
        peak = np.rint(tau / period).astype(np.int64)
        for p in np.unique(peak):
            if abs(p) <= n_side_peaks:
                areas[int(p)] = areas.get(int(p), 0) + int(np.count_nonzero(peak == p))

    zero_area = float(areas.get(0, 0))
    side = np.array(
        [areas.get(k, 0) for k in range(-n_side_peaks, n_side_peaks + 1) if k != 0],
        dtype=float,
    )
    side_total = side.sum()
    if side_total == 0:
        raise InsufficientStatisticsError("no counts in the side peaks")
    mean_side = side_total / side.size
    value = zero_area / mean_side
    # var(A0) = A0 (>= 1 as a floor), var(mean side) = sum(side)/m^2.
    sigma = np.sqrt(max(zero_area, 1.0) + zero_area**2 / side_total) / mean_side
    return G2Estimate(
        value=value, sigma=float(sigma), zero_peak_area=zero_area, side_peak_areas=side
    )


@dataclass(frozen=True)
class HomScan:
    """Coincidence scan vs relative delay, with per-point singles tallies."""

    delays_ps: np.ndarray
    coincidences: np.ndarray
    n_pulses: np.ndarray
    singles_c: np.ndarray
    singles_d: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.delays_ps).size
        for name in ("coincidences", "n_pulses", "singles_c", "singles_d"):
            if np.asarray(getattr(self, name)).size != n:
                raise ValueError(f"{name} must match the delay axis length")


@dataclass(frozen=True)
class HomBackground:
    n_pulses: int
    coincidences: int
    singles_c: int
    singles_d: int


@dataclass(frozen=True)
class VisibilityEstimate:
    value: float
    sigma: float


@dataclass(frozen=True)
class HomVisibilities:
    raw: VisibilityEstimate
    background_subtracted: VisibilityEstimate
    accidental_corrected: VisibilityEstimate
    dip_index: int
    baseline_indices: np.ndarray


def _baseline_indices(n_points: int):
    n_edge = max(1, int(round(0.2 * n_points)))
    return np.concatenate([np.arange(n_edge), np.arange(n_points - n_edge, n_points)])


def hom_analysis(scan: HomScan, background: HomBackground) -> HomVisibilities:
    """Visibility at three correction levels from a coincidence dip scan.

    The baseline is the mean per-pulse coincidence rate over the outer 20 %
    of scan points on each side; the dip is the scan minimum.  Background
    coincidences (pump-blocked run) are subtracted per point; accidentals
    are estimated from photon and background singles rates as
    p_ph,c * p_bg,d + p_bg,c * p_ph,d per pulse.  Uncertainties come from
    first-order Poisson propagation through all entering counts.

    Raises:
        BaselineError: scan too short, dip on the plateau region, vanishing
            baseline, or a dip that is not statistically distinguishable
            from the plateau (3 sigma).
    """
    from .uncertainty import propagate_poisson

    delays = np.asarray(scan.delays_ps, dtype=float)
    n_points = delays.size
    if n_points < 5:
        raise BaselineError("need at least 5 scan points to find a baseline")

    rate = scan.coincidences / scan.n_pulses
    base_idx = _baseline_indices(n_points)
    dip = int(np.argmin(rate))
    if dip in set(base_idx.tolist()):
        raise BaselineError("dip lies in the plateau region; no baseline on both sides")
    baseline = float(rate[base_idx].mean())
    if baseline <= 0:
        raise BaselineError("baseline coincidence rate vanishes")
    scatter = rate[base_idx] - baseline
    base_sigma = np.sqrt(
        np.sum(scan.coincidences[base_idx]) / np.sum(scan.n_pulses[base_idx]) ** 2
        * base_idx.size
    )
    depth = baseline - rate[dip]
    dip_sigma = np.sqrt(
        scan.coincidences[dip] / scan.n_pulses[dip] ** 2 + base_sigma**2
    )
    if depth < 3.0 * dip_sigma:
        raise BaselineError("dip not significant against the baseline plateau")
    del scatter

    n_dip = float(scan.n_pulses[dip])
    n_base = scan.n_pulses[base_idx].astype(float)
    n_bg = float(background.n_pulses)

    def _visibility(level):
        def func(counts):
            c_dip = counts[0]
            c_base = counts[1 : 1 + base_idx.size]
            c_bg, s_c_bg, s_d_bg = counts[-5], counts[-4], counts[-3]
            s_c_dip, s_d_dip = counts[-2], counts[-1]
            m = c_dip / n_dip
            b = float(np.mean(c_base / n_base))
            if level >= 1:
                g = c_bg / n_bg
                m = m - g
                b = b - g
            if level >= 2:
                p_bg_c = s_c_bg / n_bg
                p_bg_d = s_d_bg / n_bg
                acc_dip = (s_c_dip / n_dip - p_bg_c) * p_bg_d + p_bg_c * (
                    s_d_dip / n_dip - p_bg_d
                )
                base_sc = counts[1 + base_idx.size : 1 + 2 * base_idx.size]
                base_sd = counts[1 + 2 * base_idx.size : 1 + 3 * base_idx.size]
                acc_base = np.mean(
                    (base_sc / n_base - p_bg_c) * p_bg_d
                    + p_bg_c * (base_sd / n_base - p_bg_d)
                )
                m = m - acc_dip
                b = b - acc_base
            return 1.0 - m / b

        counts = np.concatenate(
            [
                [scan.coincidences[dip]],
                scan.coincidences[base_idx],
                scan.singles_c[base_idx],
                scan.singles_d[base_idx],
                [
                    background.coincidences,
                    background.singles_c,
                    background.singles_d,
                    scan.singles_c[dip],
                    scan.singles_d[dip],
                ],
            ]
        ).astype(float)
        value = func(counts)
        sigma = propagate_poisson(func, counts)
        return VisibilityEstimate(value=float(value), sigma=float(sigma))

    return HomVisibilities(
        raw=_visibility(0),
        background_subtracted=_visibility(1),
        accidental_corrected=_visibility(2),
        dip_index=dip,
        baseline_indices=base_idx,
    )


@dataclass(frozen=True)
class RateEstimate:
    rate_hz: float
    sigma_hz: float


@dataclass(frozen=True)
class CountSummary:
    singles: dict
    coincidence: Optional[RateEstimate]
    background_coincidence: Optional[RateEstimate]
    accidental: Optional[RateEstimate]


def count_summary(
    stream: TagStream, background: Optional[TagStream] = None
) -> CountSummary:
    """Per-channel singles rates, pulse coincidence rate, and accidentals.

    Coincidence and accidental rates are reported only for two-channel
    streams; the accidental estimate pairs one photon rate with the other
    channel's background rate inside one pulse window.
    """
    if stream.duration_s <= 0:
        raise ValueError("stream duration must be positive")

    def _rates(s: TagStream) -> dict:
        out = {}
        for ch in np.unique(s.channel):
            n = int(np.count_nonzero(s.channel == ch))
            out[int(ch)] = RateEstimate(n / s.duration_s, np.sqrt(n) / s.duration_s)
        return out

    singles = _rates(stream)
    channels = sorted(singles)
    coincidence = None
    accidental = None
    background_coincidence = None

    if len(channels) == 2:
        a = stream.select_channel(channels[0])
        b = stream.select_channel(channels[1])
        shared = np.intersect1d(np.unique(a.clock_index), np.unique(b.clock_index))
        n_cc = int(shared.size)
        coincidence = RateEstimate(
            n_cc / stream.duration_s, np.sqrt(n_cc) / stream.duration_s
        )

    if background is not None:
        if background.duration_s <= 0:
            raise ValueError("background duration must be positive")
        bg_rates = _rates(background)
        if len(channels) == 2 and all(ch in bg_rates for ch in channels):
            bg_a_rate = bg_rates[channels[0]].rate_hz
            bg_b_rate = bg_rates[channels[1]].rate_hz
            bg_a = background.select_channel(channels[0])
            bg_b = background.select_channel(channels[1])
            shared_bg = np.intersect1d(
                np.unique(bg_a.clock_index), np.unique(bg_b.clock_index)
            )
            background_coincidence = RateEstimate(
                shared_bg.size / background.duration_s,
                np.sqrt(shared_bg.size) / background.duration_s,
            )
            rep_rate = 1e12 / stream.clock_period_ps
            r_a = singles[channels[0]].rate_hz
            r_b = singles[channels[1]].rate_hz
            acc = (
                max(r_a - bg_a_rate, 0.0) * bg_b_rate
                + bg_a_rate * max(r_b - bg_b_rate, 0.0)
            ) / rep_rate
            accidental = RateEstimate(acc, 0.0)

    return CountSummary(
        singles=singles,
        coincidence=coincidence,
        background_coincidence=background_coincidence,
        accidental=accidental,
    )
