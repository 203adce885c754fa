"""Command-line entry point: reproducible runs from config files.

Subcommands: jsa (model analysis), calibrate (dispersion fit), simulate
(synthetic runs), analyze (measurement pipeline on a run directory) and
theory (closed-form correlation curves).  Every command writes its outputs
into --out; data files are deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import configio, montecarlo, reporting, tagio
from . import jsa as jsa_mod
from . import photon_stats, spectrometer, tags, uncertainty
from .errors import SqueezeLabError


def _manifest(cfg: configio.ExperimentConfig, config_path, outdir, seed) -> dict:
    return {
        "config_path": str(config_path),
        "config_echo": configio.describe(cfg),
        "config_text": cfg.raw_text,
        "content_hash_sha256": cfg.content_hash(),
        "seed": seed,
        "output_directory": str(outdir),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _build_model(cfg: configio.ExperimentConfig):
    """Source amplitude, its decomposition, and the filtered state if any."""
    grid = jsa_mod.default_grid(cfg.source, n=cfg.grid.n, span_bandwidths=cfg.grid.span_bandwidths)
    psi = jsa_mod.build_jsa(cfg.source, grid)
    dec = jsa_mod.schmidt_decompose(psi)
    filtered = None
    transmissions = None
    if cfg.filter_signal is not None and cfg.filter_idler is not None:
        filtered, transmissions = jsa_mod.apply_filter(
            psi, cfg.filter_signal, cfg.filter_idler
        )
    return grid, psi, dec, filtered, transmissions


def cmd_jsa(args) -> int:
    cfg = configio.load(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    grid, psi, dec, filtered, transmissions = _build_model(cfg)

    reporting.export_jsa(outdir, psi)
    reporting.export_schmidt(outdir, dec)
    signal, idler = jsa_mod.marginal_spectra(psi.intensity(), grid)
    reporting.export_marginals(outdir, signal, idler)

    k_value = jsa_mod.effective_mode_number(dec)
    report = {
        "K": k_value,
        "K_ABS": jsa_mod.k_abs(psi),
        "marginal_fwhm_nm": {
            "signal": _omega_width_to_nm(jsa_mod.spectrum_fwhm(signal), grid),
            "idler": _omega_width_to_nm(jsa_mod.spectrum_fwhm(idler), grid),
        },
        "marginal_overlap": jsa_mod.overlap_integral(
            jsa_mod.to_amplitude(signal), jsa_mod.to_amplitude(idler)
        ),
    }
    if filtered is not None:
        fsignal, fidler = jsa_mod.marginal_spectra(filtered.intensity(), grid)
        delays = cfg.hom.delays_ps() * 1e-12
        pc = jsa_mod.hom_curve(filtered, delays)
        report["filtered"] = {
            "K": jsa_mod.effective_mode_number(jsa_mod.schmidt_decompose(filtered)),
            "K_ABS": jsa_mod.k_abs(filtered),
            "main_mode_transmission": {
                "signal": float(transmissions.signal[0]),
                "idler": float(transmissions.idler[0]),
            },
            "marginal_overlap": jsa_mod.overlap_integral(
                jsa_mod.to_amplitude(fsignal), jsa_mod.to_amplitude(fidler)
            ),
            "hom_visibility_single_pair": jsa_mod.hom_visibility(pc),
        }
        reporting.export_jsa(outdir, filtered, prefix="jsa_filtered")
        reporting.write_table_csv(
            outdir / "hom_curve.csv",
            {"delay_ps": delays * 1e12, "coincidence_probability": pc},
        )
        if not args.no_figures:
            reporting.figure_jsa(outdir / "jsa_filtered_abs.png", filtered, "|JSA| filtered")
    reporting.write_json(outdir / "report.json", report)
    if not args.no_figures:
        reporting.figure_jsa(outdir / "jsa_abs.png", psi)
        reporting.figure_marginals(outdir / "marginals.png", signal, idler)
        reporting.figure_schmidt_weights(outdir / "schmidt_weights.png", dec.weights)
    return 0


def _omega_width_to_nm(width, grid) -> float:
    center = 0.5 * (grid.omega_s[0] + grid.omega_s[-1])
    lam = 2 * np.pi * 299792458.0 / center
    return float(width * lam**2 / (2 * np.pi * 299792458.0) * 1e9)


def cmd_calibrate(args) -> int:
    points = spectrometer.load_calibration_csv(args.points)
    model = spectrometer.fit_dispersion(points)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    spectrometer.save_model(model, outdir / "dispersion_model.txt")
    detector = spectrometer.DetectorModel()
    report = {
        "zero_dispersion_nm": model.zero_dispersion_nm,
        "coefficients": {
            "c0_ps": model.coeffs[0],
            "c1_ps_per_nm": model.coeffs[1],
            "c2_ps_per_nm2": model.coeffs[2],
            "c3_ps_per_nm3": model.coeffs[3],
        },
        "residual_rms_ps": model.residual_rms_ps,
        "local_dispersion_1570_ps_per_nm": float(model.local_dispersion(1570.0))
        if model.in_range(1570.0)
        else None,
        "resolution_1570_nm_1sigma": spectrometer.resolution(model, detector, 1570.0)
        if model.in_range(1570.0)
        else None,
    }
    reporting.write_json(outdir / "calibration_report.json", report)
    if not args.no_figures:
        reporting.figure_dispersion_fit(outdir / "dispersion_fit.png", points, model)
    return 0


def cmd_simulate(args) -> int:
    cfg = configio.load(args.config)
    seed = args.seed if args.seed is not None else cfg.rng_seed
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = _manifest(cfg, args.config, outdir, seed)
    reporting.write_json(outdir / "manifest.json", manifest)

    needs_spectral = cfg.geometry is montecarlo.Geometry.TOF_MULTIPLEXED
    decomposition = None
    weights = None
    hom_delays = None
    hom_probs = None
    filtered = None
    if needs_spectral or cfg.hom_enabled:
        _, psi, dec, filtered, _ = _build_model(cfg)
        decomposition = dec
        weights = dec.weights
    if cfg.hom_enabled:
        state = filtered if filtered is not None else psi
        hom_delays = cfg.hom.delays_ps()
        hom_probs = jsa_mod.hom_curve(state, hom_delays * 1e-12)

    run = configio.build_run_config(
        cfg,
        seed=seed,
        decomposition=decomposition,
        schmidt_weights=weights,
        hom_delays_ps=hom_delays,
        hom_coincidence_probs=hom_probs,
    )

    summary = {"geometry": cfg.geometry.value, "seed": run.rng_seed}
    stream, counters = montecarlo.simulate_tag_run(run)
    tagio.write_binary(stream, outdir / "tags.bin")
    summary["tag_counters"] = counters.__dict__
    if cfg.geometry is montecarlo.Geometry.TOF_MULTIPLEXED:
        summary["demux_window_ps"] = list(montecarlo.tof_demux_window(run))
    else:
        records = montecarlo.simulate_tes_run(run)
        tagio.write_tes_csv(records, outdir / "tes_records.csv")
        summary["tes_records"] = int(records.clock_index.size)

    if cfg.hom_enabled:
        scan, background, n_trunc = montecarlo.simulate_hom_run(run)
        reporting.write_table_csv(
            outdir / "hom_scan.csv",
            {
                "delay_ps": scan.delays_ps,
                "coincidences": scan.coincidences,
                "n_pulses": scan.n_pulses,
                "singles_c": scan.singles_c,
                "singles_d": scan.singles_d,
            },
        )
        reporting.write_json(
            outdir / "hom_background.json",
            {
                "n_pulses": background.n_pulses,
                "coincidences": background.coincidences,
                "singles_c": background.singles_c,
                "singles_d": background.singles_d,
            },
        )
        summary["hom_multipair_truncated"] = n_trunc

    reporting.write_json(outdir / "run_summary.json", summary)
    return 0


def _load_run(rundir: Path):
    manifest = json.loads((rundir / "manifest.json").read_text())
    cfg = configio.loads(manifest["config_text"])
    return manifest, cfg


def cmd_analyze(args) -> int:
    rundir = Path(args.run_dir)
    manifest, cfg = _load_run(rundir)
    outdir = Path(args.out) if args.out else rundir
    outdir.mkdir(parents=True, exist_ok=True)
    mode = args.mode

    if mode in ("joint", "singles"):
        stream = tagio.read_binary(rundir / "tags.bin")
        run = configio.build_run_config(cfg, seed=manifest["seed"] or 0)
        window = montecarlo.tof_demux_window(run)
        demux = tags.demux_polarization(stream, cfg.demux_delay_ps, window)
        edges = cfg.analysis.bin_edges()
        if mode == "singles":
            spectra = {}
            for label, sub, model in (
                ("signal", demux.signal, cfg.dispersion_signal),
                ("idler", demux.idler, cfg.dispersion_idler),
            ):
                spec = tags.singles_spectrum(
                    sub, model, edges, path_latency_ps=cfg.path_latency_ps
                )
                reporting.export_singles(outdir, spec, f"singles_{label}")
                spectra[label] = spec
            reporting.write_json(
                outdir / "singles_summary.json",
                {
                    label: {
                        "binned": s.n_binned,
                        "alias_band": s.n_alias,
                        "unphysical": s.n_unphysical,
                    }
                    for label, s in spectra.items()
                },
            )
            if not args.no_figures:
                reporting.figure_singles(outdir / "singles.png", spectra)
        else:
            hist = tags.joint_spectrum(
                demux.signal,
                demux.idler,
                cfg.dispersion_signal,
                cfg.dispersion_idler,
                edges,
                edges,
                path_latency_ps=cfg.path_latency_ps,
            )
            reporting.export_histogram2d(outdir, hist)
            boot = uncertainty.bootstrap_kabs(
                hist, n_resamples=args.resamples, seed=args.seed or 0
            )
            reporting.write_json(
                outdir / "joint_summary.json",
                {
                    "k_abs": boot.point_estimate,
                    "sigma": boot.sigma,
                    "percentile_interval": [boot.percentile_low, boot.percentile_high],
                    "basic_interval": [boot.basic_low, boot.basic_high],
                    "n_resamples": boot.n_resamples,
                    "pairs": hist.n_pairs,
                    "binned": hist.n_binned,
                    "multi_tag_pulses": hist.n_multi_tag_pulses,
                },
            )
            if not args.no_figures:
                reporting.figure_histogram2d(
                    outdir / "joint_histogram.png", hist, "coincidence counts"
                )
        return 0

    if mode == "g2":
        stream = tagio.read_binary(rundir / "tags.bin")
        start = stream.select_channel(0)
        stop = stream.select_channel(1)
        estimate = tags.g2_peak_ratio(
            start, stop, stream.clock_period_ps, cfg.analysis.n_side_peaks
        )
        payload = {
            "peak_ratio": {"value": estimate.value, "sigma": estimate.sigma},
            "zero_peak_area": estimate.zero_peak_area,
        }
        tes_path = rundir / "tes_records.csv"
        if tes_path.exists():
            records = tagio.read_tes_csv(tes_path)
            counts = records.counts_histogram().sum(axis=1).astype(float)
            value, sigma = _g2_from_count_vector(counts)
            payload["photon_number"] = {"value": value, "sigma": sigma}
        reporting.write_json(outdir / "g2_summary.json", payload)
        if not args.no_figures:
            areas = {0: estimate.zero_peak_area}
            side = estimate.side_peak_areas
            half = side.size // 2
            for i, a in enumerate(side[:half]):
                areas[i - half] = a
            for i, a in enumerate(side[half:]):
                areas[i + 1] = a
            reporting.figure_g2_peaks(outdir / "g2_peaks.png", areas)
        return 0

    if mode == "hom":
        scan_rows = np.loadtxt(
            rundir / "hom_scan.csv", delimiter=",", skiprows=1, ndmin=2
        )
        scan = tags.HomScan(
            delays_ps=scan_rows[:, 0],
            coincidences=scan_rows[:, 1].astype(np.int64),
            n_pulses=scan_rows[:, 2].astype(np.int64),
            singles_c=scan_rows[:, 3].astype(np.int64),
            singles_d=scan_rows[:, 4].astype(np.int64),
        )
        bg_raw = json.loads((rundir / "hom_background.json").read_text())
        background = tags.HomBackground(
            n_pulses=bg_raw["n_pulses"],
            coincidences=bg_raw["coincidences"],
            singles_c=bg_raw["singles_c"],
            singles_d=bg_raw["singles_d"],
        )
        result = tags.hom_analysis(scan, background)
        reporting.write_json(
            outdir / "hom_summary.json",
            {
                "raw": {"value": result.raw.value, "sigma": result.raw.sigma},
                "background_subtracted": {
                    "value": result.background_subtracted.value,
                    "sigma": result.background_subtracted.sigma,
                },
                "accidental_corrected": {
                    "value": result.accidental_corrected.value,
                    "sigma": result.accidental_corrected.sigma,
                },
                "dip_delay_ps": float(scan.delays_ps[result.dip_index]),
            },
        )
        if not args.no_figures:
            reporting.figure_hom(outdir / "hom_scan.png", scan)
        return 0

    raise SqueezeLabError(f"unknown analysis mode {mode!r}")


def _g2_from_count_vector(counts):
    from .photon_stats import g2_from_pn, pn_from_counts
    from .uncertainty import propagate_poisson

    def func(c):
        n = np.arange(c.size, dtype=float)
        mean = n @ c / c.sum()
        second = (n * (n - 1.0)) @ c / c.sum()
        return second / mean**2

    value = g2_from_pn(pn_from_counts(counts))
    sigma = propagate_poisson(func, counts[counts >= 0])
    return float(value), float(sigma)


def cmd_theory(args) -> int:
    n_mean = np.geomspace(args.nbar_min, args.nbar_max, args.points)
    curves = photon_stats.theory_curves(n_mean)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    reporting.write_table_csv(
        outdir / "theory_curves.csv",
        {
            "mean_photons": curves["n_mean"],
            "g2_cross": curves["g2_hv"],
            "g2_auto_thermal": curves["g2_hh"],
            "g2_auto_squeezed_port": curves["g2_cc"],
        },
    )
    if not args.no_figures:
        reporting.figure_theory(outdir / "theory_curves.png", curves)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squeezelab",
        description="Pulsed two-mode squeezed light: simulation and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_jsa = sub.add_parser("jsa", help="joint spectral model analysis")
    p_jsa.add_argument("--config", required=True)
    p_jsa.add_argument("--out", required=True)
    p_jsa.add_argument("--no-figures", action="store_true")
    p_jsa.set_defaults(func=cmd_jsa)

    p_cal = sub.add_parser("calibrate", help="fit a dispersion model")
    p_cal.add_argument("points", help="CSV of wavelength_nm, delay_ps")
    p_cal.add_argument("--out", required=True)
    p_cal.add_argument("--no-figures", action="store_true")
    p_cal.set_defaults(func=cmd_calibrate)

    p_sim = sub.add_parser("simulate", help="generate a synthetic run")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_ana = sub.add_parser("analyze", help="run the measurement pipeline")
    p_ana.add_argument("run_dir")
    p_ana.add_argument("--mode", required=True, choices=["joint", "hom", "g2", "singles"])
    p_ana.add_argument("--out", default=None)
    p_ana.add_argument("--seed", type=int, default=None)
    p_ana.add_argument("--resamples", type=int, default=1000)
    p_ana.add_argument("--no-figures", action="store_true")
    p_ana.set_defaults(func=cmd_analyze)

    p_thy = sub.add_parser("theory", help="closed-form correlation curves")
    p_thy.add_argument("--nbar-min", type=float, default=0.01)
    p_thy.add_argument("--nbar-max", type=float, default=2.0)
    p_thy.add_argument("--points", type=int, default=50)
    p_thy.add_argument("--out", required=True)
    p_thy.add_argument("--no-figures", action="store_true")
    p_thy.set_defaults(func=cmd_theory)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SqueezeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: missing input file: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
