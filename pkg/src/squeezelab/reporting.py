"""Delimited output files, JSON summaries and rendered figures.

Data files are the primary products (units in every header, byte-stable
across reruns); figures are rendered alongside them for quick inspection.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .jsa import JointSpectralAmplitude, SchmidtDecomposition, Spectrum
from .tags import Histogram2D, HomScan, SinglesSpectrum
from .units import omega_to_wavelength


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_table_csv(path, columns: dict, comments=()) -> None:
    """Write named columns; keys carry the units (e.g. wavelength_nm)."""
    arrays = [np.atleast_1d(np.asarray(v)) for v in columns.values()]
    length = arrays[0].size
    if any(a.size != length for a in arrays):
        raise ValueError("all columns must have equal length")
    with Path(path).open("w") as handle:
        for comment in comments:
            handle.write(f"# {comment}\n")
        handle.write(",".join(columns.keys()) + "\n")
        for row in range(length):
            handle.write(",".join(repr(a[row].item()) for a in arrays) + "\n")


def write_matrix_csv(path, matrix, row_axis, col_axis, axis_label: str) -> None:
    """Matrix with header row/column carrying the axes.

    The top-left cell names the axes; the first header row is the column
    axis, the first column of each data row the row axis.
    """
    matrix = np.asarray(matrix)
    with Path(path).open("w") as handle:
        header = ",".join(repr(float(c)) for c in col_axis)
        handle.write(f"{axis_label},{header}\n")
        for value, row in zip(row_axis, matrix):
            cells = ",".join(repr(float(x)) for x in row)
            handle.write(f"{float(value)!r},{cells}\n")


def export_jsa(outdir, jsa: JointSpectralAmplitude, prefix: str = "jsa") -> list:
    """Modulus and phase matrices with wavelength axes in nm."""
    outdir = Path(outdir)
    lam_s = omega_to_wavelength(jsa.grid.omega_s) * 1e9
    lam_i = omega_to_wavelength(jsa.grid.omega_i) * 1e9
    files = []
    for name, data in (
        ("abs", np.abs(jsa.amplitude)),
        ("phase", np.angle(jsa.amplitude)),
    ):
        path = outdir / f"{prefix}_{name}.csv"
        write_matrix_csv(path, data, lam_s, lam_i, "signal_nm\\idler_nm")
        files.append(path)
    return files


def export_schmidt(outdir, dec: SchmidtDecomposition, n_modes: int = 8) -> list:
    outdir = Path(outdir)
    files = []
    weights_path = outdir / "schmidt_weights.csv"
    write_table_csv(
        weights_path,
        {"mode": np.arange(1, dec.weights.size + 1), "weight": dec.weights},
    )
    files.append(weights_path)
    lam_s = omega_to_wavelength(dec.grid.omega_s) * 1e9
    lam_i = omega_to_wavelength(dec.grid.omega_i) * 1e9
    keep = min(n_modes, dec.weights.size)
    for label, axis, modes in (
        ("signal", lam_s, dec.signal_modes),
        ("idler", lam_i, dec.idler_modes),
    ):
        cols = {"wavelength_nm": axis}
        for n in range(keep):
            cols[f"mode_{n + 1}_abs"] = np.abs(modes[n])
        path = outdir / f"schmidt_modes_{label}.csv"
        write_table_csv(path, cols)
        files.append(path)
    return files


def export_marginals(outdir, signal: Spectrum, idler: Spectrum) -> Path:
    path = Path(outdir) / "marginals.csv"
    write_table_csv(
        path,
        {
            "wavelength_nm": signal.wavelength_nm,
            "signal_density_per_rad_s": signal.values,
            "idler_density_per_rad_s": idler.values,
        },
    )
    return path


def export_histogram2d(outdir, hist: Histogram2D, name: str = "joint_histogram") -> Path:
    path = Path(outdir) / f"{name}.csv"
    centers_s = 0.5 * (hist.edges_s_nm[:-1] + hist.edges_s_nm[1:])
    centers_i = 0.5 * (hist.edges_i_nm[:-1] + hist.edges_i_nm[1:])
    write_matrix_csv(path, hist.counts, centers_s, centers_i, "signal_nm\\idler_nm")
    return path


def export_singles(outdir, spec: SinglesSpectrum, name: str) -> Path:
    path = Path(outdir) / f"{name}.csv"
    write_table_csv(
        path,
        {"wavelength_nm": spec.centers_nm, "counts": spec.counts},
        comments=(
            f"binned = {spec.n_binned}",
            f"alias_band = {spec.n_alias}",
            f"unphysical = {spec.n_unphysical}",
        ),
    )
    return path


def _save(fig, path):
    fig.savefig(path, dpi=150)
    plt.close(fig)


def figure_jsa(path, jsa: JointSpectralAmplitude, title: str = "|JSA|") -> None:
    lam_s = omega_to_wavelength(jsa.grid.omega_s) * 1e9
    lam_i = omega_to_wavelength(jsa.grid.omega_i) * 1e9
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    mesh = ax.pcolormesh(lam_i, lam_s, np.abs(jsa.amplitude), shading="auto")
    fig.colorbar(mesh, ax=ax, label="amplitude")
    ax.set_xlabel("idler wavelength (nm)")
    ax.set_ylabel("signal wavelength (nm)")
    ax.set_title(title)
    _save(fig, path)


def figure_marginals(path, signal: Spectrum, idler: Spectrum) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(signal.wavelength_nm, signal.values, label="signal", color="tab:blue")
    ax.plot(idler.wavelength_nm, idler.values, label="idler", color="tab:red")
    ax.set_xlabel("wavelength (nm)")
    ax.set_ylabel("spectral density (1/(rad/s))")
    ax.legend()
    _save(fig, path)


def figure_schmidt_weights(path, weights, n_show: int = 10) -> None:
    fig, ax = plt.subplots(figsize=(4.4, 3.2))
    n = min(n_show, len(weights))
    ax.bar(np.arange(1, n + 1), weights[:n], color="tab:blue")
    ax.set_xlabel("mode")
    ax.set_ylabel("weight")
    ax.set_yscale("log")
    _save(fig, path)


def figure_dispersion_fit(path, points, model) -> None:
    lam = np.linspace(model.range_nm[0], model.range_nm[1], 400)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(lam, model.delay_ps(lam), color="tab:blue", label="cubic fit")
    pts = np.asarray(points)
    ax.plot(pts[:, 0], pts[:, 1], "k.", ms=4, label="calibration")
    ax.axvline(model.zero_dispersion_nm, color="tab:red", ls=":", label="fold")
    ax.set_xlabel("wavelength (nm)")
    ax.set_ylabel("group delay (ps)")
    ax.legend()
    _save(fig, path)


def figure_histogram2d(path, hist: Histogram2D, title: str) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    mesh = ax.pcolormesh(hist.edges_i_nm, hist.edges_s_nm, hist.counts, shading="auto")
    fig.colorbar(mesh, ax=ax, label="coincidences")
    ax.set_xlabel("idler wavelength (nm)")
    ax.set_ylabel("signal wavelength (nm)")
    ax.set_title(title)
    _save(fig, path)


def figure_singles(path, spectra: dict) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, spec in spectra.items():
        ax.step(spec.centers_nm, spec.counts, where="mid", label=label)
    ax.set_xlabel("wavelength (nm)")
    ax.set_ylabel("counts")
    ax.legend()
    _save(fig, path)


def figure_hom(path, scan: HomScan, corrected_rates=None) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    raw = scan.coincidences / scan.n_pulses
    ax.plot(scan.delays_ps, raw, "o-", ms=3, color="tab:red", label="raw")
    if corrected_rates is not None:
        ax.plot(
            scan.delays_ps, corrected_rates, "s-", ms=3, color="tab:blue",
            label="corrected",
        )
    ax.set_xlabel("relative delay (ps)")
    ax.set_ylabel("coincidence probability per pulse")
    ax.legend()
    _save(fig, path)


def figure_g2_peaks(path, areas: dict) -> None:
    fig, ax = plt.subplots(figsize=(4.4, 3.2))
    keys = sorted(areas)
    ax.bar(keys, [areas[k] for k in keys], color="tab:blue")
    ax.set_xlabel("peak index (clock periods)")
    ax.set_ylabel("pair counts")
    _save(fig, path)


def figure_theory(path, curves: dict) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(curves["n_mean"], curves["g2_hv"], "k--", label="cross")
    ax.plot(curves["n_mean"], curves["g2_hh"], "b:", label="single-beam auto")
    ax.plot(curves["n_mean"], curves["g2_cc"], "r-", label="mixed-port auto")
    ax.set_xlabel("mean photons per pulse")
    ax.set_ylabel("g2(0)")
    ax.set_xscale("log")
    ax.legend()
    _save(fig, path)
