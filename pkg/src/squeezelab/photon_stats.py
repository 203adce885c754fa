"""Photon-number statistics of squeezed vacua and detection-level transforms.

Closed forms for the two-mode squeezed vacuum ladder, its single-mode
counterpart, Schmidt-weighted multimode generalizations, binomial loss, and
the normalized second-order correlations used throughout the measurement
pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import NumericError, UnsupportedInputError

TAIL_TOLERANCE = 1e-9
DEFAULT_NMAX = 32


@dataclass(frozen=True)
class PhotonNumberDistribution:
    """Probabilities p_0..p_nmax for one detection mode.

    ``truncated`` marks distributions whose tail mass beyond nmax exceeds
    1e-9; the deficit from 1 is exactly that tail.
    """

    probs: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1D array")
        if np.any(probs < -1e-12):
            raise ValueError("probabilities must be non-negative")
        if probs.sum() > 1.0 + 1e-12:
            raise ValueError("probabilities sum above 1")
        object.__setattr__(self, "probs", np.clip(probs, 0.0, None))

    @property
    def nmax(self) -> int:
        return self.probs.size - 1

    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)


@dataclass(frozen=True)
class JointPhotonNumberDistribution:
    """Joint probabilities p_{n,m} over signal count n and idler count m."""

    probs: np.ndarray = field(repr=False)
    truncated: bool = False

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 2:
            raise ValueError("joint probs must be a 2D array")
        if np.any(probs < -1e-12):
            raise ValueError("probabilities must be non-negative")
        if probs.sum() > 1.0 + 1e-12:
            raise ValueError("probabilities sum above 1")
        object.__setattr__(self, "probs", np.clip(probs, 0.0, None))

    def marginals(self):
        return (
            PhotonNumberDistribution(self.probs.sum(axis=1), self.truncated),
            PhotonNumberDistribution(self.probs.sum(axis=0), self.truncated),
        )


@dataclass(frozen=True)
class SqueezerSpec:
    """Mean photons per beam per pulse plus optional Schmidt weights.

    A zero mean is allowed (vacuum / background-only runs); operations that
    need a nonzero mean raise NumericError themselves.
    """

    mean_total_photons: float
    schmidt_weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mean_total_photons < 0:
            raise ValueError("mean photon number must be non-negative")
        if self.schmidt_weights is not None:
            weights = np.asarray(self.schmidt_weights, dtype=float)
            if weights.ndim != 1 or weights.size == 0:
                raise ValueError("schmidt_weights must be a 1D array")
            if np.any(weights < 0):
                raise ValueError("schmidt_weights must be non-negative")
            if abs(weights.sum() - 1.0) > 1e-9:
                raise ValueError("schmidt_weights must sum to 1")
            if np.any(np.diff(weights) > 1e-12):
                raise ValueError("schmidt_weights must be descending")
            object.__setattr__(self, "schmidt_weights", weights)

    @property
    def is_single_mode(self) -> bool:
        return self.schmidt_weights is None or self.schmidt_weights.size == 1

    def per_mode_means(self, weight_floor: float = 1e-12) -> np.ndarray:
        """Per-mode thermal means mu_n with sum = mean_total_photons.

        Per-mode squeeze parameters scale as r_n = c*sqrt(lambda_n) with c
        solved so the total mean is met.  In the low-gain limit this reduces
        to mu_n proportional to lambda_n.
        """
        if self.schmidt_weights is None:
            return np.array([self.mean_total_photons])
        weights = self.schmidt_weights[self.schmidt_weights > weight_floor]
        total = self.mean_total_photons
        if total == 0:
            return np.zeros(weights.size)
        root = np.sqrt(weights)

        def excess(c):
            return float(np.sum(np.sinh(c * root) ** 2)) - total

        hi = 1.0
        while excess(hi) < 0:
            hi *= 2.0
        c_opt = brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-14)
        return np.sinh(c_opt * root) ** 2


def _thermal_pmf(mu: float, nmax: int) -> np.ndarray:
    n = np.arange(nmax + 1)
    if mu == 0:
        pmf = np.zeros(nmax + 1)
        pmf[0] = 1.0
        return pmf
    ratio = mu / (1.0 + mu)
    return ratio**n / (1.0 + mu)


def tmsv_joint_pn(spec: SqueezerSpec, nmax: int = DEFAULT_NMAX):
    """Two-mode squeezed vacuum joint distribution, p_{n,n} = mu^n/(1+mu)^(n+1).

    Off-diagonal terms vanish: photon numbers in the two beams are perfectly
    correlated.  Requires a single-mode spec.
    """
    if not spec.is_single_mode:
        raise UnsupportedInputError("tmsv_joint_pn requires a single-mode spec")
    mu = spec.mean_total_photons
    diag = _thermal_pmf(mu, nmax)
    probs = np.zeros((nmax + 1, nmax + 1))
    np.fill_diagonal(probs, diag)
    tail = 1.0 - diag.sum()
    return JointPhotonNumberDistribution(probs, truncated=tail > TAIL_TOLERANCE)


def multimode_joint_pn(spec: SqueezerSpec, nmax: int = DEFAULT_NMAX):
    """Convolution of independent per-mode TMSV ladders.

    Each Schmidt mode emits perfectly correlated pairs, so the joint
    distribution stays diagonal and is the 1D convolution of the per-mode
    thermal distributions.
    """
    diag = np.zeros(nmax + 1)
    diag[0] = 1.0
    for mu in spec.per_mode_means():
        diag = np.convolve(diag, _thermal_pmf(mu, nmax))[: nmax + 1]
    probs = np.zeros((nmax + 1, nmax + 1))
    np.fill_diagonal(probs, diag)
    tail = 1.0 - diag.sum()
    return JointPhotonNumberDistribution(probs, truncated=tail > TAIL_TOLERANCE)


def smsv_pn(mean_photons: float, nmax: int = DEFAULT_NMAX):
    """Single-mode squeezed vacuum: even photon numbers only.

    p_{2m} = (2m)! / (2^{2m} (m!)^2) * tanh(r)^{2m} / cosh(r), with
    sinh(r)^2 = mean_photons.
    """
    if mean_photons < 0:
        raise ValueError("mean photon number must be non-negative")
    probs = np.zeros(nmax + 1)
    if mean_photons == 0:
        probs[0] = 1.0
        return PhotonNumberDistribution(probs, truncated=False)
    r = math.asinh(math.sqrt(mean_photons))
    log_tanh = math.log(math.tanh(r))
    log_cosh = math.log(math.cosh(r))
    m_values = np.arange(nmax // 2 + 1)
    log_p = (
        gammaln(2 * m_values + 1)
        - 2 * m_values * math.log(2.0)
        - 2 * gammaln(m_values + 1)
        + 2 * m_values * log_tanh
        - log_cosh
    )
    probs[2 * m_values] = np.exp(log_p)
    tail = 1.0 - probs.sum()
    return PhotonNumberDistribution(probs, truncated=tail > TAIL_TOLERANCE)


def g2_from_pn(pn: PhotonNumberDistribution) -> float:
    """Normalized autocorrelation sum n(n-1) p_n / (sum n p_n)^2."""
    n = np.arange(pn.probs.size, dtype=float)
    mean = float(n @ pn.probs)
    if mean <= 0:
        raise NumericError("g2 undefined for zero mean photon number")
    second_factorial = float((n * (n - 1.0)) @ pn.probs)
    return second_factorial / mean**2


def g2_cross(joint: JointPhotonNumberDistribution) -> float:
    """Cross-correlation <n m> / (<n> <m>) between two distinct modes."""
    probs = joint.probs
    n = np.arange(probs.shape[0], dtype=float)
    m = np.arange(probs.shape[1], dtype=float)
    mean_n = float(n @ probs.sum(axis=1))
    mean_m = float(m @ probs.sum(axis=0))
    if mean_n <= 0 or mean_m <= 0:
        raise NumericError("cross g2 undefined when a marginal mean vanishes")
    cross = float(n @ probs @ m)
    return cross / (mean_n * mean_m)


def theory_curves(mean_photons) -> dict:
    """Cross, thermal-auto and squeezed-port autocorrelation vs mean photons.

    Returns a dict of arrays: n_mean, g2_hv = 2 + 1/n, g2_hh = 2 and
    g2_cc = 3 + 1/n.
    """
    n_mean = np.atleast_1d(np.asarray(mean_photons, dtype=float))
    if np.any(n_mean <= 0):
        raise ValueError("mean photon numbers must be positive")
    return {
        "n_mean": n_mean,
        "g2_hv": 2.0 + 1.0 / n_mean,
        "g2_hh": np.full(n_mean.shape, 2.0),
        "g2_cc": 3.0 + 1.0 / n_mean,
    }


def binomial_loss_matrix(eta: float, nmax: int) -> np.ndarray:
    """L[m, n] = C(n, m) eta^m (1-eta)^(n-m) for m <= n."""
    from scipy.stats import binom

    m_grid, n_grid = np.meshgrid(np.arange(nmax + 1), np.arange(nmax + 1), indexing="ij")
    return binom.pmf(m_grid, n_grid, eta)


def apply_binomial_loss(pn: PhotonNumberDistribution, efficiency: float):
    """Thin a photon-number distribution by detection efficiency eta."""
    if not 0.0 <= efficiency <= 1.0:
        raise ValueError("efficiency must be in [0, 1]")
    if efficiency == 1.0:
        return PhotonNumberDistribution(pn.probs.copy(), pn.truncated)
    if efficiency == 0.0:
        probs = np.zeros_like(pn.probs)
        probs[0] = pn.probs.sum()
        return PhotonNumberDistribution(probs, pn.truncated)
    loss = binomial_loss_matrix(efficiency, pn.nmax)
    return PhotonNumberDistribution(loss @ pn.probs, pn.truncated)


def mean_photons_to_squeezing_db(mean_photons: float) -> float:
    """Quadrature squeezing in dB for a pure squeezed vacuum of given mean.

    r = asinh(sqrt(<n>)); dB = -10 log10(exp(-2r)).
    """
    if mean_photons < 0:
        raise ValueError("mean photon number must be non-negative")
    r = math.asinh(math.sqrt(mean_photons))
    return 20.0 * r * math.log10(math.e)


def beamsplitter_mix(spec: SqueezerSpec, nmax: int = DEFAULT_NMAX):
    """Photon statistics at each output port of a balanced beam splitter.

    For a single-mode two-mode squeezed vacuum with identical signal/idler
    mode functions, each output port carries an independent single-mode
    squeezed vacuum with the same per-port mean.
    """
    if not spec.is_single_mode:
        raise UnsupportedInputError(
            "beamsplitter_mix supports only single-mode input; use the "
            "truncated number-basis transform for multimode states"
        )
    port = smsv_pn(spec.mean_total_photons, nmax)
    return port, PhotonNumberDistribution(port.probs.copy(), port.truncated)


def pn_from_counts(counts) -> PhotonNumberDistribution:
    """Empirical photon-number distribution from per-outcome event counts."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise NumericError("no events to form a distribution")
    return PhotonNumberDistribution(counts / total, truncated=False)
