"""Exact linear-optics transforms on a truncated two-mode Fock basis.

Small and slow by design: this is the reference route for beam-splitter
statistics, used to precompute the multi-pair interference table for the
Monte-Carlo generator and as an independent check of the closed forms in
photon_stats.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import expm


def _lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1)


@lru_cache(maxsize=None)
def beamsplitter_unitary(cutoff: int, theta: float = math.pi / 4) -> np.ndarray:
    """Unitary exp(theta (a b^dag - a^dag b)) on the (cutoff+1)^2 basis.

    theta = pi/4 is the balanced splitter.  The generator conserves total
    photon number, so amplitudes of states with n_a + n_b <= cutoff are
    exact despite the truncation.
    """
    dim = cutoff + 1
    a = np.kron(_lowering(dim), np.eye(dim))
    b = np.kron(np.eye(dim), _lowering(dim))
    generator = theta * (a @ b.conj().T - a.conj().T @ b)
    return expm(generator)


def transform_state(state: np.ndarray, cutoff: int) -> np.ndarray:
    """Apply the balanced beam splitter to a two-mode state vector."""
    u = beamsplitter_unitary(cutoff)
    return u @ state.reshape(-1)


def pair_fock_output_pmf(pairs: int) -> np.ndarray:
    """Joint output pmf over (n_c, n_d) for a |k, k> input on a 50/50 splitter.

    Exact for indistinguishable photons; truncation is lossless because the
    cutoff is chosen at the total photon number 2k.
    """
    if pairs < 0:
        raise ValueError("pair count must be non-negative")
    if pairs == 0:
        return np.array([[1.0]])
    cutoff = 2 * pairs
    dim = cutoff + 1
    state = np.zeros((dim, dim))
    state[pairs, pairs] = 1.0
    out = transform_state(state, cutoff).reshape(dim, dim)
    return np.abs(out) ** 2


def tmsv_state(mean_photons: float, cutoff: int) -> np.ndarray:
    """Two-mode squeezed vacuum amplitudes on the truncated basis."""
    r = math.asinh(math.sqrt(mean_photons))
    n = np.arange(cutoff + 1)
    amplitudes = np.tanh(r) ** n / math.cosh(r)
    state = np.zeros((cutoff + 1, cutoff + 1))
    state[n, n] = amplitudes
    return state


def tmsv_port_pmf(mean_photons: float, cutoff: int) -> np.ndarray:
    """Photon-number pmf of one output port for a TMSV through the splitter."""
    out = transform_state(tmsv_state(mean_photons, cutoff), cutoff)
    joint = np.abs(out.reshape(cutoff + 1, cutoff + 1)) ** 2
    return joint.sum(axis=1)
