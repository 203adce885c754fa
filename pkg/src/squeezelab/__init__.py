"""Simulation and photon-counting analysis for pulsed two-mode squeezed light.

Modules map onto the experiment: `jsa` (joint spectral model and Schmidt
analysis), `photon_stats` (squeezed-vacuum number statistics and g2),
`spectrometer` (dispersive-fiber time-of-flight model), `tags` (time-tag
processing), `montecarlo` (synthetic runs), `uncertainty` (bootstrap and
Poisson propagation), `cli` (command-line front end).
"""

from .jsa import (
    FrequencyGrid,
    JointSpectralAmplitude,
    SchmidtDecomposition,
    SourceConfig,
    SpectralFilter,
    FilterShape,
    apply_filter,
    build_jsa,
    build_phase_matching,
    build_pump_envelope,
    default_grid,
    effective_mode_number,
    hom_curve,
    hom_visibility,
    k_abs,
    marginal_spectra,
    overlap_integral,
    schmidt_decompose,
)
from .photon_stats import (
    JointPhotonNumberDistribution,
    PhotonNumberDistribution,
    SqueezerSpec,
    apply_binomial_loss,
    beamsplitter_mix,
    g2_cross,
    g2_from_pn,
    mean_photons_to_squeezing_db,
    multimode_joint_pn,
    smsv_pn,
    theory_curves,
    tmsv_joint_pn,
)
from .spectrometer import (
    Branch,
    DetectorModel,
    DispersionModel,
    delay_to_wavelength,
    fit_dispersion,
    resolution,
    wavelength_to_delay,
)
from .tags import (
    CountSummary,
    Histogram2D,
    TagStream,
    count_summary,
    demux_polarization,
    g2_peak_ratio,
    hom_analysis,
    joint_spectrum,
    singles_spectrum,
)
from .montecarlo import (
    Geometry,
    RunConfig,
    simulate_hom_run,
    simulate_pair_source,
    simulate_tag_run,
    simulate_tes_run,
)
from .uncertainty import BootstrapResult, bootstrap_kabs, propagate_poisson

__version__ = "0.1.0"
