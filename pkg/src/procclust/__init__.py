"""Nonparametric clustering of stationary random processes by PSD distance."""

from .cluster import (
    ClusteringResult,
    eigengap_estimate,
    hierarchical,
    km_farthest,
    kmit,
    nnpc,
    spectral_cluster,
    tsc_baseline,
)
from .dissimilarity import pairwise_distances, psd_distance
from .evaluation import clustering_error, confusion_entropy
from .genmodel import CorruptionSpec, ar2_model, corrupt, make_dataset, sample_ar2
from .spectra import (
    Observation,
    PsdEstimate,
    WindowFunction,
    bartlett_window,
    bias_corrected_window,
    bt_psd,
    estimate_acf,
    estimate_psds,
    normalize_power,
)

__version__ = "0.1.0"
