"""Ergodic mean estimation for wide-sense-stationary graph processes."""

from .errors import ErgographError
from .graphs import (
    Graph,
    ShiftKind,
    ShiftOperator,
    adjacency_shift,
    covariance_graph,
    directed_cycle,
    erdos_renyi,
    is_connected,
    normalized_adjacency_shift,
    sbm,
    sensor_network,
)
from .spectral import SpectralDecomposition, classify_spectrum, decompose, gft, igft, total_variation
from .process import WssProcess, covariance, ensemble_mean, sample
from .estimators import FilterSpec, filtered_estimator, graph_shift_average, optimal_mse_estimator
from .experiments import ExperimentConfig, run_experiment

__version__ = "0.1.0"
