"""Closed-form estimator PSDs, node variances and Chebyshev error bounds."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateNormalizationError, InvalidParameterError
from .estimators import powersum_ratio
from .spectral import SpectralDecomposition


def estimator_psd(p, eigenvalues, lambda1: float, depth: int | None = None) -> np.ndarray:
    """PSD of the graph shift average with ``depth`` diffusion terms (default N)."""
    p = np.asarray(p, dtype=float)
    if depth is None:
        depth = len(p)
    gain = powersum_ratio(eigenvalues, lambda1, depth)
    q = p * np.abs(gain) ** 2
    q[0] = p[0]
    return q


def filtered_psd(p, freq_response) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    h = np.asarray(freq_response, dtype=complex)
    if h[0] == 0:
        raise DegenerateNormalizationError("filter has zero DC response")
    r = p * np.abs(h / h[0]) ** 2
    r[0] = p[0]
    return r


def node_variance(spectrum_psd, d: SpectralDecomposition, k: int) -> float:
    """``sum_n psd_n |v_{k,n}|^2``, the variance at 0-based node ``k``."""
    if not 0 <= k < d.n:
        raise InvalidParameterError(f"node index {k} out of range for N={d.n}")
    return float(np.sum(np.asarray(spectrum_psd) * np.abs(d.eigenvectors[k]) ** 2))


def node_variances(spectrum_psd, d: SpectralDecomposition) -> np.ndarray:
    return np.abs(d.eigenvectors) ** 2 @ np.asarray(spectrum_psd, dtype=float)


class ChebyshevBound(NamedTuple):
    raw: float
    clipped: float


def chebyshev_bound(variance: float, epsilon: float) -> ChebyshevBound:
    if epsilon <= 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    raw = variance / epsilon**2
    return ChebyshevBound(raw, min(raw, 1.0))


def mse(r) -> float:
    return float(np.sum(r))


def log_det(r) -> float:
    """Log-volume of the error ellipsoid; ``-inf`` when it has collapsed."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        return float("-inf")
    return float(np.sum(np.log(r)))


def consensus_limit(p1: float, v_k1: float, epsilon: float) -> float:
    """Error bound floor as the diffusion depth grows on a fixed graph."""
    if epsilon <= 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    return p1 * v_k1**2 / epsilon**2


@dataclass(frozen=True)
class BoundReport:
    node: int
    epsilon: float
    variance: float
    chebyshev: float
    q_or_r: np.ndarray

    @property
    def clipped(self) -> float:
        return min(self.chebyshev, 1.0)

    def csv_row(self) -> list:
        return [
            self.node + 1,
            format(self.epsilon, ".17g"),
            format(self.variance, ".17g"),
            format(self.chebyshev, ".17g"),
            format(self.clipped, ".17g"),
        ]


CSV_HEADER = ["node", "epsilon", "variance", "bound_raw", "bound_clipped"]


def bound_report(spectrum_psd, d: SpectralDecomposition, k: int, epsilon: float) -> BoundReport:
    var = node_variance(spectrum_psd, d, k)
    return BoundReport(k, epsilon, var, chebyshev_bound(var, epsilon).raw, np.asarray(spectrum_psd))


def write_reports(fh, reports) -> None:
    writer = csv.writer(fh)
    writer.writerow(CSV_HEADER)
    for rep in reports:
        writer.writerow(rep.csv_row())
