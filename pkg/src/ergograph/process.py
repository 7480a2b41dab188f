"""Wide-sense-stationary graph processes: moments, sampling and PSD families."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidParameterError, InvalidPsdError, SingularPrecisionError
from .spectral import SpectralDecomposition

NEG_TOL = 1e-10


@dataclass(frozen=True)
class WssProcess:
    """Gaussian process with mean ``mu * v1`` and covariance ``V diag(psd) V^H``."""

    decomposition: SpectralDecomposition
    mu: float
    psd: np.ndarray

    def __post_init__(self):
        psd = np.asarray(self.psd, dtype=float)
        if psd.shape != (self.decomposition.n,):
            raise InvalidParameterError(f"psd has shape {psd.shape}, expected ({self.decomposition.n},)")
        if not np.all(np.isfinite(psd)):
            raise InvalidPsdError("psd entries must be finite")
        if np.any(psd < -NEG_TOL * max(np.abs(psd).max(), 1.0)):
            raise InvalidPsdError(f"negative psd entries at {np.flatnonzero(psd < 0).tolist()}")
        object.__setattr__(self, "psd", np.clip(psd, 0.0, None))

    @property
    def n(self) -> int:
        return self.decomposition.n

    @cached_property
    def sqrt_covariance(self) -> np.ndarray:
        """Symmetric square root ``V diag(sqrt(p)) V^H`` (real)."""
        v = self.decomposition.eigenvectors
        root = (v * np.sqrt(self.psd)) @ v.conj().T
        return _real_or_raise(root, self.psd)


def _real_or_raise(m, psd):
    if not np.iscomplexobj(m):
        return m
    if np.abs(m.imag).max(initial=0.0) > 1e-10 * max(psd.max(initial=0.0), 1.0):
        raise InvalidPsdError("psd is not conjugate-symmetric over the eigenbasis; covariance is not real")
    return m.real.copy()


def ensemble_mean(proc: WssProcess) -> np.ndarray:
    return proc.mu * proc.decomposition.v1


def covariance(proc: WssProcess) -> np.ndarray:
    v = proc.decomposition.eigenvectors
    return _real_or_raise((v * proc.psd) @ v.conj().T, proc.psd)


def sample(proc: WssProcess, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw one realization, or an ``N x size`` stack of independent realizations."""
    shape = (proc.n,) if size is None else (proc.n, size)
    w = rng.standard_normal(shape)
    mean = ensemble_mean(proc)
    if size is not None:
        mean = mean[:, None]
    return mean + proc.sqrt_covariance @ w


def gmrf_psd(d: SpectralDecomposition, a: float, a0: float) -> np.ndarray:
    """PSD of the Gauss-Markov field with covariance |a0|^2 (I - aS)^-1 (I - aS)^-H."""
    gap = np.abs(1.0 - a * d.eigenvalues)
    if gap.min() < 1e-12:
        bad = np.flatnonzero(gap < 1e-12).tolist()
        raise SingularPrecisionError(f"I - aS is singular (a={a}); offending eigenvalue indices {bad}")
    return abs(a0) ** 2 / gap**2


def gmrf_process(d: SpectralDecomposition, mu: float, snr_db: float, a_factor: float = 0.99) -> WssProcess:
    """GMRF with ``a = a_factor / lambda1`` and ``a0`` scaled so the DC power meets ``snr_db``."""
    a = a_factor / d.lambda1
    unit = gmrf_psd(d, a, 1.0)
    a0 = np.sqrt(snr_to_p1(mu, snr_db) / unit[0])
    return WssProcess(d, mu, gmrf_psd(d, a, a0))


def logspace_psd(n: int, p1: float, literal_dc: bool = False) -> np.ndarray:
    """Logarithmically spaced PSD from ``10 p1`` to ``10^4 p1``.

    The DC entry stays at ``p1`` unless ``literal_dc`` is set, in which case
    the spacing formula is applied at ``n = 1`` too (giving ``10 p1``).
    """
    if n < 2:
        raise InvalidParameterError(f"N must be >= 2, got {n}")
    if p1 < 0:
        raise InvalidParameterError(f"p1 must be nonnegative, got {p1}")
    idx = np.arange(n)
    psd = p1 * 10.0 ** (3.0 * idx / (n - 1) + 1.0)
    if not literal_dc:
        psd[0] = p1
    return psd


def flat_psd(n: int, p1: float) -> np.ndarray:
    return np.full(n, float(p1))


def snr_to_p1(mu: float, snr_db: float) -> float:
    if mu == 0:
        raise InvalidParameterError("SNR is undefined for a zero-mean process")
    return mu**2 * 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class WssReport:
    mean_alignment: float
    offdiag_energy: float
    passed: bool


def verify_wss(sample_mean, sample_cov, d: SpectralDecomposition, tol: float) -> WssReport:
    """Check that empirical moments look WSS with respect to ``d``.

    ``mean_alignment`` is the relative size of the mean's component
    orthogonal to ``v1``; ``offdiag_energy`` the relative Frobenius energy
    of ``V^H C V`` off its diagonal.
    """
    m = np.asarray(sample_mean)
    c = np.asarray(sample_cov)
    if m.shape != (d.n,) or c.shape != (d.n, d.n):
        raise InvalidParameterError("moment dimensions do not match the decomposition")
    v1 = d.eigenvectors[:, 0]
    residual = m - (v1.conj() @ m) * v1
    alignment = np.linalg.norm(residual) / max(np.linalg.norm(m), tol)
    spec = d.eigenvectors.conj().T @ c @ d.eigenvectors
    off = spec - np.diag(np.diag(spec))
    denom = np.linalg.norm(c)
    energy = np.linalg.norm(off) / denom if denom > 0 else 0.0
    return WssReport(float(alignment), float(energy), bool(alignment <= tol and energy <= tol))
