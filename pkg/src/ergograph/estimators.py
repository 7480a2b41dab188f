"""Graph shift averages and unbiased graph-filter estimators of the ensemble mean."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNormalizationError, InvalidParameterError, RankDeficiencyError
from .graphs import ShiftOperator
from .spectral import SpectralDecomposition

NEAR_ONE = 1e-9


def diffusion_weights(lambda1: float, depth: int) -> np.ndarray:
    """``lambda1**l / sum_{j<depth} lambda1**j`` for ``l = 0..depth-1``.

    Evaluated without forming ``lambda1**depth``, so large spectral radii and
    deep diffusions do not overflow.
    """
    if depth < 1:
        raise InvalidParameterError(f"depth must be >= 1, got {depth}")
    if lambda1 <= 0:
        raise InvalidParameterError(f"lambda1 must be positive, got {lambda1}")
    ell = np.arange(depth)
    if abs(lambda1 - 1.0) <= NEAR_ONE:
        w = lambda1**ell
        return w / w.sum()
    if lambda1 > 1.0:
        r = 1.0 / lambda1
        # lambda1^l / alpha = r^(L-1-l) (1 - r) / (1 - r^L)
        return r ** (depth - 1 - ell) * (1.0 - r) / (1.0 - r**depth)
    return lambda1**ell * (1.0 - lambda1) / (1.0 - lambda1**depth)


def powersum_ratio(eigenvalues, lambda1: float, depth: int) -> np.ndarray:
    """``sum_{l<depth} lambda_n**l / sum_{l<depth} lambda1**l`` for each eigenvalue.

    This is the normalized frequency response of the all-ones tap filter of
    length ``depth``. Requires ``|lambda_n| <= lambda1`` for overflow safety.
    """
    if depth < 1:
        raise InvalidParameterError(f"depth must be >= 1, got {depth}")
    lam = np.asarray(eigenvalues, dtype=complex)
    out = np.empty_like(lam)
    near = np.abs(lam - 1.0) <= NEAR_ONE
    ell = np.arange(depth)

    if abs(lambda1 - 1.0) <= NEAR_ONE:
        denom_direct = np.sum(lambda1**ell)
        out[near] = np.array([np.sum(z**ell) for z in lam[near]]) / denom_direct
        far = lam[~near]
        out[~near] = (1.0 - far**depth) / (1.0 - far) / denom_direct
        return out

    if lambda1 > 1.0:
        inv = lambda1 ** (-float(depth))
        scale = (lambda1 - 1.0) / (1.0 - inv)  # = lambda1^L / alpha
        # direct sums near 1, scaled by lambda1^-L * scale = 1/alpha
        out[near] = np.array([np.sum(z**ell) for z in lam[near]]) * inv * scale
        far = lam[~near]
        out[~near] = (inv - (far / lambda1) ** depth) / (1.0 - far) * scale
        return out

    denom = (1.0 - lambda1**depth) / (1.0 - lambda1)
    out[near] = np.array([np.sum(z**ell) for z in lam[near]]) / denom
    far = lam[~near]
    out[~near] = (1.0 - far**depth) / (1.0 - far) / denom
    return out


def graph_shift_average(s: ShiftOperator, lambda1: float, x, depth: int | None = None) -> np.ndarray:
    """Unbiased graph shift average ``alpha^-1 sum_{l<depth} S^l x``.

    ``depth`` defaults to the number of vertices. ``x`` may be a single
    signal or an ``N x m`` stack of signals (one per column). The sum is
    accumulated as ``w_l (S / lambda1)^l x`` so intermediate values stay
    bounded.
    """
    x = np.asarray(x, dtype=float)
    if depth is None:
        depth = s.n
    weights = diffusion_weights(lambda1, depth)
    y = x
    acc = weights[0] * x
    for w in weights[1:]:
        y = s.apply(y) / lambda1
        acc = acc + w * y
    return acc


@dataclass
class FilterSpec:
    """LSI graph filter given by taps ``h`` and/or frequency response ``h~``."""

    taps: np.ndarray | None = None
    freq_response: np.ndarray | None = None

    def __post_init__(self):
        if self.taps is None and self.freq_response is None:
            raise InvalidParameterError("a filter needs taps or a frequency response")
        if self.taps is not None:
            self.taps = np.asarray(self.taps, dtype=float)
        if self.freq_response is not None:
            self.freq_response = np.asarray(self.freq_response, dtype=complex)

    def response(self, eigenvalues) -> np.ndarray:
        if self.freq_response is not None:
            return self.freq_response
        return frequency_response(self.taps, eigenvalues)

    def to_json(self) -> str:
        doc = {}
        if self.taps is not None:
            doc["taps"] = self.taps.tolist()
        if self.freq_response is not None:
            doc["freq_response"] = [[z.real, z.imag] for z in self.freq_response]
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> FilterSpec:
        doc = json.loads(text)
        fr = doc.get("freq_response")
        return cls(
            taps=doc.get("taps"),
            freq_response=None if fr is None else [complex(re, im) for re, im in fr],
        )


def frequency_response(taps, eigenvalues) -> np.ndarray:
    """``h~_n = sum_l h_l lambda_n**l`` by Horner's scheme."""
    lam = np.asarray(eigenvalues, dtype=complex)
    out = np.zeros_like(lam)
    for h in np.asarray(taps, dtype=float)[::-1]:
        out = out * lam + h
    return out


def check_consistent(f: FilterSpec, eigenvalues, rtol: float = 1e-8) -> bool:
    if f.taps is None or f.freq_response is None:
        return True
    ref = frequency_response(f.taps, eigenvalues)
    return bool(np.abs(ref - f.freq_response).max() <= rtol * max(np.abs(ref).max(), 1e-300))


def _dc_gain(h_freq) -> complex:
    h1 = h_freq[0]
    if abs(h1) <= 1e-12 * np.abs(h_freq).max(initial=0.0) or h1 == 0:
        raise DegenerateNormalizationError("filter has zero DC response; cannot normalize to an unbiased estimator")
    return h1


def _maybe_real(z, tol=1e-10):
    if np.iscomplexobj(z) and np.abs(z.imag).max(initial=0.0) <= tol * max(np.abs(z).max(initial=0.0), 1e-300):
        return z.real.copy()
    return z


def filtered_estimator(d: SpectralDecomposition, f: FilterSpec, x, path: str = "spectral") -> np.ndarray:
    """Unbiased LSI filter estimate ``z = (1/h~_1) V diag(h~) V^H x``.

    ``path="taps"`` evaluates ``(sum h_l lambda1^l)^-1 sum h_l S^l x`` on the
    shift itself instead; both agree up to rounding.
    """
    x = np.asarray(x, dtype=float)
    if path == "taps":
        if f.taps is None or d.shift is None:
            raise InvalidParameterError("tap-domain evaluation needs taps and the source shift")
        norm = _dc_gain(frequency_response(f.taps, d.eigenvalues[:1]))
        acc = np.zeros_like(x)
        for h in f.taps[::-1]:
            acc = d.shift.apply(acc) + h * x
        return _maybe_real(acc / norm)
    if path != "spectral":
        raise InvalidParameterError(f"unknown evaluation path {path!r}")
    h = f.response(d.eigenvalues)
    gain = h / _dc_gain(h)
    v = d.eigenvectors
    coeffs = v.conj().T @ x
    z = v @ (gain[:, None] * coeffs if coeffs.ndim == 2 else gain * coeffs)
    return _maybe_real(z)


def optimal_mse_estimator(d: SpectralDecomposition, x) -> np.ndarray:
    """Projection of ``x`` onto ``v1``: the ideal low-pass unbiased estimator."""
    x = np.asarray(x, dtype=float)
    v1 = d.v1
    return np.multiply.outer(v1, v1 @ x)


def optimal_logdet_response(n: int, nu_max: float) -> FilterSpec:
    if nu_max <= 0:
        raise InvalidParameterError(f"nu_max must be positive, got {nu_max}")
    h = np.zeros(n, dtype=complex)
    h[0] = np.sqrt(nu_max)
    return FilterSpec(freq_response=h)


@dataclass
class TapSynthesis:
    taps: np.ndarray
    residual: float
    condition: float
    ill_conditioned: bool


def synthesize_taps(eigenvalues, target) -> TapSynthesis:
    """Least-squares taps whose response on ``eigenvalues`` matches ``target``."""
    lam = np.asarray(eigenvalues, dtype=complex)
    target = np.asarray(target, dtype=complex)
    n = len(lam)
    scale = max(np.abs(lam).max(initial=0.0), 1e-300)
    gaps = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(gaps, np.inf)
    i, j = np.nonzero(np.triu(gaps <= 1e-9 * scale, k=1))
    if i.size:
        pairs = sorted({(int(a), int(b)) for a, b in zip(i, j)})
        raise RankDeficiencyError(f"repeated eigenvalues at index pairs {pairs}", indices=pairs)
    psi = np.vander(lam, n, increasing=True)
    cond = float(np.linalg.cond(psi))
    if cond > 1e12:
        warnings.warn(f"Vandermonde system is ill-conditioned (cond={cond:.3g})", RuntimeWarning, stacklevel=2)
    h, *_ = np.linalg.lstsq(psi, target, rcond=None)
    residual = float(np.linalg.norm(psi @ h - target))
    if np.abs(h.imag).max(initial=0.0) <= 1e-9 * max(np.abs(h).max(initial=0.0), 1.0):
        h = h.real
    return TapSynthesis(h, residual, cond, cond > 1e12)
