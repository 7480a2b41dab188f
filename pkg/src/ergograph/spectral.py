"""Eigendecomposition with Perron-first ordering, graph Fourier transform,
total variation and spectrum diagnostics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import InvalidParameterError, NumericalError, UnsupportedShiftError
from .graphs import ShiftKind, ShiftOperator

SYMMETRY_TOL = 1e-12
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Unitary eigenbasis ``V`` (columns) and eigenvalues, Perron root first.

    ``eigenvectors`` and ``eigenvalues`` are real for symmetric shifts and
    complex for the directed cycle. ``shift`` keeps the source operator so
    that estimators can run tap-domain diffusions.
    """

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    source_kind: ShiftKind
    shift: ShiftOperator | None = None

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def lambda1(self) -> float:
        return float(np.real(self.eigenvalues[0]))

    @cached_property
    def v1(self) -> np.ndarray:
        return np.real(self.eigenvectors[:, 0]).copy()

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.eigenvectors)

    def to_json(self) -> str:
        def pairs(a):
            a = np.asarray(a, dtype=complex)
            return np.stack([a.real, a.imag], axis=-1).tolist()

        return json.dumps(
            {
                "kind": self.source_kind.value,
                "eigenvalues": pairs(self.eigenvalues),
                "eigenvectors": pairs(self.eigenvectors),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> SpectralDecomposition:
        doc = json.loads(text)

        def unpair(a):
            a = np.asarray(a, dtype=float)
            z = a[..., 0] + 1j * a[..., 1]
            return z.real.copy() if not np.any(a[..., 1]) else z

        return cls(unpair(doc["eigenvectors"]), unpair(doc["eigenvalues"]), ShiftKind(doc["kind"]))


def spectral_order(eigenvalues) -> np.ndarray:
    """Permutation putting the Perron root first.

    The rest follow by decreasing modulus; ties go to the smaller absolute
    argument, then to the positive imaginary part, then to the lower index.
    Conjugate pairs thus stay adjacent and ``(1, i, -i, -1)`` is the order
    for the fourth roots of unity.
    """
    lam = np.asarray(eigenvalues, dtype=complex)
    mod = np.abs(lam)
    scale = max(mod.max(initial=0.0), 1.0)
    real_mask = np.abs(lam.imag) <= 1e-12 * scale
    candidates = np.flatnonzero(real_mask & (lam.real >= mod.max() - 1e-10 * scale))
    if candidates.size == 0:
        raise UnsupportedShiftError("no real nonnegative eigenvalue attains the spectral radius")
    perron = int(candidates[np.argmax(lam.real[candidates])])

    # rounding keeps numerically equal moduli and arguments in the same tie class
    def key(n):
        z = lam[n]
        arg = 0.0 if real_mask[n] and z.real >= 0 else (np.pi if real_mask[n] else abs(np.angle(z)))
        return (-round(mod[n] / scale, 10), round(arg, 10), 0 if z.imag >= 0 else 1, n)

    rest = sorted((n for n in range(len(lam)) if n != perron), key=key)
    return np.array([perron, *rest], dtype=int)


def _cycle_decomposition(n: int, shift: ShiftOperator) -> SpectralDecomposition:
    k = np.arange(n)
    # column m is exp(+2 pi i k m / N) / sqrt(N); the cyclic shift maps it to exp(-2 pi i m / N) times itself
    v = np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    lam = np.exp(-2j * np.pi * k / n)
    lam[0] = 1.0
    order = spectral_order(lam)
    v = v[:, order]
    v[:, 0] = 1.0 / np.sqrt(n)
    return SpectralDecomposition(v, lam[order], ShiftKind.DIRECTED_CYCLE_ADJACENCY, shift)


def decompose(s: ShiftOperator) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric shift or of the directed cycle."""
    if s.kind is ShiftKind.DIRECTED_CYCLE_ADJACENCY:
        return _cycle_decomposition(s.n, s)

    m = s.dense()
    scale = np.abs(m).max(initial=0.0)
    if np.abs(m - m.T).max(initial=0.0) > SYMMETRY_TOL * max(scale, 1.0):
        raise UnsupportedShiftError(
            f"{s.kind.value} shift is not symmetric; only symmetric shifts and the directed cycle are supported"
        )
    try:
        lam, v = np.linalg.eigh(0.5 * (m + m.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc

    order = spectral_order(lam)
    lam, v = lam[order], v[:, order]
    total = v[:, 0].sum()
    if total < 0 or (total == 0 and v[np.flatnonzero(v[:, 0])[0], 0] < 0):
        v[:, 0] = -v[:, 0]
    return SpectralDecomposition(v, lam, s.kind, s)


def _as_vector(d: SpectralDecomposition, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[0] != d.n:
        raise InvalidParameterError(f"signal has length {x.shape[0]}, graph has {d.n} vertices")
    return x


def gft(d: SpectralDecomposition, x) -> np.ndarray:
    """Frequency coefficients ``V^H x`` (columns of a 2-D ``x`` are separate signals)."""
    x = _as_vector(d, x)
    return d.eigenvectors.conj().T @ x


def igft(d: SpectralDecomposition, x_freq) -> np.ndarray:
    x_freq = _as_vector(d, x_freq)
    return d.eigenvectors @ x_freq


def total_variation(s, lambda1: float, x) -> float:
    """``||x - S x / lambda1||_1``."""
    if lambda1 <= 0:
        raise InvalidParameterError(f"lambda1 must be positive, got {lambda1}")
    m = s.matrix if isinstance(s, ShiftOperator) else s
    x = np.asarray(x)
    return float(np.abs(x - (m @ x) / lambda1).sum())


class Regime(str, Enum):
    LAMBDA1_ABOVE_ONE = "lambda1_above_one"
    LAMBDA1_EQUAL_ONE = "lambda1_equal_one"
    LAMBDA1_BELOW_ONE = "lambda1_below_one"


@dataclass(frozen=True)
class SpectrumRegime:
    lambda1: float
    ratios: np.ndarray
    regime: Regime
    flagged_set: tuple[int, ...]
    near_degenerate: bool

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "ratios": self.ratios.tolist(),
            "regime": self.regime.value,
            "flagged_set": [n + 1 for n in self.flagged_set],
            "near_degenerate": self.near_degenerate,
        }


def classify_spectrum(d: SpectralDecomposition, ratio_threshold: float = 0.5) -> SpectrumRegime:
    """Finite-N diagnostic of how fast the non-Perron modes die out under diffusion.

    ``flagged_set`` holds 0-based indices ``n >= 1`` with
    ``|lambda_n| / lambda_1 >= ratio_threshold``.
    """
    if not 0 < ratio_threshold < 1:
        raise InvalidParameterError(f"ratio_threshold must lie in (0, 1), got {ratio_threshold}")
    lam1 = d.lambda1
    if abs(lam1 - 1.0) <= UNIT_TOL:
        regime = Regime.LAMBDA1_EQUAL_ONE
    elif lam1 > 1.0:
        regime = Regime.LAMBDA1_ABOVE_ONE
    else:
        regime = Regime.LAMBDA1_BELOW_ONE
    mods = np.abs(d.eigenvalues[1:])
    ratios = mods / lam1 if lam1 > 0 else np.zeros_like(mods)
    flagged = tuple(int(n) + 1 for n in np.flatnonzero(ratios >= ratio_threshold))
    near = bool(mods.size and np.abs(d.eigenvalues[1:] - lam1).min() <= 1e-12 * abs(lam1))
    return SpectrumRegime(lam1, ratios, regime, flagged, near)

