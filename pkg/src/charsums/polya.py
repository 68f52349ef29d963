"""Fourier-series side of short character sums.

Covers the truncated expansion of partial sums, the full window series for
``S(x)``, and the short cosine/sine series in a uniform phase ``theta``
whose moments are evaluated exactly on equispaced grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .characters import Character, Parity, gauss_sum, parity
from .short_sums import EmpiricalDistribution

MIN_RATIO = 3.0
_CHUNK = 1 << 20


def _require_nonprincipal(chr: Character) -> None:
    if chr.is_principal:
        raise ValueError("expansion needs a non-principal character")


def _frequency_sum(coeffs: np.ndarray, ks: np.ndarray, x: np.ndarray, q: int, shift: float = 0.0) -> np.ndarray:
    """``sum_k coeffs[k] (e(k x / q) - shift)`` for each x, chunked to bound memory."""
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    out = np.empty(x.size, dtype=complex)
    rows = max(1, _CHUNK // max(ks.size, 1))
    for s in range(0, x.size, rows):
        xs = x[s : s + rows]
        phase = (np.outer(xs % q, ks) % q) / q
        out[s : s + rows] = (np.exp(2j * np.pi * phase) - shift) @ coeffs
    return out


def _maybe_scalar(values: np.ndarray, x):
    return complex(values[0]) if np.ndim(x) == 0 else values


def polya_partial(chr: Character, x, K: int):
    """Truncated expansion of ``sum_{n<=x} chi(n)`` keeping ``0 < |k| <= K``."""
    _require_nonprincipal(chr)
    if K < 1:
        raise ValueError("K must be at least 1")
    q = chr.q
    ks = np.concatenate((np.arange(1, K + 1), -np.arange(1, K + 1)))
    coeffs = np.conj(chr(-ks)) / ks
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.int64))
    # subtract inside each term so that x = 0 (mod q) gives exactly 0
    total = _frequency_sum(coeffs, ks, x_arr, q, shift=1.0)
    return _maybe_scalar(gauss_sum(chr) / (2j * np.pi) * total, x)


def _window_coefficients(chr: Character, H: float) -> tuple[np.ndarray, np.ndarray]:
    q = chr.q
    half = (q - 1) // 2
    ks = np.concatenate((np.arange(1, half + 1), -np.arange(1, half + 1)))
    coeffs = np.conj(chr(-ks)) / ks * (np.exp(2j * np.pi * ks * H / q) - 1)
    return ks, coeffs


def window_series(chr: Character, H: float, x=None):
    """Full ``0 < |k| < q/2`` Fourier series for ``S(x)``.

    With ``x=None`` all ``q`` start points are returned via one FFT;
    otherwise the series is summed directly at the given points.
    """
    _require_nonprincipal(chr)
    q = chr.q
    ks, coeffs = _window_coefficients(chr, H)
    scale = gauss_sum(chr) / (2j * np.pi)
    if x is None:
        spectrum = np.zeros(q, dtype=complex)
        spectrum[ks % q] = coeffs
        return scale * q * np.fft.ifft(spectrum)
    return _maybe_scalar(scale * _frequency_sum(coeffs, ks, x, q), x)


def kmax_for(q: int, H: float) -> int:
    """Truncation point ``ceil((q/H) log(q/H))``; retained terms are ``1 <= k < kmax``."""
    r = q / H
    return math.ceil(r * math.log(r))


@dataclass(frozen=True, eq=False)
class CosineSeries:
    """``scale * sum_{1<=k<kmax} coeffs[k-1] charvals[k-1] trig(2 pi k theta)``.

    For series built from a character, ``coeffs`` are ``q sin(pi k H/q)/(pi H k)``,
    ``charvals`` are ``conj(chi(k))`` and ``scale`` is ``2 sqrt(H/q)``, so
    the series has mean square close to 1.
    """

    q: int
    H: float
    kmax: int
    coeffs: np.ndarray
    charvals: np.ndarray
    flavor: str = "cosine"
    scale: float = 1.0

    def __post_init__(self):
        if self.flavor not in ("cosine", "sine"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if len(self.coeffs) != self.kmax - 1 or len(self.charvals) != self.kmax - 1:
            raise ValueError("coefficient arrays must have kmax - 1 entries")

    @classmethod
    def from_coefficients(cls, coeffs, charvals=None, flavor: str = "cosine", scale: float = 1.0):
        coeffs = np.asarray(coeffs, dtype=float)
        charvals = np.ones(coeffs.size, dtype=complex) if charvals is None else np.asarray(charvals, dtype=complex)
        return cls(q=0, H=0.0, kmax=coeffs.size + 1, coeffs=coeffs, charvals=charvals, flavor=flavor, scale=scale)

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(1, self.kmax)

    @property
    def weights(self) -> np.ndarray:
        return self.scale * self.coeffs * self.charvals

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.charvals.imag) < 1e-12))

    def evaluate(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        trig = np.cos if self.flavor == "cosine" else np.sin
        return trig(2 * np.pi * np.outer(theta, self.frequencies)) @ self.weights

    def parseval(self) -> float:
        """Exact mean square over ``theta`` in [0, 1]."""
        return float(0.5 * np.sum(np.abs(self.weights) ** 2))


def build_series(chr: Character, H: float, flavor: str | None = None) -> CosineSeries:
    """Short cosine (even characters) or sine (odd characters) series for ``S(X)/sqrt(H)``."""
    _require_nonprincipal(chr)
    q = chr.q
    if q / H < MIN_RATIO:
        raise ValueError(f"q/H={q / H:.3f} below {MIN_RATIO}; truncation degenerates")
    if flavor is None:
        flavor = "cosine" if parity(chr) is Parity.EVEN else "sine"
    kmax = kmax_for(q, H)
    k = np.arange(1, kmax)
    coeffs = q * np.sin(np.pi * k * H / q) / (np.pi * H * k)
    return CosineSeries(
        q=q,
        H=float(H),
        kmax=kmax,
        coeffs=coeffs,
        charvals=np.conj(chr(k)),
        flavor=flavor,
        scale=2 * math.sqrt(H / q),
    )


def series_l2_tail(chr: Character, H: float) -> float:
    """Mean square of the dropped terms ``kmax <= k < q/2`` of the window series."""
    _require_nonprincipal(chr)
    q = chr.q
    if q / H < MIN_RATIO:
        raise ValueError(f"q/H={q / H:.3f} below {MIN_RATIO}")
    k = np.arange(kmax_for(q, H), (q + 1) // 2, dtype=float)
    return float(2 * q / (np.pi**2 * H) * np.sum(np.sin(np.pi * k * H / q) ** 2 / k**2))


def grid_basis(frequencies, M: int, flavor: str = "cosine") -> np.ndarray:
    """Matrix ``[i, m] = trig(2 pi freq_i m / M)`` on the equispaced grid of size ``M``.

    ``flavor`` is ``"exp"``, ``"cosine"`` or ``"sine"``. Phases are reduced
    modulo ``M`` in integers before scaling.
    """
    freqs = np.asarray(frequencies, dtype=np.int64)
    phase = 2 * np.pi * ((np.outer(freqs, np.arange(M, dtype=np.int64)) % M) / M)
    if flavor == "exp":
        return np.exp(1j * phase)
    if flavor == "cosine":
        return np.cos(phase)
    if flavor == "sine":
        return np.sin(phase)
    raise ValueError(f"unknown flavor {flavor!r}")


def quadrature_size(series: CosineSeries, order: int) -> int:
    """Smallest grid size ``M`` with ``order * kmax < M`` (and at least ``2 kmax + 1``)."""
    return max(order, 2) * series.kmax + 1


def series_distribution(series: CosineSeries, M: int) -> EmpiricalDistribution:
    """Values at ``theta_m = m/M``.

    Grid means of products of ``j + k`` series factors equal the exact
    integrals over ``theta`` whenever ``(j + k) * kmax < M``.
    """
    if M < 2 * series.kmax + 1:
        raise ValueError(f"M={M} below 2*kmax+1={2 * series.kmax + 1}")
    theta = np.arange(M) / M
    return EmpiricalDistribution(
        series.evaluate(theta),
        normalization=series.scale,
        meta={"q": series.q, "H": series.H, "kmax": series.kmax, "M": M, "flavor": series.flavor},
    )


def replacement_error(chr: Character, H: float, offsets: int = 5) -> float:
    """Largest change from swapping the phase ``(2X+H)/(2q)`` for any ``theta`` within ``1/(2q)``.

    Maximum over all start points ``X`` and ``offsets`` evenly spaced phase
    shifts in ``[-1/(2q), 1/(2q)]`` of the retained series difference.
    """
    series = build_series(chr, H)
    q = chr.q
    tau = gauss_sum(chr)
    k = series.frequencies
    b = 2 * tau / (np.pi * math.sqrt(H)) * series.charvals * np.sin(np.pi * k * H / q) / k
    if series.flavor == "sine":
        b = b / 1j
    trig = np.cos if series.flavor == "cosine" else np.sin
    centres = (np.arange(q) + H / 2) / q
    worst = 0.0
    for d in np.linspace(-1 / (2 * q), 1 / (2 * q), offsets):
        diff = trig(2 * np.pi * np.outer(centres, k)) - trig(2 * np.pi * np.outer(centres + d, k))
        worst = max(worst, float(np.max(np.abs(diff @ b))))
    return worst
