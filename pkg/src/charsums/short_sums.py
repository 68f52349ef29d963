"""Sliding short character sums and their exact empirical laws.

Every start point ``x`` in ``0..q-1`` is visited, so the distribution of
``S(X)`` for uniform ``X`` is computed exactly rather than sampled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .characters import Character

MAX_MOMENT_ORDER = 16
_REAL_TOL = 1e-9


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Equally weighted complex samples with the scale already applied.

    ``normalization`` records the factor the raw values were multiplied by
    (``1/sqrt(H)`` for normalized sliding sums, 1.0 otherwise).
    """

    samples: np.ndarray
    normalization: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("distribution needs a nonempty 1-d sample array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples) or bool(
            np.all(np.abs(self.samples.imag) < _REAL_TOL)
        )

    def real_samples(self) -> np.ndarray:
        if not self.is_real:
            raise ValueError("distribution has non-negligible imaginary parts")
        return np.real(self.samples).astype(float)

    def scaled(self, factor: float, **meta) -> EmpiricalDistribution:
        return EmpiricalDistribution(
            self.samples * factor,
            normalization=self.normalization * factor,
            meta={**self.meta, **meta},
        )

    def histogram(self, bins: int = 50) -> list[tuple[float, float, int]]:
        """``(bin_left, bin_right, count)`` triples of the real samples."""
        counts, edges = np.histogram(self.real_samples(), bins=bins)
        return [(float(edges[i]), float(edges[i + 1]), int(c)) for i, c in enumerate(counts)]


def sliding_sums(chr: Character, H: int) -> np.ndarray:
    """``S(x) = sum_{x < n <= x+H} chi(n)`` for every ``x`` in ``0..q-1``.

    One prefix-sum pass over two periods. Real characters are summed in
    integers, so their sums are exact.
    """
    q = chr.q
    H = int(H)
    if not 1 <= H <= q:
        raise ValueError(f"H={H} outside 1..q={q}")
    vals = chr.int_values if chr.int_values is not None else chr.values
    prefix = np.concatenate(([0], np.cumsum(np.concatenate((vals, vals)))))
    x = np.arange(q)
    # prefix[m] = sum of vals[0..m-1], so the window x+1..x+H is a difference
    out = prefix[x + H + 1] - prefix[x + 1]
    return out.astype(complex)


def sliding_distribution(chr: Character, H: int, normalize: bool = True) -> EmpiricalDistribution:
    """Law of ``S(X)`` (or ``S(X)/sqrt(H)``) for ``X`` uniform on ``0..q-1``."""
    scale = 1 / math.sqrt(H) if normalize else 1.0
    return EmpiricalDistribution(
        sliding_sums(chr, H) * scale,
        normalization=scale,
        meta={"q": chr.q, "H": int(H), "index": chr.index},
    )


def second_moment(dist: EmpiricalDistribution) -> float:
    """Mean of ``|V|**2`` over the samples."""
    return float(np.mean(np.abs(dist.samples) ** 2))


def empirical_moment(dist: EmpiricalDistribution, j: int, k: int) -> complex:
    """Mean of ``V**j * conj(V)**k``."""
    if j < 0 or k < 0:
        raise ValueError("moment orders must be nonnegative")
    if j + k > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order j+k={j + k} above cap {MAX_MOMENT_ORDER}")
    v = dist.samples
    return complex(np.mean(v**j * np.conj(v) ** k))


def gaussian_moment(j: int) -> int:
    """``E N(0,1)**j``: ``(j-1)!!`` for even ``j``, else 0."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    if j % 2:
        return 0
    return math.factorial(j) // (2 ** (j // 2) * math.factorial(j // 2))


def complex_gaussian_moment(j: int, k: int) -> int:
    """``E Z**j conj(Z)**k`` for ``Z = Z1 + i Z2`` with ``Z1, Z2 ~ N(0, 1/2)`` independent."""
    if j < 0 or k < 0:
        raise ValueError("moment orders must be nonnegative")
    return math.factorial(k) if j == k else 0


def ks_distance(dist: EmpiricalDistribution, target: str = "std_normal") -> float:
    """Kolmogorov distance between the sample CDF and the standard normal CDF."""
    if target != "std_normal":
        raise ValueError(f"unsupported target {target!r}")
    return float(stats.kstest(dist.real_samples(), "norm").statistic)


class GateVerdict(str, enum.Enum):
    BLOCKED = "blocked"
    INCONCLUSIVE = "inconclusive"


def second_moment_gate(dist: EmpiricalDistribution, tau: float) -> GateVerdict:
    """Flag a law whose mean square is at most ``tau < 1``.

    Along a sequence whose second moments stay at or below ``tau``, no
    convergence in distribution to a unit-second-moment limit is possible,
    so such a measurement blocks that limit.
    """
    if not 0 <= tau < 1:
        raise ValueError(f"tau={tau} must lie in [0, 1)")
    return GateVerdict.BLOCKED if second_moment(dist) <= tau else GateVerdict.INCONCLUSIVE
