"""Dirichlet-kernel subtraction for biased characters.

A character whose values ``conj(chi(-k))`` have mean ``alpha`` far from 0 on
``1 <= k <= delta q/H`` carries a scaled Dirichlet kernel inside its short
sums. Subtracting that kernel ``G`` lowers the mean square of ``S`` below
``H`` while ``G/sqrt(H)`` itself is small in mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import PrimeContext, primes_in
from .characters import Character, gauss_sum, legendre_table
from .short_sums import (
    EmpiricalDistribution,
    GateVerdict,
    second_moment_gate,
    sliding_sums,
)

DEFAULT_DELTA = 0.05
DELTA_SWEEP = (0.01, 0.05, 0.1, 0.5, 1.0)
MAX_SEARCH_Q = 10**7


def kernel_length(q: int, H: float, delta: float) -> int:
    """Number of kernel frequencies ``floor(delta q / H)``."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta={delta} outside (0, 1]")
    # guard against delta*q/H landing a rounding error below an integer
    length = math.floor(delta * q / H + 1e-9)
    if length < 1:
        raise ValueError(f"empty kernel range: delta*q/H={delta * q / H:.4g} < 1")
    return length


def alpha(chr: Character, H: float, delta: float) -> complex:
    """Mean of ``conj(chi(-k))`` over ``1 <= k <= delta q / H``."""
    length = kernel_length(chr.q, H, delta)
    k = np.arange(1, length + 1)
    return complex(np.mean(np.conj(chr(-k))))


def kernel_G(chr: Character, H: float, delta: float, x=None, alpha_value: complex | None = None):
    """``alpha tau(chi) (H/q) sum_{1<=k<=delta q/H} e(k x / q)`` by the geometric-sum closed form.

    ``x=None`` evaluates every start point ``0..q-1``. ``alpha_value``
    replaces the measured mean (useful for synthetic rows).
    """
    q = chr.q
    length = kernel_length(q, H, delta)
    a = alpha(chr, H, delta) if alpha_value is None else complex(alpha_value)
    xs = np.arange(q) if x is None else np.atleast_1d(np.asarray(x, dtype=np.int64)) % q
    z = np.exp(2j * np.pi * xs / q)
    zl = np.exp(2j * np.pi * ((xs * length) % q) / q)
    at_zero = xs == 0
    denom = np.where(at_zero, 1.0, z - 1)
    kernel = np.where(at_zero, length, z * (zl - 1) / denom)
    out = a * gauss_sum(chr) * H / q * kernel
    return complex(out[0]) if x is not None and np.ndim(x) == 0 else out


def subtracted_distribution(
    chr: Character, H: int, delta: float, alpha_value: complex | None = None
) -> EmpiricalDistribution:
    """Law of ``(S(X) - G(X)) / sqrt(H)`` over all start points."""
    diff = sliding_sums(chr, H) - kernel_G(chr, H, delta, alpha_value=alpha_value)
    scale = 1 / math.sqrt(H)
    return EmpiricalDistribution(
        diff * scale,
        normalization=scale,
        meta={"q": chr.q, "H": int(H), "index": chr.index, "delta": delta},
    )


def variance_deficit(chr: Character, H: int, delta: float, alpha_value: complex | None = None) -> float:
    """``(1/(qH)) sum_x |S(x) - G(x)|**2``."""
    diff = sliding_sums(chr, H) - kernel_G(chr, H, delta, alpha_value=alpha_value)
    return float(np.mean(np.abs(diff) ** 2) / H)


def mean_abs_G(chr: Character, H: float, delta: float, alpha_value: complex | None = None) -> float:
    """``(1/q) sum_x |G(x)| / sqrt(H)``."""
    return float(np.mean(np.abs(kernel_G(chr, H, delta, alpha_value=alpha_value))) / math.sqrt(H))


@dataclass(frozen=True)
class KernelExperiment:
    """One (character, H, delta) measurement.

    ``deficit`` is the normalized mean square ``E|S - G|^2 / H`` and
    ``gmean`` is ``E|G| / sqrt(H)``.
    """

    q: int
    index: int
    H: int
    delta: float
    alpha: complex
    deficit: float
    gmean: float
    gate: GateVerdict | None = None


def run_kernel_experiment(
    chr: Character,
    H: int,
    delta: float,
    tau: float | None = None,
    alpha_value: complex | None = None,
) -> KernelExperiment:
    a = alpha(chr, H, delta) if alpha_value is None else complex(alpha_value)
    dist = subtracted_distribution(chr, H, delta, alpha_value=a)
    deficit = float(np.mean(np.abs(dist.samples) ** 2))
    return KernelExperiment(
        q=chr.q,
        index=chr.index,
        H=int(H),
        delta=float(delta),
        alpha=a,
        deficit=deficit,
        gmean=mean_abs_G(chr, H, delta, alpha_value=a),
        gate=None if tau is None else second_moment_gate(dist, tau),
    )


def biased_real_search(Qlo: int, Qhi: int, x: int) -> list[tuple[int, float]]:
    """Every odd prime in ``[Qlo, Qhi]`` with its bias ``sum_{n<=x} (n/q) / x``.

    Sorted by bias descending, ties by ascending ``q``.
    """
    if x < 1:
        raise ValueError("x must be at least 1")
    if Qhi > MAX_SEARCH_Q:
        raise ValueError(f"Qhi={Qhi} above desk-scale cap {MAX_SEARCH_Q}")
    lo = max(int(Qlo), 3)
    if int(Qhi) < lo:
        return []
    qs = primes_in(lo, int(Qhi))
    if qs.size == 0:
        return []
    sums = legendre_table(qs, x).sum(axis=1)
    order = np.lexsort((qs, -sums))
    return [(int(qs[i]), float(sums[i]) / x) for i in order]


def biased_complex_search(ctx: PrimeContext, x: int, thresh: float) -> list[tuple[int, float]]:
    """Non-principal characters mod q with ``|sum_{n<=x} chi(n)| >= thresh * x``.

    Exhaustive over indices ``1..q-2``; sorted by ratio descending, ties by index.
    """
    q = ctx.q
    if not 2 <= x < q:
        raise ValueError(f"need 2 <= x < q, got x={x}, q={q}")
    if thresh <= 0:
        raise ValueError("thresh must be positive")
    t = ctx.dlog[1 : x + 1]
    hits_idx, hits_ratio = [], []
    rows = max(1, (1 << 20) // x)
    for start in range(1, q - 1, rows):
        a = np.arange(start, min(start + rows, q - 1), dtype=np.int64)
        phases = (np.outer(a, t) % (q - 1)) / (q - 1)
        ratio = np.abs(np.exp(2j * np.pi * phases).sum(axis=1)) / x
        keep = ratio >= thresh * (1 - 1e-12)
        hits_idx.append(a[keep])
        hits_ratio.append(ratio[keep])
    idx = np.concatenate(hits_idx)
    ratio = np.concatenate(hits_ratio)
    order = np.lexsort((idx, -ratio))
    return [(int(idx[i]), float(ratio[i])) for i in order]
