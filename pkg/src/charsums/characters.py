"""Dirichlet characters modulo a prime.

A character is indexed by ``a`` in ``0..q-2`` against the smallest primitive
root ``g``: ``chi(g**t) = e(a t / (q - 1))``. Index 0 is the principal
character and index ``(q-1)/2`` is the Legendre symbol.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .arith import PrimeContext


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"
    PRINCIPAL = "principal"


def _unit_roots(exponents: np.ndarray, order: int) -> np.ndarray:
    """``e(exponents / order)`` with the quarter-turn values made exact."""
    z = np.exp(2j * np.pi * (exponents / order))
    z[exponents == 0] = 1.0
    if order % 2 == 0:
        z[2 * exponents == order] = -1.0
    if order % 4 == 0:
        z[4 * exponents == order] = 1j
        z[4 * exponents == 3 * order] = -1j
    return z


@dataclass(frozen=True, eq=False)
class Character:
    ctx: PrimeContext
    index: int

    def __post_init__(self):
        if not 0 <= self.index < max(self.ctx.q - 1, 1):
            raise ValueError(f"character index {self.index} outside 0..{self.ctx.q - 2}")

    @classmethod
    def legendre(cls, ctx: PrimeContext) -> Character:
        if ctx.q == 2:
            raise ValueError("no Legendre symbol modulo 2")
        return cls(ctx, (ctx.q - 1) // 2)

    @property
    def q(self) -> int:
        return self.ctx.q

    @property
    def is_principal(self) -> bool:
        return self.index == 0

    @property
    def is_real(self) -> bool:
        return self.index == 0 or 2 * self.index == self.ctx.q - 1

    @cached_property
    def values(self) -> np.ndarray:
        """``chi(n)`` for ``n = 0..q-1`` (complex, read-only)."""
        q = self.ctx.q
        dlog = self.ctx.dlog[1:]
        exps = (self.index * dlog) % (q - 1)
        vals = np.zeros(q, dtype=complex)
        vals[1:] = _unit_roots(exps, q - 1)
        vals.setflags(write=False)
        return vals

    @cached_property
    def int_values(self) -> np.ndarray | None:
        """Integer values in {-1, 0, 1} for real characters, else None."""
        if not self.is_real:
            return None
        out = self.values.real.round().astype(np.int64)
        out.setflags(write=False)
        return out

    def __call__(self, n):
        return self.values[np.asarray(n) % self.ctx.q]


def legendre(n: int, ctx: PrimeContext) -> int:
    """Quadratic residue symbol of ``n`` modulo ``ctx.q`` by Euler's criterion."""
    q = ctx.q
    if q == 2:
        raise ValueError("Legendre symbol needs an odd prime")
    r = pow(int(n) % q, (q - 1) // 2, q)
    return -1 if r == q - 1 else r


def char_value(chr: Character, n: int) -> complex:
    return complex(chr.values[int(n) % chr.q])


def gauss_sum(chr: Character) -> complex:
    """``sum_{n mod q} chi(n) e(n/q)`` by direct summation."""
    if chr.is_principal:
        raise ValueError("Gauss sum requested for the principal character")
    q = chr.q
    phases = np.exp(2j * np.pi * np.arange(q) / q)
    return complex(np.sum(chr.values * phases))


def partial_sum(chr: Character, x: int) -> complex:
    """``sum_{1 <= n <= x} chi(n)``, using periodicity beyond one period."""
    x = int(x)
    if x < 0:
        raise ValueError("x must be nonnegative")
    q = chr.q
    periods, rest = divmod(x, q)
    vals = chr.int_values if chr.int_values is not None else chr.values
    total = vals[1 : rest + 1].sum()
    if periods:
        total = total + periods * vals.sum()
    return complex(total)


def orthogonality_sum(ctx: PrimeContext, n1: int, n2: int) -> complex:
    """``(1/(q-1)) sum_chi chi(n1) conj(chi(n2))`` over all characters mod q."""
    q = ctx.q
    if int(n1) % q == 0 or int(n2) % q == 0:
        raise ValueError("arguments must be coprime to q")
    t = int(ctx.dlog[int(n1) % q] - ctx.dlog[int(n2) % q]) % (q - 1)
    a = np.arange(q - 1, dtype=np.int64)
    return complex(np.mean(_unit_roots((a * t) % (q - 1), q - 1)))


def parity(chr: Character) -> Parity:
    if chr.is_principal:
        return Parity.PRINCIPAL
    return Parity.EVEN if chr.values[chr.q - 1].real > 0 else Parity.ODD


def all_character_values(ctx: PrimeContext, ns: np.ndarray) -> np.ndarray:
    """Matrix ``[a, i] = chi_a(ns[i])`` for every index ``a`` (rows)."""
    ns = np.asarray(ns, dtype=np.int64) % ctx.q
    if np.any(ns == 0):
        raise ValueError("arguments must be coprime to q")
    a = np.arange(ctx.q - 1, dtype=np.int64)[:, None]
    return _unit_roots((a * ctx.dlog[ns][None, :]) % (ctx.q - 1), ctx.q - 1)


def _pow_mod_vec(base: np.ndarray, exp: np.ndarray, mod: np.ndarray) -> np.ndarray:
    result = np.ones_like(mod)
    base = base % mod
    exp = exp.copy()
    while np.any(exp):
        odd = (exp & 1).astype(bool)
        result = np.where(odd, result * base % mod, result)
        base = base * base % mod
        exp >>= 1
    return result


def legendre_table(qs: np.ndarray, x: int) -> np.ndarray:
    """Matrix ``[i, n-1] = (n / qs[i])`` for ``1 <= n <= x`` by Euler's criterion."""
    qs = np.asarray(qs, dtype=np.int64)
    out = np.empty((qs.size, x), dtype=np.int64)
    half = (qs - 1) // 2
    for n in range(1, x + 1):
        r = _pow_mod_vec(np.full_like(qs, n), half, qs)
        out[:, n - 1] = np.where(r == qs - 1, -1, r)
    return out
