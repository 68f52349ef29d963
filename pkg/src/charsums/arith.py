"""Integer and special-function substrate.

Prime enumeration, primality, primitive roots with a full discrete-log
table, squarefree parts and the Dickman function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_PRIME_BOUND = 2**40
MAX_SIEVE_WIDTH = 10**9
MAX_CONTEXT_Q = 10**8
DICKMAN_MAX_U = 10.0
DICKMAN_STEP = 1e-4

_SEGMENT = 1 << 22
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _small_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(limit + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mark[p]:
            mark[p * p :: p] = False
    return np.flatnonzero(mark).astype(np.int64)


def primes_in(lo: int, hi: int) -> np.ndarray:
    """Return the primes in the closed interval ``[lo, hi]``, ascending.

    Uses a segmented sieve of Eratosthenes with base primes up to sqrt(hi).

    Raises:
        ValueError: if the range is inverted, starts below 2, ends above
            2**40, or is wider than ``MAX_SIEVE_WIDTH``.
    """
    lo, hi = int(lo), int(hi)
    if lo < 2 or hi < lo:
        raise ValueError(f"need 2 <= lo <= hi, got lo={lo}, hi={hi}")
    if hi > MAX_PRIME_BOUND:
        raise ValueError(f"hi={hi} exceeds supported bound 2**40")
    if hi - lo + 1 > MAX_SIEVE_WIDTH:
        raise ValueError(f"range width {hi - lo + 1} exceeds {MAX_SIEVE_WIDTH}")

    base = _small_sieve(math.isqrt(hi))
    out = []
    for start in range(lo, hi + 1, _SEGMENT):
        stop = min(start + _SEGMENT - 1, hi)
        seg = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > stop:
                break
            first = max(p * p, -(-start // p) * p)
            seg[first - start :: p] = False
        if start < 2:
            seg[: 2 - start] = False
        out.append(np.flatnonzero(seg).astype(np.int64) + start)
    return np.concatenate(out)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n`` by trial division."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def primitive_root(q: int) -> int:
    """Smallest ``g >= 1`` of multiplicative order ``q - 1`` modulo prime ``q``."""
    q = int(q)
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    if q == 2:
        return 1
    cofactors = [(q - 1) // p for p in prime_factors(q - 1)]
    for g in range(2, q):
        if all(pow(g, c, q) != 1 for c in cofactors):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


def _power_table(g: int, q: int) -> np.ndarray:
    # g^t mod q for 0 <= t < q-1, built as giant-step x baby-step blocks.
    n = q - 1
    b = math.isqrt(n) + 1
    baby = np.empty(b, dtype=np.int64)
    x = 1
    for t in range(b):
        baby[t] = x
        x = x * g % q
    step = x
    rows = -(-n // b)
    giant = np.empty(rows, dtype=np.int64)
    y = 1
    for r in range(rows):
        giant[r] = y
        y = y * step % q
    return ((giant[:, None] * baby[None, :]) % q).ravel()[:n]


@dataclass(frozen=True, eq=False)
class PrimeContext:
    """A prime modulus with its smallest primitive root and discrete logs.

    ``dlog[n]`` is the exponent ``t`` with ``g**t == n (mod q)`` for
    ``1 <= n < q``; ``dlog[0]`` is -1. ``powers[t]`` is ``g**t mod q``.
    Arrays are read-only.
    """

    q: int
    g: int
    dlog: np.ndarray = field(repr=False)
    powers: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, q: int) -> PrimeContext:
        return _context(int(q))

    @property
    def order(self) -> int:
        return self.q - 1


@lru_cache(maxsize=32)
def _context(q: int) -> PrimeContext:
    if q > MAX_CONTEXT_Q:
        raise ValueError(f"q={q} exceeds the discrete-log table cap {MAX_CONTEXT_Q}")
    g = primitive_root(q)
    powers = _power_table(g, q) if q > 2 else np.ones(1, dtype=np.int64)
    dlog = np.full(q, -1, dtype=np.int64)
    dlog[powers] = np.arange(q - 1, dtype=np.int64)
    powers.setflags(write=False)
    dlog.setflags(write=False)
    return PrimeContext(q=q, g=g, dlog=dlog, powers=powers)


def squarefree_part(n: int) -> int:
    """``n`` divided by its largest square divisor (trial division)."""
    n = int(n)
    if n < 1:
        raise ValueError("squarefree_part needs n >= 1")
    if n > MAX_PRIME_BOUND:
        raise ValueError("n exceeds 2**40")
    s = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if e % 2:
                s *= p
        p += 1 if p == 2 else 2
    return s * n


def squarefree_parts(limit: int) -> np.ndarray:
    """Array ``s`` with ``s[n] = squarefree_part(n)`` for ``1 <= n <= limit``; ``s[0] = 0``."""
    s = np.arange(limit + 1, dtype=np.int64)
    for p in _small_sieve(math.isqrt(limit)):
        p = int(p)
        sq = p * p
        pk = sq
        while pk <= limit:
            # every multiple of p^(2i) loses a factor p^2 once per level
            s[pk::pk] //= sq
            pk *= sq
    return s


@lru_cache(maxsize=1)
def _dickman_grid() -> tuple[np.ndarray, np.ndarray]:
    # Fine grid at half the step so that every quadrature node of the lagged
    # integrand lands on an already computed value.
    h = DICKMAN_STEP
    per_unit = round(1 / h)
    units = int(DICKMAN_MAX_U)
    fine = 2 * per_unit
    u = np.arange(units * fine + 1) / fine
    rho = np.ones_like(u)
    for n in range(1, units):
        lo = n * fine
        t0 = u[lo : lo + fine : 2]
        f0 = rho[lo - fine : lo : 2] / t0
        f1 = rho[lo - fine + 1 : lo + 1 : 2] / (t0 + h / 2)
        f2 = rho[lo - fine + 2 : lo + 2 : 2] / (t0 + h)
        panels = (h / 6) * (f0 + 4 * f1 + f2)
        coarse = rho[lo] - np.concatenate(([0.0], np.cumsum(panels)))
        rho[lo : lo + fine + 1 : 2] = coarse
        # mid-panel value from the quadratic through the three panel nodes
        rho[lo + 1 : lo + fine : 2] = coarse[:-1] - (h / 24) * (5 * f0 + 8 * f1 - f2)
    return u, rho


def dickman_rho(u: float) -> float:
    """Dickman's function, solving ``u rho'(u) = -rho(u - 1)`` with ``rho = 1`` on [0, 1].

    Fixed-step Simpson integration of the delay equation (step 1e-4) on
    [0, 10]; absolute error well below 1e-6.
    """
    u = float(u)
    if not 0.0 <= u <= DICKMAN_MAX_U:
        raise ValueError(f"u={u} outside [0, {DICKMAN_MAX_U}]")
    if u <= 1.0:
        return 1.0
    grid, rho = _dickman_grid()
    return float(np.interp(u, grid, rho))
