"""Random multiplicative functions and exact oracles for their moments.

Extended Rademacher functions take independent signs at primes; Steinhaus
functions take independent uniform phases. Both extend completely
multiplicatively. The exact routines here expand moment integrals into
integer tuples, so Monte Carlo estimates and character averages can be
checked against closed computations.
"""

from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .arith import primes_in, squarefree_parts
from .characters import legendre_table
from .polya import grid_basis

MAX_SAMPLE_N = 10**6
MAX_ORACLE_N = 30
MAX_ORACLE_ORDER = 4
MAX_TUPLE_VISITS = 10**9
MAX_SECOND_MOMENT_N = 10**5
MAX_DYADIC_Q = 10**6
FLAVORS = ("exp", "cosine", "sine")

_CHUNK = 1 << 20
_U64 = (1 << 64) - 1


class RmfKind(str, enum.Enum):
    RADEMACHER = "extended_rademacher"
    STEINHAUS = "steinhaus"


def _kind(kind) -> RmfKind:
    if isinstance(kind, RmfKind):
        return kind
    if kind == "rademacher":
        return RmfKind.RADEMACHER
    try:
        return RmfKind(kind)
    except ValueError:
        raise ValueError(f"unknown random multiplicative function kind {kind!r}") from None


def _prime_uniforms(seed: int, sample: int, count: int) -> np.ndarray:
    # Philox is counter based: prime number i always reads stream position i
    # of the key (seed, sample), whatever N is and whoever asks first.
    key = ((int(seed) & _U64) << 64) | (int(sample) & _U64)
    return np.random.Generator(np.random.Philox(key=key)).random(count)


def _extend(kind: RmfKind, primes: np.ndarray, u: np.ndarray, N: int) -> np.ndarray:
    """Completely multiplicative values ``f(1..N)`` for rows of prime uniforms ``u``."""
    rows = u.shape[0]
    acc = np.zeros((rows, N + 1), dtype=np.int64 if kind is RmfKind.RADEMACHER else float)
    prime_part = (u >= 0.5).astype(np.int64) if kind is RmfKind.RADEMACHER else u
    for i, p in enumerate(primes.tolist()):
        pk = p
        while pk <= N:
            # n picks up one copy of f(p) for every power p^a dividing it
            acc[:, pk::pk] += prime_part[:, i : i + 1]
            pk *= p
    if kind is RmfKind.RADEMACHER:
        return (1 - 2 * (acc[:, 1:] & 1)).astype(float)
    return np.exp(2j * np.pi * np.mod(acc[:, 1:], 1.0))


def _primes_upto(N: int) -> np.ndarray:
    return primes_in(2, N) if N >= 2 else np.zeros(0, dtype=np.int64)


def sample_matrix(kind, N: int, seed: int, samples: int, first: int = 0) -> np.ndarray:
    """Rows ``first .. first+samples-1`` of independent realizations of ``f(1..N)``."""
    kind = _kind(kind)
    primes = _primes_upto(N)
    u = np.stack([_prime_uniforms(seed, s, primes.size) for s in range(first, first + samples)])
    return _extend(kind, primes, u.reshape(samples, primes.size), N)


@dataclass(frozen=True, eq=False)
class RmfSample:
    """One realization of a random multiplicative function on ``1..N``.

    ``values[n - 1]`` is ``f(n)``; ``prime_values`` maps each prime ``p <= N``
    to ``f(p)``.
    """

    kind: RmfKind
    N: int
    primes: np.ndarray
    values: np.ndarray
    seed: int

    @cached_property
    def prime_values(self) -> dict[int, complex | float]:
        return {int(p): self.values[p - 1].item() for p in self.primes}

    def __call__(self, n):
        n = np.asarray(n)
        if np.any(n < 1) or np.any(n > self.N):
            raise ValueError(f"argument outside 1..{self.N}")
        return self.values[n - 1]


def sample_rmf(kind, N: int, seed: int) -> RmfSample:
    """Realization number 0 for ``(kind, seed)`` on ``1..N``."""
    kind = _kind(kind)
    N = int(N)
    if not 1 <= N <= MAX_SAMPLE_N:
        raise ValueError(f"N={N} outside 1..{MAX_SAMPLE_N}")
    primes = _primes_upto(N)
    u = _prime_uniforms(seed, 0, primes.size)[None, :]
    values = _extend(kind, primes, u, N)[0]
    if kind is RmfKind.RADEMACHER:
        values = values.real
    values.setflags(write=False)
    primes.setflags(write=False)
    return RmfSample(kind=kind, N=N, primes=primes, values=values, seed=int(seed))


def _factor(n: int) -> Counter:
    n = int(n)
    if n < 1:
        raise ValueError("tuple entries must be positive")
    out = Counter()
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] += 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] += 1
    return out


def expected_product(kind, m_tuple, n_tuple) -> int:
    """``E[prod f(m_i) * conj(prod f(n_i))]``, which is always 0 or 1."""
    kind = _kind(kind)
    if kind is RmfKind.RADEMACHER:
        total = Counter()
        for v in (*m_tuple, *n_tuple):
            total.update(_factor(v))
        return int(all(e % 2 == 0 for e in total.values()))
    for v in (*m_tuple, *n_tuple):
        if int(v) < 1:
            raise ValueError("tuple entries must be positive")
    return int(math.prod(int(v) for v in m_tuple) == math.prod(int(v) for v in n_tuple))


def coefficient_array(coeffs) -> np.ndarray:
    """``a_1..a_N`` as a complex array; a mapping ``n -> a_n`` is filled in with zeros."""
    if isinstance(coeffs, Mapping):
        if not coeffs or min(coeffs) < 1:
            raise ValueError("coefficient mapping needs positive integer keys")
        a = np.zeros(max(coeffs), dtype=complex)
        for n, v in coeffs.items():
            a[int(n) - 1] = v
        return a
    return np.asarray(coeffs, dtype=complex)


def main_term(kind, coeffs, j: int, k: int, flavor: str = "exp") -> complex:
    """Gaussian-type main term subtracted inside the moment discrepancy."""
    kind = _kind(kind)
    a = coefficient_array(coeffs)
    energy = float(np.sum(np.abs(a) ** 2))
    if flavor == "exp":
        return math.factorial(k) * energy**k if j == k else 0.0
    if kind is RmfKind.STEINHAUS:
        return math.factorial(k) * (energy / 2) ** k if j == k else 0.0
    p = j + k
    if p % 2:
        return 0.0
    return math.factorial(p) / (math.factorial(p // 2) * 2 ** (p // 2)) * (energy / 2) ** (p // 2)


def _check_moment_args(kind: RmfKind, a: np.ndarray, j: int, k: int, flavor: str) -> None:
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    if j < 0 or k < 0:
        raise ValueError("moment orders must be nonnegative")
    if a.ndim != 1 or a.size == 0:
        raise ValueError("coefficients must be a nonempty 1-d array")
    if kind is RmfKind.RADEMACHER and flavor != "exp" and np.any(np.abs(a.imag) > 0):
        raise ValueError("Rademacher cosine/sine moments need real coefficients")


def _theta_integral(tuples: np.ndarray, j: int, flavor: str) -> np.ndarray:
    """Exact ``int_0^1`` of the product of trig factors for each tuple row."""
    p = tuples.shape[1]
    if flavor == "exp":
        lin = tuples[:, :j].sum(axis=1) - tuples[:, j:].sum(axis=1)
        return (lin == 0).astype(complex)
    signs = 1 - 2 * ((np.arange(2**p)[:, None] >> np.arange(p)[None, :]) & 1)
    hits = (signs @ tuples.T) == 0
    if flavor == "cosine":
        return hits.sum(axis=0) / 2.0**p + 0j
    # sin(2 pi x t) = (e(xt) - e(-xt)) / 2i and is real, so conj is harmless
    return (signs.prod(axis=1) @ hits) / (2j) ** p


def _parity_masks(N: int) -> np.ndarray:
    primes = _primes_upto(N).tolist()
    masks = np.zeros(N + 1, dtype=np.int64)
    for n in range(1, N + 1):
        mask, m = 0, n
        for b, p in enumerate(primes):
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            mask |= (e & 1) << b
        masks[n] = mask
    return masks


def exact_moment_discrepancy(kind, coeffs, j: int, k: int, flavor: str = "exp") -> float:
    """``E | int_0^1 V^j conj(V)^k dtheta - main term |^2`` for ``V = sum a_n f(n) trig(n theta)``.

    Every ``(j+k)``-tuple of indices is expanded; its theta integral is an
    exact count of signed solutions of a linear equation, and its random
    factor is a monomial in ``f`` labelled by a reduced ratio (Steinhaus) or
    a squarefree part (Rademacher). Distinct labels are orthonormal, so the
    expectation is the sum of squared label totals after removing the main
    term from the trivial label.
    """
    kind = _kind(kind)
    a = coefficient_array(coeffs)
    _check_moment_args(kind, a, j, k, flavor)
    N = a.size
    if N > MAX_ORACLE_N or j + k > MAX_ORACLE_ORDER:
        raise ValueError(f"oracle caps exceeded: N={N} (max {MAX_ORACLE_N}), j+k={j + k} (max {MAX_ORACLE_ORDER})")
    target = main_term(kind, a, j, k, flavor)
    p = j + k
    if p == 0:
        return float(abs(1 - target) ** 2)
    idx = np.indices((N,) * p).reshape(p, -1).T
    tuples = idx + 1
    weights = np.prod(a[idx[:, :j]], axis=1) * np.prod(np.conj(a[idx[:, j:]]), axis=1)
    weights = weights * _theta_integral(tuples, j, flavor)
    if kind is RmfKind.STEINHAUS:
        num = np.prod(tuples[:, :j], axis=1)
        den = np.prod(tuples[:, j:], axis=1)
        g = np.gcd(num, den)
        num, den = num // g, den // g
        labels = num * (den.max() + 1) + den
        trivial = den.max() + 2
    else:
        masks = _parity_masks(N)
        labels = np.bitwise_xor.reduce(masks[tuples], axis=1)
        trivial = 0
    uniq, inv = np.unique(labels, return_inverse=True)
    totals = np.bincount(inv, weights=weights.real) + 1j * np.bincount(inv, weights=weights.imag)
    hit = np.flatnonzero(uniq == trivial)
    if hit.size:
        totals[hit[0]] -= target
        return float(np.sum(np.abs(totals) ** 2))
    return float(np.sum(np.abs(totals) ** 2) + abs(target) ** 2)


def mc_moment_discrepancy(
    kind, coeffs, j: int, k: int, samples: int, seed: int, flavor: str = "exp"
) -> tuple[float, float]:
    """Sample mean and standard error of ``|int V^j conj(V)^k - main term|^2``.

    The theta integral of each realization is taken on the equispaced grid
    of size ``(j+k) N + 1``, which is exact for these trigonometric
    polynomials.
    """
    kind = _kind(kind)
    a = coefficient_array(coeffs)
    _check_moment_args(kind, a, j, k, flavor)
    if samples < 100:
        raise ValueError("need at least 100 samples")
    p = j + k
    if p == 0:
        return 0.0, 0.0
    N = a.size
    target = main_term(kind, a, j, k, flavor)
    basis = grid_basis(np.arange(1, N + 1), p * N + 1, flavor)
    out = np.empty(samples)
    batch = max(1, min(samples, _CHUNK // max(basis.size, 1)))
    for start in range(0, samples, batch):
        count = min(batch, samples - start)
        f = sample_matrix(kind, N, seed, count, first=start)
        v = (f * a) @ basis
        integral = np.mean(v**j * np.conj(v) ** k, axis=1)
        out[start : start + count] = np.abs(integral - target) ** 2
    return float(out.mean()), float(out.std(ddof=1) / math.sqrt(samples))


def diagonal_contribution(coeffs, k: int) -> tuple[float, float, float]:
    """``(diagonal, main, defect)`` of the ``j = k`` exponential moment.

    The diagonal sums ``prod a_m conj(a_n)`` over pairs of ``k``-tuples where
    ``n`` rearranges ``m``; ``main`` is ``k! (sum |a|^2)^k``.
    """
    a = np.asarray(coeffs, dtype=complex)
    N = a.size
    if k < 0 or N**k > MAX_TUPLE_VISITS // 100:
        raise ValueError("diagonal enumeration budget exceeded")
    if k == 0:
        return 1.0, 1.0, 0.0
    w = np.abs(a) ** 2
    idx = np.indices((N,) * k).reshape(k, -1).T
    srt = np.sort(idx, axis=1)
    # distinct rearrangements of a tuple: k! / prod(multiplicity!)
    runs = np.ones(idx.shape[0])
    streak = np.ones(idx.shape[0])
    for c in range(1, k):
        streak = np.where(srt[:, c] == srt[:, c - 1], streak + 1, 1)
        runs *= streak
    diag = float(np.sum(np.prod(w[idx], axis=1) * math.factorial(k) / runs))
    main = math.factorial(k) * float(w.sum()) ** k
    return diag, main, diag - main


@dataclass(frozen=True)
class TupleCountReport:
    set_id: str
    N: int
    j: int
    J: int
    k: int
    K: int
    total: int
    non_permutation: int
    method: str = "direct"

    def __post_init__(self):
        if not 0 <= self.non_permutation <= self.total:
            raise ValueError("non_permutation must lie in [0, total]")

    @property
    def ratio(self) -> float:
        return self.non_permutation / self.total if self.total else 0.0


def _signed(block: np.ndarray, split: int) -> np.ndarray:
    return block[:, :split].sum(axis=1) - block[:, split:].sum(axis=1)


def _rows_equal_sorted(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    if left.shape[1] != right.shape[1]:
        return np.zeros(left.shape[0], dtype=bool)
    return np.all(np.sort(left, axis=1) == np.sort(right, axis=1), axis=1)


def _square_product(cols: np.ndarray, sqf: np.ndarray) -> np.ndarray:
    # squarefree part of a running product: s(ab) = s(a) s(b) / gcd(s(a), s(b))^2
    r = np.ones(cols.shape[0], dtype=np.int64)
    for c in range(cols.shape[1]):
        s = sqf[cols[:, c]]
        g = np.gcd(r, s)
        r = (r // g) * (s // g)
    return r == 1


def _direct_chunk(set_id, rows, j, J, k, K, sqf):
    m, n = rows[:, :J], rows[:, J : J + K]
    if set_id == "C":
        m2, n2 = rows[:, J + K : 2 * J + K], rows[:, 2 * J + K :]
        ok = (_signed(m, j) == _signed(n, k)) & (_signed(m2, j) == _signed(n2, k))
        ok &= np.prod(m, axis=1) * np.prod(n2, axis=1) == np.prod(m2, axis=1) * np.prod(n, axis=1)
        good = _rows_equal_sorted(m, n) & _rows_equal_sorted(m2, n2)
        return ok, ok & ~good
    ok = _signed(m, j) == _signed(n, k)
    if set_id == "A":
        ok &= _square_product(rows, sqf)
        left = np.concatenate((m[:, :j], n[:, k:]), axis=1)
        right = np.concatenate((n[:, :k], m[:, j:]), axis=1)
        good = _rows_equal_sorted(left, right)
    else:
        ok &= np.prod(m, axis=1) == np.prod(n, axis=1)
        good = _rows_equal_sorted(m, n)
    return ok, ok & ~good


def _count_direct(set_id, N, j, J, k, K) -> tuple[int, int]:
    width = (J + K) * (2 if set_id == "C" else 1)
    sqf = squarefree_parts(N)
    total = bad = 0
    size = N**width
    for start in range(0, size, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
        rows = np.empty((flat.size, width), dtype=np.int64)
        for c in range(width - 1, -1, -1):
            rows[:, c] = flat % N + 1
            flat //= N
        ok, violated = _direct_chunk(set_id, rows, j, J, k, K, sqf)
        total += int(ok.sum())
        bad += int(violated.sum())
    return total, bad


def _tuples(N: int, length: int):
    idx = np.indices((N,) * length).reshape(length, -1).T + 1
    return [tuple(r) for r in idx.tolist()]


def _weighted_set(t: tuple, split: int) -> tuple:
    w = Counter(t[:split])
    w.subtract(Counter(t[split:]))
    return tuple(sorted((v, c) for v, c in w.items() if c))


def _odd_primes_mask(t: tuple, sqf: np.ndarray) -> int:
    s = 1
    for v in t:
        x = int(sqf[v])
        g = math.gcd(s, x)
        s = (s // g) * (x // g)
    return s


def _count_grouped(set_id, N, j, J, k, K) -> tuple[int, int]:
    # Join m-blocks and n-blocks on hashed keys, looping over the n side first.
    ns = _tuples(N, K)
    ms = _tuples(N, J)
    if set_id == "A":
        sqf = squarefree_parts(N)
        by_key, by_full = Counter(), Counter()
        for n in ns:
            key = (sum(n[:k]) - sum(n[k:]), _odd_primes_mask(n, sqf))
            by_key[key] += 1
            by_full[key + (_weighted_set(n, k),)] += 1
        total = good = 0
        for m in ms:
            key = (sum(m[:j]) - sum(m[j:]), _odd_primes_mask(m, sqf))
            total += by_key[key]
            good += by_full[key + (_weighted_set(m, j),)]
        return total, total - good
    if set_id == "B":
        by_key, by_full = Counter(), Counter()
        for n in ns:
            key = (sum(n[:k]) - sum(n[k:]), math.prod(n))
            by_key[key] += 1
            by_full[key + (tuple(sorted(n)),)] += 1
        total = good = 0
        for m in ms:
            key = (sum(m[:j]) - sum(m[j:]), math.prod(m))
            total += by_key[key]
            if J == K:
                good += by_full[key + (tuple(sorted(m)),)]
        return total, total - good
    # C: count linear-equation blocks by reduced ratio prod(m)/prod(n);
    # the cross-product condition says the two blocks share a ratio.
    by_lin = defaultdict(list)
    for n in ns:
        by_lin[sum(n[:k]) - sum(n[k:])].append(n)
    ratios, perms = Counter(), 0
    for m in ms:
        pm = math.prod(m)
        sm = tuple(sorted(m))
        for n in by_lin.get(sum(m[:j]) - sum(m[j:]), ()):
            pn = math.prod(n)
            g = math.gcd(pm, pn)
            ratios[(pm // g, pn // g)] += 1
            perms += J == K and sm == tuple(sorted(n))
    total = sum(c * c for c in ratios.values())
    return total, total - perms * perms


def count_set(set_id: str, N: int, j: int, J: int, k: int, K: int, method: str = "direct") -> TupleCountReport:
    """Exhaustive counts for the sign-pattern tuple sets ``A``, ``B`` and ``C``.

    ``method="direct"`` scans every tuple in lexicographic order;
    ``method="grouped"`` joins hashed half-tuples and never visits the full
    product space. Both must agree exactly.
    """
    if set_id not in ("A", "B", "C"):
        raise ValueError(f"unknown set {set_id!r}")
    if not (0 <= j <= J and 1 <= k <= K and N >= 1):
        raise ValueError("need N >= 1, 0 <= j <= J and 1 <= k <= K")
    width = (J + K) * (2 if set_id == "C" else 1)
    if N**width > MAX_TUPLE_VISITS:
        raise ValueError(f"enumeration budget exceeded: {N}^{width} > {MAX_TUPLE_VISITS}")
    if method == "direct":
        total, bad = _count_direct(set_id, N, j, J, k, K)
    elif method == "grouped":
        total, bad = _count_grouped(set_id, N, j, J, k, K)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TupleCountReport(set_id, N, j, J, k, K, total, bad, method)


def rmf_second_moment(alpha, N: int | None = None) -> float:
    """``E|sum_{n<=N} alpha_n f(n)|^2`` for extended Rademacher ``f``.

    ``f(n) = f(s(n))`` with ``s`` the squarefree part, and distinct
    squarefree values are orthonormal.
    """
    a = np.asarray(alpha, dtype=complex)
    N = a.size if N is None else int(N)
    if N != a.size:
        raise ValueError("N must equal len(alpha)")
    if N > MAX_SECOND_MOMENT_N:
        raise ValueError(f"N={N} above {MAX_SECOND_MOMENT_N}")
    s = squarefree_parts(N)[1:]
    re = np.bincount(s, weights=a.real)
    im = np.bincount(s, weights=a.imag)
    return float(np.sum(re**2 + im**2))


def dyadic_prime_average(Q: int, alpha, N: int | None = None) -> float:
    """``(log Q / Q) sum_{Q<=q<=2Q, q odd prime} |sum_{n<=N} alpha_n (n/q)|^2``."""
    a = np.asarray(alpha, dtype=complex)
    N = a.size if N is None else int(N)
    if N != a.size:
        raise ValueError("N must equal len(alpha)")
    if N > Q:
        raise ValueError(f"N={N} exceeds Q={Q}")
    if Q > MAX_DYADIC_Q:
        raise ValueError(f"Q={Q} above {MAX_DYADIC_Q}")
    qs = primes_in(max(Q, 3), 2 * Q)
    sums = legendre_table(qs, N) @ a
    return float(math.log(Q) / Q * np.sum(np.abs(sums) ** 2))


def dyadic_bound(Q: int, alpha, constant: float = 3.0) -> float:
    """``constant * (rmf_second_moment + N (sum |alpha|)^2 / Q^0.99)``."""
    a = np.asarray(alpha, dtype=complex)
    return constant * (rmf_second_moment(a) + a.size * float(np.sum(np.abs(a))) ** 2 / Q**0.99)
