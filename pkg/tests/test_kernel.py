import math

import numpy as np
import pytest

from charsums.arith import PrimeContext, dickman_rho
from charsums.characters import Character, gauss_sum
from charsums.kernel import (
    alpha,
    biased_complex_search,
    biased_real_search,
    kernel_G,
    kernel_length,
    mean_abs_G,
    run_kernel_experiment,
    subtracted_distribution,
    variance_deficit,
)
from charsums.short_sums import GateVerdict, second_moment_gate, sliding_sums

GMEAN_C = 5
ENVELOPE_C = 4
BIASED_EVEN_Q = 10369  # Legendre symbol is 1 on 1..10 and q = 1 mod 4


def legendre(q):
    return Character.legendre(PrimeContext.build(q))


def test_alpha_q7():
    # delta q / H = 3 exactly
    assert alpha(legendre(7), 2, 6 / 7) == pytest.approx(-1 / 3)


def test_alpha_principal_is_one():
    assert alpha(Character(PrimeContext.build(101), 0), 10, 0.5) == pytest.approx(1)


def test_alpha_bounded():
    ctx = PrimeContext.build(1009)
    for a in range(1, 1008, 97):
        assert abs(alpha(Character(ctx, a), 20, 0.3)) <= 1 + 1e-12


@pytest.mark.parametrize("delta", [0.0, 1.5])
def test_kernel_length_rejects_delta(delta):
    with pytest.raises(ValueError):
        kernel_length(101, 10, delta)


def test_kernel_length_rejects_empty():
    with pytest.raises(ValueError):
        alpha(legendre(101), 50, 0.1)


def test_G_at_zero():
    chi = legendre(1009)
    H, delta = 50, 0.5
    L = kernel_length(1009, H, delta)
    expected = alpha(chi, H, delta) * gauss_sum(chi) * H * L / 1009
    assert kernel_G(chi, H, delta, 0) == pytest.approx(expected)


def test_G_closed_form_matches_direct_sum():
    chi = Character(PrimeContext.build(1009), 123)
    H, delta = 40, 0.8
    L = kernel_length(1009, H, delta)
    scale = alpha(chi, H, delta) * gauss_sum(chi) * H / 1009
    xs = np.random.default_rng(1).integers(0, 1009, 100)
    direct = scale * np.array([np.sum(np.exp(2j * np.pi * np.arange(1, L + 1) * x / 1009)) for x in xs])
    assert np.allclose(kernel_G(chi, H, delta, xs), direct, atol=1e-9)


def test_G_mean_square():
    q, H, delta = 1009, 30, 0.9
    chi = legendre(q)
    a = alpha(chi, H, delta)
    L = kernel_length(q, H, delta)
    ms = np.mean(np.abs(kernel_G(chi, H, delta)) ** 2)
    assert ms == pytest.approx(abs(a) ** 2 * H * H / q * L, rel=1e-9)
    assert ms <= H


def test_G_envelope():
    q, H, delta = 10007, 100, 0.5
    chi = legendre(q)
    L = kernel_length(q, H, delta)
    x = np.arange(q)
    dist = np.minimum(x / q, 1 - x / q)
    env = np.minimum(L, np.divide(1.0, dist, out=np.full(q, np.inf), where=dist > 0))
    scale = abs(alpha(chi, H, delta)) * math.sqrt(q) * H / q
    assert np.all(np.abs(kernel_G(chi, H, delta)) <= ENVELOPE_C * scale * env + 1e-9)


def test_zero_alpha_deficit_identity():
    q, H = 10007, 500
    assert variance_deficit(legendre(q), H, 0.5, alpha_value=0) == pytest.approx(1 - H / q, abs=1e-6)


@pytest.mark.parametrize("delta", [0.01, 0.05, 0.1])
def test_biased_prime_deficit(delta):
    chi = legendre(BIASED_EVEN_Q)
    H = math.floor(delta * BIASED_EVEN_Q / 10)
    assert alpha(chi, H, delta) == pytest.approx(1)
    d = variance_deficit(chi, H, delta)
    assert 0 <= d <= 1 - delta / 2


def test_decomposition_identity():
    q, H, delta = 5003, 40, 0.3
    chi = Character(PrimeContext.build(q), 777)
    S = sliding_sums(chi, H)
    G = kernel_G(chi, H, delta)
    lhs = np.mean(np.abs(S - G) ** 2)
    rhs = np.mean(np.abs(S) ** 2) - 2 * np.real(np.mean(S * np.conj(G))) + np.mean(np.abs(G) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-6)
    assert variance_deficit(chi, H, delta) == pytest.approx(lhs / H, rel=1e-12)


def test_mean_abs_G():
    assert mean_abs_G(legendre(1009), 50, 0.5, alpha_value=0) == 0
    q, H = 10007, 100
    assert mean_abs_G(legendre(q), H, 1.0) <= GMEAN_C * math.log(q / H) / math.sqrt(q / H)
    chi = legendre(q)
    base = mean_abs_G(chi, H, 0.5, alpha_value=1.0)
    assert mean_abs_G(chi, H, 0.5, alpha_value=0.25) == pytest.approx(0.25 * base)


def test_gate_chaining():
    chi = legendre(BIASED_EVEN_Q)
    delta, tau = 0.1, 0.95
    H = math.floor(delta * BIASED_EVEN_Q / 10)
    row = run_kernel_experiment(chi, H, delta, tau=tau)
    assert row.deficit <= tau
    assert row.gate is GateVerdict.BLOCKED
    assert second_moment_gate(subtracted_distribution(chi, H, delta), tau) is GateVerdict.BLOCKED
    assert row.deficit >= 0 and row.gmean >= 0


def test_real_search_x1_all_one():
    hits = biased_real_search(100, 200, 1)
    assert all(b == 1.0 for _, b in hits)
    assert [q for q, _ in hits] == sorted(q for q, _ in hits)


def test_real_search_finds_bias():
    hits = biased_real_search(10**4, 10**5, 10)
    assert hits[0][1] >= 0.6
    assert all(-1 <= b <= 1 for _, b in hits)
    biases = [b for _, b in hits]
    assert biases == sorted(biases, reverse=True)


def test_real_search_empty_and_capped():
    assert biased_real_search(24, 28, 3) == []
    with pytest.raises(ValueError):
        biased_real_search(10, 10**8, 3)


def test_complex_search():
    ctx = PrimeContext.build(1009)
    assert biased_complex_search(ctx, 10, 1.0001) == []
    hits = biased_complex_search(ctx, 10, 0.5)
    assert hits and all(r >= 0.5 - 1e-12 for _, r in hits)
    with pytest.raises(ValueError):
        biased_complex_search(ctx, 1009, 0.5)


def test_complex_search_rho_threshold():
    q = 10007
    x = math.floor(math.log(q) ** 2)
    assert len(biased_complex_search(PrimeContext.build(q), x, dickman_rho(2) / 2)) >= 1


def test_complex_search_matches_direct():
    ctx = PrimeContext.build(211)
    hits = dict(biased_complex_search(ctx, 6, 0.4))
    for a in range(1, 210):
        r = abs(np.sum(Character(ctx, a)(np.arange(1, 7)))) / 6
        assert (a in hits) == (r >= 0.4 - 1e-12)
