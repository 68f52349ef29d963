"""Distribution of short Dirichlet character sums and random multiplicative models."""

from .arith import PrimeContext, dickman_rho, is_prime, primes_in, primitive_root, squarefree_part
from .characters import Character, Parity, gauss_sum, legendre, parity, partial_sum
from .short_sums import (
    EmpiricalDistribution,
    GateVerdict,
    complex_gaussian_moment,
    gaussian_moment,
    second_moment_gate,
    sliding_distribution,
    sliding_sums,
)

__version__ = "0.1.0"
