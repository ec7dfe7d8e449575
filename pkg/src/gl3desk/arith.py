"""Exact integer and modular arithmetic shared by all higher modules.

Everything here is exact (Python ints); no floating point enters a residue
computation.  The Farey-type enumeration matches the half-open ranges of the
Kloosterman delta expansion literally, since the n=0 identity
sum 1/(aq) = 1/2 is sensitive to them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def unit_phase(z: float) -> complex:
    """The additive character e(z) = exp(2*pi*i*z)."""
    return cmath.exp(complex(0.0, TWO_PI * z))


def mod_inverse(a: int, q: int) -> int:
    """Multiplicative inverse of a mod q, as the residue in [0, q).

    Raises ValueError when gcd(a, q) != 1.
    """
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    try:
        return pow(a, -1, q)
    except ValueError as exc:
        raise ValueError(f"{a} is not invertible mod {q}: gcd = {math.gcd(a, q)}") from exc


@dataclass(frozen=True)
class TowerFactorization:
    """q = q0 * M1**j * M2**k with gcd(q0, M1*M2) = 1."""

    q0: int
    j: int
    k: int


def factor_towers(q: int, M1: int, M2: int) -> TowerFactorization:
    """Split off the exact powers of the two fixed primes M1, M2 from q."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if M1 == M2:
        raise ValueError("M1 and M2 must be distinct")
    j = 0
    while q % M1 == 0:
        q //= M1
        j += 1
    k = 0
    while q % M2 == 0:
        q //= M2
        k += 1
    return TowerFactorization(q0=q, j=j, k=k)


@dataclass(frozen=True)
class FareyPair:
    """A pair (a, q) of the Kloosterman-type Farey family at level Q.

    1 <= q <= Q, Q < a <= q + Q, gcd(a, q) = 1.
    """

    a: int
    q: int


def farey_pairs(Q: float) -> list[FareyPair]:
    """All pairs (a, q) with 1 <= q <= Q, Q < a <= q+Q, gcd(a,q)=1.

    Returned in (q, a)-lexicographic order.  Q is a real parameter; the
    comparisons are taken exactly as written (strict left, closed right).
    """
    if Q < 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    pairs = []
    qmax = math.floor(Q)
    for q in range(1, qmax + 1):
        a = math.floor(Q) + 1
        # guard against floor landing below the strict bound (Q integral)
        while a <= Q:
            a += 1
        while a <= q + Q:
            if math.gcd(a, q) == 1:
                pairs.append(FareyPair(a=a, q=q))
            a += 1
    return pairs
