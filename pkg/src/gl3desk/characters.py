"""Dirichlet characters modulo primes, their products, and Gauss sums.

A character mod a prime M is stored as a full value table indexed by residue,
built once from a fixed least primitive root, so evaluation inside the hot
loops of complete character sums is a single table lookup.  Only prime moduli
are supported; the composed object chi1*chi2 mod M1*M2 also carries a table
(via CRT) but is not itself a "prime" character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import unit_phase


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out.append(n)
    return out


def least_primitive_root(M: int) -> int:
    """Smallest primitive root modulo the prime M."""
    if M == 2:
        return 1
    phi = M - 1
    prime_divs = _prime_factors(phi)
    for g in range(2, M):
        if all(pow(g, phi // p, M) != 1 for p in prime_divs):
            return g
    raise ValueError(f"no primitive root found mod {M} (is it prime?)")


@dataclass(frozen=True)
class DirichletCharacter:
    """chi mod a prime M with chi(g) = e(index/(M-1)) for the least root g."""

    modulus: int
    generator: int
    index: int
    values: np.ndarray = field(repr=False, compare=False)

    @property
    def is_principal(self) -> bool:
        return self.index % (self.modulus - 1) == 0

    @property
    def is_primitive(self) -> bool:
        # prime modulus: every nonprincipal character is primitive
        return not self.is_principal

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(
            modulus=self.modulus,
            generator=self.generator,
            index=(-self.index) % (self.modulus - 1),
            values=np.conj(self.values),
        )


def make_character(M: int, index: int) -> DirichletCharacter:
    """Character mod prime M determined by its discrete-log index.

    index 0 is the principal character; any other index in [0, M-1) gives a
    primitive character of order (M-1)/gcd(index, M-1).
    """
    if not is_prime(M):
        raise ValueError(f"modulus {M} is not prime")
    if not 0 <= index < M - 1:
        raise ValueError(f"index {index} out of range [0, {M - 1})")
    g = least_primitive_root(M)
    values = np.zeros(M, dtype=complex)
    r = 1
    for k in range(M - 1):
        values[r] = unit_phase(index * k / (M - 1))
        r = (r * g) % M
    return DirichletCharacter(modulus=M, generator=g, index=index, values=values)


def eval_char(chi, n: int) -> complex:
    """chi(n); zero when gcd(n, modulus) > 1."""
    return chi(n)


@dataclass(frozen=True)
class GaussSumValue:
    """g(chi) = epsilon * sqrt(M) for a primitive character chi mod M."""

    epsilon: complex
    modulus: int

    @property
    def value(self) -> complex:
        return self.epsilon * math.sqrt(self.modulus)


def gauss_sum(chi: DirichletCharacter) -> GaussSumValue:
    """Brute-force Gauss sum sum_x chi(x) e(x/M), returned as epsilon*sqrt(M).

    Raises ValueError for the principal character (|g| = sqrt(M) fails there).
    """
    if not chi.is_primitive:
        raise ValueError("Gauss sum epsilon is only defined for primitive characters")
    M = chi.modulus
    x = np.arange(M)
    total = complex(np.sum(chi.values * np.exp(2j * np.pi * x / M)))
    eps = total / math.sqrt(M)
    if abs(abs(eps) - 1.0) > 1e-12:
        raise ValueError(f"Gauss sum modulus check failed: |eps| = {abs(eps)}")
    return GaussSumValue(epsilon=eps, modulus=M)


@dataclass(frozen=True)
class ComposedCharacter:
    """chi = chi1 * chi2 mod M1*M2; supports evaluation only."""

    chi1: DirichletCharacter
    chi2: DirichletCharacter
    modulus: int
    values: np.ndarray = field(repr=False, compare=False)

    @property
    def is_principal(self) -> bool:
        return self.chi1.is_principal and self.chi2.is_principal

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])


def compose(chi1: DirichletCharacter, chi2: DirichletCharacter) -> ComposedCharacter:
    """The product character mod M1*M2 with value chi1(n)*chi2(n)."""
    if chi1.modulus == chi2.modulus:
        raise ValueError("composition requires distinct prime moduli")
    M = chi1.modulus * chi2.modulus
    n = np.arange(M)
    values = chi1.values[n % chi1.modulus] * chi2.values[n % chi2.modulus]
    return ComposedCharacter(chi1=chi1, chi2=chi2, modulus=M, values=values)
