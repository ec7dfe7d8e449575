"""Complete exponential and character sums, each with a brute-force oracle.

Every closed-form evaluator here (the two conductor-lowering character sums
and the factored form of the b-sum) is paired with a literal brute-force sum
over the full residue ring; the test suite asserts equality.  Inverse bars
are resolved as follows and used consistently by both routes:

* script_E: abar is the inverse of a mod q*M1 (the Farey modulus of the
  M1 | q branch), fixed to its canonical representative in [0, q*M1).
* script_D / script_B: abar_M1 is the inverse of a*M1 mod q; the outer
  inverse in the Kloosterman sum of (the b-sum) is taken mod its own
  modulus q*M1/n1.

The closed form of script_E carries a corrected unimodular factor: the
residue n entering chi1 and the M1-phase must be read through the CRT
congruence, i.e. as nbar = conj-inverse(q0*M2^(k+1)) * n mod M1.  Brute force
is the arbiter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import factor_towers, mod_inverse, unit_phase
from .characters import DirichletCharacter, gauss_sum

_kloosterman_cache: dict[tuple[int, int, int], complex] = {}


def kloosterman(m: int, n: int, c: int) -> complex:
    """Classical Kloosterman sum S(m, n; c) by brute force.

    The value is real; the imaginary part is kept (and asserted small by the
    tests) as a numerical self-check.
    """
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    key = (m % c, n % c, c)
    cached = _kloosterman_cache.get(key)
    if cached is not None:
        return cached
    x = np.arange(c)
    units = np.gcd(x, c) == 1
    xs = x[units]
    xinv = np.array([pow(int(v), -1, c) for v in xs]) if c > 1 else np.array([0])
    if c == 1:
        val = 1.0 + 0.0j
    else:
        val = complex(np.sum(np.exp(2j * np.pi * ((key[0] * xs + key[1] * xinv) % c) / c)))
    _kloosterman_cache[key] = val
    return val


def ramanujan(u: int, c: int) -> float:
    """Ramanujan sum R_c(u) over primitive residues; real-valued."""
    if c < 1:
        raise ValueError(f"modulus must be positive, got {c}")
    x = np.arange(c)
    xs = x[np.gcd(x, c) == 1]
    val = complex(np.sum(np.exp(2j * np.pi * ((u * xs) % c) / c)))
    return val.real


@dataclass
class CharSumParams:
    """Parameters of the conductor-lowering character sums.

    q is the reduced modulus (the Farey denominator is q*M1 for script_E);
    b is only used by script_D.  chi1, chi2 must be primitive.
    """

    a: int
    m: int
    q: int
    n: int
    chi1: DirichletCharacter
    chi2: DirichletCharacter
    b: int = 0

    @property
    def M1(self) -> int:
        return self.chi1.modulus

    @property
    def M2(self) -> int:
        return self.chi2.modulus

    def validate_E(self) -> None:
        if math.gcd(self.a, self.q * self.M1) != 1:
            raise ValueError(f"need gcd(a, q*M1) = 1, got a={self.a}, q*M1={self.q * self.M1}")
        if not (self.chi1.is_primitive and self.chi2.is_primitive):
            raise ValueError("script_E needs primitive chi1, chi2")

    def validate_D(self) -> None:
        if self.q % self.M1 == 0:
            raise ValueError("script_D requires gcd(q, M1) = 1")
        if math.gcd(self.a, self.q) != 1:
            raise ValueError(f"need gcd(a, q) = 1, got a={self.a}, q={self.q}")
        if math.gcd(self.b, self.M1) != 1:
            raise ValueError(f"need gcd(b, M1) = 1, got b={self.b}")
        if not (self.chi1.is_primitive and self.chi2.is_primitive):
            raise ValueError("script_D needs primitive chi1, chi2")


def script_E_bruteforce(p: CharSumParams) -> complex:
    """sum over c mod q*M1^2*M2 with c = n mod M1 of chi(c) e((m - M2*abar) c / modulus)."""
    p.validate_E()
    M1, M2, q = p.M1, p.M2, p.q
    R = q * M1 * M1 * M2
    abar = mod_inverse(p.a, q * M1)
    A = p.m - M2 * abar
    c = np.arange(R)
    sel = c % M1 == p.n % M1
    cs = c[sel]
    chi_vals = p.chi1.values[cs % M1] * p.chi2.values[cs % M2]
    phases = np.exp(2j * np.pi * ((A % R) * cs % R) / R)
    return complex(np.sum(chi_vals * phases))


def script_E_closed(p: CharSumParams) -> complex:
    """Closed form of the mod-q*M1^2*M2 sum (conductor-lowered Gauss sum product).

    Vanishes unless m = M2*abar mod q*M1; otherwise
        eps2 * q*M1 * sqrt(M2) * chi1(n) * chi2(q0*M1) * conj(chi2)(mstar)
            * e(mstar * M2^k * nbar / M1),
    with q = q0*M1^j*M2^k, mstar = (m - M2*abar) / (M1^(j+1) * M2^k) and
    nbar = inverse(q0*M2^(k+1)) * n mod M1.
    """
    p.validate_E()
    M1, M2, q = p.M1, p.M2, p.q
    tower = factor_towers(q, M1, M2)
    q0, j, k = tower.q0, tower.j, tower.k
    abar = mod_inverse(p.a, q * M1)
    A = p.m - M2 * abar
    if A % (q * M1) != 0:
        return 0.0j
    chi1_n = p.chi1(p.n)
    if chi1_n == 0:
        return 0.0j
    mstar = A // (M1 ** (j + 1) * M2**k)
    chi2_part = p.chi2(q0 * M1) * p.chi2.conj()(mstar)
    if chi2_part == 0:
        return 0.0j
    nbar = (mod_inverse(q0 * M2 ** (k + 1), M1) * p.n) % M1
    phase = unit_phase(((mstar % M1) * pow(M2, k, M1) * nbar % M1) / M1)
    eps2 = gauss_sum(p.chi2).epsilon
    return eps2 * q * M1 * math.sqrt(M2) * chi1_n * chi2_part * phase


def script_E_paper_literal(p: CharSumParams) -> complex:
    """The literal printed closed form (n in place of nbar); kept for comparison."""
    p.validate_E()
    M1, M2, q = p.M1, p.M2, p.q
    tower = factor_towers(q, M1, M2)
    q0, j, k = tower.q0, tower.j, tower.k
    abar = mod_inverse(p.a, q * M1)
    A = p.m - M2 * abar
    if A % (q * M1) != 0:
        return 0.0j
    mstar = A // (M1 ** (j + 1) * M2**k)
    chi1_part = p.chi1(q0 * M2 ** (k + 1) * p.n)
    chi2_part = p.chi2(q0 * M1) * p.chi2.conj()(mstar)
    phase = unit_phase(((mstar % M1) * pow(M2, k, M1) * (p.n % M1) % M1) / M1)
    eps2 = gauss_sum(p.chi2).epsilon
    return eps2 * q * M1 * math.sqrt(M2) * chi1_part * chi2_part * phase


def script_D_bruteforce(p: CharSumParams) -> complex:
    """sum over c mod q*M1*M2 of chi(c) e(cm/(qM) - c(abar_M1*M1 + b*q)/(q*M1))."""
    p.validate_D()
    M1, M2, q = p.M1, p.M2, p.q
    M = M1 * M2
    R = q * M
    abar_M1 = mod_inverse(p.a * M1, q) if q > 1 else 0
    B = abar_M1 * M1 + p.b * q
    c = np.arange(R)
    chi_vals = p.chi1.values[c % M1] * p.chi2.values[c % M2]
    # phase e(cm/(qM)) * e(-cB/(qM1)) over the common denominator qM
    expo = (((p.m - M2 * B) % R) * c) % R
    phases = np.exp(2j * np.pi * expo / R)
    return complex(np.sum(chi_vals * phases))


def script_D_closed(p: CharSumParams) -> complex:
    """Closed form: eps1*eps2*q*sqrt(M)*chi2(q0*M1)*conj(chi1)(qM2bar*m - b)*conj(chi2)(m0).

    Vanishes unless m = M2*abar mod q, with q = q0*M2^k and
    m0 = (m - M2*abar)/M2^k; qM2bar is the inverse of q*M2 mod M1.
    """
    p.validate_D()
    M1, M2, q = p.M1, p.M2, p.q
    tower = factor_towers(q, M1, M2)
    q0, k = tower.q0, tower.k
    abar = mod_inverse(p.a, q) if q > 1 else 0
    if (p.m - M2 * abar) % q != 0:
        return 0.0j
    m0 = (p.m - M2 * abar) // (M2**k)
    qM2bar = mod_inverse(q * M2, M1)
    chi1_part = p.chi1.conj()((qM2bar * p.m - p.b) % M1)
    chi2_part = p.chi2(q0 * M1) * p.chi2.conj()(m0)
    if chi1_part == 0 or chi2_part == 0:
        return 0.0j
    eps1 = gauss_sum(p.chi1).epsilon
    eps2 = gauss_sum(p.chi2).epsilon
    return eps1 * eps2 * q * math.sqrt(M1 * M2) * chi1_part * chi2_part


def script_B(
    n1: int,
    n2: int,
    m: int,
    a: int,
    q: int,
    chi1: DirichletCharacter,
    M2: int,
) -> complex:
    """The b-sum of Kloosterman sums attached to the congruence detection.

    Direct form: sum over b mod M1 with (b, M1) = 1 of
        conj(chi1)(qM2bar*m - b) * S(inv(abar_M1*M1 + b*q), n2; q*M1/n1),
    the outer inverse taken mod q*M1/n1.  Requires n1 | q, gcd(q, M1) = 1,
    gcd(a, q) = 1, chi1 primitive.
    """
    M1 = chi1.modulus
    if q % n1 != 0:
        raise ValueError(f"n1 = {n1} must divide q = {q}")
    if q % M1 == 0:
        raise ValueError("script_B requires gcd(q, M1) = 1")
    if math.gcd(a, q) != 1:
        raise ValueError(f"need gcd(a, q) = 1, got a={a}, q={q}")
    if not chi1.is_primitive:
        raise ValueError("script_B needs a primitive chi1")
    abar_M1 = mod_inverse(a * M1, q) if q > 1 else 0
    c = q * M1 // n1
    qM2bar = mod_inverse(q * M2, M1)
    chi1bar = chi1.conj()
    total = 0.0j
    for b in range(1, M1):
        if math.gcd(b, M1) != 1:
            continue
        X = mod_inverse(abar_M1 * M1 + b * q, c)
        total += chi1bar((qM2bar * m - b) % M1) * kloosterman(X, n2, c)
    return total


def script_B_factored(
    n1: int,
    n2: int,
    m: int,
    a: int,
    q: int,
    chi1: DirichletCharacter,
    M2: int,
) -> complex:
    """Factored form chi1(q) S(a*M1bar, n2*M1bar; qhat) * (mod-M1 b-sum).

    Equals script_B exactly; the pair is asserted equal by the tests.
    """
    M1 = chi1.modulus
    if q % n1 != 0:
        raise ValueError(f"n1 = {n1} must divide q = {q}")
    if q % M1 == 0:
        raise ValueError("script_B requires gcd(q, M1) = 1")
    qhat = q // n1
    M2bar = mod_inverse(M2, M1)
    chi1bar = chi1.conj()
    if qhat > 1:
        M1bar_qhat = mod_inverse(M1, qhat)
        outer = kloosterman(a * M1bar_qhat, n2 * M1bar_qhat, qhat)
    else:
        outer = 1.0 + 0.0j
    qhat_bar = mod_inverse(qhat, M1)
    inner = 0.0j
    for b in range(1, M1):
        if math.gcd(b, M1) != 1:
            continue
        inner += chi1bar((m * M2bar - b) % M1) * kloosterman(
            mod_inverse(b * qhat, M1), n2 * qhat_bar, M1
        )
    return chi1(q) * outer * inner


def script_C_star(
    n2: int,
    n1: int,
    m: int,
    mprime: int,
    a: int,
    aprime: int,
    q: int,
    qprime: int,
    chi1: DirichletCharacter,
    M2: int,
) -> complex:
    """Brute-force c-sum of B(n1,c,m,a,q) * conj(B(n1,c,m',a',q')) e(n2 c / (qhat qhat' M1))."""
    M1 = chi1.modulus
    if q % n1 != 0 or qprime % n1 != 0:
        raise ValueError("n1 must divide both q and q'")
    qhat = q // n1
    qhatp = qprime // n1
    C = qhat * qhatp * M1
    total = 0.0j
    for c in range(C):
        Bc = script_B(n1, c, m, a, q, chi1, M2)
        Bcp = script_B(n1, c, mprime, aprime, qprime, chi1, M2)
        total += Bc * np.conj(Bcp) * unit_phase((n2 * c % C) / C)
    return total


def lemma11_envelope(
    n2: int,
    n1: int,
    m: int,
    mprime: int,
    a: int,
    aprime: int,
    q: int,
    qprime: int,
    M1: int,
) -> float:
    """The bound that script_C_star is tested against (constant excluded).

    n2 != 0: qhat*qhat'*(qhat,qhat',n2) * M1^(5/2) * (M1, n2, m*qhat^2-m'*qhat'^2)^(1/2).
    n2 == 0: zero unless qhat = qhat'; then qhat^2 |R_qhat(a-a')| M1^(5/2) (M1, m-m')^(1/2).
    """
    qhat = q // n1
    qhatp = qprime // n1
    if n2 != 0:
        g3 = math.gcd(M1, math.gcd(abs(n2), abs(m * qhat**2 - mprime * qhatp**2)))
        return qhat * qhatp * math.gcd(math.gcd(qhat, qhatp), abs(n2)) * M1**2.5 * math.sqrt(g3)
    if qhat != qhatp:
        return 0.0
    ram = abs(ramanujan(a - aprime, qhat))
    return qhat**2 * ram * M1**2.5 * math.sqrt(math.gcd(M1, abs(m - mprime)))
