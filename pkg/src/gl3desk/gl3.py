"""GL(3) Fourier-coefficient oracles, the archimedean Mellin transform, and a
two-sided numerical check of the Voronoi summation formula.

Two desk-computable coefficient families are provided: the divisor-type
oracle with lambda(1, n) = d_3(n) (archimedean parameters (0, 0, 0)) and the
symmetric-square lift of the weight-12 discriminant form, whose coefficients
come from exact Ramanujan tau values via Satake parameters.  tau is computed
by expanding the discriminant product (Jacobi's eta^3 series raised to the
8th power with exact integer convolutions) -- an oracle independent of the
coefficient recursions it feeds.

The Voronoi dual side needs Phi(x) = (1/2 pi i) int x^{-s} gamma_pm(s)
phitilde(-s) ds.  The line sigma = -1/2 is pole-free for both oracles (every
Gamma-numerator pole with Re s > -1 is cancelled by a 1/Gamma zero), and on
that line |gamma_pm| stays O(1), so a truncated vertical integral with
oscillation-aware spacing converges.  At a line right of the lift's pole
bound (sigma > 10) the integrand would peak around 1e47 before the Mellin
decay wins; no double-precision quadrature survives that, which is why the
pole-free line is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .arith import mod_inverse
from .expsums import kloosterman
from .oscillatory import V_BUMP, BumpFunction
from .special import ArchimedeanParams, gamma_pm_line

# ---------------------------------------------------------------------------
# exact Ramanujan tau via the discriminant product

def _poly_mul_exact(a: list[int], b: list[int], length: int) -> list[int]:
    """Exact integer polynomial product, truncated, via Kronecker substitution.

    Coefficients are split into positive and negative parts so Python's
    big-int multiply performs the convolution exactly.
    """
    W = 224  # slot width in bits; fits len * max|a| * max|b| for our sizes
    mask = (1 << W) - 1

    def pack(cs):
        out = 0
        for c in reversed(cs):
            out = (out << W) | c
        return out

    ap = pack([max(c, 0) for c in a])
    an = pack([max(-c, 0) for c in a])
    bp = pack([max(c, 0) for c in b])
    bn = pack([max(-c, 0) for c in b])
    P = ap * bp + an * bn
    Ng = ap * bn + an * bp
    out = []
    for _ in range(length):
        out.append((P & mask) - (Ng & mask))
        P >>= W
        Ng >>= W
    return out


@lru_cache(maxsize=4)
def ramanujan_tau_table(X: int) -> tuple[int, ...]:
    """tau(n) for 1 <= n <= X, from Delta = q * (eta^3)^8 with Jacobi's eta^3."""
    L = X
    e3 = [0] * L
    k = 0
    while k * (k + 1) // 2 < L:
        e3[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    a3 = np.array(e3, dtype=np.int64)
    e6 = np.convolve(a3, a3)[:L]
    e12 = np.convolve(e6, e6)[:L]  # |coeff| <~ 6e11 at X = 1e4: exact in int64
    e24 = _poly_mul_exact([int(v) for v in e12], [int(v) for v in e12], L)
    return tuple(e24)


# ---------------------------------------------------------------------------
# Schur polynomial s_{(a+b, b, 0)} via Jacobi-Trudi

def _complete_homogeneous(x: tuple[complex, complex, complex], k: int) -> complex:
    if k < 0:
        return 0.0
    x1, x2, x3 = x
    total = 0.0j
    for i in range(k + 1):
        for j in range(k - i + 1):
            total += x1**i * x2**j * x3 ** (k - i - j)
    return total


def schur_two_row(x: tuple[complex, complex, complex], a: int, b: int) -> complex:
    """s_{(a+b, b, 0)}(x1, x2, x3) = h_{a+b} h_b - h_{a+b+1} h_{b-1}."""
    return _complete_homogeneous(x, a + b) * _complete_homogeneous(x, b) - _complete_homogeneous(
        x, a + b + 1
    ) * _complete_homogeneous(x, b - 1)


def _factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


@dataclass
class CoefficientOracle:
    """Multiplicative GL(3) coefficients lambda(n1, n2) with lambda(1,1) = 1."""

    name: str
    arch: ArchimedeanParams
    prime_power: Callable[[int, int, int], float] = field(repr=False)
    prime_bound: int | None = None
    needs_calibration: bool = False

    def coeff(self, n1: int, n2: int) -> float:
        if n1 < 1 or n2 < 1:
            raise ValueError("coefficient indices must be positive")
        total = 1.0
        for p, e in _factorize(n1 * n2):
            if self.prime_bound is not None and p > self.prime_bound:
                raise ValueError(f"prime {p} beyond precomputed bound {self.prime_bound}")
            a = 0
            m = n1
            while m % p == 0:
                m //= p
                a += 1
            total *= self.prime_power(p, a, e - a)
        return total

    def lam1_up_to(self, X: int) -> np.ndarray:
        """lambda(1, n) for 0 <= n <= X (index 0 unused), multiplicative sieve."""
        spf = np.zeros(X + 1, dtype=np.int64)
        for p in range(2, X + 1):
            if spf[p] == 0:
                spf[p::p] = np.where(spf[p::p] == 0, p, spf[p::p])
        arr = np.zeros(X + 1)
        if X >= 1:
            arr[1] = 1.0
        for n in range(2, X + 1):
            p = int(spf[n])
            m, e = n, 0
            while m % p == 0:
                m //= p
                e += 1
            arr[n] = arr[m] * self.prime_power(p, 0, e)
        return arr

    def export_table(self, path, max_norm: int) -> None:
        """Plain-text rows "n1 n2 value" for all n1^2 n2 <= max_norm."""
        with open(path, "w") as fh:
            n1 = 1
            while n1 * n1 <= max_norm:
                for n2 in range(1, max_norm // (n1 * n1) + 1):
                    fh.write(f"{n1} {n2} {self.coeff(n1, n2)!r}\n")
                n1 += 1


def load_table(path) -> dict[tuple[int, int], float]:
    """Read back a plain-text coefficient table written by export_table."""
    out = {}
    with open(path) as fh:
        for line in fh:
            a, b, v = line.split()
            out[(int(a), int(b))] = float(v)
    return out


def d3_oracle() -> CoefficientOracle:
    """The divisor-type oracle: lambda(p^a, p^b) = (a+1)(b+1)(a+b+2)/2."""

    def pp(p: int, a: int, b: int) -> float:
        return (a + 1) * (b + 1) * (a + b + 2) / 2.0

    return CoefficientOracle(
        name="d3", arch=ArchimedeanParams(mu=(0.0, 0.0, 0.0)), prime_power=pp
    )


def sym2_delta_oracle(prime_bound: int = 10_000) -> CoefficientOracle:
    """Symmetric-square lift of the weight-12 discriminant form.

    Satake data at p: alpha + beta = tau(p)/p^(11/2), alpha*beta = 1;
    lambda(p^a, p^b) = s_{(a+b, b, 0)}(alpha^2, 1, beta^2).  The archimedean
    parameters (11, 0, -11) are recorded with the calibration flag set: the
    Voronoi check fits one unimodular constant before asserting agreement.
    """
    if prime_bound > 10_000:
        raise ValueError("prime_bound must be <= 10000")
    taus = ramanujan_tau_table(max(prime_bound + 1, 16))

    @lru_cache(maxsize=None)
    def satake_sq(p: int) -> tuple[complex, complex]:
        lam = taus[p - 1] / p**5.5
        if abs(lam) > 2.0 + 1e-12:
            raise ValueError(f"Deligne bound violated at p = {p}: {lam}")
        disc = complex(lam * lam - 4.0)
        alpha = (lam + np.sqrt(disc)) / 2.0
        beta = (lam - np.sqrt(disc)) / 2.0
        return complex(alpha) ** 2, complex(beta) ** 2

    def pp(p: int, a: int, b: int) -> float:
        a2, b2 = satake_sq(p)
        val = schur_two_row((a2, 1.0 + 0.0j, b2), a, b)
        if abs(val.imag) > 1e-9 * max(1.0, abs(val)):
            raise ArithmeticError(f"non-real coefficient at p={p}, (a,b)=({a},{b})")
        return val.real

    return CoefficientOracle(
        name="sym2_delta",
        arch=ArchimedeanParams(mu=(11.0, 0.0, -11.0)),
        prime_power=pp,
        prime_bound=prime_bound,
        needs_calibration=True,
    )


def rankin_selberg_ratio(oracle: CoefficientOracle, x: float) -> float:
    """(sum over n1^2 n2 <= x of lambda(n1, n2)^2) / x^1.05."""
    if x < 10:
        raise ValueError("x must be >= 10")
    total = 0.0
    n1 = 1
    while n1 * n1 <= x:
        for n2 in range(1, int(x / (n1 * n1)) + 1):
            total += oracle.coeff(n1, n2) ** 2
        n1 += 1
    return total / x**1.05


# ---------------------------------------------------------------------------
# the transform Phi^(+-) by vertical-line quadrature

class PhiLine:
    """Cached vertical-line data for Phi_phi^{+-} with phi(y) = B(y/N).

    Phi_s(x) = (xN)^(-sigma)/(2 pi) * int_R (xN)^(-iu) gamma_s(sigma + i u)
               Btilde(-sigma - i u) du.
    Only u >= 0 is tabulated: for real mu and a real bump the negative half
    satisfies F_s(-u) = conj(F_{-s}(u)), so one line object serves both signs
    (and the Mellin factor is shared).  The grid is uniform in u -- the
    integrand is analytic in a strip, so the trapezoid rule converges
    exponentially in 1/du -- spaced for the worst announced |ln(xN)| and
    truncated once the Mellin decay has won.  A built-in du-halving check
    validates the spacing on first use.
    """

    def __init__(
        self,
        bump: BumpFunction,
        N: float,
        arch: ArchimedeanParams,
        sigma: float = -0.5,
        max_abs_ln_x: float = 10.0,
        tail_rel: float = 3e-13,
        oversample: float = 8.0,
    ):
        if any(abs(complex(m).imag) > 1e-12 for m in arch.mu):
            raise ValueError("PhiLine symmetry trick requires real mu")
        self.bump = bump
        self.N = float(N)
        self.arch = arch
        self.sigma = sigma
        a, b = bump.support
        self._span = math.log(b / a)
        rate = 3.0 * abs(math.log(4000.0 / (2 * math.pi))) + 3.0 + max_abs_ln_x
        self.du = 2 * math.pi / (rate * oversample)
        block = 4096
        us_all, mel_all = [], []
        gp_all, gm_all = [], []
        edge = 0.0
        peak = 0.0
        while True:
            us = edge + self.du * np.arange(block)
            mel, n_gl = self._mellin(-self.sigma - 1j * us)
            gp = gamma_pm_line(self.sigma, us, +1, arch)
            gm = gamma_pm_line(self.sigma, us, -1, arch)
            us_all.append(us)
            mel_all.append(mel)
            gp_all.append(gp)
            gm_all.append(gm)
            gmax = np.maximum(np.abs(gp), np.abs(gm))
            env = np.abs(mel) * gmax
            peak = max(peak, float(np.max(env)))
            edge = float(us[-1]) + self.du
            # the Mellin factor carries a quadrature round-off floor of about
            # n_gl * eps; truncate once the envelope is indistinguishable from it
            noise = float(np.max(gmax)) * n_gl * 2e-16
            if float(np.max(env)) < max(tail_rel * peak, 5.0 * noise) and edge > 60.0:
                break
            if edge > 6000.0:
                raise RuntimeError("Phi line truncation not reached")
        self.u = np.concatenate(us_all)
        mel = np.concatenate(mel_all)
        self.Fp = np.concatenate(gp_all) * mel
        self.Fm = np.concatenate(gm_all) * mel
        # trapezoid over [0, inf): the u = 0 node carries half weight
        self._w0 = 0.5
        # spacing self-check: dropping to every second node (du doubled) must
        # barely move the probe values, since convergence in du is exponential
        for x_probe in (math.exp(-0.8 * max_abs_ln_x) / self.N, 40.0 / self.N):
            for sgn in (1, -1):
                ref = self.phi(x_probe, sgn)
                coarse = self._phi_stride(x_probe, sgn, 2)
                if abs(ref - coarse) > 1e-7 * max(abs(ref), 1e-10):
                    raise RuntimeError(
                        f"Phi line spacing check failed at x={x_probe}: "
                        f"{abs(ref - coarse):.2e} vs {abs(ref):.2e}"
                    )

    def _phi_stride(self, x: float, sign: int, stride: int) -> complex:
        xN = x * self.N
        ln = math.log(xN)
        u = self.u[::stride]
        phase = np.exp(-1j * u * ln)
        F = (self.Fp if sign == 1 else self.Fm)[::stride]
        G = (self.Fm if sign == 1 else self.Fp)[::stride]
        half = np.sum(F * phase) - 0.5 * F[0]
        other = np.sum(G * phase) - 0.5 * G[0]
        return complex((half + np.conj(other)) * self.du * stride) * xN ** (-self.sigma) / (
            2 * math.pi
        )

    def _mellin(self, s_vals: np.ndarray) -> tuple[np.ndarray, int]:
        a, b = self.bump.support
        umax = float(np.max(np.abs(s_vals.imag))) if len(s_vals) else 0.0
        n_gl = 256
        while n_gl < 0.7 * umax * self._span + 64 and n_gl < 8192:
            n_gl *= 2
        x, w = np.polynomial.legendre.leggauss(n_gl)
        xm = 0.5 * (b - a) * x + 0.5 * (a + b)
        wm = 0.5 * (b - a) * w * self.bump._call(xm)
        lx = np.log(xm)
        out = np.empty(len(s_vals), dtype=complex)
        chunk = max(1, (1 << 21) // n_gl)
        sm1 = s_vals - 1.0
        for i in range(0, len(s_vals), chunk):
            out[i : i + chunk] = np.exp(np.outer(sm1[i : i + chunk], lx)) @ wm
        return out, n_gl

    def phi(self, x: float, sign: int) -> complex:
        """Phi^{sign}(x); the u < 0 half is folded in by conjugate symmetry."""
        return complex(self.phi_many(np.asarray([x]), sign)[0])

    def phi_many(self, xs: np.ndarray, sign: int) -> np.ndarray:
        """Vectorized phi over an array of arguments."""
        xN = np.asarray(xs, dtype=float) * self.N
        if np.any(xN <= 0):
            raise ValueError("Phi argument must be positive")
        ln = np.log(xN)
        F = self.Fp if sign == 1 else self.Fm
        G = self.Fm if sign == 1 else self.Fp
        out = np.empty(len(ln), dtype=complex)
        chunk = max(1, (1 << 23) // max(1, len(self.u)))
        for i in range(0, len(ln), chunk):
            phase = np.exp(-1j * np.outer(ln[i : i + chunk], self.u))
            half = phase @ F - (1 - self._w0) * F[0]
            other = phase @ G - (1 - self._w0) * G[0]
            out[i : i + chunk] = half + np.conj(other)
        return out * self.du * xN ** (-self.sigma) / (2 * math.pi)


_PHI_CACHE: dict[tuple, PhiLine] = {}


def phi_transform(
    bump: BumpFunction,
    N: float,
    x: float,
    sign: int,
    arch: ArchimedeanParams,
    sigma: float = -0.5,
) -> complex:
    """Phi_phi^{+-}(x) for phi(y) = bump(y/N), via the cached line integral."""
    key = (id(bump), float(N), tuple(arch.mu), float(sigma))
    line = _PHI_CACHE.get(key)
    if line is None:
        line = PhiLine(bump, N, arch, sigma=sigma)
        _PHI_CACHE[key] = line
    return line.phi(x, sign)


# ---------------------------------------------------------------------------
# two-sided Voronoi verification

@dataclass
class VoronoiReport:
    """Both sides of the summation formula plus the dual-term breakdown."""

    lhs: complex
    rhs: complex
    omega: complex
    rel_err: float
    dual_terms: list[tuple[int, int, int, complex]]
    tail_bound: float
    q: int
    a: int
    N: float
    swap_signs: bool


def _voronoi_lhs(oracle: CoefficientOracle, a: int, q: int, N: float, bump) -> complex:
    lo = int(math.floor(bump.support[0] * N))
    hi = int(math.ceil(bump.support[1] * N)) + 1
    total = 0.0j
    for n in range(max(lo, 1), hi):
        w = bump(n / N)
        if w == 0.0:
            continue
        total += oracle.coeff(1, n) * np.exp(2j * np.pi * (a * n % q) / q) * w
    return total


def voronoi_check(
    oracle: CoefficientOracle,
    a: int,
    q: int,
    N: float,
    dual_cutoff: int = 50,
    omega: complex | None = None,
    swap_signs: bool = False,
    bump: BumpFunction = V_BUMP,
) -> VoronoiReport:
    """Compare the direct sum with the dual (Kloosterman x Phi) expansion.

    dual_cutoff counts (n1, n2, sign) triples.  When omega is None the
    unimodular constant is fitted here (|lhs - omega rhs| minimised over
    |omega| = 1); pass the frozen omega for subsequent checks.  swap_signs
    flips the pairing of the Kloosterman sign with the gamma_{+-} kernel;
    the calibration records the pairing that matches.
    """
    if math.gcd(a, q) != 1:
        raise ValueError("need gcd(a, q) = 1")
    if q > 5:
        raise ValueError("desk-scale check limited to q <= 5")
    if oracle.name == "d3":
        raise ValueError(
            "the divisor-type oracle has Eisenstein polar terms outside the cuspidal "
            "Voronoi identity; use the cusp-form oracle"
        )
    lhs = _voronoi_lhs(oracle, a, q, N, bump)
    abar = mod_inverse(a, q)
    # enumerate dual terms ordered by n1^2 n2, both signs per (n1, n2)
    divisors = [d for d in range(1, q + 1) if q % d == 0]
    pairs = []
    n_pairs = (dual_cutoff + 1) // 2
    for n1 in divisors:
        for n2 in range(1, n_pairs + 1):
            pairs.append((n1 * n1 * n2, n1, n2))
    pairs.sort()
    pairs = pairs[:n_pairs]
    key = (id(bump), float(N), tuple(oracle.arch.mu), -0.5)
    line = _PHI_CACHE.get(key)
    if line is None:
        line = PhiLine(bump, N, oracle.arch)
        _PHI_CACHE[key] = line
    xs = np.array([norm / q**3 for norm, _, _ in pairs])
    phi_by_sign = {
        sgn: line.phi_many(xs, (-sgn if swap_signs else sgn)) for sgn in (1, -1)
    }
    terms = []
    rhs = 0.0j
    shell_mags: list[float] = []
    for i, (norm, n1, n2) in enumerate(pairs):
        shell = 0.0j
        for sgn in (1, -1):
            S = kloosterman(abar, sgn * n2, q // n1)
            contrib = q * oracle.coeff(n2, n1) / (n1 * n2) * S * phi_by_sign[sgn][i]
            terms.append((n1, n2, sgn, contrib))
            shell += contrib
        rhs += shell
        shell_mags.append(abs(shell))
    # geometric tail estimate from the trailing shells
    tail = 0.0
    if len(shell_mags) >= 4:
        last = shell_mags[-1]
        ratios = [
            shell_mags[i + 1] / shell_mags[i]
            for i in range(len(shell_mags) - 4, len(shell_mags) - 1)
            if shell_mags[i] > 0
        ]
        r = min(max(ratios, default=0.5), 0.9)
        tail = last * r / (1.0 - r)
    if omega is None:
        z = lhs * np.conj(rhs)
        omega = z / abs(z) if abs(z) > 0 else 1.0 + 0.0j
    rel_err = abs(lhs - omega * rhs) / max(abs(lhs), 1e-300)
    return VoronoiReport(
        lhs=lhs,
        rhs=complex(rhs),
        omega=complex(omega),
        rel_err=rel_err,
        dual_terms=terms,
        tail_bound=tail,
        q=q,
        a=a,
        N=N,
        swap_signs=swap_signs,
    )


@dataclass
class VoronoiCalibration:
    omega: complex
    swap_signs: bool
    magnitude_defect: float  # | |lhs/rhs| - 1 | at the calibration point
    report: VoronoiReport


def calibrate_voronoi(
    oracle: CoefficientOracle,
    N: float = 100.0,
    dual_cutoff: int = 50,
) -> VoronoiCalibration:
    """One-time calibration at (q, a) = (1, 1): fit the unimodular omega.

    Tries both sign pairings and keeps the one whose unconstrained ratio
    lhs/rhs is closest to the unit circle; the magnitude defect must be
    below 1e-3 for the calibration to be accepted downstream.
    """
    best = None
    for swap in (False, True):
        rep = voronoi_check(oracle, 1, 1, N, dual_cutoff=dual_cutoff, swap_signs=swap)
        if abs(rep.rhs) == 0:
            continue
        defect = abs(abs(rep.lhs / rep.rhs) - 1.0)
        if best is None or defect < best.magnitude_defect:
            best = VoronoiCalibration(
                omega=rep.omega, swap_signs=swap, magnitude_defect=defect, report=rep
            )
    if best is None:
        raise RuntimeError("voronoi calibration failed: dual side vanished")
    return best
