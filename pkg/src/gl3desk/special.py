"""Complex log-Gamma and the GL(3) archimedean gamma factors.

gamma_ell / gamma_pm evaluate the triple Gamma-ratio product in the log
domain, so values stay finite where individual Gamma factors overflow.
psi_factor peels off the rotating phase of gamma_pm on the critical
half-line; the factorization point is |tau|/(2*pi*e) (Stirling fixes the 2,
see the decisions ledger), which is what makes the residual factor flat.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma as _scipy_loggamma

RAMANUJAN_RE_BOUND = 0.4  # |Re mu_j| <= 2/5, warned about, not enforced


def log_gamma(z: complex) -> complex:
    """Principal-branch log Gamma; raises at the poles z = 0, -1, -2, ..."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise ValueError(f"log_gamma pole at z = {z}")
    return complex(_scipy_loggamma(z))


@dataclass(frozen=True)
class ArchimedeanParams:
    """Spectral parameters (mu1, mu2, mu3) with mu1 + mu2 + mu3 = 0."""

    mu: tuple[complex, complex, complex]

    def __post_init__(self):
        if abs(sum(self.mu)) > 1e-12:
            raise ValueError(f"mu must sum to zero, got {self.mu}")

    @classmethod
    def from_nu(cls, nu1: complex, nu2: complex) -> "ArchimedeanParams":
        mu1 = -nu1 - 2 * nu2 + 1
        mu2 = -nu1 + nu2
        mu3 = 2 * nu1 + nu2 - 1
        return cls(mu=(mu1, mu2, mu3))

    @property
    def exceeds_ramanujan_bound(self) -> bool:
        return any(abs(complex(m).real) > RAMANUJAN_RE_BOUND + 1e-12 for m in self.mu)


def _is_nonpositive_int(z: complex, tol: float = 1e-12) -> bool:
    return abs(z.imag) < tol and z.real < 0.5 and abs(z.real - round(z.real)) < tol


def gamma_ell(s: complex, ell: int, p: ArchimedeanParams) -> complex:
    """gamma_ell(s) = (1/2) pi^{-3(s+1/2)} prod_j G((1+s+mu_j+ell)/2) / G((-s-mu_j+ell)/2)."""
    if ell not in (0, 1):
        raise ValueError(f"ell must be 0 or 1, got {ell}")
    s = complex(s)
    log_total = -3.0 * (s + 0.5) * math.log(math.pi) - math.log(2.0)
    zero_factor = False
    for j, mu in enumerate(p.mu):
        num = (1 + s + mu + ell) / 2
        den = (-s - mu + ell) / 2
        if _is_nonpositive_int(num):
            raise ValueError(f"gamma_ell pole: Gamma({num}) from mu_{j + 1} = {mu} at s = {s}")
        if _is_nonpositive_int(den):
            zero_factor = True  # 1/Gamma(nonpositive integer) = 0
            continue
        log_total += _scipy_loggamma(num) - _scipy_loggamma(den)
    if zero_factor:
        return 0.0j
    return cmath.exp(log_total)


def gamma_pm(s: complex, sign: int, p: ArchimedeanParams) -> complex:
    """gamma_{+-}(s) = gamma_0(s) -+ i gamma_1(s); sign = +1 or -1."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return gamma_ell(s, 0, p) - 1j * sign * gamma_ell(s, 1, p)


def gamma_pm_line(sigma: float, u: np.ndarray, sign: int, p: ArchimedeanParams) -> np.ndarray:
    """Vectorized gamma_{+-}(sigma + i*u) along a vertical line.

    Raises if the line passes within 1e-9 of a Gamma-numerator pole.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    u = np.asarray(u, dtype=float)
    s = sigma + 1j * u
    base = -3.0 * (s + 0.5) * math.log(math.pi) - math.log(2.0)
    out = np.zeros_like(s)
    for ell in (0, 1):
        log_total = base.copy()
        dead = np.zeros(s.shape, dtype=bool)
        for j, mu in enumerate(p.mu):
            num = (1 + s + mu + ell) / 2
            den = (-s - mu + ell) / 2
            near_pole = (np.abs(num.imag) < 1e-9) & (num.real < 0.5) & (
                np.abs(num.real - np.round(num.real)) < 1e-9
            )
            if np.any(near_pole):
                raise ValueError(
                    f"gamma line hits Gamma-numerator pole (mu_{j + 1} = {mu}, ell = {ell})"
                )
            den_pole = (np.abs(den.imag) < 1e-12) & (den.real < 0.5) & (
                np.abs(den.real - np.round(den.real)) < 1e-12
            )
            dead |= den_pole
            safe_den = np.where(den_pole, 1.0, den)
            log_total += _scipy_loggamma(num) - _scipy_loggamma(safe_den)
        vals = np.exp(log_total)
        vals[dead] = 0.0
        out += vals if ell == 0 else -1j * sign * vals
    return out


PSI_TAU_MIN = 2.0


def psi_factor(tau: float, sign: int, p: ArchimedeanParams) -> complex:
    """Psi_{+-}(tau) = gamma_{+-}(-1/2 + i tau) * (|tau|/(2 pi e))^{-3 i tau}.

    Defined for |tau| >= 2; below that the Stirling factorization is not
    asserted.  With this factorization point Psi' = O(1/|tau|).
    """
    if abs(tau) < PSI_TAU_MIN:
        raise ValueError(f"psi_factor needs |tau| >= {PSI_TAU_MIN}, got {tau}")
    g = gamma_pm(-0.5 + 1j * tau, sign, p)
    x = abs(tau) / (2.0 * math.pi * math.e)
    return g * cmath.exp(-3j * tau * math.log(x))


def psi_derivative(tau: float, sign: int, p: ArchimedeanParams, h: float = 1e-4) -> complex:
    """Central finite difference of psi_factor (step scaled to tau)."""
    step = h * max(1.0, abs(tau))
    return (psi_factor(tau + step, sign, p) - psi_factor(tau - step, sign, p)) / (2 * step)
