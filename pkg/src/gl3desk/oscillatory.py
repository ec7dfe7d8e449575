"""Oscillatory integrals, bump functions, stationary phase, and the
composite double integrals of the smoothed-sum analysis.

Bump functions are assembled from the exp(-1/x) mollifier family via smooth
steps, so every bump carries exact Taylor coefficients to arbitrary order
(the order-5 stationary expansion needs derivatives through order 10, which
finite differences cannot deliver at the required accuracy).

The quadrature engine sizes panels from an analytically supplied phase
derivative; phases are never differentiated numerically.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .special import ArchimedeanParams, gamma_pm

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# truncated Taylor-series arithmetic (coefficient arrays around a point)

def _ts_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        out[k] = np.dot(a[: k + 1], b[k::-1])
    return out


def _ts_recip(a: np.ndarray) -> np.ndarray:
    if a[0] == 0:
        raise ZeroDivisionError("series reciprocal at a zero")
    n = len(a)
    out = np.zeros(n, dtype=complex)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1]) / a[0]
    return out


def _ts_exp(a: np.ndarray) -> np.ndarray:
    n = len(a)
    out = np.zeros(n, dtype=complex)
    out[0] = cmath.exp(complex(a[0]))
    for k in range(1, n):
        acc = 0.0j
        for j in range(1, k + 1):
            acc += j * a[j] * out[k - j]
        out[k] = acc / k
    return out


def _ts_pow_real(x0: float, alpha: complex, n: int) -> np.ndarray:
    """Series of x^alpha around x0 > 0."""
    if x0 <= 0:
        raise ValueError("power series requires x0 > 0")
    out = np.zeros(n, dtype=complex)
    coef = cmath.exp(alpha * math.log(x0))
    out[0] = coef
    binom = complex(1.0)
    for k in range(1, n):
        binom *= (alpha - (k - 1)) / k
        out[k] = coef * binom / x0**k
    return out


def _ts_log_shift(x0: float, n: int) -> np.ndarray:
    """Series of ln(x) around x0 > 0."""
    out = np.zeros(n, dtype=complex)
    out[0] = math.log(x0)
    for k in range(1, n):
        out[k] = (-1.0) ** (k - 1) / (k * x0**k)
    return out


# ---------------------------------------------------------------------------
# the exp(-1/x) step and bump family

def _psi_raw(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-1.0 / x[pos])
    return out


def _psi_taylor(x0: float, n: int) -> np.ndarray:
    if x0 <= 0:
        return np.zeros(n, dtype=complex)
    t = np.zeros(n, dtype=complex)
    t[0] = x0
    if n > 1:
        t[1] = 1.0
    return _ts_exp(-_ts_recip(t))


def _step(x: np.ndarray) -> np.ndarray:
    """Smooth step: 0 for x <= 0, 1 for x >= 1, strictly monotone between."""
    x = np.asarray(x, dtype=float)
    a = _psi_raw(x)
    b = _psi_raw(1.0 - x)
    out = np.zeros_like(x)
    mid = (x > 0) & (x < 1)
    out[mid] = a[mid] / (a[mid] + b[mid])
    out[x >= 1] = 1.0
    return out


def _step_taylor(x0: float, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    if x0 <= 0:
        return out
    if x0 >= 1:
        out[0] = 1.0
        return out
    a = _psi_taylor(x0, n)
    b = _psi_taylor(1.0 - x0, n)
    b = b * np.array([(-1.0) ** k for k in range(n)])  # chain rule for 1-x
    return _ts_mul(a, _ts_recip(a + b))


def _mollifier(u: np.ndarray) -> np.ndarray:
    """exp(-1/(1-u^2)) on (-1, 1), zero outside."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


def _mollifier_taylor(u0: float, n: int) -> np.ndarray:
    if abs(u0) >= 1:
        return np.zeros(n, dtype=complex)
    t = np.zeros(n, dtype=complex)
    t[0] = 1.0 - u0 * u0
    if n > 1:
        t[1] = -2.0 * u0
    if n > 2:
        t[2] = -1.0
    return _ts_exp(-_ts_recip(t))


@dataclass
class BumpFunction:
    """A smooth compactly supported weight with exact Taylor data.

    kind is one of "V" (support [1,2], integral 1), "U" ([1/2,5/2], flat 1 on
    [1,2]), "W" ([1/2,3], flat 1 on [1,2]), "WJ" (partition piece), or "custom".
    """

    kind: str
    support: tuple[float, float]
    _call: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _taylor: Callable[[float, int], np.ndarray] = field(repr=False)
    integral: float | None = None

    def __call__(self, x):
        scalar = np.isscalar(x)
        out = self._call(np.atleast_1d(np.asarray(x, dtype=float)))
        return float(out[0]) if scalar else out

    def taylor(self, x0: float, order: int) -> np.ndarray:
        """Taylor coefficients [f(x0), f'(x0), f''(x0)/2!, ...] up to x^order."""
        return self._taylor(float(x0), order + 1)

    def deriv(self, x0: float, k: int) -> float:
        """k-th derivative at x0 (exact, via the Taylor recurrences)."""
        c = self.taylor(x0, k)
        return float((c[k] * math.factorial(k)).real)

    def mellin(self, s: complex, rel_nodes: int = 0) -> complex:
        """int B(x) x^(s-1) dx over the support, by Gauss-Legendre."""
        a, b = self.support
        n = max(64, rel_nodes, int(3 * abs(complex(s).imag) * math.log(b / a)) + 16)
        x, w = _gl_nodes(min(n, 4096))
        xm = 0.5 * (b - a) * x + 0.5 * (a + b)
        vals = self._call(xm) * np.exp((s - 1) * np.log(xm))
        return complex(np.sum(vals * w) * 0.5 * (b - a))


@lru_cache(maxsize=None)
def _v_normalization() -> float:
    # integral of exp(-1/(1-u^2)) over (-1,1), via dense Gauss-Legendre
    x, w = np.polynomial.legendre.leggauss(400)
    return float(np.sum(_mollifier(x) * w))


def bump_v() -> BumpFunction:
    """The V weight: supported on [1,2], C-infinity, integral exactly 1."""
    c = 2.0 / _v_normalization()

    def call(x):
        return c * _mollifier(2.0 * x - 3.0)

    def taylor(x0, n):
        coef = c * _mollifier_taylor(2.0 * x0 - 3.0, n)
        return coef * np.array([2.0**k for k in range(n)])

    return BumpFunction(kind="V", support=(1.0, 2.0), _call=call, _taylor=taylor, integral=1.0)


def _plateau(lo: float, rise_hi: float, fall_lo: float, hi: float):
    """Product of an up-step on [lo, rise_hi] and a down-step on [fall_lo, hi]."""
    w1 = rise_hi - lo
    w2 = hi - fall_lo

    def call(x):
        return _step((x - lo) / w1) * _step((hi - x) / w2)

    def taylor(x0, n):
        up = _step_taylor((x0 - lo) / w1, n) * np.array([w1 ** (-k) for k in range(n)])
        dn = _step_taylor((hi - x0) / w2, n) * np.array([(-1.0 / w2) ** k for k in range(n)])
        return _ts_mul(up, dn)

    return call, taylor


def bump_u() -> BumpFunction:
    """The U weight: supported on [1/2, 5/2], identically 1 on [1, 2]."""
    call, taylor = _plateau(0.5, 1.0, 2.0, 2.5)
    return BumpFunction(kind="U", support=(0.5, 2.5), _call=call, _taylor=taylor)


def bump_w() -> BumpFunction:
    """The W weight: supported on [1/2, 3], identically 1 on [1, 2]."""
    call, taylor = _plateau(0.5, 1.0, 2.0, 3.0)
    return BumpFunction(kind="W", support=(0.5, 3.0), _call=call, _taylor=taylor)


V_BUMP = bump_v()
U_BUMP = bump_u()
W_BUMP = bump_w()


# ---------------------------------------------------------------------------
# smooth dyadic partition {W_J}

PARTITION_RATIO = math.sqrt(4.0 / 3.0)  # supports [J, rho^2 J] sit inside [J, 4J/3]


def partition_WJ(limit: float) -> list[tuple[float, BumpFunction]]:
    """Smooth partition of unity on [-limit, limit].

    The J = 0 piece is supported on [-1, 1]; each J > 0 piece is supported on
    [J, 4J/3] (mirrored for J < 0); the pieces sum to 1 on the whole range.
    Knots are the geometric ladder rho^i with rho = sqrt(4/3): that spacing
    is the widest compatible with the [J, 4J/3] supports.
    """
    if limit <= 0:
        raise ValueError("limit must be positive")
    rho = PARTITION_RATIO
    n_steps = max(2, math.ceil(math.log(max(limit, 1.0)) / math.log(rho)) + 2)
    knots = [rho ** (i - 1) for i in range(n_steps + 2)]  # x_0 = 1/rho, x_1 = 1, ...

    def rising(i):
        lo, hi = knots[i - 1], knots[i]
        w = hi - lo
        return lo, hi, w

    def make_w0():
        lo, hi, w = rising(1)

        def call(x):
            return 1.0 - _step((np.abs(x) - lo) / w)

        def taylor(x0, n):
            sgn = -1.0 if x0 < 0 else 1.0
            t = _step_taylor((abs(x0) - lo) / w, n) * np.array(
                [(sgn / w) ** k for k in range(n)]
            )
            t = -t
            t[0] += 1.0
            return t

        return BumpFunction(kind="WJ", support=(-1.0, 1.0), _call=call, _taylor=taylor)

    def make_piece(i):
        lo1, hi1, w1 = rising(i)
        lo2, hi2, w2 = rising(i + 1)

        def call(x):
            return _step((x - lo1) / w1) - _step((x - lo2) / w2)

        def taylor(x0, n):
            t1 = _step_taylor((x0 - lo1) / w1, n) * np.array([w1 ** (-k) for k in range(n)])
            t2 = _step_taylor((x0 - lo2) / w2, n) * np.array([w2 ** (-k) for k in range(n)])
            return t1 - t2

        return BumpFunction(kind="WJ", support=(lo1, hi2), _call=call, _taylor=taylor)

    def mirror(piece):
        def call(x):
            return piece._call(-np.asarray(x, dtype=float))

        def taylor(x0, n):
            return piece._taylor(-x0, n) * np.array([(-1.0) ** k for k in range(n)])

        a, b = piece.support
        return BumpFunction(kind="WJ", support=(-b, -a), _call=call, _taylor=taylor)

    pieces = [(0.0, make_w0())]
    for i in range(1, n_steps + 1):
        pc = make_piece(i)
        J = pc.support[0]
        pieces.append((J, pc))
        pieces.append((-J, mirror(pc)))
    return pieces


# ---------------------------------------------------------------------------
# oscillation-aware quadrature

class QuadratureError(RuntimeError):
    """Raised when the panel budget is exhausted; carries the best estimate."""

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@lru_cache(maxsize=None)
def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _panel_edges(a: float, b: float, fprime, n_probe: int = 257) -> np.ndarray:
    """Split [a, b] so each panel carries at most ~0.5 cycles of phase."""
    xs = np.linspace(a, b, n_probe)
    rate = np.abs(np.asarray(fprime(xs), dtype=float))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(xs))])
    total = cum[-1]
    n_panels = int(min(max(8, math.ceil(total / 0.5)), 1 << 17))
    targets = np.linspace(0.0, total, n_panels + 1)
    if total == 0.0:
        return np.linspace(a, b, n_panels + 1)
    edges = np.interp(targets, cum, xs)
    edges[0], edges[-1] = a, b
    return np.unique(edges)


def _eval_panels(g, f, edges: np.ndarray, order: int) -> np.ndarray:
    x0, w0 = _gl_nodes(order)
    lo = edges[:-1]
    hi = edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * x0[None, :]
    flat = pts.ravel()
    vals = np.asarray(g(flat), dtype=complex) * np.exp(
        2j * np.pi * np.asarray(f(flat), dtype=float)
    )
    vals = vals.reshape(pts.shape)
    return (vals @ w0) * half


def integrate(
    g,
    f,
    a: float,
    b: float,
    tol: float = 1e-10,
    fprime=None,
    max_refine: int = 12,
) -> complex:
    """int_a^b g(v) e(f(v)) dv with estimated absolute error below tol.

    Panels are sized from the analytic phase derivative when given; each
    refinement pass bisects every panel whose embedded (order 8 vs 16)
    error estimate exceeds its share of the tolerance.
    """
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    if b <= a:
        return 0.0j
    if fprime is not None:
        edges = _panel_edges(a, b, fprime)
    else:
        edges = np.linspace(a, b, 33)
    for _ in range(max_refine):
        lo_vals = _eval_panels(g, f, edges, 8)
        hi_vals = _eval_panels(g, f, edges, 16)
        err = np.abs(hi_vals - lo_vals)
        total_err = float(np.sum(err))
        if total_err < tol:
            return complex(np.sum(hi_vals))
        if len(edges) > (1 << 18):
            break
        bad = err > tol / max(1, len(err)) / 2
        new_edges = [edges[0]]
        for i, split in enumerate(bad):
            if split:
                new_edges.append(0.5 * (edges[i] + edges[i + 1]))
            new_edges.append(edges[i + 1])
        edges = np.asarray(new_edges)
    raise QuadratureError(
        f"quadrature did not reach tol={tol} (err ~ {total_err:.3e})",
        complex(np.sum(hi_vals)),
        total_err,
    )


# ---------------------------------------------------------------------------
# the special exponential integral U+(r, s) and its stationary expansions

def u_dagger(bump: BumpFunction, r: float, s: complex, tol: float = 1e-10) -> complex:
    """U+(r, s) = int_0^inf U(x) e(-r x) x^(s-1) dx by direct quadrature."""
    s = complex(s)
    sigma, beta = s.real, s.imag
    a, b = bump.support

    def g(x):
        return bump._call(x) * np.exp((sigma - 1) * np.log(x))

    def f(x):
        return -r * x + beta * np.log(x) / TWO_PI

    def fp(x):
        return -r + beta / (TWO_PI * x)

    return integrate(g, f, a, b, tol=tol, fprime=fp)


def u_dagger_multi(
    bump: BumpFunction,
    r: float,
    sigma: float,
    betas: np.ndarray,
    rel_tol: float = 1e-9,
) -> np.ndarray:
    """U+(r, sigma + i beta) for a whole vector of beta on a shared grid."""
    betas = np.asarray(betas, dtype=float)
    a, b = bump.support
    beta_max = float(np.max(np.abs(betas))) if betas.size else 0.0
    rate = abs(r) + beta_max / (TWO_PI * a)
    n_panels = int(min(max(8, math.ceil(rate * (b - a) / 0.5)), 1 << 16))
    prev = None
    for _ in range(8):
        x0, w0 = _gl_nodes(12)
        edges = np.linspace(a, b, n_panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        pts = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
        wts = (half[:, None] * w0[None, :]).ravel()
        base = bump._call(pts) * np.exp((sigma - 1) * np.log(pts)) * np.exp(
            -2j * np.pi * r * pts
        ) * wts
        log_pts = np.log(pts)
        out = np.empty(len(betas), dtype=complex)
        chunk = max(1, (1 << 22) // max(1, len(pts)))
        for i in range(0, len(betas), chunk):
            bs = betas[i : i + chunk]
            out[i : i + chunk] = np.exp(1j * np.outer(bs, log_pts)) @ base
        if prev is not None:
            scale = float(np.max(np.abs(out))) or 1.0
            if float(np.max(np.abs(out - prev))) < rel_tol * scale + 1e-13:
                return out
        prev = out
        n_panels *= 2
    return prev


def u_star_series(
    bump: BumpFunction, x0: float, sigma: float, beta: float, terms: int = 6
) -> complex:
    """The corrected amplitude U*(x0) of the order-5 stationary expansion.

    U*(x0) = x0^(1-sigma) sum_n p_n(x0) with
    p_n = (1/n!) (i / (2 h''(x0)))^n G^(2n)(x0), h(x) = -2 pi r x + beta log x
    at the stationary point x0 = beta/(2 pi r), G = U(x) x^(sigma-1) e^(i H),
    H the phase minus its second-order jet.
    """
    order = 2 * (terms - 1) + 1
    n = order + 1
    # H = h - jet_2(h) at x0: the 0th, 1st, 2nd coefficients vanish exactly
    # (x0 is the stationary point of h(x) = -2 pi r x + beta log x)
    h = beta * _ts_log_shift(x0, n)
    h[0] = 0.0
    h[1] = 0.0
    h[2] = 0.0
    hpp = -beta / x0**2
    amp = _ts_mul(bump.taylor(x0, order).astype(complex), _ts_pow_real(x0, sigma - 1, n))
    G = _ts_mul(amp, _ts_exp(1j * h))
    total = 0.0j
    for k in range(terms):
        d2k = G[2 * k] * math.factorial(2 * k)  # G^(2k)(x0)
        total += (1j / (2 * hpp)) ** k * d2k / math.factorial(k)
    return x0 ** (1 - sigma) * total


def u_dagger_main(bump: BumpFunction, r: float, s: complex, order: int = 1) -> complex:
    """Stationary-phase main term of U+(r, s): order 1 or the order-5 series.

    Order 1:  sqrt(2 pi) e(1/8) / sqrt(-beta) * U(x0) x0^sigma (x0/e)^(i beta),
    with x0 = beta / (2 pi r).  Order 5 replaces U(x0) by the corrected
    series amplitude; it requires x0 in [a/2, 2b].
    """
    if order not in (1, 5):
        raise ValueError("order must be 1 or 5")
    s = complex(s)
    sigma, beta = s.real, s.imag
    if r == 0 or beta == 0:
        raise ValueError("stationary main term needs r != 0 and Im(s) != 0")
    x0 = beta / (TWO_PI * r)
    a, b = bump.support
    if x0 <= 0 or x0 <= a or x0 >= b:
        if order == 5 and not (a / 2 <= x0 <= 2 * b):
            raise ValueError(f"order-5 expansion needs x0 in [{a / 2}, {2 * b}], got {x0}")
        return 0.0j
    prefactor = (
        math.sqrt(TWO_PI)
        * cmath.exp(2j * np.pi / 8)
        / cmath.sqrt(complex(-beta))
        * cmath.exp(1j * beta * math.log(x0 / math.e))
    )
    if order == 1:
        return prefactor * bump(x0) * x0**sigma
    return prefactor * u_star_series(bump, x0, sigma, beta) * x0**sigma


# ---------------------------------------------------------------------------
# generic stationary phase (two-branch lemma)

_HYP_SLACK = 24.0


@dataclass
class OscillatoryIntegrand:
    """Phase/amplitude pair with analytic derivatives and scale parameters."""

    f: Callable
    fprime: Callable
    f2: Callable
    f3: Callable
    f4: Callable
    g: Callable
    g1: Callable
    g2: Callable
    theta_f: float
    omega_f: float
    omega_g: float
    lam: float | None = None
    v0: float | None = None
    kappa: float | None = None


def _sample_hypotheses(spec: OscillatoryIntegrand, a: float, b: float, need_lower: bool):
    xs = np.linspace(a, b, 65)
    th, om, og = spec.theta_f, spec.omega_f, spec.omega_g
    checks = [
        (np.max(np.abs(spec.f2(xs))), _HYP_SLACK * th / om**2, "f'' upper"),
        (np.max(np.abs(spec.f3(xs))), _HYP_SLACK * th / om**3, "f''' upper"),
        (np.max(np.abs(spec.f4(xs))), _HYP_SLACK * th / om**4, "f'''' upper"),
        (np.max(np.abs(spec.g(xs))), _HYP_SLACK, "g upper"),
        (np.max(np.abs(spec.g1(xs))), _HYP_SLACK / og, "g' upper"),
        (np.max(np.abs(spec.g2(xs))), _HYP_SLACK / og**2, "g'' upper"),
    ]
    for observed, bound, name in checks:
        if observed > bound:
            raise ValueError(
                f"stationary-phase hypothesis failed: {name} ({observed:.3g} > {bound:.3g})"
            )
    if need_lower:
        f2min = float(np.min(spec.f2(xs)))
        if f2min < th / om**2 / _HYP_SLACK:
            raise ValueError(
                f"stationary-phase hypothesis failed: f'' lower bound ({f2min:.3g})"
            )


def stationary_phase(
    spec: OscillatoryIntegrand, interval: tuple[float, float]
) -> tuple[complex, float]:
    """Main term and error budget for int g e(f) over the interval.

    With an interior stationary point v0 (f' changing sign - to +):
        g(v0) e(f(v0) + 1/8) / sqrt(f''(v0)),
    budget Omega_f^4/(Theta_f^2 kappa^3) + Omega_f/Theta_f^(3/2)
           + Omega_f^3/(Theta_f^(3/2) Omega_g^2).
    With no stationary point: (0, first-derivative-test budget).
    """
    a, b = interval
    th, om, og = spec.theta_f, spec.omega_f, spec.omega_g
    if spec.v0 is None:
        if spec.lam is None or spec.lam <= 0:
            raise ValueError("no-stationary-point branch needs a positive Lambda")
        _sample_hypotheses(spec, a, b, need_lower=False)
        xs = np.linspace(a, b, 65)
        if float(np.min(np.abs(spec.fprime(xs)))) < spec.lam / _HYP_SLACK:
            raise ValueError("stationary-phase hypothesis failed: |f'| below Lambda")
        lam = spec.lam
        budget = (
            th / (om**2 * lam**3)
            + th / (om * og * lam**3)
            + om / (lam**2 * og**2)
        )
        return 0.0j, budget
    v0 = spec.v0
    if not (a < v0 < b):
        raise ValueError(f"stationary point v0 = {v0} not interior to [{a}, {b}]")
    kappa = spec.kappa if spec.kappa is not None else min(b - v0, v0 - a)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    _sample_hypotheses(spec, a, b, need_lower=True)
    one = np.asarray([v0], dtype=float)
    f2v = float(np.atleast_1d(spec.f2(one))[0].real)
    g0 = complex(np.atleast_1d(spec.g(one))[0])
    f0 = float(np.atleast_1d(spec.f(one))[0].real)
    main = g0 * cmath.exp(2j * math.pi * (f0 + 0.125)) / math.sqrt(f2v)
    budget = om**4 / (th**2 * kappa**3) + om / th**1.5 + om**3 / (th**1.5 * og**2)
    return main, budget


# ---------------------------------------------------------------------------
# error envelopes of the decomposition analysis

def j2_error_budget(C: float, tau: float, N: float, t: float, K: float, M1: int) -> float:
    """The envelope B(C, tau) bounding the non-main part of the double integral."""
    first = min(1.0, 10.0 * K / abs(tau)) if tau != 0 else 1.0
    return first / (math.sqrt(t) * K**1.5) + math.sqrt(N) / (
        math.sqrt(t) * K**2.5 * math.sqrt(M1) * C
    )


def b_star(n2: int, N: float, t: float, K: float, M1: int, C: float, L: float) -> float:
    """The envelope B*(n2) bounding the correlation integral I*(n2)."""
    if n2 == 0:
        return math.sqrt(N) / (t * K**1.5 * math.sqrt(M1) * C)
    return math.sqrt(N) / (t * K**1.5 * math.sqrt(abs(n2) * L))


# ---------------------------------------------------------------------------
# the composite double integral and its main term

@dataclass
class JContext:
    """Parameters shared by the double integral and its main term."""

    N: float
    K: float
    t: float
    M1: int
    M2: int
    a: int
    c3: complex = 1.0 + 0.0j

    @property
    def M(self) -> int:
        return self.M1 * self.M2


def J_double(q: int, m: int, tau: float, ctx: JContext, rel_tol: float = 1e-8) -> complex:
    """The (zeta, v) double integral J**(q, m, tau) by nested quadrature.

    Inner factors: V+(N zeta/(a q M1), 1/2 + i(K v - tau)) and
    U+(N(m a - zeta M2)/(a q M), 1 - i(t + K v)); outer dzeta over [0, 1],
    v against the V bump.
    """
    if q <= 0 or ctx.K <= 0 or ctx.t <= 0 or ctx.a <= 0:
        raise ValueError("q, K, t, a must be positive")
    vx, vw = _gl_nodes(48)
    v = 0.5 * vx + 1.5  # V-support [1, 2]
    vw = 0.5 * vw
    v_weights = vw * V_BUMP._call(v)
    betas_V = ctx.K * v - tau
    betas_U = -(ctx.t + ctx.K * v)

    def zeta_integrand(zetas: np.ndarray) -> np.ndarray:
        out = np.empty(len(zetas), dtype=complex)
        for i, z in enumerate(zetas):
            r1 = ctx.N * z / (ctx.a * q * ctx.M1)
            r2 = ctx.N * (m * ctx.a - z * ctx.M2) / (ctx.a * q * ctx.M)
            vd = u_dagger_multi(V_BUMP, r1, 0.5, betas_V, rel_tol=rel_tol / 10)
            ud = u_dagger_multi(U_BUMP, r2, 1.0, betas_U, rel_tol=rel_tol / 10)
            out[i] = np.sum(v_weights * vd * ud)
        return out

    prev = None
    n = 32
    for _ in range(7):
        zx, zw = _gl_nodes(n)
        zetas = 0.5 * zx + 0.5
        vals = zeta_integrand(zetas)
        total = complex(np.sum(vals * zw) * 0.5)
        if prev is not None and abs(total - prev) < rel_tol * max(abs(total), 1e-12):
            return total
        prev = total
        n *= 2
    return prev


def J_main(q: int, m: int, tau: float, ctx: JContext) -> complex:
    """The closed-form main term J1(q, m, tau) (absolute constant c3 from ctx).

    Zero whenever the V-support condition (t+tau) q M / (-2 pi N m) in [1, 2]
    fails; otherwise evaluates the stationary-phase product with the order-5
    corrected amplitude and the one-dimensional zeta average of V.
    """
    if m == 0:
        raise ValueError("J_main needs m != 0")
    tt = ctx.t + tau
    if tt <= 0:
        raise ValueError("J_main needs t + tau > 0")
    X = tt * q * ctx.M / (-TWO_PI * ctx.N * m)
    if X <= 0 or not (V_BUMP.support[0] < X < V_BUMP.support[1]):
        return 0.0j
    ustar = u_star_series(U_BUMP, X, sigma=1.0, beta=-tt)
    zx, zw = _gl_nodes(64)
    zetas = 0.5 * zx + 0.5
    zeta_arg = tau / ctx.K - tt * ctx.M2 * zetas / (ctx.K * m * ctx.a)
    zeta_int = float(np.sum(V_BUMP._call(zeta_arg) * zw) * 0.5)
    power = cmath.exp((1.5 - 1j * tt) * math.log(X / math.e))
    return ctx.c3 / (ctx.K * math.sqrt(tt)) * power * V_BUMP(X) * ustar * zeta_int


# ---------------------------------------------------------------------------
# the correlation integral I*(n2)

@dataclass
class IStarContext:
    """Everything the correlation integral needs for one (q, m, a | q', m', a') pair."""

    N: float
    K: float
    t: float
    M1: int
    M2: int
    L: float
    J: float
    sign: int
    q: int
    m: int
    a: int
    qprime: int
    mprime: int
    aprime: int
    arch: ArchimedeanParams
    c3: complex = 1.0 + 0.0j
    wj: BumpFunction | None = None

    def __post_init__(self):
        if self.wj is None:
            pieces = partition_WJ(max(abs(self.J) * 2, 4.0))
            best = min(pieces, key=lambda p: abs(p[0] - self.J))
            self.wj = best[1]
            self.J = best[0]


def _j1_partition_profile(q: int, m: int, a: int, ctx: IStarContext):
    """tau-samples of gamma_pm(-1/2+i tau) J1(q,m,tau) W_J(tau) on the piece."""
    lo, hi = ctx.wj.support
    tx, tw = _gl_nodes(192)
    taus = 0.5 * (hi - lo) * tx + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * tw
    jctx = JContext(N=ctx.N, K=ctx.K, t=ctx.t, M1=ctx.M1, M2=ctx.M2, a=a, c3=ctx.c3)
    vals = np.array(
        [
            gamma_pm(-0.5 + 1j * tau, ctx.sign, ctx.arch) * J_main(q, m, tau, jctx)
            for tau in taus
        ]
    )
    vals *= ctx.wj._call(taus)
    return taus, weights * vals


def i_star(n2: int, ctx: IStarContext, rel_tol: float = 1e-7) -> complex:
    """I*(n2): the y-integral of the two main-term tau-profiles against
    W(y) e(-n2 L y/(q q' M1)) dy/y.
    """
    taus1, prof1 = _j1_partition_profile(ctx.q, ctx.m, ctx.a, ctx)
    taus2, prof2 = _j1_partition_profile(ctx.qprime, ctx.mprime, ctx.aprime, ctx)

    def j1J(taus, prof, q, y):
        arg = math.log(ctx.N * ctx.L * y / (q**3 * ctx.M1**3))
        return np.sum(prof * np.exp(-1j * taus * arg)) / TWO_PI

    lo, hi = W_BUMP.support

    def integrand(ys):
        out = np.empty(len(ys), dtype=complex)
        for i, y in enumerate(ys):
            f1 = j1J(taus1, prof1, ctx.q, y)
            f2 = j1J(taus2, prof2, ctx.qprime, y)
            phase = cmath.exp(-2j * math.pi * n2 * ctx.L * y / (ctx.q * ctx.qprime * ctx.M1))
            out[i] = W_BUMP(y) * f1 * np.conj(f2) * phase / y
        return out

    prev = None
    n = 64
    for _ in range(7):
        yx, yw = _gl_nodes(n)
        ys = 0.5 * (hi - lo) * yx + 0.5 * (hi + lo)
        vals = integrand(ys)
        total = complex(np.sum(vals * yw) * 0.5 * (hi - lo))
        if prev is not None and abs(total - prev) < rel_tol * max(abs(total), 1e-15):
            return total
        prev = total
        n *= 2
    return prev
