"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np
from scipy.special import sph_harm_y

from sphgain.harmonics import HarmonicCoefficients, idx


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_deriv(a, times):
    for _ in range(times):
        a = [k * a[k] for k in range(1, len(a))] or [Fraction(0)]
    return a


def rodrigues_plm(l: int, m: int, x, dps: int = 50):
    """Normalized associated Legendre value with Condon-Shortley phase.

    ``P_l = d^l/dx^l (x^2 - 1)^l / (2^l l!)`` in exact rationals; the
    m-th derivative, the ``(1-x^2)^{m/2}`` factor and the normalization run
    in mpmath at ``dps`` digits.
    """
    base = [Fraction(-1), Fraction(0), Fraction(1)]
    poly = [Fraction(1)]
    for _ in range(l):
        poly = _poly_mul(poly, base)
    poly = _poly_deriv(poly, l + m)
    scale = Fraction(1, 2 ** l * math.factorial(l))
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        val = sum(mpmath.mpf(c.numerator) / c.denominator * xm ** k for k, c in enumerate(poly)) * (
            mpmath.mpf(scale.numerator) / scale.denominator
        )
        val *= (-1) ** m * (1 - xm * xm) ** (mpmath.mpf(m) / 2)
        norm = mpmath.sqrt(
            mpmath.mpf(2 * l + 1) / (4 * mpmath.pi) * mpmath.factorial(l - m) / mpmath.factorial(l + m)
        )
        return val * norm


def legendre_roots_bisection(n: int, dps: int = 30):
    """Roots of P_n by sign-change bracketing and bisection in mpmath (descending)."""
    roots = []
    with mpmath.workdps(dps):
        grid = [mpmath.cos(mpmath.pi * k / (8 * n)) for k in range(8 * n + 1)]
        vals = [mpmath.legendre(n, g) for g in grid]
        for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if fa == 0:
                roots.append(a)
                continue
            if fa * fb < 0:
                lo, hi, flo = a, b, fa
                for _ in range(120):
                    mid = (lo + hi) / 2
                    fm = mpmath.legendre(n, mid)
                    if fm * flo > 0:
                        lo, flo = mid, fm
                    else:
                        hi = mid
                roots.append((lo + hi) / 2)
    return np.array([float(r) for r in roots])


def scipy_synthesis(c: HarmonicCoefficients, theta, phi) -> np.ndarray:
    """Term-by-term sum with scipy's spherical harmonics."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(theta.shape, dtype=complex)
    for l in range(c.band_limit):
        for m in range(-l, l + 1):
            out += c.data[idx(l, m)] * sph_harm_y(l, m, theta, phi)
    return out


def direct_dft(values) -> np.ndarray:
    """``(1/n) sum_p f_p exp(-2 pi i j p / n)`` by explicit summation."""
    v = np.asarray(values, dtype=complex)
    n = v.shape[0]
    p = np.arange(n)
    return np.array([np.sum(v * np.exp(-2j * np.pi * j * p / n)) for j in range(n)]) / n


def random_coeffs(L: int, seed: int, real: bool = False) -> HarmonicCoefficients:
    rng = np.random.default_rng(seed)
    data = rng.standard_normal(L * L) + 1j * rng.standard_normal(L * L)
    if not real:
        return HarmonicCoefficients(L, data)
    for l in range(L):
        data[idx(l, 0)] = data[idx(l, 0)].real
        for m in range(1, l + 1):
            data[idx(l, -m)] = (-1) ** m * np.conj(data[idx(l, m)])
    return HarmonicCoefficients(L, data, real_signal=True)


def mp_gl_weight(n: int, x0: float, dps: int = 40) -> float:
    """GL weight at the root of P_n nearest ``x0``, Newton-polished in mpmath."""
    with mpmath.workdps(dps):

        def p_and_dp(t):
            p0, p1 = mpmath.mpf(1), t
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * t * p1 - (k - 1) * p0) / k
            return p1, n * (t * p1 - p0) / (t * t - 1)

        r = mpmath.mpf(x0)
        for _ in range(6):
            p, d = p_and_dp(r)
            r -= p / d
        _, d = p_and_dp(r)
        return float(2 / ((1 - r * r) * d * d))


def hut_projection_rule(model, panels_left: int = 40, panels_right: int = 200, order: int = 64):
    """Composite GL rule in theta (split at the kink) with the 2 pi sin(theta) measure folded in."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.unique(
        np.concatenate([np.linspace(0, model.theta_o, panels_left), np.linspace(model.theta_o, math.pi, panels_right)])
    )
    a, b = edges[:-1, None], edges[1:, None]
    t = (a + (b - a) * (x + 1) / 2).ravel()
    wt = ((b - a) / 2 * w).ravel() * np.sin(t) * 2 * math.pi
    return t, wt


def hut_projection_error(model, L: int) -> float:
    """Exact relative L2 error of the best band-L approximation of the (unit-norm) model."""
    from sphgain.harmonics import legendre_table
    from sphgain.models import hut_power

    t, wt = hut_projection_rule(model)
    proj = legendre_table(L, 0, t) @ (wt * hut_power(model, t))
    return math.sqrt(max(1.0 - float(np.sum(proj ** 2)), 0.0))
