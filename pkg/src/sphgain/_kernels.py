"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``legendre_order``, ``synth_points``, ``gauss_legendre``)
are bound at import time according to :mod:`sphgain._accel`. Both flavours
stay importable under their suffixed names so tests and the benchmark can
compare them directly.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

INV_SQRT_4PI = 1.0 / math.sqrt(4.0 * math.pi)


# ---------------------------------------------------------------------------
# normalized associated Legendre functions, one order at a time

@njit(cache=True)
def _legendre_order_nb(L, m, x, s):
    n = x.shape[0]
    out = np.zeros((L - m, n))
    for i in range(n):
        xi = x[i]
        pmm = INV_SQRT_4PI
        for k in range(1, m + 1):
            pmm *= -math.sqrt((2.0 * k + 1.0) / (2.0 * k)) * s[i]
        out[0, i] = pmm
        if L - m > 1:
            out[1, i] = math.sqrt(2.0 * m + 3.0) * xi * pmm
        for l in range(m + 2, L):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[l - m, i] = a * (xi * out[l - m - 1, i] - b * out[l - m - 2, i])
    return out


def _legendre_order_np(L, m, x, s):
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    out = np.zeros((L - m, x.shape[0]))
    pmm = np.full_like(x, INV_SQRT_4PI)
    for k in range(1, m + 1):
        pmm = pmm * (-math.sqrt((2.0 * k + 1.0) / (2.0 * k)) * s)
    out[0] = pmm
    if L - m > 1:
        out[1] = math.sqrt(2.0 * m + 3.0) * x * pmm
    for l in range(m + 2, L):
        a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
        b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
        out[l - m] = a * (x * out[l - m - 1] - b * out[l - m - 2])
    return out


# ---------------------------------------------------------------------------
# pointwise synthesis, summed l outer ascending / m inner ascending

@njit(cache=True)
def _synth_points_nb(coeffs, L, theta, phi):
    n = theta.shape[0]
    out = np.empty(n, dtype=np.complex128)
    table = np.empty(L * (L + 1) // 2)
    eim = np.empty(L, dtype=np.complex128)
    for i in range(n):
        x = math.cos(theta[i])
        s = math.sin(theta[i])
        pmm = INV_SQRT_4PI
        for m in range(L):
            if m > 0:
                pmm *= -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s
            table[m * (m + 1) // 2 + m] = pmm
            if m + 1 < L:
                table[(m + 1) * (m + 2) // 2 + m] = math.sqrt(2.0 * m + 3.0) * x * pmm
            for l in range(m + 2, L):
                a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                table[l * (l + 1) // 2 + m] = a * (
                    x * table[(l - 1) * l // 2 + m] - b * table[(l - 2) * (l - 1) // 2 + m]
                )
            eim[m] = complex(math.cos(m * phi[i]), math.sin(m * phi[i]))
        acc = 0.0 + 0.0j
        for l in range(L):
            base = l * l + l
            row = l * (l + 1) // 2
            for m in range(-l, l + 1):
                if m >= 0:
                    y = table[row + m] * eim[m]
                else:
                    y = table[row - m] * eim[-m].conjugate()
                    if (-m) % 2 == 1:
                        y = -y
                acc += coeffs[base + m] * y
        out[i] = acc
    return out


def _synth_points_np(coeffs, L, theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    x, s = np.cos(theta), np.sin(theta)
    tables = [_legendre_order_np(L, m, x, s) for m in range(L)]
    eim = np.exp(1j * np.outer(np.arange(L), phi))
    acc = np.zeros(theta.shape[0], dtype=complex)
    for l in range(L):
        base = l * l + l
        for m in range(-l, l + 1):
            am = abs(m)
            if m >= 0:
                y = tables[am][l - am] * eim[am]
            else:
                y = (-1) ** am * tables[am][l - am] * np.conj(eim[am])
            acc = acc + coeffs[base + m] * y
    return acc


# ---------------------------------------------------------------------------
# Gauss-Legendre nodes: Tricomi seed, Newton polish, Bruns-bracket bisection fallback

@njit(cache=True)
def _legendre_and_derivative_nb(n, x):
    p0, p1 = 1.0, x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k
    if n == 0:
        return 1.0, 0.0
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@njit(cache=True)
def _gauss_legendre_nb(n):
    nodes = np.zeros(n)
    weights = np.zeros(n)
    half = (n + 1) // 2
    for k in range(1, half + 1):
        theta0 = math.pi * (4.0 * k - 1.0) / (4.0 * n + 2.0)
        x = (1.0 - 1.0 / (8.0 * n * n) + 1.0 / (8.0 * n * n * n)) * math.cos(theta0)
        # middle root of odd n is exactly zero
        if 2 * k - 1 == n:
            x = 0.0
        converged = 2 * k - 1 == n
        it = 0
        while not converged and it < 100:
            p, dp = _legendre_and_derivative_nb(n, x)
            dx = p / dp
            x -= dx
            it += 1
            if abs(dx) <= 1e-15:
                converged = True
        lo = math.cos(math.pi * k / (n + 0.5))
        hi = math.cos(math.pi * (k - 0.5) / (n + 0.5))
        if not converged or x <= lo or x >= hi:
            plo, _ = _legendre_and_derivative_nb(n, lo)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                pm, _ = _legendre_and_derivative_nb(n, mid)
                if pm == 0.0:
                    break
                if (pm > 0.0) == (plo > 0.0):
                    lo, plo = mid, pm
                else:
                    hi = mid
            x = 0.5 * (lo + hi)
        _, dp = _legendre_and_derivative_nb(n, x)
        w = 2.0 / ((1.0 - x) * (1.0 + x) * dp * dp)
        nodes[k - 1] = x
        nodes[n - k] = -x
        weights[k - 1] = w
        weights[n - k] = w
    return nodes, weights


def _legendre_and_derivative_np(n, x):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def _gauss_legendre_np(n):
    half = (n + 1) // 2
    k = np.arange(1, half + 1, dtype=float)
    x = (1.0 - 1.0 / (8.0 * n**2) + 1.0 / (8.0 * n**3)) * np.cos(np.pi * (4.0 * k - 1.0) / (4.0 * n + 2.0))
    fixed = 2 * k - 1 == n
    x[fixed] = 0.0
    active = ~fixed
    for _ in range(100):
        if not active.any():
            break
        p, dp = _legendre_and_derivative_np(n, x[active])
        dx = p / dp
        x[active] -= dx
        idx = np.flatnonzero(active)
        active[idx[np.abs(dx) <= 1e-15]] = False
    lo = np.cos(np.pi * k / (n + 0.5))
    hi = np.cos(np.pi * (k - 0.5) / (n + 0.5))
    bad = active | (~fixed & ((x <= lo) | (x >= hi)))
    if bad.any():
        a, b = lo[bad].copy(), hi[bad].copy()
        pa, _ = _legendre_and_derivative_np(n, a)
        for _ in range(200):
            mid = 0.5 * (a + b)
            pm, _ = _legendre_and_derivative_np(n, mid)
            same = np.sign(pm) == np.sign(pa)
            a = np.where(same, mid, a)
            pa = np.where(same, pm, pa)
            b = np.where(same, b, mid)
        x[bad] = 0.5 * (a + b)
    _, dp = _legendre_and_derivative_np(n, x)
    w = 2.0 / ((1.0 - x) * (1.0 + x) * dp * dp)
    nodes = np.empty(n)
    weights = np.empty(n)
    nodes[:half] = x
    weights[:half] = w
    nodes[n - half:] = -x[::-1]
    weights[n - half:] = w[::-1]
    if n % 2:
        nodes[half - 1] = 0.0
    return nodes, weights


if USE_NUMBA:
    legendre_order = _legendre_order_nb
    synth_points = _synth_points_nb
    gauss_legendre = _gauss_legendre_nb
else:
    legendre_order = _legendre_order_np
    synth_points = _synth_points_np
    gauss_legendre = _gauss_legendre_np

BACKEND = "numba" if USE_NUMBA else "numpy"
