"""Signals under analysis: the HUT incoming-power model, test patterns, pattern files."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from . import io as _io
from .errors import DomainError, NotTransformGridError
from .grids import DenseGrid, Grid, Scheme, build_grid, gauss_legendre_nodes
from .harmonics import HarmonicCoefficients, evaluate, idx, synthesize_rings
from .transforms import SampledSignal, forward_sht, ring_dft, ring_least_squares

SQRT2 = math.sqrt(2.0)
SQRT_4PI = math.sqrt(4.0 * math.pi)
NORMALIZATION_NODES = 256
NOT_BANDLIMITED_RESIDUAL = 1e-3

# averaged-environment HUT parameters (degrees): theta_o, sigma-, sigma+
HUT_THETA_POLARIZATION_DEG = (1.6, 5.5, 8.6)
HUT_PHI_POLARIZATION_DEG = (1.8, 7.4, 13.7)


class NotBandlimitedWarning(RuntimeWarning):
    """Ingested samples are not reproduced by the reference band-limited fit."""


@dataclass(frozen=True)
class HutModel:
    """Double-exponential-in-elevation power distribution, azimuthally symmetric.

    All angles in radians. ``K`` makes the L2 norm over the sphere one; build
    instances with :func:`normalize_hut` (or :meth:`from_degrees`) rather than
    supplying ``K`` by hand.
    """

    theta_o: float
    sigma_minus: float
    sigma_plus: float
    K: float

    def __post_init__(self):
        if not (self.sigma_minus > 0 and self.sigma_plus > 0):
            raise DomainError("HUT spreads must be positive")
        if not (0.0 <= self.theta_o <= math.pi):
            raise DomainError(f"HUT mean theta_o={self.theta_o!r} outside [0, pi]")
        if not self.K > 0:
            raise DomainError("HUT normalization K must be positive")

    @classmethod
    def from_degrees(cls, theta_o_deg, sigma_minus_deg, sigma_plus_deg) -> "HutModel":
        return normalize_hut(math.radians(theta_o_deg), math.radians(sigma_minus_deg), math.radians(sigma_plus_deg))

    def __call__(self, theta):
        return hut_power(self, theta)


def _hut_profile(theta, theta_o, sigma_minus, sigma_plus, K=1.0):
    theta = np.asarray(theta, dtype=float)
    sigma = np.where(theta <= theta_o, sigma_minus, sigma_plus)
    return K * np.exp(-SQRT2 * np.abs(theta - theta_o) / sigma)


def hut_power(model: HutModel, theta):
    """``Q(theta)``; scalar in, scalar out."""
    t = np.asarray(theta, dtype=float)
    if np.any(t < -1e-12) or np.any(t > math.pi + 1e-12):
        raise DomainError("theta outside [0, pi]")
    out = _hut_profile(np.clip(t, 0.0, math.pi), model.theta_o, model.sigma_minus, model.sigma_plus, model.K)
    return float(out) if out.ndim == 0 else out


def _gl_on(a, b, n=NORMALIZATION_NODES):
    x, w = gauss_legendre_nodes(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def hut_energy(theta_o, sigma_minus, sigma_plus, K=1.0) -> float:
    """``integral |Q|^2 ds`` by Gauss-Legendre in theta, split at the kink ``theta_o``."""
    total = 0.0
    for a, b in ((0.0, theta_o), (theta_o, math.pi)):
        if b - a <= 0.0:
            continue
        t, w = _gl_on(a, b)
        q = _hut_profile(t, theta_o, sigma_minus, sigma_plus, K)
        total += float(np.sum(w * q * q * np.sin(t)))
    return 2.0 * math.pi * total


def normalize_hut(theta_o: float, sigma_minus: float, sigma_plus: float) -> HutModel:
    if not (sigma_minus > 0 and sigma_plus > 0):
        raise DomainError("HUT spreads must be positive")
    K = 1.0 / math.sqrt(hut_energy(theta_o, sigma_minus, sigma_plus))
    return HutModel(float(theta_o), float(sigma_minus), float(sigma_plus), K)


def preset_hut_models():
    """``(Q_theta, Q_phi)`` for the environment-averaged parameter sets."""
    return HutModel.from_degrees(*HUT_THETA_POLARIZATION_DEG), HutModel.from_degrees(*HUT_PHI_POLARIZATION_DEG)


@lru_cache(maxsize=32)
def _hut_coefficients(model: HutModel, L: int) -> HarmonicCoefficients:
    grid = build_grid(Scheme.GL_TRANSFORM, L)
    theta, _ = grid.points()
    c = forward_sht(SampledSignal(grid, hut_power(model, theta)), L)
    # azimuthal symmetry is exact; drop round-off in m != 0
    data = np.zeros(L * L, dtype=complex)
    ls = np.arange(L)
    data[ls * ls + ls] = c.data[ls * ls + ls].real
    return HarmonicCoefficients(L, data, real_signal=True)


def hut_coefficients(model: HutModel, L: int) -> HarmonicCoefficients:
    """Forward transform of the HUT samples on a Gauss-Legendre grid at band limit ``L``."""
    if not (1 <= L <= 256):
        raise DomainError(f"HUT coefficient band limit must be in [1, 256], got {L}")
    return _hut_coefficients(model, int(L))


# -- antenna patterns -----------------------------------------------------------

@dataclass(frozen=True)
class PatternPair:
    """Linear power gain for the theta and phi polarizations."""

    g_theta: HarmonicCoefficients
    g_phi: HarmonicCoefficients
    frequency_hz: float | None = None
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def band_limit(self) -> int:
        return max(self.g_theta.band_limit, self.g_phi.band_limit)

    def scaled(self, factor: float) -> "PatternPair":
        return PatternPair(self.g_theta * factor, self.g_phi * factor, self.frequency_hz, dict(self.provenance))


def isotropic_pattern(value: float = 1.0) -> PatternPair:
    c = HarmonicCoefficients.constant(value)
    return PatternPair(c, c)


def dipole_pattern() -> PatternPair:
    """``G_theta = 1.5 sin^2(theta)``, ``G_phi = 0``; band-limited at 3."""
    data = np.zeros(9, dtype=complex)
    # 1.5 sin^2 = 1 - P_2(cos theta)
    data[idx(0, 0)] = SQRT_4PI
    data[idx(2, 0)] = -math.sqrt(4.0 * math.pi / 5.0)
    return PatternPair(HarmonicCoefficients(3, data, real_signal=True), HarmonicCoefficients(3, real_signal=True))


def check_grid_extrema(c: HarmonicCoefficients, n_theta: int, n_phi: int):
    """``(min, max)`` of the real part of ``c`` on a pole-inclusive equiangular grid."""
    theta = math.pi * np.arange(n_theta) / (n_theta - 1)
    vals = synthesize_rings(c, theta, n_phi).real
    return float(vals.min()), float(vals.max())


def polished_minimum(c: HarmonicCoefficients, n_theta: int, n_phi: int, starts: int = 4) -> float:
    """Grid minimum refined by bounded local descent from the ``starts`` lowest grid points."""
    theta = math.pi * np.arange(n_theta) / (n_theta - 1)
    vals = synthesize_rings(c, theta, n_phi).real.reshape(n_theta, n_phi)
    best = float(vals.min())
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi

    def f(x):
        return float(evaluate(c, [x[0]], [x[1]]).real[0])

    for k in np.argsort(vals, axis=None, kind="stable")[:starts]:
        i, j = divmod(int(k), n_phi)
        res = minimize(f, x0=[theta[i], phis[j]], method="L-BFGS-B", bounds=[(0.0, math.pi), (None, None)])
        best = min(best, float(res.fun))
    return best


def random_bandlimited(L: int, seed: int, real_signal: bool = True, nonnegative: bool = False) -> HarmonicCoefficients:
    """Reproducible random coefficients with standard-normal entries.

    ``nonnegative`` adds a constant so that the minimum (``4L x 4L`` check
    grid, then local descent) sits at 1% of the peak-to-peak range above zero.
    """
    if L < 1:
        raise DomainError(f"band limit must be positive, got {L}")
    rng = np.random.default_rng(seed)
    data = np.zeros(L * L, dtype=complex)
    for l in range(L):
        if real_signal:
            data[idx(l, 0)] = rng.standard_normal()
            for m in range(1, l + 1):
                v = (rng.standard_normal() + 1j * rng.standard_normal()) / SQRT2
                data[idx(l, m)] = v
                data[idx(l, -m)] = (-1) ** m * np.conj(v)
        else:
            n = 2 * l + 1
            data[l * l:l * l + n] = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / SQRT2
    c = HarmonicCoefficients(L, data, real_signal=real_signal)
    if nonnegative:
        if not real_signal:
            raise DomainError("nonnegative patterns must be real")
        lo, hi = check_grid_extrema(c, 4 * L, 4 * L)
        lo = min(lo, polished_minimum(c, 4 * L, 4 * L))
        shifted = data.copy()
        shifted[0] += SQRT_4PI * (0.01 * (hi - lo) - lo)
        c = HarmonicCoefficients(L, shifted, real_signal=True)
    return c


def random_pattern(L: int, seed: int) -> PatternPair:
    """Nonnegative random pattern pair; the phi component uses ``seed + 1``."""
    return PatternPair(
        random_bandlimited(L, seed, nonnegative=True), random_bandlimited(L, seed + 1, nonnegative=True)
    )


def _dense_transform(grid: DenseGrid, values, L_ref):
    n_phi = grid.n_phi
    thetas = grid.thetas
    vals = np.asarray(values, dtype=float).reshape(grid.n_theta, n_phi)
    dfts = [ring_dft(row) for row in vals]
    data = ring_least_squares(L_ref, thetas, np.full(grid.n_theta, n_phi), dfts)
    c = HarmonicCoefficients(L_ref, data)
    back = synthesize_rings(c, thetas, n_phi).real
    norm = np.linalg.norm(values)
    residual = float(np.linalg.norm(back - np.ravel(values)) / norm) if norm > 0 else 0.0
    return c, residual


def load_pattern(path, grid=None, db: bool = False) -> PatternPair:
    """Read a pattern CSV and expand both polarizations in harmonics.

    Samples on a transform-capable scheme grid go through its forward
    transform; samples on a decimation grid are fitted by least squares at
    ``L_ref = min(180/p, 256)`` (capped by what the phi sampling resolves).
    The relative resynthesis residual is stored in ``provenance``.
    """
    grid, g_theta, g_phi = _io.read_pattern_table(path, grid)
    if db:
        g_theta, g_phi = 10.0 ** (g_theta / 10.0), 10.0 ** (g_phi / 10.0)
    prov = {"source": str(path)}
    if isinstance(grid, DenseGrid):
        L_ref = min(int(math.floor(180.0 / grid.p_deg + 1e-9)), 256, (grid.n_phi + 1) // 2)
        ct, rt = _dense_transform(grid, g_theta, L_ref)
        cp, rp = _dense_transform(grid, g_phi, L_ref)
        prov.update(grid="dense", p_deg=grid.p_deg, q_deg=grid.q_deg, band_limit=L_ref)
    elif isinstance(grid, Grid):
        if not grid.scheme.transform_capable:
            raise NotTransformGridError(f"{grid.scheme.value} samples cannot be expanded in harmonics")
        ct, it = forward_sht(SampledSignal(grid, g_theta), diagnostics=True)
        cp, ip = forward_sht(SampledSignal(grid, g_phi), diagnostics=True)
        rt, rp = it.residual, ip.residual
        prov.update(grid=grid.scheme.value, band_limit=grid.band_limit)
    else:  # pragma: no cover
        raise NotTransformGridError(f"unsupported grid {grid!r}")
    residual = max(rt, rp)
    prov["residual"] = residual
    prov["bandlimited"] = residual <= NOT_BANDLIMITED_RESIDUAL
    if not prov["bandlimited"]:
        warnings.warn(
            f"{path}: resynthesis residual {residual:.3e} exceeds {NOT_BANDLIMITED_RESIDUAL:g}; "
            f"pattern is not band-limited at L_ref={prov['band_limit']}",
            NotBandlimitedWarning,
            stacklevel=2,
        )
    return PatternPair(ct, cp, provenance=prov)


def export_pattern(path, pattern: PatternPair, grid):
    """Sample ``pattern`` on ``grid`` (scheme or dense) and write a pattern CSV + sidecar."""
    if isinstance(grid, DenseGrid):
        gt = synthesize_rings(pattern.g_theta, grid.thetas, grid.n_phi).real
        gp = synthesize_rings(pattern.g_phi, grid.thetas, grid.n_phi).real
    else:
        gt = synthesize_rings(pattern.g_theta, grid.thetas, grid.n_phis).real
        gp = synthesize_rings(pattern.g_phi, grid.thetas, grid.n_phis).real
    _io.write_pattern(path, grid, gt, gp)
