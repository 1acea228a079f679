"""Forward transforms, quadrature and band-limit estimation on iso-latitude grids.

Every forward transform first Fourier-analyses each ring in phi; the
co-latitude stage then depends on the scheme:

* Gauss-Legendre rings: direct Gauss-Legendre quadrature per order.
* Equiangular rings: per-order least squares on the ring coefficients.
* Optimal-dimensionality rings: order-recursive elimination from the
  highest order down, removing each solved order's aliased contribution
  from the sparser rings before they are used.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatchError,
    GridTooSmallError,
    IllConditionedWarning,
    NotQuadratureGridError,
    NotTransformGridError,
    ZeroSignalError,
)
from .grids import Grid, Scheme
from .harmonics import HarmonicCoefficients, energy, legendre_table, synthesize_rings

SQRT_4PI = math.sqrt(4.0 * math.pi)
CONDITION_LIMIT = 1e8
DIRECT_DFT_MAX = 16


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Samples of a signal at the points of ``grid``, ring-major."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values)
        if vals.ndim != 1 or vals.shape[0] != self.grid.total_samples:
            raise GridMismatchError(
                f"{vals.shape} values do not fit {self.grid.scheme.value} L={self.grid.band_limit} "
                f"({self.grid.total_samples} samples)"
            )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def _check(self, other: "SampledSignal"):
        if other.grid != self.grid:
            raise GridMismatchError("cannot combine signals sampled on different grids")

    def __add__(self, other):
        self._check(other)
        return SampledSignal(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return SampledSignal(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, SampledSignal):
            self._check(other)
            return SampledSignal(self.grid, self.values * other.values)
        return SampledSignal(self.grid, self.values * other)

    __rmul__ = __mul__

    def rings(self):
        for ring, sl in zip(self.grid.rings, self.grid.ring_slices()):
            yield ring, self.values[sl]


@dataclass
class TransformInfo:
    scheme: str
    band_limit: int
    worst_condition: float = 1.0
    worst_order: int | None = None
    solve_residual: float = 0.0
    residual: float | None = None
    conditions: dict = field(default_factory=dict)


def ring_dft(values, direct_max: int = DIRECT_DFT_MAX) -> np.ndarray:
    """``g[j] = (1/n) sum_p values[p] exp(-2 pi i j p / n)``; index ``j`` holds order ``m = j mod n``."""
    values = np.asarray(values, dtype=complex)
    n = values.shape[0]
    if n < direct_max:
        p = np.arange(n)
        return np.exp(-2j * math.pi * np.outer(p, p) / n) @ values / n
    return np.fft.fft(values) / n


def _gl_stage(L, thetas, weights, dfts, n_phis):
    data = np.zeros(L * L, dtype=complex)
    for am in range(L):
        P = legendre_table(L, am, thetas)  # (L-am, T)
        ls = np.arange(am, L)
        for m in {am, -am}:
            g = np.array([d[m % n] for d, n in zip(dfts, n_phis)])
            col = 2.0 * math.pi * (P * weights[None, :]) @ g
            if m < 0:
                col = col * (-1.0) ** am
            data[ls * ls + ls + m] = col
    return data


def ring_least_squares(L: int, thetas, n_phis, dfts, info: TransformInfo | None = None) -> np.ndarray:
    """Per-order least-squares fit of ring Fourier coefficients to ``Pbar_l^m``.

    A ring contributes to order ``m`` only if it resolves it (``n_phi >= 2|m|+1``).
    """
    thetas = np.asarray(thetas, dtype=float)
    n_phis = np.asarray(n_phis, dtype=int)
    info = info if info is not None else TransformInfo("", L)
    data = np.zeros(L * L, dtype=complex)
    for am in range(L):
        rows = np.flatnonzero(n_phis >= 2 * am + 1)
        if rows.shape[0] < L - am:
            raise GridTooSmallError(f"only {rows.shape[0]} rings resolve order {am}; need {L - am}")
        A = legendre_table(L, am, thetas[rows]).T
        ls = np.arange(am, L)
        signs = [am] if am == 0 else [am, -am]
        cols = []
        for m in signs:
            g = np.array([dfts[r][m % n_phis[r]] for r in rows])
            if m < 0:
                g = g * (-1.0) ** am
            cols += [g.real, g.imag]
        B = np.stack(cols, axis=1)
        X, _, rank, sv = np.linalg.lstsq(A, B, rcond=None)
        cond = float(sv[0] / sv[-1]) if rank == A.shape[1] and sv[-1] > 0 else math.inf
        res = float(np.abs(A @ X - B).max()) if B.size else 0.0
        _record(info, am, cond, res)
        for j, m in enumerate(signs):
            data[ls * ls + ls + m] = X[:, 2 * j] + 1j * X[:, 2 * j + 1]
    return data


def _record(info: TransformInfo, am: int, cond: float, res: float):
    info.conditions[am] = cond
    info.solve_residual = max(info.solve_residual, res)
    if info.worst_order is None or cond > info.worst_condition:
        info.worst_condition = cond
        info.worst_order = am
    if cond > CONDITION_LIMIT:
        warnings.warn(
            f"order {am} solve has condition estimate {cond:.3e} > {CONDITION_LIMIT:.0e} (residual {res:.3e})",
            IllConditionedWarning,
            stacklevel=3,
        )


def _od_stage(L, thetas, dfts, n_phis, info):
    dfts = [d.copy() for d in dfts]
    data = np.zeros(L * L, dtype=complex)
    for am in range(L - 1, -1, -1):
        P = legendre_table(L, am, thetas)  # (L-am, L rings)
        A = P[:, am:].T  # rings k >= am carry this order unaliased
        ls = np.arange(am, L)
        signs = [am] if am == 0 else [am, -am]
        B = np.stack(
            [np.array([dfts[k][m % n_phis[k]] for k in range(am, L)]) * ((-1.0) ** am if m < 0 else 1.0) for m in signs],
            axis=1,
        )
        X = np.linalg.solve(A, B)
        cond = float(np.linalg.cond(A))
        res = float(np.abs(A @ X - B).max())
        _record(info, am, cond, res)
        for j, m in enumerate(signs):
            c = X[:, j]
            data[ls * ls + ls + m] = c
            if am == 0:
                continue
            # remove the aliased copy of this order from the sparser rings
            contrib = c @ P[:, :am]
            if m < 0:
                contrib = contrib * (-1.0) ** am
            for k in range(am):
                dfts[k][m % n_phis[k]] -= contrib[k]
    return data


def forward_sht(s: SampledSignal, L: int | None = None, *, diagnostics: bool = False):
    """Spherical harmonic coefficients of ``s`` up to band limit ``L``.

    The full transform is taken at the grid's band limit and truncated to
    ``L``. With ``diagnostics=True`` returns ``(coeffs, TransformInfo)``,
    where ``TransformInfo.residual`` is the relative resynthesis error on the
    grid (zero for a signal band-limited at the grid's ``L``).
    """
    grid = s.grid
    Lg = grid.band_limit
    L = Lg if L is None else int(L)
    if not grid.scheme.transform_capable:
        raise NotTransformGridError(f"{grid.scheme.value} grid does not support the forward transform")
    if L > Lg:
        raise GridTooSmallError(f"grid band limit {Lg} < requested {L}")
    thetas = grid.thetas
    n_phis = grid.n_phis
    dfts = [ring_dft(v) for _, v in s.rings()]
    info = TransformInfo(grid.scheme.value, L)
    if grid.scheme is Scheme.GL_TRANSFORM:
        data = _gl_stage(Lg, thetas, grid.weights, dfts, n_phis)
    elif grid.scheme is Scheme.EQ_TRANSFORM:
        data = ring_least_squares(Lg, thetas, n_phis, dfts, info)
    else:
        data = _od_stage(Lg, thetas, dfts, n_phis, info)
    full = HarmonicCoefficients(Lg, data)
    coeffs = full.truncated(L) if L < Lg else full
    if not diagnostics:
        return coeffs
    back = synthesize_rings(full, thetas, n_phis)
    norm = np.linalg.norm(s.values)
    info.residual = float(np.linalg.norm(back - s.values) / norm) if norm > 0 else 0.0
    return coeffs, info


def inverse_sht(c: HarmonicCoefficients, grid: Grid) -> SampledSignal:
    """Samples of the expansion ``c`` at the points of ``grid``."""
    return SampledSignal(grid, synthesize_rings(c, grid.thetas, grid.n_phis))


def integrate(s: SampledSignal) -> complex:
    """Surface integral of a band-limited signal sampled on a quadrature-capable grid."""
    grid = s.grid
    if not grid.scheme.quadrature_capable:
        raise NotQuadratureGridError(f"{grid.scheme.value} grid is not quadrature-capable")
    if grid.scheme is Scheme.OPTIMAL_DIM:
        return complex(SQRT_4PI * forward_sht(s)[0, 0])
    total = 0.0 + 0.0j
    for ring, vals in s.rings():
        total += ring.weight / ring.n_phi * np.sum(vals)
    return complex(2.0 * math.pi * total)


@dataclass(frozen=True)
class BandlimitScanResult:
    curve: tuple  # ((L, E), ...)
    chosen_L: int | None
    epsilon: float

    @property
    def band_limits(self) -> np.ndarray:
        return np.array([L for L, _ in self.curve], dtype=int)

    @property
    def errors(self) -> np.ndarray:
        return np.array([e for _, e in self.curve])


def truncation_errors(reference: HarmonicCoefficients) -> np.ndarray:
    """``E(L)`` for ``L = 0 .. L_max``: relative norm of the discarded degrees ``l >= L``."""
    d = reference.degree_energy()
    total = float(np.sum(d))
    if total <= 0.0:
        raise ZeroSignalError("reference signal has zero energy")
    tail = np.concatenate([np.cumsum(d[::-1])[::-1], [0.0]])
    return np.sqrt(tail / total)


def bandlimit_scan(reference: HarmonicCoefficients, epsilon: float, L_range=None) -> BandlimitScanResult:
    """Relative truncation error over ``L_range`` (inclusive ``(lo, hi)`` or iterable) and the smallest L below ``epsilon``."""
    L_max = reference.band_limit
    if L_range is None:
        Ls = range(1, L_max + 1)
    elif isinstance(L_range, tuple) and len(L_range) == 2:
        Ls = range(int(L_range[0]), int(L_range[1]) + 1)
    else:
        Ls = [int(v) for v in L_range]
    Ls = list(Ls)
    if not Ls or min(Ls) < 1 or max(Ls) > L_max:
        raise GridTooSmallError(f"scan range must lie within [1, {L_max}]")
    E = truncation_errors(reference)
    curve = tuple((L, float(E[L])) for L in Ls)
    chosen = next((L for L, e in curve if e < epsilon), None)
    return BandlimitScanResult(curve, chosen, float(epsilon))


__all__ = [
    "BandlimitScanResult",
    "SampledSignal",
    "TransformInfo",
    "bandlimit_scan",
    "energy",
    "forward_sht",
    "integrate",
    "inverse_sht",
    "ring_dft",
    "ring_least_squares",
    "truncation_errors",
]
