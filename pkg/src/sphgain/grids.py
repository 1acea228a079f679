"""Iso-latitude sampling grids and their co-latitude quadrature weights."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import (
    DomainError,
    GridMismatchError,
    InvalidSchemeError,
    NotQuadratureGridError,
    DecimationError,
    SingularSystemError,
)
from .harmonics import legendre_table

_RESIDUAL_LIMIT = 1e-8


class Scheme(enum.Enum):
    EQ_TRANSFORM = "eq-transform"
    EQ_QUADRATURE = "eq-quadrature"
    GL_TRANSFORM = "gl-transform"
    GL_QUADRATURE = "gl-quadrature"
    OPTIMAL_DIM = "od"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise InvalidSchemeError(f"unknown scheme {value!r}; expected one of {names}") from None

    @property
    def transform_capable(self) -> bool:
        return self in (Scheme.EQ_TRANSFORM, Scheme.GL_TRANSFORM, Scheme.OPTIMAL_DIM)

    @property
    def quadrature_capable(self) -> bool:
        return self in (Scheme.EQ_QUADRATURE, Scheme.GL_QUADRATURE, Scheme.OPTIMAL_DIM)


@dataclass(frozen=True)
class Ring:
    theta: float
    n_phi: int
    weight: float | None = None

    def phis(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi


@dataclass(frozen=True)
class Grid:
    scheme: Scheme
    band_limit: int
    rings: tuple

    @property
    def total_samples(self) -> int:
        return sum(r.n_phi for r in self.rings)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([r.theta for r in self.rings])

    @property
    def n_phis(self) -> np.ndarray:
        return np.array([r.n_phi for r in self.rings], dtype=int)

    @property
    def weights(self) -> np.ndarray | None:
        if any(r.weight is None for r in self.rings):
            return None
        return np.array([r.weight for r in self.rings])

    def ring_slices(self):
        start = 0
        for r in self.rings:
            yield slice(start, start + r.n_phi)
            start += r.n_phi

    def points(self):
        """``(theta, phi)`` arrays in ring-major order."""
        theta = np.repeat(self.thetas, self.n_phis)
        phi = np.concatenate([r.phis() for r in self.rings])
        return theta, phi

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "band_limit": self.band_limit,
            "rings": [{"theta": r.theta, "n_phi": r.n_phi, "weight": r.weight} for r in self.rings],
        }

    @classmethod
    def from_dict(cls, d: dict, tol: float = 1e-9) -> "Grid":
        """Rebuild a grid from its descriptor, checking ring geometry against ``build_grid``."""
        try:
            scheme = Scheme.parse(d["scheme"])
            L = int(d["band_limit"])
            rings = d["rings"]
        except (KeyError, TypeError) as exc:
            raise GridMismatchError(f"grid descriptor missing field: {exc}") from None
        grid = build_grid(scheme, L)
        if len(rings) != len(grid.rings):
            raise GridMismatchError(f"descriptor has {len(rings)} rings, {scheme.value} L={L} has {len(grid.rings)}")
        for i, (got, want) in enumerate(zip(rings, grid.rings)):
            if int(got["n_phi"]) != want.n_phi or abs(float(got["theta"]) - want.theta) > tol:
                raise GridMismatchError(f"ring {i} does not match {scheme.value} L={L}")
        return grid


def gauss_legendre_nodes(n: int):
    """Nodes (descending, in (-1, 1)) and weights of the ``n``-point Gauss-Legendre rule."""
    n = int(n)
    if n < 1 or n > 2048:
        raise DomainError(f"Gauss-Legendre point count must be in [1, 2048], got {n}")
    nodes, weights = _kernels.gauss_legendre(n)
    return np.asarray(nodes), np.asarray(weights)


def _legendre_plain(L: int, theta) -> np.ndarray:
    # unnormalized P_l(cos theta), rows l = 0..L-1
    scale = np.sqrt(4.0 * math.pi / (2.0 * np.arange(L) + 1.0))
    return legendre_table(L, 0, theta) * scale[:, None]


def solve_theta_weights(thetas, L: int):
    """Weights ``w`` with ``sum_t w_t P_l(cos theta_t) = 2 delta_l0`` for ``l < L``.

    Returns ``(weights, residual)``; raises when the residual signals a
    degenerate ring placement.
    """
    thetas = np.asarray(thetas, dtype=float)
    A = _legendre_plain(L, thetas)
    b = np.zeros(L)
    b[0] = 2.0
    try:
        w = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"co-latitude weight system is singular: {exc}") from None
    residual = float(np.abs(A @ w - b).max())
    if not np.isfinite(residual) or residual > _RESIDUAL_LIMIT:
        raise SingularSystemError(f"co-latitude weight solve residual {residual:.3e} exceeds {_RESIDUAL_LIMIT}")
    return w, residual


def _od_thetas(L: int) -> np.ndarray:
    """Co-latitudes for the optimal-dimensionality rings, ring ``k`` carrying ``2k+1`` samples.

    Rings are assigned from the densest (``k = L-1``) down. Each picks, from
    the ``2L-1`` equiangular candidates ``pi(2j+1)/(2(2L-1))``, the unused
    co-latitude that maximizes the smallest singular value of the order-``k``
    system formed with the rings already placed. Ties go to the lowest index.
    """
    n_cand = 2 * L - 1
    cand = math.pi * (2.0 * np.arange(n_cand) + 1.0) / (2.0 * n_cand)
    used = np.zeros(n_cand, dtype=bool)
    thetas = np.empty(L)
    for k in range(L - 1, -1, -1):
        P = legendre_table(L, k, cand)
        placed = legendre_table(L, k, thetas[k + 1:])
        free = np.flatnonzero(~used)
        A = np.empty((free.shape[0], L - k, L - k))
        A[:, 0, :] = P[:, free].T
        A[:, 1:, :] = placed.T[None]
        smin = np.linalg.svd(A, compute_uv=False)[:, -1]
        j = free[int(np.argmax(smin))]
        used[j] = True
        thetas[k] = cand[j]
    return thetas


@lru_cache(maxsize=128)
def _build(scheme: Scheme, L: int) -> Grid:
    if scheme is Scheme.EQ_TRANSFORM:
        rings = [Ring(0.0, 1)] + [Ring(math.pi * t / L, 2 * L - 1) for t in range(1, L + 1)]
    elif scheme is Scheme.EQ_QUADRATURE:
        thetas = math.pi * np.arange(L) / L
        w, _ = solve_theta_weights(thetas, L)
        rings = [Ring(float(thetas[0]), 1, float(w[0]))]
        rings += [Ring(float(thetas[t]), L + 1, float(w[t])) for t in range(1, L)]
    elif scheme in (Scheme.GL_TRANSFORM, Scheme.GL_QUADRATURE):
        nodes, w = gauss_legendre_nodes(L)
        n_phi = 2 * L - 1 if scheme is Scheme.GL_TRANSFORM else L + 1
        rings = [Ring(float(math.acos(x)), n_phi, float(wt)) for x, wt in zip(nodes, w)]
    elif scheme is Scheme.OPTIMAL_DIM:
        # no per-ring weights exist; integration goes through the transform
        rings = [Ring(float(th), 2 * k + 1) for k, th in enumerate(_od_thetas(L))]
    else:  # pragma: no cover
        raise InvalidSchemeError(str(scheme))
    return Grid(scheme, L, tuple(rings))


def build_grid(scheme, L: int) -> Grid:
    scheme = Scheme.parse(scheme)
    if int(L) != L or L < 1:
        raise DomainError(f"band limit must be a positive integer, got {L!r}")
    return _build(scheme, int(L))


def theta_weights(grid: Grid) -> np.ndarray | None:
    """Ring weights for the co-latitude integral (``None`` for optimal-dimensionality grids)."""
    if not grid.scheme.quadrature_capable:
        raise NotQuadratureGridError(f"{grid.scheme.value} grid carries no quadrature weights")
    return grid.weights


def decimation_counts(p_deg: float, q_deg: float):
    """``(N_theta, N_phi) = (180/p, 360/q)`` for a decimation grid; both must divide exactly."""
    out = []
    for step, span, name in ((p_deg, 180.0, "p"), (q_deg, 360.0, "q")):
        step = float(step)
        if not step > 0.0:
            raise DecimationError(f"decimation {name}={step!r} must be positive")
        n = int(round(span / step))
        if n < 1 or abs(n * step - span) > 1e-9 * span:
            raise DecimationError(f"decimation {name}={step!r} deg does not divide {span:g} deg")
        out.append(n)
    return out[0], out[1]


@dataclass(frozen=True)
class DenseGrid:
    """Legacy decimation grid: ``theta_i = i p``, ``phi_j = j q`` in degrees, end-exclusive."""

    p_deg: float
    q_deg: float

    def __post_init__(self):
        decimation_counts(self.p_deg, self.q_deg)

    @property
    def n_theta(self) -> int:
        return decimation_counts(self.p_deg, self.q_deg)[0]

    @property
    def n_phi(self) -> int:
        return decimation_counts(self.p_deg, self.q_deg)[1]

    @property
    def total_samples(self) -> int:
        return self.n_theta * self.n_phi

    @property
    def thetas(self) -> np.ndarray:
        return np.radians(np.arange(self.n_theta) * self.p_deg)

    @property
    def phis(self) -> np.ndarray:
        return np.radians(np.arange(self.n_phi) * self.q_deg)

    def points(self):
        return np.repeat(self.thetas, self.n_phi), np.tile(self.phis, self.n_theta)

    def to_dict(self) -> dict:
        return {"dense": {"p_deg": self.p_deg, "q_deg": self.q_deg}}
