"""Orthonormal spherical harmonics, coefficient storage and synthesis.

Convention: orthonormal on the unit sphere, Condon-Shortley phase included
in the Legendre functions, so that

    Y_l^m(theta, phi) = Pbar_l^m(cos theta) * exp(i m phi)
    Y_l^{-m} = (-1)^m conj(Y_l^m)

with ``Pbar_l^m = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m``. Coefficients of a
band-limit ``L`` signal live in one flat complex array of length ``L**2``
indexed by ``l*l + l + m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError

CONVENTION = "orthonormal-condon-shortley"
MAX_DEGREE = 2048
TWO_PI = 2.0 * math.pi


def idx(l: int, m: int) -> int:
    """Flat index of ``(l, m)`` in dense-triangular storage."""
    return l * l + l + m


@dataclass(frozen=True)
class SphericalPoint:
    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise DomainError(f"theta={self.theta!r} outside [0, pi]")
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)


class HarmonicCoefficients:
    """Immutable triangular array of complex coefficients ``c(l, m)``, ``0 <= l < L``.

    ``real_signal=True`` declares the coefficients to be those of a real
    function; the conjugate symmetry ``c(l,-m) = (-1)^m conj(c(l,m))`` is
    checked at construction.
    """

    __slots__ = ("_L", "_data", "_real")

    def __init__(self, band_limit: int, coeffs=None, real_signal: bool = False):
        band_limit = int(band_limit)
        if band_limit < 1:
            raise DomainError(f"band limit must be positive, got {band_limit}")
        if coeffs is None:
            data = np.zeros(band_limit * band_limit, dtype=complex)
        else:
            data = np.array(coeffs, dtype=complex).ravel()
            if data.shape[0] != band_limit * band_limit:
                raise DomainError(
                    f"expected {band_limit * band_limit} coefficients for L={band_limit}, got {data.shape[0]}"
                )
        data.flags.writeable = False
        self._L = band_limit
        self._data = data
        self._real = bool(real_signal)
        if self._real:
            err = self.symmetry_error()
            if err > 1e-12:
                raise DomainError(f"coefficients declared real-signal violate conjugate symmetry (rel. err {err:.2e})")

    @property
    def band_limit(self) -> int:
        return self._L

    @property
    def data(self) -> np.ndarray:
        """Read-only flat coefficient array."""
        return self._data

    @property
    def real_signal(self) -> bool:
        return self._real

    def __len__(self):
        return self._data.shape[0]

    def __getitem__(self, lm):
        l, m = lm
        if not (0 <= l < self._L) or abs(m) > l:
            raise DomainError(f"(l={l}, m={m}) outside band limit {self._L}")
        return self._data[idx(l, m)]

    def __repr__(self):
        return f"HarmonicCoefficients(band_limit={self._L}, real_signal={self._real})"

    def __eq__(self, other):
        if not isinstance(other, HarmonicCoefficients):
            return NotImplemented
        return self._L == other._L and np.array_equal(self._data, other._data)

    __hash__ = None

    def symmetry_error(self) -> float:
        """Max relative deviation from real-signal conjugate symmetry."""
        L = self._L
        scale = np.abs(self._data).max() if len(self) else 0.0
        if scale == 0.0:
            return 0.0
        worst = 0.0
        for l in range(L):
            m = np.arange(0, l + 1)
            pos = self._data[l * l + l + m]
            neg = self._data[l * l + l - m]
            dev = np.abs(neg - (-1.0) ** m * np.conj(pos)).max()
            worst = max(worst, dev)
        return float(worst / scale)

    def with_data(self, data, real_signal: bool | None = None) -> "HarmonicCoefficients":
        return HarmonicCoefficients(self._L, data, self._real if real_signal is None else real_signal)

    def truncated(self, L: int) -> "HarmonicCoefficients":
        """Band-limited approximation keeping degrees ``l < L`` (zero-padded if ``L`` is larger)."""
        out = np.zeros(L * L, dtype=complex)
        n = min(L, self._L) ** 2
        out[:n] = self._data[:n]
        return HarmonicCoefficients(L, out, self._real)

    def degree_energy(self) -> np.ndarray:
        """``sum_m |c(l, m)|^2`` for each degree ``l``."""
        sq = np.abs(self._data) ** 2
        return np.add.reduceat(sq, np.arange(self._L) ** 2)

    def orders(self) -> np.ndarray:
        """Orders ``m`` that carry at least one nonzero coefficient."""
        L = self._L
        ms = []
        for m in range(-(L - 1), L):
            ls = np.arange(abs(m), L)
            if np.any(self._data[ls * ls + ls + m] != 0):
                ms.append(m)
        return np.array(ms, dtype=int)

    def _combine(self, other, sign):
        if isinstance(other, HarmonicCoefficients):
            L = max(self._L, other._L)
            a = self.truncated(L)._data
            b = other.truncated(L)._data
            return HarmonicCoefficients(L, a + sign * b, self._real and other._real)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        if isinstance(scalar, HarmonicCoefficients):
            return NotImplemented
        real = self._real and np.isrealobj(scalar)
        return HarmonicCoefficients(self._L, self._data * scalar, real)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @classmethod
    def delta(cls, L: int, l: int, m: int, value: complex = 1.0) -> "HarmonicCoefficients":
        if not (0 <= l < L) or abs(m) > l:
            raise DomainError(f"(l={l}, m={m}) outside band limit {L}")
        data = np.zeros(L * L, dtype=complex)
        data[idx(l, m)] = value
        return cls(L, data)

    @classmethod
    def constant(cls, value: float = 1.0, L: int = 1) -> "HarmonicCoefficients":
        """Coefficients of the constant function ``value``."""
        data = np.zeros(L * L, dtype=complex)
        data[0] = value * math.sqrt(4.0 * math.pi)
        return cls(L, data, real_signal=np.isrealobj(value))


def _check_lm(l: int, m: int):
    if l < 0 or l >= MAX_DEGREE:
        raise DomainError(f"degree l={l} outside [0, {MAX_DEGREE})")
    if abs(m) > l:
        raise DomainError(f"order m={m} exceeds degree l={l}")


def assoc_legendre_norm(l: int, m: int, x: float) -> float:
    """Fully normalized ``Pbar_l^m(x)`` (Condon-Shortley phase), by recurrence.

    >>> round(assoc_legendre_norm(1, 0, 1.0), 10)
    0.4886025119
    """
    if m < 0:
        raise DomainError(f"order m={m} must be nonnegative")
    _check_lm(l, m)
    if abs(x) > 1.0:
        raise DomainError(f"|x|={abs(x)!r} > 1")
    xa = np.array([float(x)])
    sa = np.sqrt((1.0 - xa) * (1.0 + xa))
    return float(_kernels.legendre_order(l + 1, m, xa, sa)[l - m, 0])


def legendre_table(L: int, m: int, theta) -> np.ndarray:
    """``Pbar_l^m(cos theta)`` for ``l = m .. L-1``; shape ``(L - m, len(theta))``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return _kernels.legendre_order(L, m, np.cos(theta), np.sin(theta))


def ylm(l: int, m: int, p: SphericalPoint) -> complex:
    _check_lm(l, m)
    am = abs(m)
    val = legendre_table(l + 1, am, [p.theta])[l - am, 0] * complex(math.cos(am * p.phi), math.sin(am * p.phi))
    if m < 0:
        val = (-1.0) ** am * val.conjugate()
    return complex(val)


def evaluate(c: HarmonicCoefficients, theta, phi) -> np.ndarray:
    """Vectorized pointwise synthesis at arrays of ``theta`` and ``phi``."""
    theta = np.ascontiguousarray(np.atleast_1d(theta), dtype=float)
    phi = np.ascontiguousarray(np.atleast_1d(phi), dtype=float)
    theta, phi = np.broadcast_arrays(theta, phi)
    shape = theta.shape
    out = _kernels.synth_points(
        np.ascontiguousarray(c.data), c.band_limit, np.ascontiguousarray(theta.ravel()), np.ascontiguousarray(phi.ravel())
    )
    return out.reshape(shape)


def synthesize(c: HarmonicCoefficients, points: Iterable[SphericalPoint]) -> np.ndarray:
    """Values of the expansion at each point (l outer, m inner summation)."""
    pts = list(points)
    theta = np.array([p.theta for p in pts], dtype=float)
    phi = np.array([p.phi for p in pts], dtype=float)
    return evaluate(c, theta, phi)


def order_profiles(c: HarmonicCoefficients, theta, orders: Sequence[int] | None = None):
    """``f_m(theta) = sum_l c(l, m) Pbar_l^m(cos theta)`` for each order.

    Returns ``(orders, F)`` with ``F`` of shape ``(len(theta), len(orders))``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    L = c.band_limit
    orders = c.orders() if orders is None else np.asarray(orders, dtype=int)
    F = np.zeros((theta.shape[0], orders.shape[0]), dtype=complex)
    tables = {}
    for j, m in enumerate(orders):
        am = abs(int(m))
        if am not in tables:
            tables[am] = legendre_table(L, am, theta)
        ls = np.arange(am, L)
        coef = c.data[ls * ls + ls + m]
        if m < 0:
            coef = coef * (-1.0) ** am
        F[:, j] = coef @ tables[am]
    return orders, F


def synthesize_rings(c: HarmonicCoefficients, theta, n_phi) -> np.ndarray:
    """Synthesis on iso-latitude rings with ``phi_p = 2 pi p / n_phi``.

    Values are returned ring-major (ring 0 first, phi ascending within a ring).
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n_phi = np.broadcast_to(np.asarray(n_phi, dtype=int), theta.shape)
    orders, F = order_profiles(c, theta)
    offsets = np.concatenate([[0], np.cumsum(n_phi)])
    out = np.zeros(offsets[-1], dtype=complex)
    if orders.shape[0] == 0:
        return out
    for n in np.unique(n_phi):
        rings = np.flatnonzero(n_phi == n)
        phis = TWO_PI * np.arange(n) / n
        E = np.exp(1j * np.outer(orders, phis))
        block = F[rings] @ E
        for r, vals in zip(rings, block):
            out[offsets[r]:offsets[r + 1]] = vals
    return out


def energy(c: HarmonicCoefficients) -> float:
    """Squared L2 norm of the signal, ``sum |c(l, m)|^2`` by Parseval."""
    return float(np.sum(np.abs(c.data) ** 2))
