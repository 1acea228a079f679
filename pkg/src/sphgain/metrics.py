"""Directivity and mean effective gain (MEG).

Two routes are provided for each metric:

* quadrature: exact integrals of band-limited integrands on a quadrature
  grid (the MEG integrand ``G.Q`` is band-limited at ``L_G + L_Q - 1``);
* decimated: the legacy Riemann sums over a ``(p, q)`` degree-step grid,
  reproduced as-is for comparison, including the unweighted mean in the
  decimated directivity.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.optimize import minimize

from ._kernels import INV_SQRT_4PI
from .errors import DomainError, NotQuadratureGridError, PatternError, ZeroSignalError
from .grids import DenseGrid, Scheme, build_grid, decimation_counts
from .harmonics import HarmonicCoefficients, evaluate, synthesize_rings
from .models import HutModel, PatternPair, hut_coefficients, hut_power
from .transforms import SampledSignal, integrate

NEGATIVITY_TOL = 1e-8
DEFAULT_L_Q = 50
RING_CHUNK = 128

PowerModel = Union[HutModel, HarmonicCoefficients]
Evaluable = Union[HarmonicCoefficients, Callable]


class Metric(enum.Enum):
    DIRECTIVITY = "directivity"
    MEG = "meg"


class Method(enum.Enum):
    QUADRATURE = "quadrature"
    DECIMATED = "decimated"


@dataclass(frozen=True)
class MetricReport:
    metric: Metric
    method: Method
    value: float
    samples_used: int
    descriptor: str
    band_limits: tuple | None = None
    scheme: str | None = None
    decimation: tuple | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["metric"] = self.metric.value
        d["method"] = self.method.value
        d["band_limits"] = list(self.band_limits) if self.band_limits is not None else None
        d["decimation"] = list(self.decimation) if self.decimation is not None else None
        return d


def product_band_limit(L_G: int, L_Q: int) -> int:
    """Band limit of a product of signals band-limited at ``L_G`` and ``L_Q``."""
    return int(L_G) + int(L_Q) - 1


def decimation_descriptor(p_deg, q_deg) -> str:
    return f"decimated(p={p_deg:g}deg;q={q_deg:g}deg)"


def total_gain(p: PatternPair) -> HarmonicCoefficients:
    return p.g_theta + p.g_phi


# -- directivity ----------------------------------------------------------------

def _as_real_pattern(g: HarmonicCoefficients) -> HarmonicCoefficients:
    if g.symmetry_error() > 1e-8:
        raise PatternError("directivity needs the coefficients of a real pattern")
    return g


def _search_grid(L: int, k: int):
    n = k * L
    theta = math.pi * np.arange(n + 1) / n
    return theta, 2 * n


def directivity(g: HarmonicCoefficients, search_resolution: int = 4) -> MetricReport:
    """Peak over mean gain.

    The mean is exact in the harmonic domain, ``g(0,0) / sqrt(4 pi)``. The
    peak is searched on a ``(kL+1) x 2kL`` equiangular grid (poles
    included) and then polished by bounded local optimization from the best
    grid points.
    """
    g = _as_real_pattern(g)
    # same constant as Pbar_0^0 in synthesis, so constant patterns give D == 1 exactly
    mean = float(g[0, 0].real) * INV_SQRT_4PI
    if mean <= 0.0:
        raise PatternError(f"mean power {mean:.3e} is not positive")
    L = g.band_limit
    theta, n_phi = _search_grid(L, int(search_resolution))
    vals = synthesize_rings(g, theta, n_phi).real.reshape(theta.shape[0], n_phi)
    if vals.min() < -NEGATIVITY_TOL:
        raise PatternError(f"pattern is negative ({vals.min():.3e}) on the search grid")
    g_max = float(vals.max())
    if L > 1:
        phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
        flat = np.argsort(vals, axis=None, kind="stable")[::-1][:4]

        def neg(x):
            return -float(evaluate(g, [x[0]], [x[1]]).real[0])

        for f in flat:
            i, j = divmod(int(f), n_phi)
            res = minimize(neg, x0=[theta[i], phis[j]], method="L-BFGS-B", bounds=[(0.0, math.pi), (None, None)])
            g_max = max(g_max, -float(res.fun))
    return MetricReport(
        Metric.DIRECTIVITY,
        Method.QUADRATURE,
        g_max / mean,
        samples_used=int(theta.shape[0] * n_phi),
        descriptor=f"harmonic(L={L};search={search_resolution})",
        band_limits=(L, None),
    )


def _iter_dense(grid: DenseGrid, funcs, chunk=RING_CHUNK):
    """Yield ``(theta_chunk, [values (rows, n_phi) per func])`` ring block by ring block."""
    thetas = grid.thetas
    for start in range(0, thetas.shape[0], chunk):
        th = thetas[start:start + chunk]
        yield th, [f(th) for f in funcs]


def _dense_evaluator(g, grid: DenseGrid):
    n_phi = grid.n_phi
    if isinstance(g, HarmonicCoefficients):
        return lambda th: synthesize_rings(g, th, n_phi).real.reshape(th.shape[0], n_phi)
    if isinstance(g, HutModel):
        return lambda th: np.broadcast_to(hut_power(g, th)[:, None], (th.shape[0], n_phi))
    if callable(g):
        phis = grid.phis
        return lambda th: np.asarray(g(th[:, None], phis[None, :]), dtype=float) * np.ones((1, n_phi))
    raise DomainError(f"cannot evaluate {type(g).__name__} on a decimation grid")


def directivity_decimated(g: Evaluable, p_deg: float, q_deg: float) -> MetricReport:
    """Grid maximum over the plain (unweighted) grid mean."""
    grid = DenseGrid(p_deg, q_deg)
    f = _dense_evaluator(g, grid)
    total = 0.0
    peak = -math.inf
    for _, (vals,) in _iter_dense(grid, [f]):
        total += float(np.sum(vals))
        peak = max(peak, float(vals.max()))
    mean = total / grid.total_samples
    if mean <= 0.0:
        raise PatternError(f"mean power {mean:.3e} is not positive")
    L = g.band_limit if isinstance(g, HarmonicCoefficients) else None
    return MetricReport(
        Metric.DIRECTIVITY,
        Method.DECIMATED,
        peak / mean,
        samples_used=grid.total_samples,
        descriptor=decimation_descriptor(p_deg, q_deg),
        band_limits=(L, None),
        decimation=(p_deg, q_deg),
    )


# -- MEG ------------------------------------------------------------------------

def _resolve_power(q: PowerModel, L_Q: int, truncate_q: bool) -> PowerModel:
    if isinstance(q, HutModel):
        return hut_coefficients(q, L_Q) if truncate_q else q
    if isinstance(q, HarmonicCoefficients):
        return q.truncated(L_Q) if q.band_limit > L_Q else q
    raise DomainError(f"power model must be HutModel or HarmonicCoefficients, not {type(q).__name__}")


def _infer_L_Q(q_theta, q_phi, L_Q):
    if L_Q is not None:
        return int(L_Q)
    coefs = [q.band_limit for q in (q_theta, q_phi) if isinstance(q, HarmonicCoefficients)]
    return max(coefs) if len(coefs) == 2 else DEFAULT_L_Q


def _grid_values(model: PowerModel, grid):
    if isinstance(model, HutModel):
        theta, _ = grid.points()
        return hut_power(model, theta)
    return synthesize_rings(model, grid.thetas, grid.n_phis).real


def meg_quadrature(
    p: PatternPair,
    q_theta: PowerModel,
    q_phi: PowerModel,
    L_G: int | None = None,
    L_Q: int | None = None,
    scheme="eq-quadrature",
    truncate_q: bool = False,
) -> MetricReport:
    """MEG from exact quadrature at the product band limit ``L_G + L_Q - 1``.

    HUT models are evaluated from their analytic form unless ``truncate_q``,
    in which case their band-limited expansion at ``L_Q`` is used and the
    integrands are exactly band-limited at the grid's band limit.
    """
    scheme = Scheme.parse(scheme)
    if not scheme.quadrature_capable:
        raise NotQuadratureGridError(f"{scheme.value} grid is not quadrature-capable")
    L_G = p.band_limit if L_G is None else int(L_G)
    L_Q = _infer_L_Q(q_theta, q_phi, L_Q)
    qt = _resolve_power(q_theta, L_Q, truncate_q)
    qp = _resolve_power(q_phi, L_Q, truncate_q)
    L_prod = product_band_limit(L_G, L_Q)
    grid = build_grid(scheme, L_prod)
    gt = synthesize_rings(p.g_theta.truncated(L_G), grid.thetas, grid.n_phis).real
    gp = synthesize_rings(p.g_phi.truncated(L_G), grid.thetas, grid.n_phis).real
    vt = _grid_values(qt, grid)
    vp = _grid_values(qp, grid)
    num = integrate(SampledSignal(grid, gt * vt + gp * vp)).real
    den = integrate(SampledSignal(grid, vt + vp)).real
    if den == 0.0:
        raise ZeroSignalError("incoming power integrates to zero")
    return MetricReport(
        Metric.MEG,
        Method.QUADRATURE,
        num / den,
        samples_used=grid.total_samples,
        descriptor=f"{scheme.value}(L={L_prod})",
        band_limits=(L_G, L_Q),
        scheme=scheme.value,
    )


def meg_decimated(
    p: PatternPair,
    q_theta: PowerModel,
    q_phi: PowerModel,
    p_deg: float,
    q_deg: float,
    L_Q: int | None = None,
    truncate_q: bool = False,
) -> MetricReport:
    """MEG from the sin(theta)-weighted Riemann sums over a ``(p, q)`` decimation grid."""
    grid = DenseGrid(p_deg, q_deg)
    L_Q = _infer_L_Q(q_theta, q_phi, L_Q)
    qt = _resolve_power(q_theta, L_Q, truncate_q)
    qp = _resolve_power(q_phi, L_Q, truncate_q)
    funcs = [_dense_evaluator(f, grid) for f in (p.g_theta, p.g_phi, qt, qp)]
    num = 0.0
    p_env = 0.0
    for th, (gt, gp, vt, vp) in _iter_dense(grid, funcs):
        s = np.sin(th)[:, None]
        num += float(np.sum((gt * vt + gp * vp) * s))
        p_env += float(np.sum((vt + vp) * s))
    if p_env == 0.0:
        raise ZeroSignalError("incoming power sums to zero")
    return MetricReport(
        Metric.MEG,
        Method.DECIMATED,
        num / p_env,
        samples_used=grid.total_samples,
        descriptor=decimation_descriptor(p_deg, q_deg),
        band_limits=(p.band_limit, L_Q),
        decimation=(p_deg, q_deg),
    )


@dataclass
class SweepResult:
    reports: list
    reference: MetricReport
    rows: list

    @property
    def quadrature(self) -> MetricReport:
        return next(r for r in self.reports if r.method is Method.QUADRATURE)

    @property
    def sample_ratio(self) -> float:
        """Reference sample count over quadrature sample count."""
        return self.reference.samples_used / self.quadrature.samples_used


def comparison_sweep(
    p: PatternPair,
    q_theta: PowerModel,
    q_phi: PowerModel,
    decimations: Sequence,
    L_G: int | None = None,
    L_Q: int | None = None,
    scheme="eq-quadrature",
    truncate_q: bool = False,
) -> SweepResult:
    """Decimated MEG for each ``(p, q)`` plus one quadrature MEG, normalized to the finest decimation."""
    decimations = [tuple(float(v) for v in d) for d in decimations]
    if not decimations:
        raise DomainError("comparison sweep needs at least one decimation")
    for d in decimations:
        decimation_counts(*d)
    reports = [meg_decimated(p, q_theta, q_phi, d[0], d[1], L_Q=L_Q, truncate_q=truncate_q) for d in decimations]
    reports.append(meg_quadrature(p, q_theta, q_phi, L_G=L_G, L_Q=L_Q, scheme=scheme, truncate_q=truncate_q))
    ref = max(reports[:-1], key=lambda r: r.samples_used)
    rows = []
    for r in reports:
        norm = abs(r.value / ref.value)
        rows.append(
            {
                "metric": r.metric.value,
                "method": r.method.value,
                "value": r.value,
                "samples": r.samples_used,
                "descriptor": r.descriptor,
                "normalized": norm,
                "log10_normalized": math.log10(norm) if norm > 0 else -math.inf,
            }
        )
    return SweepResult(reports, ref, rows)


REPORT_COLUMNS = ("metric", "method", "value", "samples", "descriptor", "normalized", "log10_normalized")


def report_rows(reports: Sequence[MetricReport]) -> list:
    """Rows without a comparison reference (normalized columns left empty)."""
    return [
        {
            "metric": r.metric.value,
            "method": r.method.value,
            "value": r.value,
            "samples": r.samples_used,
            "descriptor": r.descriptor,
            "normalized": None,
            "log10_normalized": None,
        }
        for r in reports
    ]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_report_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])


def write_report_json(path, rows, reports=None):
    payload = {"rows": rows}
    if reports is not None:
        payload["reports"] = [r.to_dict() for r in reports]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, allow_nan=True)
        fh.write("\n")
