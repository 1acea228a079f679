"""Readers and writers for the on-disk formats.

* coefficients: JSON ``{"band_limit", "convention", "coeffs": [[re, im], ...]}``
* grid descriptor: JSON ``{"scheme", "band_limit", "rings": [...]}`` or
  ``{"dense": {"p_deg", "q_deg"}}`` for a decimation grid
* samples: CSV ``theta_deg,phi_deg,value_re,value_im`` + sidecar grid JSON
* patterns: CSV ``theta_deg,phi_deg,g_theta,g_phi`` + sidecar grid JSON
* HUT model: JSON ``{"theta_o_deg", "sigma_minus_deg", "sigma_plus_deg"}``

Angles are degrees on disk and radians in memory.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, MalformedFileError
from .grids import DenseGrid, Grid
from .harmonics import CONVENTION, HarmonicCoefficients
from .transforms import SampledSignal

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9

SAMPLE_HEADER = ("theta_deg", "phi_deg", "value_re", "value_im")
PATTERN_HEADER = ("theta_deg", "phi_deg", "g_theta", "g_phi")
POINT_HEADER = ("theta_deg", "phi_deg")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".grid.json")


def _dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


# -- coefficients -----------------------------------------------------------

def coeffs_to_dict(c: HarmonicCoefficients) -> dict:
    return {
        "band_limit": c.band_limit,
        "convention": CONVENTION,
        "coeffs": [[float(v.real), float(v.imag)] for v in c.data],
    }


def coeffs_from_dict(d: dict, source="coefficients") -> HarmonicCoefficients:
    try:
        L = int(d["band_limit"])
        raw = d["coeffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFileError(f"{source}: missing or invalid field {exc}") from None
    conv = d.get("convention", CONVENTION)
    if conv != CONVENTION:
        raise MalformedFileError(f"{source}: unsupported convention {conv!r}")
    if len(raw) != L * L:
        raise MalformedFileError(f"{source}: expected {L * L} coefficients, found {len(raw)}")
    try:
        arr = np.array([complex(float(re), float(im)) for re, im in raw], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise MalformedFileError(f"{source}: bad coefficient entry ({exc})") from None
    return HarmonicCoefficients(L, arr)


def write_coeffs(path, c: HarmonicCoefficients):
    _dump_json(coeffs_to_dict(c), path)


def read_coeffs(path) -> HarmonicCoefficients:
    return coeffs_from_dict(_load_json(path), source=str(path))


# -- grids --------------------------------------------------------------------

def grid_from_dict(d: dict):
    if "dense" in d:
        try:
            return DenseGrid(float(d["dense"]["p_deg"]), float(d["dense"]["q_deg"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedFileError(f"dense grid descriptor invalid: {exc}") from None
    return Grid.from_dict(d)


def write_grid(path, grid):
    _dump_json(grid.to_dict(), path)


def read_grid(path):
    return grid_from_dict(_load_json(path))


def write_points_csv(path, grid):
    theta, phi = grid.points()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POINT_HEADER)
        for t, p in zip(np.degrees(theta), np.degrees(phi)):
            w.writerow([repr(float(t)), repr(float(p))])


# -- sample / pattern CSVs -----------------------------------------------------

def _read_table(path, header):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise MalformedFileError(f"{path}: empty file") from None
        if tuple(h.strip() for h in first) != header:
            raise MalformedFileError(f"{path}: line 1: expected header {','.join(header)}")
        for row in reader:
            lineno = reader.line_num
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(header):
                raise MalformedFileError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(f) for f in row])
            except ValueError:
                raise MalformedFileError(f"{path}: line {lineno}: non-numeric field") from None
    return np.array(rows, dtype=float).reshape(-1, len(header))


def check_points(path, grid, theta_deg, phi_deg):
    """Verify that the file's point list is exactly ``grid``'s, in ring-major order."""
    want_t, want_p = grid.points()
    n = want_t.shape[0]
    got = theta_deg.shape[0]
    if got < n:
        raise MalformedFileError(f"{path}: line {got + 2}: missing data row ({got} rows, grid has {n} samples)")
    if got > n:
        raise MalformedFileError(f"{path}: line {n + 2}: extra data row (grid has {n} samples)")
    dt = np.abs(np.radians(theta_deg) - want_t)
    dp = np.abs(np.radians(phi_deg) % TWO_PI - want_p)
    dp = np.minimum(dp, TWO_PI - dp)
    bad = np.flatnonzero((dt > ANGLE_TOL) | (dp > ANGLE_TOL))
    if bad.size:
        raise GridMismatchError(f"{path}: line {bad[0] + 2}: point does not match the declared grid")


def _resolve_grid(path, grid):
    if grid is not None:
        return grid
    side = sidecar_path(path)
    if not side.exists():
        raise MalformedFileError(f"{path}: no grid given and sidecar {side.name} not found")
    return read_grid(side)


def write_samples(path, s, sidecar: bool = True):
    theta, phi = s.grid.points()
    vals = np.asarray(s.values, dtype=complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SAMPLE_HEADER)
        for t, p, v in zip(np.degrees(theta), np.degrees(phi), vals):
            w.writerow([repr(float(t)), repr(float(p)), repr(float(v.real)), repr(float(v.imag))])
    if sidecar:
        write_grid(sidecar_path(path), s.grid)


def read_samples(path, grid=None):
    """Load a sample CSV bound to ``grid`` (or its sidecar descriptor)."""
    grid = _resolve_grid(path, grid)
    if isinstance(grid, DenseGrid):
        raise MalformedFileError(f"{path}: sample files must use a scheme grid")
    table = _read_table(path, SAMPLE_HEADER)
    check_points(path, grid, table[:, 0], table[:, 1])
    return SampledSignal(grid, table[:, 2] + 1j * table[:, 3])


def write_pattern(path, grid, g_theta, g_phi, sidecar: bool = True):
    theta, phi = grid.points()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PATTERN_HEADER)
        for row in zip(np.degrees(theta), np.degrees(phi), np.real(g_theta), np.real(g_phi)):
            w.writerow([repr(float(v)) for v in row])
    if sidecar:
        write_grid(sidecar_path(path), grid)


def read_pattern_table(path, grid=None):
    """``(grid, g_theta, g_phi)`` sample arrays from a pattern CSV, point order verified."""
    grid = _resolve_grid(path, grid)
    table = _read_table(path, PATTERN_HEADER)
    check_points(path, grid, table[:, 0], table[:, 1])
    return grid, table[:, 2], table[:, 3]


# -- HUT model ------------------------------------------------------------------

def read_hut_params(path):
    """``(theta_o, sigma_minus, sigma_plus)`` in radians; any stored K is ignored."""
    d = _load_json(path)
    try:
        return tuple(math.radians(float(d[k])) for k in ("theta_o_deg", "sigma_minus_deg", "sigma_plus_deg"))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFileError(f"{path}: HUT model needs theta_o_deg, sigma_minus_deg, sigma_plus_deg ({exc})") from None


def write_hut_params(path, model):
    _dump_json(
        {
            "theta_o_deg": math.degrees(model.theta_o),
            "sigma_minus_deg": math.degrees(model.sigma_minus),
            "sigma_plus_deg": math.degrees(model.sigma_plus),
        },
        path,
    )
