"""Command-line interface: ``sphgain <subcommand> ...``.

Angles are given in degrees. Every failure exits nonzero with a single
``error: <code>: <message>`` line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings

from . import io as sio
from .errors import SphGainError
from .grids import Scheme, build_grid, decimation_counts
from .harmonics import HarmonicCoefficients
from .metrics import (
    comparison_sweep,
    directivity,
    directivity_decimated,
    meg_decimated,
    meg_quadrature,
    report_rows,
    total_gain,
    write_report_csv,
    write_report_json,
)
from .models import (
    HUT_PHI_POLARIZATION_DEG,
    HUT_THETA_POLARIZATION_DEG,
    HutModel,
    PatternPair,
    dipole_pattern,
    hut_coefficients,
    isotropic_pattern,
    load_pattern,
    normalize_hut,
    random_pattern,
)
from .transforms import bandlimit_scan, forward_sht, inverse_sht

HUT_PRESETS = {"q-theta": HUT_THETA_POLARIZATION_DEG, "q-phi": HUT_PHI_POLARIZATION_DEG}
SCHEMES = [s.value for s in Scheme]


class UsageError(SphGainError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument helpers -----------------------------------------------------------

def _decimation(text: str):
    try:
        p, q = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"decimation must be 'p,q' in degrees, got {text!r}") from None
    return p, q


def _range(text: str):
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must be 'lo:hi', got {text!r}") from None
    return lo, hi


def _hut(spec: str) -> HutModel:
    if spec in HUT_PRESETS:
        return HutModel.from_degrees(*HUT_PRESETS[spec])
    return normalize_hut(*sio.read_hut_params(spec))


def _pattern(args) -> PatternPair:
    given = [bool(args.pattern), bool(args.g_theta or args.g_phi), args.fixture is not None]
    if sum(given) > 1:
        raise UsageError("give only one of --pattern, --g-theta/--g-phi, --fixture")
    if args.pattern:
        return load_pattern(args.pattern, db=args.db)
    if args.g_theta or args.g_phi:
        if not (args.g_theta and args.g_phi):
            raise UsageError("--g-theta and --g-phi must be given together")
        return PatternPair(sio.read_coeffs(args.g_theta), sio.read_coeffs(args.g_phi))
    fixture = args.fixture or "random"
    if fixture == "isotropic":
        return isotropic_pattern()
    if fixture == "dipole":
        return dipole_pattern()
    return random_pattern(args.L_G or 20, args.seed)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="seed for random fixtures")
    p.add_argument("--out", help="output path")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="report format")


def _add_pattern(p):
    p.add_argument("--pattern", help="pattern CSV (theta_deg,phi_deg,g_theta,g_phi) with sidecar grid")
    p.add_argument("--db", action="store_true", help="pattern file holds dB values")
    p.add_argument("--g-theta", help="coefficient JSON of the theta-polarized gain")
    p.add_argument("--g-phi", help="coefficient JSON of the phi-polarized gain")
    p.add_argument("--fixture", choices=["isotropic", "dipole", "random"], help="built-in pattern (default random)")
    p.add_argument("--L-G", dest="L_G", type=int, help="pattern band limit")


def _add_power(p):
    p.add_argument("--q-theta", default="q-theta", help="HUT JSON or preset (q-theta, q-phi)")
    p.add_argument("--q-phi", default="q-phi", help="HUT JSON or preset (q-theta, q-phi)")
    p.add_argument("--L-Q", dest="L_Q", type=int, default=50, help="power-model band limit")
    p.add_argument("--scheme", default="eq-quadrature", help="quadrature grid scheme")
    p.add_argument("--truncated-q", action="store_true", help="use the band-limited HUT expansion at L_Q")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sphgain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("grid", help="export a sampling grid")
    p.add_argument("--scheme", required=True, help=", ".join(SCHEMES))
    p.add_argument("-L", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("transform", help="samples CSV -> coefficient JSON")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--grid", help="grid descriptor (default: sidecar)")
    p.add_argument("-L", type=int)
    _add_common(p)

    p = sub.add_parser("synthesize", help="coefficient JSON -> samples CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--grid", help="grid descriptor JSON")
    p.add_argument("--scheme", help=", ".join(SCHEMES))
    p.add_argument("-L", type=int)
    _add_common(p)

    p = sub.add_parser("bandscan", help="truncation error curve E(L)")
    p.add_argument("--coeffs", help="reference coefficient JSON")
    p.add_argument("--hut", help="HUT JSON or preset (q-theta, q-phi)")
    p.add_argument("--L-max", dest="L_max", type=int, default=128)
    p.add_argument("--epsilon", type=float, default=1e-2)
    p.add_argument("--L-range", dest="L_range", type=_range)
    _add_common(p)

    p = sub.add_parser("directivity", help="directivity of the total gain")
    _add_pattern(p)
    p.add_argument("--search", type=int, default=4, help="peak search resolution multiplier")
    p.add_argument("--decimation", type=_decimation, action="append", default=[], help="also run p,q decimated sum")
    _add_common(p)

    p = sub.add_parser("meg", help="mean effective gain")
    _add_pattern(p)
    _add_power(p)
    p.add_argument("--decimation", type=_decimation, action="append", default=[], help="also run p,q decimated sum")
    _add_common(p)

    p = sub.add_parser("compare", help="decimated vs quadrature MEG table")
    _add_pattern(p)
    _add_power(p)
    p.add_argument("--decimations", type=_decimation, nargs="+", required=True)
    _add_common(p)

    p = sub.add_parser("hut-export", help="HUT model coefficients (and optional samples)")
    p.add_argument("--hut", default="q-theta", help="HUT JSON or preset (q-theta, q-phi)")
    p.add_argument("-L", type=int, default=50)
    p.add_argument("--samples", help="also write samples CSV on --scheme")
    p.add_argument("--scheme", default="gl-transform", help="grid for --samples")
    _add_common(p)
    return parser


# -- subcommands ----------------------------------------------------------------

def cmd_grid(args):
    grid = build_grid(args.scheme, args.L)
    if args.out:
        sio.write_points_csv(args.out, grid)
        sio.write_grid(sio.sidecar_path(args.out), grid)
    print(grid.total_samples)


def cmd_transform(args):
    grid = sio.read_grid(args.grid) if args.grid else None
    s = sio.read_samples(args.inp, grid)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        c, info = forward_sht(s, args.L, diagnostics=True)
    if args.out:
        sio.write_coeffs(args.out, c)
    print(
        f"band_limit={c.band_limit} scheme={info.scheme} worst_condition={info.worst_condition:.6e} "
        f"worst_order={info.worst_order} residual={info.residual:.6e}"
    )
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)


def cmd_synthesize(args):
    c = sio.read_coeffs(args.inp)
    if args.grid:
        grid = sio.read_grid(args.grid)
    elif args.scheme:
        grid = build_grid(args.scheme, args.L or c.band_limit)
    else:
        raise UsageError("synthesize needs --grid or --scheme")
    s = inverse_sht(c, grid)
    if not args.out:
        raise UsageError("synthesize needs --out")
    sio.write_samples(args.out, s)
    print(grid.total_samples)


def cmd_bandscan(args):
    if bool(args.coeffs) == bool(args.hut):
        raise UsageError("give exactly one of --coeffs, --hut")
    if args.coeffs:
        ref = sio.read_coeffs(args.coeffs)
    else:
        ref = hut_coefficients(_hut(args.hut), args.L_max)
    L_range = args.L_range or (1, ref.band_limit)
    res = bandlimit_scan(ref, args.epsilon, L_range)
    if args.out:
        if args.format == "json":
            with open(args.out, "w") as fh:
                json.dump(
                    {"epsilon": res.epsilon, "chosen_L": res.chosen_L, "curve": [list(pt) for pt in res.curve]}, fh, indent=2
                )
                fh.write("\n")
        else:
            with open(args.out, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["L", "E", "log10_E"])
                for L, e in res.curve:
                    w.writerow([L, repr(e), repr(math.log10(e)) if e > 0 else "-inf"])
    print(f"chosen_L={res.chosen_L}")


def _emit(args, rows, reports):
    if not args.out:
        return
    if args.format == "json":
        write_report_json(args.out, rows, reports)
    else:
        write_report_csv(args.out, rows)


def cmd_directivity(args):
    pat = _pattern(args)
    g = total_gain(pat)
    reports = [directivity(g, args.search)]
    for p, q in args.decimation:
        reports.append(directivity_decimated(g, p, q))
    for r in reports:
        print(f"{r.method.value} {r.descriptor} D={r.value!r} samples={r.samples_used}")
    _emit(args, report_rows(reports), reports)


def cmd_meg(args):
    pat = _pattern(args)
    qt, qp = _hut(args.q_theta), _hut(args.q_phi)
    reports = [meg_quadrature(pat, qt, qp, L_G=args.L_G, L_Q=args.L_Q, scheme=args.scheme, truncate_q=args.truncated_q)]
    for p, q in args.decimation:
        reports.append(meg_decimated(pat, qt, qp, p, q, L_Q=args.L_Q, truncate_q=args.truncated_q))
    for r in reports:
        print(f"{r.method.value} {r.descriptor} MEG={r.value!r} samples={r.samples_used}")
    _emit(args, report_rows(reports), reports)


def cmd_compare(args):
    pat = _pattern(args)
    qt, qp = _hut(args.q_theta), _hut(args.q_phi)
    for d in args.decimations:
        decimation_counts(*d)
    res = comparison_sweep(
        pat, qt, qp, args.decimations, L_G=args.L_G, L_Q=args.L_Q, scheme=args.scheme, truncate_q=args.truncated_q
    )
    for row in res.rows:
        print(f"{row['method']} {row['descriptor']} MEG={row['value']!r} samples={row['samples']} normalized={row['normalized']!r}")
    print(f"sample_ratio={res.sample_ratio:.3f}")
    _emit(args, res.rows, res.reports)


def cmd_hut_export(args):
    model = _hut(args.hut)
    c = hut_coefficients(model, args.L)
    if args.out:
        sio.write_coeffs(args.out, c)
    if args.samples:
        sio.write_samples(args.samples, inverse_sht(c, build_grid(args.scheme, args.L)))
    print(f"K={model.K!r} band_limit={c.band_limit}")


COMMANDS = {
    "grid": cmd_grid,
    "transform": cmd_transform,
    "synthesize": cmd_synthesize,
    "bandscan": cmd_bandscan,
    "directivity": cmd_directivity,
    "meg": cmd_meg,
    "compare": cmd_compare,
    "hut-export": cmd_hut_export,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except SphGainError as exc:
        print(f"error: {exc.code}: {_one_line(exc)}", file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    except OSError as exc:
        print(f"error: io: {_one_line(exc)}", file=sys.stderr)
        return 1
    return 0


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
