import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from sphgain.errors import DecimationError, DomainError, NotQuadratureGridError, PatternError
from sphgain.grids import build_grid
from sphgain.harmonics import HarmonicCoefficients, synthesize_rings
from sphgain.metrics import (
    REPORT_COLUMNS,
    Method,
    comparison_sweep,
    decimation_descriptor,
    directivity,
    directivity_decimated,
    meg_decimated,
    meg_quadrature,
    product_band_limit,
    report_rows,
    total_gain,
    write_report_csv,
    write_report_json,
)
from sphgain.models import (
    PatternPair,
    dipole_pattern,
    hut_coefficients,
    isotropic_pattern,
    preset_hut_models,
    random_bandlimited,
    random_pattern,
)

QT, QP = preset_hut_models()


@pytest.fixture(scope="module")
def fixture_pattern():
    return random_pattern(12, 3)


def test_product_band_limit():
    assert product_band_limit(20, 50) == 69
    assert build_grid("eq-quadrature", product_band_limit(20, 50)).total_samples == 4761


def test_directivity_isotropic_and_dipole():
    assert directivity(HarmonicCoefficients.constant(2.5)).value == pytest.approx(1.0, abs=1e-14)
    assert directivity(total_gain(dipole_pattern())).value == pytest.approx(1.5, abs=1e-4)


def test_directivity_against_dense_search():
    g = random_bandlimited(20, 7, nonnegative=True)
    d = directivity(g).value
    n = 10 * 4 * 20
    theta = math.pi * np.arange(n + 1) / n
    dense = synthesize_rings(g, theta, 2 * n).real.max()
    want = dense / (g[0, 0].real / math.sqrt(4 * math.pi))
    assert d >= 1.0
    assert d == pytest.approx(want, rel=1e-3)
    assert d >= want * (1 - 1e-12)  # polishing never loses to the dense grid


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_nonconstant_directivity_exceeds_one(seed):
    assert directivity(random_bandlimited(6, seed, nonnegative=True)).value > 1.0


def test_directivity_rejects_bad_patterns():
    with pytest.raises(PatternError):
        directivity(HarmonicCoefficients.constant(-1.0))
    neg = random_bandlimited(6, 1)
    data = neg.data.copy()
    data[0] = 0.01 * math.sqrt(4 * math.pi)
    with pytest.raises(PatternError):
        directivity(neg.with_data(data))
    with pytest.raises(PatternError):
        directivity(HarmonicCoefficients.delta(3, 1, 1) + HarmonicCoefficients.constant(L=3))


def test_decimated_directivity_constant():
    r = directivity_decimated(HarmonicCoefficients.constant(3.0), 1.0, 1.0)
    assert r.value == pytest.approx(1.0, abs=1e-14)
    assert r.samples_used == 64800 and r.method is Method.DECIMATED


@pytest.mark.parametrize("pq", [(30, 30), (10, 10), (1, 1), (0.5, 0.5)])
def test_decimated_dipole_equal_weight_bias(pq):
    # sum_i sin^2(i p) = N/2 exactly, so the unweighted mean is 0.75, not 1
    g = total_gain(dipole_pattern())
    d = directivity_decimated(g, *pq).value
    assert d == pytest.approx(2.0, abs=1e-12)
    assert d - directivity(g).value == pytest.approx(0.5, abs=1e-4)


def test_decimated_dipole_off_equator_grid():
    # N_theta odd: the equator is not sampled
    d = directivity_decimated(total_gain(dipole_pattern()), 20, 20).value
    assert d == pytest.approx(2 * math.sin(math.radians(80)) ** 2, rel=1e-12)


def test_decimated_accepts_callables():
    r = directivity_decimated(lambda t, p: 1.5 * np.sin(t) ** 2 + 0 * p, 10, 10)
    assert r.value == pytest.approx(2.0, abs=1e-12)


def test_decimation_must_divide():
    with pytest.raises(DecimationError):
        directivity_decimated(HarmonicCoefficients.constant(), 7, 1)
    with pytest.raises(DecimationError):
        meg_decimated(isotropic_pattern(), QT, QP, 1, 7)


def test_meg_isotropic():
    assert meg_quadrature(isotropic_pattern(), QT, QP).value == pytest.approx(1.0, abs=1e-12)
    assert meg_decimated(isotropic_pattern(), QT, QP, 1, 1).value == pytest.approx(1.0, abs=1e-12)


def test_meg_sample_counts():
    p = random_pattern(20, 7)
    q = meg_quadrature(p, QT, QP, L_G=20, L_Q=50)
    assert q.samples_used == 4761 and q.descriptor == "eq-quadrature(L=69)"
    d = meg_decimated(isotropic_pattern(), QT, QP, 1, 1)
    assert d.samples_used == 64800 and d.descriptor == decimation_descriptor(1, 1)
    assert decimation_descriptor(0.1, 0.1) == "decimated(p=0.1deg;q=0.1deg)"


@pytest.mark.parametrize("truncate", [False, True])
def test_meg_q_scaling_invariance(fixture_pattern, truncate):
    c = 3.3
    qt2, qp2 = replace(QT, K=QT.K * c), replace(QP, K=QP.K * c)
    for f in (
        lambda a, b: meg_quadrature(fixture_pattern, a, b, L_Q=30, truncate_q=truncate),
        lambda a, b: meg_decimated(fixture_pattern, a, b, 5, 5, L_Q=30, truncate_q=truncate),
    ):
        assert f(qt2, qp2).value == pytest.approx(f(QT, QP).value, rel=1e-12)


def test_meg_q_scaling_with_coefficients(fixture_pattern):
    qt, qp = hut_coefficients(QT, 30), hut_coefficients(QP, 30)
    base = meg_quadrature(fixture_pattern, qt, qp).value
    assert meg_quadrature(fixture_pattern, qt * 0.01, qp * 0.01).value == pytest.approx(base, rel=1e-12)


def test_meg_gain_homogeneity(fixture_pattern):
    c = 3.7
    for f in (
        lambda p: meg_quadrature(p, QT, QP, L_Q=30),
        lambda p: meg_decimated(p, QT, QP, 5, 5),
    ):
        assert f(fixture_pattern.scaled(c)).value == pytest.approx(c * f(fixture_pattern).value, rel=1e-12)


def test_meg_bounds(fixture_pattern):
    r = meg_quadrature(fixture_pattern, QT, QP, L_Q=30)
    g = build_grid("eq-quadrature", product_band_limit(12, 30))
    gt = synthesize_rings(fixture_pattern.g_theta, g.thetas, g.n_phis).real
    gp = synthesize_rings(fixture_pattern.g_phi, g.thetas, g.n_phis).real
    assert 0 <= r.value <= np.maximum(gt, gp).max() + 1e-9


@pytest.mark.parametrize("scheme", ["eq-quadrature", "gl-quadrature", "od"])
def test_meg_schemes_agree_on_bandlimited_inputs(fixture_pattern, scheme):
    qt, qp = hut_coefficients(QT, 16), hut_coefficients(QP, 16)
    ref = meg_quadrature(fixture_pattern, qt, qp, scheme="gl-quadrature").value
    assert meg_quadrature(fixture_pattern, qt, qp, scheme=scheme).value == pytest.approx(ref, rel=1e-10)


def test_meg_rejects_transform_scheme(fixture_pattern):
    with pytest.raises(NotQuadratureGridError):
        meg_quadrature(fixture_pattern, QT, QP, scheme="gl-transform")


def test_meg_decimated_converges(fixture_pattern):
    qt, qp = hut_coefficients(QT, 20), hut_coefficients(QP, 20)
    exact = meg_quadrature(fixture_pattern, qt, qp).value
    errs = [abs(meg_decimated(fixture_pattern, qt, qp, d, d).value - exact) for d in (3, 1, 0.5)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] / exact < 1e-3


def test_sweep_single_reference(fixture_pattern):
    res = comparison_sweep(fixture_pattern, QT, QP, [(5, 5)], L_Q=20)
    assert res.rows[0]["normalized"] == 1.0 and res.rows[0]["log10_normalized"] == 0.0
    assert len(res.rows) == 2 and res.rows[-1]["method"] == "quadrature"


def test_sweep_order_and_reference(fixture_pattern):
    res = comparison_sweep(fixture_pattern, QT, QP, [(10, 10), (2, 2), (5, 5)], L_Q=20)
    assert [r["descriptor"] for r in res.rows[:3]] == [decimation_descriptor(*d) for d in ((10, 10), (2, 2), (5, 5))]
    assert res.reference.decimation == (2.0, 2.0)
    assert res.sample_ratio == pytest.approx(90 * 180 / 31 ** 2)
    with pytest.raises(DomainError):
        comparison_sweep(fixture_pattern, QT, QP, [])


def test_report_writers(tmp_path, fixture_pattern):
    res = comparison_sweep(fixture_pattern, QT, QP, [(10, 10)], L_Q=10)
    path = tmp_path / "r.csv"
    write_report_csv(path, res.rows)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == REPORT_COLUMNS and len(rows) == 3
    jpath = tmp_path / "r.json"
    write_report_json(jpath, res.rows, res.reports)
    data = json.loads(jpath.read_text())
    assert data["rows"][1]["method"] == "quadrature"
    assert len(report_rows(res.reports)) == 2


def test_pattern_pair_total_gain():
    p = PatternPair(HarmonicCoefficients.constant(1.0), HarmonicCoefficients.constant(2.0, L=3))
    assert total_gain(p).band_limit == 3
    assert total_gain(p)[0, 0] == pytest.approx(3 * math.sqrt(4 * math.pi))
