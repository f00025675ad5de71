"""Sweep orchestration, CSV persistence, power-law fits, thin-rectangle bound."""

import math
from fractions import Fraction

import numpy as np
import pytest

from kslyap.study import (
    ConditionViolatedError,
    FitError,
    MolinetBound,
    PowerLawFit,
    SweepRecord,
    fit_power_law,
    molinet,
    read_sweep_csv,
    sweep,
    write_sweep_csv,
)

SWEEP_LS = [8.0, 4.0, 16.0]


@pytest.fixture(scope="module")
def sweep_out(tmp_path_factory):
    path = tmp_path_factory.mktemp("sweep") / "sweep.csv"
    records = sweep(SWEEP_LS, csv_path=path)
    return records, path


def test_sweep_rows_in_input_order(sweep_out):
    records, _ = sweep_out
    assert [r.L for r in records] == SWEEP_LS
    good = records[0]
    assert good.certified and good.error is None
    assert good.delta_margin > 0 and good.lambda_min > good.delta_margin
    assert good.r_star_star > good.phi_norm > 0
    assert good.M2 > 0 and good.h2_norm > 0
    assert good.sim_sup_norm is None  # no simulation requested
    bad = records[1]
    assert not bad.certified
    assert bad.error == "DomainTooSmallError: sweep requires L >= 8, got 4"
    assert bad.delta_margin is None and bad.r_star_star is None
    assert records[2].certified  # failure in the middle does not stop the sweep


def test_sweep_csv_round_trip(sweep_out):
    records, path = sweep_out
    assert read_sweep_csv(path) == records


def test_round_trip_preserves_every_field(tmp_path):
    records = [
        SweepRecord(
            L=32.0,
            delta_margin=69.64420135006026,
            lambda_min=69.97744573007638,
            h2_norm=1.5e7,
            phi_norm=10377.901363672947,
            M2=2.433480578641536e18,
            r_star_star=264364726.89598617,
            sim_sup_norm=151.25,
            certified=True,
        ),
        SweepRecord(L=4.0, error="DomainTooSmallError: sweep requires L >= 8, got 4"),
        SweepRecord(L=64.0, delta_margin=-0.5, certified=False),
    ]
    path = tmp_path / "rt.csv"
    write_sweep_csv(records, path)
    assert read_sweep_csv(path) == records


def test_read_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("L,margin\n8.0,1.0\n")
    with pytest.raises(ValueError, match="header"):
        read_sweep_csv(path)


def test_sweep_empty_list(tmp_path):
    path = tmp_path / "empty.csv"
    assert sweep([], csv_path=path) == []
    assert path.read_text().strip().count("\n") == 0  # header only


def test_sweep_parallel_matches_serial(sweep_out, tmp_path):
    records, path = sweep_out
    path2 = tmp_path / "sweep2.csv"
    records2 = sweep(SWEEP_LS, csv_path=path2, workers=2)
    assert records2 == records
    assert path2.read_bytes() == path.read_bytes()


def test_fit_exact_power_law():
    fit = fit_power_law([(L, L**1.5) for L in (8.0, 16.0, 32.0, 64.0, 128.0)])
    assert np.isclose(fit.slope, 1.5, rtol=1e-12)
    assert abs(fit.intercept) < 1e-12
    assert fit.r_squared == 1.0
    assert fit.n_points == 5


def test_fit_recovers_prefactor():
    fit = fit_power_law([(L, 7.0 * L ** (7.0 / 6.0)) for L in (10.0, 20.0, 40.0, 80.0)])
    assert np.isclose(fit.slope, 7.0 / 6.0, rtol=1e-10)
    assert np.isclose(fit.intercept, math.log(7.0), rtol=1e-10)


def test_fit_reports_scatter():
    rng = np.random.default_rng(3)
    pairs = [(L, L**2 * math.exp(rng.normal(0.0, 0.1))) for L in np.geomspace(4.0, 256.0, 12)]
    fit = fit_power_law(pairs)
    assert 0.0 < fit.r_squared < 1.0
    assert abs(fit.slope - 2.0) < 0.2


def test_fit_validation():
    with pytest.raises(FitError):
        fit_power_law([(8.0, 1.0), (16.0, 2.0)])
    with pytest.raises(FitError):
        fit_power_law([(8.0, 1.0), (16.0, 0.0), (32.0, 2.0)])
    with pytest.raises(FitError):
        fit_power_law([(-8.0, 1.0), (16.0, 1.0), (32.0, 2.0)])


def test_molinet_threshold_values():
    m = molinet(100.0)
    assert isinstance(m, MolinetBound)
    assert np.isclose(m.ly_max, 100.0 ** (-13.0 / 7.0), rtol=1e-12)
    # at the threshold height the bound collapses to C * Lx^{4/7}
    assert np.isclose(m.norm_bound, 100.0 ** (4.0 / 7.0), rtol=1e-12)
    m = molinet(100.0, Ly=1e-4)
    assert np.isclose(m.norm_bound, 10.0, rtol=1e-6)
    assert np.isclose(molinet(100.0, C=2.0).ly_max, 2.0 * 100.0 ** (-13.0 / 7.0), rtol=1e-12)


def test_molinet_condition_enforced():
    ly_max = molinet(50.0).ly_max
    molinet(50.0, Ly=ly_max)  # boundary admissible
    with pytest.raises(ConditionViolatedError):
        molinet(50.0, Ly=ly_max * (1.0 + 1e-9))
    with pytest.raises(ValueError):
        molinet(50.0, Ly=-1.0)
    with pytest.raises(ValueError):
        molinet(1.0)
    with pytest.raises(ValueError):
        molinet(0.5)
    with pytest.raises(ValueError):
        molinet(50.0, C=0.0)


def test_molinet_exponent_beats_steeper_reference():
    # the admissible height decays like Lx^{-13/7}, slower than Lx^{-67/35}
    assert Fraction(-13, 7) > Fraction(-67, 35)
    assert molinet(1e6).ly_max > 1e6 ** (-67.0 / 35.0)
