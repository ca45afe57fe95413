import numpy as np
import pytest

from config import MEASURED_ENERGY_PJ
from energy_model import (
    EnergyModel,
    EnergyModelCoeffs,
    calibrate_energy_model,
    default_coeffs,
    energy_per_cycle,
    energy_sweep,
)

ADIABATIC = MEASURED_ENERGY_PJ['adiabatic-mtj']
CMOS = MEASURED_ENERGY_PJ['cmos']


@pytest.fixture
def adiabatic_coeffs():
    return calibrate_energy_model([(f, ADIABATIC[f]) for f in (5.0, 12.5, 50.0)])


@pytest.fixture
def cmos_coeffs():
    return calibrate_energy_model([(f, CMOS[f]) for f in (5.0, 50.0)], fit_adiabatic=False)


def test_constant_model():
    coeffs = EnergyModelCoeffs(constant_gamma=0.42)
    for f in (0.1, 5.0, 1e3):
        assert energy_per_cycle(coeffs, f) == pytest.approx(0.42)


def test_non_positive_frequency_rejected():
    with pytest.raises(ValueError, match="frequency"):
        energy_per_cycle(EnergyModelCoeffs(constant_gamma=1.0), 0.0)


def test_negative_coefficient_rejected():
    with pytest.raises(ValueError, match="leakage_coeff_B"):
        EnergyModelCoeffs(leakage_coeff_B=-1.0)


def test_three_point_fit_is_exact(adiabatic_coeffs):
    for f in (5.0, 12.5, 50.0):
        assert energy_per_cycle(adiabatic_coeffs, f) == pytest.approx(ADIABATIC[f], rel=1e-6)
    assert adiabatic_coeffs.adiabatic_coeff_A == pytest.approx(0.1 / 67.5, rel=1e-6)
    assert adiabatic_coeffs.leakage_coeff_B == pytest.approx(1.75926, rel=1e-4)
    assert adiabatic_coeffs.constant_gamma == pytest.approx(0.140741, rel=1e-4)


def test_adiabatic_held_out_points(adiabatic_coeffs):
    assert energy_per_cycle(adiabatic_coeffs, 10.0) == pytest.approx(0.37, rel=0.15)
    assert energy_per_cycle(adiabatic_coeffs, 25.0) == pytest.approx(0.28, rel=0.15)


def test_cmos_held_out_points(cmos_coeffs):
    assert cmos_coeffs.adiabatic_coeff_A == 0.0
    assert energy_per_cycle(cmos_coeffs, 5.0) == pytest.approx(0.80, rel=1e-6)
    for f in (10.0, 12.5, 25.0):
        assert energy_per_cycle(cmos_coeffs, f) == pytest.approx(CMOS[f], rel=0.02)


def test_adiabatic_fit_at_50_mhz():
    assert energy_per_cycle(default_coeffs('adiabatic-mtj'), 50.0) == pytest.approx(0.25, rel=1e-6)


def test_adiabatic_curve_falls_towards_its_optimum(adiabatic_coeffs):
    freqs = np.linspace(5.0, 25.0, 81)
    assert np.all(np.diff(energy_per_cycle(adiabatic_coeffs, freqs)) < 0)
    f_opt = adiabatic_coeffs.optimum_frequency
    assert f_opt == pytest.approx(np.sqrt(adiabatic_coeffs.leakage_coeff_B / adiabatic_coeffs.adiabatic_coeff_A))
    around = energy_per_cycle(adiabatic_coeffs, np.array([0.9 * f_opt, f_opt, 1.1 * f_opt]))
    assert around[1] < around[0] and around[1] < around[2]


def test_two_coefficient_fit_without_constant():
    points = [(5.0, 0.80), (50.0, 0.78)]
    coeffs = calibrate_energy_model(points, fit_constant=False)
    assert coeffs.constant_gamma == 0.0
    for f, e in points:
        assert energy_per_cycle(coeffs, f) == pytest.approx(e, rel=1e-6)


@pytest.mark.parametrize("points, message", [
    ([(5.0, 0.5), (5.0, 0.4), (50.0, 0.25)], "duplicate"),
    ([(5.0, 0.5), (12.5, -0.3), (50.0, 0.25)], "non-negative"),
    ([(5.0, 0.5), (50.0, 0.25)], "at least 3"),
])
def test_calibration_errors(points, message):
    with pytest.raises(ValueError, match=message):
        calibrate_energy_model(points)


def test_model_predict_before_fit():
    with pytest.raises(RuntimeError, match="not fitted"):
        EnergyModel().predict([5.0])


def test_energy_sweep_table():
    df = energy_sweep()
    assert list(df.columns) == ['freq_mhz', 'cmos_pj', 'adiabatic_pj', 'reduction_pct']
    assert len(df) == 5
    expected = 100 * (df['cmos_pj'] - df['adiabatic_pj']) / df['cmos_pj']
    np.testing.assert_allclose(df['reduction_pct'], expected)
    at_25 = df.loc[df['freq_mhz'] == 25.0, 'reduction_pct'].iloc[0]
    assert at_25 >= 60.0


def test_energy_sweep_needs_a_frequency():
    with pytest.raises(ValueError, match="at least one"):
        energy_sweep([])
