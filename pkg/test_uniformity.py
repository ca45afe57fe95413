import numpy as np
import pytest

from adiabatic_energy import GateCfg
from trace_lab import Family, family_cfg
from uniformity import EnergyReport, compare_sbox_uniformity, energy_report, ned, nsd, sbox_inputs


def test_ned_examples():
    assert ned([7.1, 102.0]) == pytest.approx(0.9304, abs=1e-4)
    assert ned([33.7, 34.0]) == pytest.approx(0.00882, abs=1e-5)
    assert ned([5.0, 5.0, 5.0]) == 0.0


def test_nsd_example():
    assert nsd([1.0, 3.0]) == pytest.approx(0.5)
    assert nsd([2.0, 2.0]) == 0.0


@pytest.mark.parametrize("metric", [ned, nsd])
def test_invalid_energy_lists(metric):
    with pytest.raises(ValueError, match="empty"):
        metric([])
    with pytest.raises(ValueError, match="non-negative"):
        metric([1.0, -0.5])
    with pytest.raises(ValueError, match="undefined"):
        metric([0.0, 0.0])


def test_metrics_are_scale_invariant():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        e = rng.uniform(0.1, 10.0, size=int(rng.integers(1, 20)))
        c = rng.uniform(1e-3, 1e3)
        assert ned(c * e) == pytest.approx(ned(e), abs=1e-12)
        assert nsd(c * e) == pytest.approx(nsd(e), abs=1e-9)
        assert 0.0 <= ned(e) < 1.0


def test_report_summary_units():
    report = EnergyReport.from_energies([1e-15, 3e-15], label="x")
    row = report.summary()
    assert row['e_min_fj'] == pytest.approx(1.0)
    assert row['e_max_fj'] == pytest.approx(3.0)
    assert row['e_avg_fj'] == pytest.approx(2.0)
    assert row['ned_pct'] == pytest.approx(100 * 2 / 3)


def test_report_of_identical_energies():
    report = EnergyReport.from_energies([0.1] * 7)
    assert report.e_min <= report.e_avg <= report.e_max


def test_input_sets():
    assert sbox_inputs(Family.ADIABATIC_MTJ) == list(range(16))
    assert len(sbox_inputs(Family.CMOS)) == 256


def test_adiabatic_lut_is_nearly_uniform(adiabatic_cfg):
    report = energy_report(adiabatic_cfg)
    assert len(report.energies) == 16
    assert report.ned < 0.01
    assert report.nsd < report.ned


def test_cmos_sbox_is_data_dependent(cmos_cfg):
    report = energy_report(cmos_cfg)
    assert len(report.energies) == 256
    assert report.ned > 0.8


def test_balanced_lut_is_flat(balanced_cfg):
    assert energy_report(balanced_cfg).ned == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("family", ["adiabatic-mtj", "cmos"])
def test_reports_with_ideal_switches(family):
    report = energy_report(family_cfg(family, gate=GateCfg(on_resistance=0.0)))
    assert report.e_min > 0


def test_empty_input_set(cmos_cfg):
    with pytest.raises(ValueError, match="input set is empty"):
        energy_report(cmos_cfg, inputs=[])


def test_comparison_table():
    df = compare_sbox_uniformity()
    assert len(df) == 2
    assert set(df['family']) == {'cmos', 'adiabatic-mtj'}
    adiabatic = df.set_index('family').loc['adiabatic-mtj']
    cmos = df.set_index('family').loc['cmos']
    assert adiabatic['ned_pct'] < cmos['ned_pct']
    assert adiabatic['nsd_pct'] < cmos['nsd_pct']
    assert cmos['ref_ned_pct'] == pytest.approx(93.0)
