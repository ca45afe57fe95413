import pytest

from mtj_device import (
    InvariantViolation,
    MtjParams,
    MtjState,
    ellipse_area_um2,
    mtj_resistance,
    tmr_ratio,
)


def test_resistance_follows_state():
    params = MtjParams()
    assert mtj_resistance(MtjState.PARALLEL, params) == pytest.approx(6.21e3)
    assert mtj_resistance(MtjState.ANTIPARALLEL, params) == pytest.approx(18.64e3)


def test_degenerate_device_rejected():
    with pytest.raises(InvariantViolation, match="r_antiparallel"):
        MtjParams(r_parallel=5e3, r_antiparallel=5e3)
    with pytest.raises(InvariantViolation, match="r_parallel"):
        MtjParams(r_parallel=0.0, r_antiparallel=5e3)


@pytest.mark.parametrize("r_p, r_ap, expected", [
    (6.21e3, 18.64e3, 2.0016),
    (1e3, 1e3, 0.0),
    (1e3, 2e3, 1.0),
])
def test_tmr_ratio(r_p, r_ap, expected):
    assert tmr_ratio(r_p, r_ap) == pytest.approx(expected, abs=1e-4)


def test_tmr_ratio_needs_positive_parallel_resistance():
    with pytest.raises(ValueError, match="r_p"):
        tmr_ratio(0.0, 1e3)


def test_computed_tmr_matches_formula_exactly():
    params = MtjParams()
    assert params.computed_tmr == (params.r_antiparallel - params.r_parallel) / params.r_parallel


def test_state_flip():
    assert MtjState.PARALLEL.flipped() is MtjState.ANTIPARALLEL
    assert MtjState.ANTIPARALLEL.flipped() is MtjState.PARALLEL


def test_area_derived_resistance_disagrees_with_table():
    params = MtjParams()
    assert ellipse_area_um2(40, 40) == pytest.approx(1.2566e-3, rel=1e-4)
    assert params.ra_derived_r_parallel == pytest.approx(3.98e3, rel=1e-3)
    report = params.consistency_report()
    assert report['stated_tmr'] == 1.5
    assert report['computed_tmr'] == pytest.approx(2.0016, abs=1e-4)
    assert report['r_parallel_gap'] == pytest.approx(0.359, abs=1e-3)


def test_scaled_device_keeps_ratio():
    params = MtjParams()
    scaled = params.scaled(18.64e3)
    assert scaled.r_parallel == 18.64e3
    assert scaled.computed_tmr == pytest.approx(params.computed_tmr)
