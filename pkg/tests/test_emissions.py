import warnings
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sheaffuse.emissions import (
    DailySeries,
    DegenerateSeriesWarning,
    EmissionFactorTable,
    VehicleCounts,
    base_pattern,
    concentration,
    emitted_mass,
    estimate_lag,
    guidebook_array,
    guidebook_map,
    lag_correlations,
    load_emission_factors,
    shift,
    total_pm25,
)

EF = EmissionFactorTable()


def vc(two, four, vkt=1.0):
    return VehicleCounts({"two_wheeled": two, "four_wheeled": four}, vkt)


def test_default_factors():
    assert EF.entries == {"two_wheeled": 0.047, "four_wheeled": 0.117}


def test_bundled_factor_file_matches_defaults(tmp_path):
    path = resources.files("sheaffuse").joinpath("data").joinpath("emission_factors.json")
    assert load_emission_factors(str(path)) == EF
    EF.dump(tmp_path / "ef.json")
    assert EmissionFactorTable.load(tmp_path / "ef.json") == EF


def test_factor_table_validation():
    with pytest.raises(ValueError):
        EmissionFactorTable({"bus": 0.0})
    with pytest.raises(ValueError):
        EmissionFactorTable({})


def test_emitted_mass_examples():
    m = emitted_mass(vc(200, 30))
    assert m["two_wheeled"] == pytest.approx(9.4)
    assert m["four_wheeled"] == pytest.approx(3.51)
    assert sum(m.values()) == pytest.approx(12.91, abs=1e-12)
    assert sum(emitted_mass(vc(0, 0)).values()) == 0.0
    assert sum(emitted_mass(VehicleCounts({"two_wheeled": 100}, 2.0)).values()) == pytest.approx(9.4)


def test_emitted_mass_unknown_type():
    with pytest.raises(KeyError):
        emitted_mass(VehicleCounts({"truck": 3}))


def test_counts_validation():
    with pytest.raises(ValueError):
        vc(-1, 0)
    with pytest.raises(ValueError):
        vc(1, 0, vkt=0)


def test_concentration_examples():
    assert concentration(12.91, 1.0) == pytest.approx(0.01291)
    assert concentration(0.0, 1.0) == 0.0
    assert concentration(1e9, 1.0) == pytest.approx(1e6)
    with pytest.raises(ValueError):
        concentration(1.0, 0.0)


def test_guidebook_examples():
    assert guidebook_map(vc(200, 30)) == pytest.approx(12.91, abs=1e-12)
    assert guidebook_map(vc(0, 0)) == 0.0
    assert guidebook_map(vc(0, 0), mode="concentration") == 0.0
    assert guidebook_map(vc(50, 10)) == pytest.approx(3.52)
    assert guidebook_map(vc(200, 30), mode="concentration") == pytest.approx(0.01291)
    with pytest.raises(ValueError):
        guidebook_map(vc(1, 1), mode="volume")


def test_guidebook_array_matches_scalar():
    rows = np.array([[200, 30], [50, 10], [0, 0]], dtype=float)
    assert guidebook_array(rows) == pytest.approx([guidebook_map(vc(*r)) for r in rows])


_count = st.floats(0, 1e4, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(a=st.tuples(_count, _count), b=st.tuples(_count, _count), vkt=st.floats(0.01, 100))
def test_mass_linear_in_counts_and_vkt(a, b, vkt):
    total = lambda c: sum(emitted_mass(c).values())
    summed = vc(a[0] + b[0], a[1] + b[1], vkt)
    assert total(summed) == pytest.approx(total(vc(*a, vkt)) + total(vc(*b, vkt)), rel=1e-9, abs=1e-9)
    assert total(vc(*a, vkt)) == pytest.approx(vkt * total(vc(*a)), rel=1e-9, abs=1e-9)
    assert guidebook_map(vc(*a)) == pytest.approx(oracles.gb(a), rel=1e-12, abs=1e-12)


def test_daily_series_validation():
    with pytest.raises(ValueError):
        DailySeries(np.zeros(23))
    with pytest.raises(ValueError):
        DailySeries(np.r_[np.zeros(23), np.nan])
    assert len(DailySeries(np.ones(24))) == 24


def sinus(lag=0):
    h = np.arange(24)
    p_v = 30 + 10 * np.sin(2 * np.pi * h / 24)
    return p_v, np.roll(p_v, lag)


def test_lag_examples():
    p_v, p_s = sinus(3)
    assert estimate_lag(p_v, p_s) == 3
    assert estimate_lag(p_v, p_v) == 0
    rng = np.random.default_rng(0)
    assert estimate_lag(p_v, p_s + rng.normal(0, 0.5, 24)) == 3


def test_lag_independent_of_offset():
    p_v, p_s = sinus(5)
    assert estimate_lag(p_v, p_s + 1000.0) == 5


def test_lag_ties_go_to_smaller_lag():
    p_v = np.tile([1.0, 0.0], 12)
    assert estimate_lag(p_v, p_v, 4) == 0  # lags 0, 2, 4 all correlate perfectly


def test_lag_degenerate_series_flagged():
    with pytest.warns(DegenerateSeriesWarning):
        assert estimate_lag(np.full(24, 5.0), sinus()[0]) == 0


def test_lag_bounds():
    p_v, p_s = sinus()
    with pytest.raises(ValueError):
        lag_correlations(p_v, p_s, 0)
    with pytest.raises(ValueError):
        lag_correlations(p_v, p_s, 24)


def test_truncated_boundary_uses_overlap():
    p_v, _ = sinus()
    s = shift(p_v, 2, "truncated")
    assert np.isnan(s[:2]).all() and np.array_equal(s[2:], p_v[:-2])
    p_s = np.r_[np.zeros(4), p_v[:-4]]
    assert estimate_lag(p_v, p_s, 12, "truncated") == 4


def test_base_pattern_examples():
    p_v, _ = sinus()
    assert np.allclose(np.asarray(base_pattern(p_v, p_v, 0)), 0.0)
    p_s = sinus(1)[1] + 7
    assert np.array_equal(np.asarray(base_pattern(p_s, np.zeros(24), 0)), p_s)


def test_base_pattern_lag_two_by_hand():
    p_v = np.arange(24, dtype=float)
    p_s = np.full(24, 100.0)
    expected = [100.0 - p_v[(h - 2) % 24] for h in range(24)]
    assert np.asarray(base_pattern(p_s, p_v, 2)).tolist() == expected


def test_total_pm25_examples():
    base = np.arange(24, dtype=float) * 10
    p_v = np.arange(24, dtype=float)
    assert [total_pm25(base, p_v, 0, h) for h in range(24)] == (base + p_v).tolist()
    assert [total_pm25(np.zeros(24), p_v, 3, h) for h in range(24)] == np.roll(p_v, 3).tolist()
    assert total_pm25(base, p_v, 3, 1) == base[1] + p_v[22]
    with pytest.raises(ValueError):
        total_pm25(base, p_v, 0, 24)


@settings(max_examples=200, deadline=None)
@given(p_v=st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=24, max_size=24),
       p_s=st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=24, max_size=24),
       lag=st.integers(0, 12))
def test_base_plus_shift_reconstructs_sensor(p_v, p_s, lag):
    base = base_pattern(p_s, p_v, lag)
    assert np.allclose(np.asarray(base) + shift(p_v, lag), p_s, rtol=0, atol=1e-9)


def test_noiseless_lag_recovered_for_every_lag():
    for lag in range(13):
        assert estimate_lag(*sinus(lag), 12) == lag


def test_no_warning_for_regular_series():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        estimate_lag(*sinus(2))
