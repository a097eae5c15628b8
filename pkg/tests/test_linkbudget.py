"""Path loss, link margins, MCS selection and station placement."""

import math

import pytest

from ahpower.exceptions import UnreachableStationError
from ahpower.linkbudget import (
    StationPlacement, export_placements_csv, free_space_loss, link_margin,
    max_distance, path_loss, place_stations, select_mcs, thermal_noise_dbm,
)
from ahpower.scenarios import (
    DEFAULT_TX_POWER_DBM, FADE_MARGIN_DB, PhyProfile, builtin_scenario,
)

from test_scenarios import make_scenario

INDOOR = PhyProfile(fade_margin_db=FADE_MARGIN_DB["indoor"], p_tx_dbm=0.0)
OUTDOOR = PhyProfile(fade_margin_db=FADE_MARGIN_DB["outdoor"], p_tx_dbm=30.0)


class TestPathLoss:
    def test_free_space_at_breakpoint(self):
        # 20*log10(4*pi*5*9e8 / c) evaluated by hand
        expected = 20 * math.log10(4 * math.pi * 5 * 900e6 / 299792458.0)
        assert path_loss(5.0, "indoor", INDOOR) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(45.512, abs=5e-4)

    def test_outdoor_formula(self):
        assert path_loss(10.0, "outdoor", OUTDOOR) == pytest.approx(60.9, rel=1e-12)

    def test_indoor_slope_change(self):
        base = free_space_loss(5.0, 900e6)
        assert path_loss(50.0, "indoor", INDOOR) == pytest.approx(
            base + 35.0, rel=1e-12)  # one decade past the breakpoint

    @pytest.mark.parametrize("env", ["indoor", "outdoor"])
    def test_monotone_in_distance(self, env):
        phy = INDOOR if env == "indoor" else OUTDOOR
        ds = [0.5, 1, 2, 5, 5.001, 10, 50, 200, 700, 2000]
        losses = [path_loss(d, env, phy) for d in ds]
        assert all(b >= a for a, b in zip(losses, losses[1:]))

    def test_domain_error(self):
        with pytest.raises(ValueError):
            path_loss(0.0, "indoor", INDOOR)
        with pytest.raises(ValueError):
            path_loss(-3.0, "outdoor", OUTDOOR)

    def test_thermal_noise_floor(self):
        # kT at 293 K is -173.93 dBm/Hz; +60 dB for 1 MHz
        assert thermal_noise_dbm(1e6) == pytest.approx(-113.930, abs=5e-3)


class TestLinkMargin:
    def test_margin_decreases_with_distance(self):
        mcs = INDOOR.mcs_table[0]
        margins = [link_margin(d, mcs, "indoor", INDOOR) for d in (1, 5, 20, 100)]
        assert all(b < a for a, b in zip(margins, margins[1:]))

    def test_margin_decreases_with_required_ebn0(self):
        for a, b in zip(INDOOR.mcs_table, INDOOR.mcs_table[1:]):
            assert link_margin(30.0, b, "indoor", INDOOR) < \
                link_margin(30.0, a, "indoor", INDOOR)

    def test_robust_mode_reaches_farthest(self):
        lo = max_distance(OUTDOOR.mcs_table[0], "outdoor", OUTDOOR)
        hi = max_distance(OUTDOOR.mcs_table[-1], "outdoor", OUTDOOR)
        assert lo > hi

    def test_margin_exact_form(self):
        # received power minus (noise floor + rate adjustment + required Eb/N0)
        mcs = OUTDOOR.mcs_table[3]
        d = 123.0
        prx = (OUTDOOR.p_tx_dbm + OUTDOOR.g_tx_dbi + OUTDOOR.g_rx_dbi
               - path_loss(d, "outdoor", OUTDOOR) - OUTDOOR.fade_margin_db)
        expected = (prx - thermal_noise_dbm(OUTDOOR.bandwidth)
                    - OUTDOOR.noise_figure_db
                    - 10 * math.log10(mcs.data_rate / OUTDOOR.bandwidth)
                    - mcs.ebn0_db)
        assert link_margin(d, mcs, "outdoor", OUTDOOR) == pytest.approx(expected, rel=1e-12)


class TestSelection:
    def test_close_in_gets_top_mode(self):
        assert select_mcs(1.0, "indoor", INDOOR) is INDOOR.mcs_table[-1]

    def test_far_out_gets_base_mode(self):
        d = max_distance(OUTDOOR.mcs_table[0], "outdoor", OUTDOOR) * 0.999
        assert select_mcs(d, "outdoor", OUTDOOR).data_rate == 300e3

    def test_rate_staircase_non_increasing(self):
        rates = [select_mcs(d, "outdoor", OUTDOOR).data_rate
                 for d in [1, 10, 50, 100, 150, 200, 300, 400, 500, 600, 700]]
        assert all(b <= a for a, b in zip(rates, rates[1:]))

    def test_budget_consistency(self):
        # the chosen mode closes; the next faster one does not
        for d in (5.0, 60.0, 140.0, 300.0, 550.0, 700.0):
            mcs = select_mcs(d, "outdoor", OUTDOOR)
            assert link_margin(d, mcs, "outdoor", OUTDOOR) >= 0
            idx = OUTDOOR.mcs_table.index(mcs)
            if idx + 1 < len(OUTDOOR.mcs_table):
                nxt = OUTDOOR.mcs_table[idx + 1]
                assert link_margin(d, nxt, "outdoor", OUTDOOR) < 0

    def test_unreachable_raises(self):
        with pytest.raises(UnreachableStationError, match="no MCS"):
            select_mcs(5000.0, "outdoor", OUTDOOR)


class TestPlacement:
    def test_deterministic_given_seed(self):
        s = builtin_scenario("animal_monitoring")
        assert place_stations(s, seed=5) == place_stations(s, seed=5)
        assert place_stations(s, seed=5) != place_stations(s, seed=6)

    def test_distances_within_half_diagonal(self):
        s = builtin_scenario("industrial_automation")
        bound = s.area_side * math.sqrt(2) / 2 + 1e-9
        assert all(p.distance <= bound for p in place_stations(s))

    def test_smart_metering_all_top_rate(self):
        s = builtin_scenario("smart_metering")
        top = s.phy.mcs_table[-1].data_rate
        assert all(p.assigned_rate == top for p in place_stations(s))

    def test_outdoor_presets_fully_covered(self):
        for name in ("agricultural_monitoring", "animal_monitoring"):
            place_stations(builtin_scenario(name))  # must not raise

    def test_unreachable_station_reported_with_distance(self):
        s = make_scenario(environment="outdoor", area_side=5000.0,
                          phy=PhyProfile(fade_margin_db=FADE_MARGIN_DB["outdoor"],
                                         p_tx_dbm=DEFAULT_TX_POWER_DBM["outdoor"]))
        with pytest.raises(UnreachableStationError, match=r"station \d+ at"):
            place_stations(s, seed=0)

    def test_csv_export(self, tmp_path):
        s = builtin_scenario("smart_metering")
        path = tmp_path / "placements.csv"
        export_placements_csv(place_stations(s), path)
        lines = path.read_text().strip().splitlines()
        assert lines[0].startswith("station_id,")
        assert len(lines) == 1 + s.n_sta


def test_placement_is_plain_data():
    p = StationPlacement(0, 1.0, 2.0, math.hypot(1, 2), INDOOR.mcs_table[0])
    assert p.assigned_rate == 300e3
