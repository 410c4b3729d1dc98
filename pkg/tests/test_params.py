import os

import pytest

from lrwpan_energy.params import (
    ConfigError, MacTiming, ParameterSet, RadioProfile, Scenario,
    apply_overrides, load_config, save_config)


def test_defaults_validate():
    ps = ParameterSet().validate()
    assert ps.scenario.nodes_per_channel == 100
    assert ps.scenario.payload_bytes == 120
    assert ps.scenario.beacon_order == 6
    assert ps.mac.n_max == 5
    assert ps.timing.t_slot == pytest.approx(20 * ps.timing.t_symbol)


def test_tx_table_descending_and_lookup():
    radio = RadioProfile()
    radio.validate()
    dbms = [dbm for dbm, _ in radio.p_tx_table]
    assert dbms == sorted(dbms, reverse=True)
    assert radio.p_tx(0.0) > radio.p_tx(-15.0) > 0
    assert radio.levels_ascending()[0] == -15.0
    assert radio.levels_ascending()[-1] == 0.0
    with pytest.raises(ConfigError) as err:
        radio.p_tx(-2.0)
    assert "p_tx_table" in str(err.value)


def test_validation_rejects_bad_values():
    bad = RadioProfile(p_rx=-1.0)
    with pytest.raises(ConfigError) as err:
        bad.validate()
    assert err.value.key == "radio.p_rx"

    # unordered transmit table
    bad = RadioProfile(p_tx_table=[(-5.0, 1e-3), (0.0, 2e-3)])
    with pytest.raises(ConfigError):
        bad.validate()

    # slot not on the symbol clock
    bad = MacTiming(t_slot=300e-6)
    with pytest.raises(ConfigError) as err:
        bad.validate()
    assert err.value.key == "mac.t_slot"

    with pytest.raises(ConfigError):
        Scenario(beacon_order=16).validate()
    with pytest.raises(ConfigError):
        Scenario(pathloss_low_db=90.0, pathloss_high_db=60.0).validate()


def test_pathloss_bounds_both_forms():
    sc = Scenario()
    assert sc.pathloss_bounds() == (55.0, 95.0)
    sc = Scenario(pathloss_fixed_db=80.0, pathloss_low_db=55.0,
                  pathloss_high_db=95.0)
    assert sc.pathloss_bounds() == (80.0, 80.0)


def test_load_config_defaults_and_overrides(tmp_path):
    ps = load_config(None, ["scenario.payload_bytes=50", "mac.min_be=4"])
    assert ps.scenario.payload_bytes == 50
    assert ps.mac.min_be == 4
    # timing fields resolve through the same section prefix
    ps = load_config(None, ["mac.t_ack_max=0.001"])
    assert ps.timing.t_ack_max == 0.001


def test_load_config_file(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("# comment\nscenario.nodes_per_channel = 10\n"
                   "radio.p_rx = 0.05  # trailing comment\n")
    ps = load_config(str(cfg))
    assert ps.scenario.nodes_per_channel == 10
    assert ps.radio.p_rx == 0.05


def test_config_errors_name_the_key(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(None, ["radio.no_such_field=1"])
    assert err.value.key == "radio.no_such_field"
    with pytest.raises(ConfigError):
        load_config(None, ["bogus_section.x=1"])
    with pytest.raises(ConfigError):
        load_config(None, ["radio.p_rx=not_a_number"])
    with pytest.raises(ConfigError):
        load_config(None, ["missing_equals"])
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just some text\n")
    with pytest.raises(ConfigError):
        load_config(str(cfg))


def test_none_clears_fixed_pathloss():
    ps = load_config(None, ["scenario.pathloss_fixed_db=80"])
    assert ps.scenario.pathloss_fixed_db == 80.0
    ps = apply_overrides(ps, ["scenario.pathloss_fixed_db=none"])
    assert ps.scenario.pathloss_fixed_db is None


def test_apply_overrides_copies():
    ps = ParameterSet().validate()
    out = apply_overrides(ps, ["radio.p_rx=0.01",
                               "radio.p_tx_table=0:0.02, -5:0.01"])
    assert out.radio.p_rx == 0.01
    assert out.radio.p_tx_table == [(0.0, 0.02), (-5.0, 0.01)]
    # source untouched
    assert ps.radio.p_rx == 0.06
    assert len(ps.radio.p_tx_table) == 8


def test_save_load_round_trip(tmp_path):
    ps = load_config(None, ["scenario.payload_bytes=77",
                            "radio.p_idle=0.000123",
                            "scenario.pathloss_fixed_db=none"])
    path = tmp_path / "round.cfg"
    save_config(ps, str(path))
    back = load_config(str(path))
    assert back == ps


def test_bundled_case_study_config_matches_defaults():
    here = os.path.dirname(os.path.abspath(__file__))
    path = os.path.join(here, os.pardir, "examples", "case_study.cfg")
    ps = load_config(path)
    assert ps == ParameterSet().validate()
