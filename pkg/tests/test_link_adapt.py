import csv
import dataclasses
import math

import pytest

from lrwpan_energy.csma import SimConfig, build_contention_table
from lrwpan_energy.link_adapt import (EnergyCurve, ThresholdSet,
                                      compute_thresholds, derived_load,
                                      energy_curve, evaluate_case_study,
                                      packet_size_sweep, what_if_case_study,
                                      write_case_study, write_fig7,
                                      write_fig8, write_fig9)
from lrwpan_energy.params import ParameterSet
from lrwpan_energy.phy import packet_airtime, select_tx_level


@pytest.fixture(scope="module")
def params():
    return ParameterSet().validate()


@pytest.fixture(scope="module")
def table(params):
    # small grid around the deployment's own load; enough trials for the
    # qualitative properties these tests check
    base = SimConfig(nodes=30, payload_bytes=120, load=0.3,
                     superframes=300, seed=11)
    return build_contention_table((0.3, 0.5), (50, 120), base,
                                  params.timing, params.mac)


def _line(tx_level, slope, offset, grid):
    samples = [(x, offset + slope * x, 0.0, 1.0) for x in grid]
    return EnergyCurve(tx_level=tx_level, samples=samples).validate()


GRID = [float(x) for x in range(17)]


def test_curve_samples_must_ascend():
    with pytest.raises(ValueError):
        EnergyCurve(tx_level=0.0, samples=[(2.0, 1, 0, 1), (1.0, 1, 0, 1)]
                    ).validate()


def test_crossing_interpolated_exactly():
    lo = _line(-15.0, 1.0, 1.0, GRID)      # 1 + x
    hi = _line(0.0, 0.5, 5.0, GRID)        # 5 + x/2, crosses at x = 8
    thr = compute_thresholds([hi, lo])     # order must not matter
    assert thr.crossings == [pytest.approx(8.0, abs=1e-12)]
    assert thr.at_edge == [False]
    # top curve minimum is 5, twice that is first exceeded at x = 11
    assert thr.feasibility_limit == pytest.approx(11.0)
    thr.validate(2)


def test_missing_crossing_lands_on_edge():
    lo = _line(-15.0, 1.0, 1.0, GRID)
    hi = _line(0.0, 1.0, 10.0, GRID)       # parallel, never crossed
    thr = compute_thresholds([lo, hi])
    assert thr.crossings == [GRID[-1]]
    assert thr.at_edge == [True]


def test_nonfinite_samples_are_skipped():
    lo = _line(-15.0, 1.0, 1.0, GRID)
    # blank out the bracket that contains the crossing
    samples = [(x, math.inf if x in (7.0, 8.0) else 1.0 + x, 0.0, 1.0)
               for x in GRID]
    holed = EnergyCurve(tx_level=-15.0, samples=samples).validate()
    hi = _line(0.0, 0.5, 5.0, GRID)
    assert compute_thresholds([lo, hi]).at_edge == [False]
    thr = compute_thresholds([holed, hi])
    assert thr.at_edge == [True]
    assert thr.crossings == [GRID[-1]]


def test_three_levels_give_ordered_crossings():
    c1 = _line(-15.0, 1.0, 1.0, GRID)
    c2 = _line(-5.0, 0.5, 3.0, GRID)       # crosses c1 at 4
    c3 = _line(0.0, 0.25, 6.0, GRID)       # crosses c2 at 12
    thr = compute_thresholds([c3, c1, c2])
    assert thr.crossings == [pytest.approx(4.0), pytest.approx(12.0)]
    with pytest.raises(ValueError):
        thr.validate(2)
    with pytest.raises(ValueError):
        ThresholdSet(crossings=[5.0, 3.0], feasibility_limit=16.0,
                     at_edge=[False, False]).validate(3)


def test_threshold_inputs_checked():
    lo = _line(-15.0, 1.0, 1.0, GRID)
    with pytest.raises(ValueError):
        compute_thresholds([lo])
    shifted = _line(0.0, 0.5, 5.0, [x + 0.5 for x in GRID])
    with pytest.raises(ValueError):
        compute_thresholds([lo, shifted])


def test_derived_load_is_aggregate_airtime_fraction(params):
    s = params.scenario
    load = derived_load(s, params.timing, params.mac)
    t_packet = packet_airtime(params.timing, params.mac, s.payload_bytes)
    t_ib = params.timing.t_ib_min * 2 ** s.beacon_order
    assert load == pytest.approx(s.nodes_per_channel * t_packet / t_ib)
    assert load == pytest.approx(0.433, abs=1e-3)


def test_energy_curve_rises_with_pathloss(params, table):
    curve = energy_curve(params.scenario, 0.0, table, params,
                         grid=[55.0, 95.0])
    assert curve.samples[1][1] > curve.samples[0][1]


def test_energy_curve_load_override(params, table):
    scenario = params.scenario
    at_default = energy_curve(scenario, 0.0, table, params, grid=[75.0])
    at_low = energy_curve(scenario, 0.0, table, params, grid=[75.0],
                          load=0.3)
    assert at_low.samples[0][1] != at_default.samples[0][1]


def _rate_for_period(scenario, params):
    # application rate at which the scenario payload is sent exactly once
    # per beacon period, so the sweep's rescaled load equals the derived one
    t_ib = params.timing.t_ib_min * 2 ** scenario.beacon_order
    return 8.0 * scenario.payload_bytes / t_ib


def test_packet_sweep_matches_single_point_evaluation(params, table):
    scenario = dataclasses.replace(
        params.scenario, pathloss_fixed_db=80.0,
        data_rate_bps=_rate_for_period(params.scenario, params))
    points = packet_size_sweep(scenario, [50, 120], params, table)
    for p in points:
        t_packet = packet_airtime(params.timing, params.mac, p.payload_bytes)
        interval = 8.0 * p.payload_bytes / scenario.data_rate_bps
        want = min(1.0, scenario.nodes_per_channel * t_packet / interval)
        assert p.load == pytest.approx(want, rel=1e-12)
    curve = energy_curve(scenario, 0.0, table, params, grid=[80.0])
    assert points[1].energy_per_bit == pytest.approx(curve.samples[0][1],
                                                     rel=1e-9)


def test_packet_sweep_defaults(params, table):
    # no fixed pathloss: evaluated at the midpoint of the bounds, at the
    # highest transmit level
    scenario = dataclasses.replace(
        params.scenario, data_rate_bps=_rate_for_period(params.scenario,
                                                        params))
    lo, hi = scenario.pathloss_bounds()
    points = packet_size_sweep(scenario, [120], params, table)
    curve = energy_curve(scenario, 0.0, table, params,
                         grid=[(lo + hi) / 2.0])
    assert points[0].energy_per_bit == pytest.approx(curve.samples[0][1],
                                                     rel=1e-9)
    weaker = packet_size_sweep(scenario, [120], params, table,
                               tx_level_dbm=-15.0)
    assert weaker[0].energy_per_bit != points[0].energy_per_bit


def test_packet_sweep_rejects_bad_sizes(params, table):
    with pytest.raises(ValueError):
        packet_size_sweep(params.scenario, [], params, table)
    with pytest.raises(ValueError):
        packet_size_sweep(params.scenario, [0], params, table)
    with pytest.raises(ValueError):
        packet_size_sweep(params.scenario, [124], params, table)


def test_selected_level_is_cheapest_away_from_crossings(params, table):
    levels = params.radio.levels_ascending()
    curves = [energy_curve(params.scenario, lvl, table, params)
              for lvl in levels]
    thr = compute_thresholds(curves)
    assert thr.at_edge == [False] * (len(levels) - 1)
    grid = [s[0] for s in curves[0].samples]
    for k, pl in enumerate(grid):
        if min(abs(pl - x) for x in thr.crossings) < 0.5:
            continue
        best = min(c.samples[k][1] for c in curves)
        if not math.isfinite(best):
            continue    # dead zone past feasibility, no meaningful choice
        chosen = select_tx_level(params.radio, thr.crossings, pl)
        cheapest = min(curves, key=lambda c: c.samples[k][1]).tx_level
        assert chosen == cheapest, pl


def test_case_study_report_properties(params, table):
    res = evaluate_case_study(params.scenario, params, table)
    assert res.derived_load == pytest.approx(0.433, abs=1e-3)
    assert res.adapted.p_avg <= res.baseline.p_avg
    assert 0.0 < res.savings < 1.0
    assert 0.0 < res.baseline.pr_fail < 1.0
    assert res.baseline.delay > 0.0
    for report in (res.baseline, res.adapted):
        assert sum(report.breakdown.values()) == pytest.approx(1.0)
        assert sum(report.time_breakdown.values()) == pytest.approx(1.0)
    pls = [row[0] for row in res.per_pathloss]
    assert pls == sorted(pls)
    lvls = [row[1] for row in res.per_pathloss]
    assert all(b >= a for a, b in zip(lvls, lvls[1:]))
    assert lvls[0] == min(params.radio.levels_ascending())
    assert lvls[-1] == 0.0


def test_case_study_what_if_directions(params, table):
    ref, mod, delta = what_if_case_study(params.scenario, params, table,
                                         transition_scale=0.5)
    assert delta > 0.0
    assert mod.baseline.p_avg < ref.baseline.p_avg
    _, _, d_sense = what_if_case_study(params.scenario, params, table,
                                       sense_power=5e-3)
    assert d_sense > 0.0


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_curve_csv_round_trip(tmp_path, params, table):
    curves = [energy_curve(params.scenario, lvl, table, params,
                           grid=[60.0, 80.0])
              for lvl in (-15.0, 0.0)]
    path = tmp_path / "fig7.csv"
    write_fig7([curves], [0.43], path)
    rows = _read_csv(path)
    assert len(rows) == 4
    assert float(rows[0]["pathloss"]) == 60.0
    assert float(rows[0]["level"]) == -15.0
    assert float(rows[0]["load"]) == 0.43
    assert float(rows[0]["energy_per_bit"]) == curves[0].samples[0][1]


def test_sweep_csv_round_trip(tmp_path, params, table):
    scenario = dataclasses.replace(
        params.scenario, data_rate_bps=_rate_for_period(params.scenario,
                                                        params))
    points = packet_size_sweep(scenario, [50, 120], params, table)
    path = tmp_path / "fig8.csv"
    write_fig8(points, path)
    rows = _read_csv(path)
    assert [int(r["payload"]) for r in rows] == [50, 120]
    assert float(rows[0]["energy_per_bit"]) == points[0].energy_per_bit


def test_breakdown_and_case_csv(tmp_path, params, table):
    res = evaluate_case_study(params.scenario, params, table)
    p9 = tmp_path / "fig9.csv"
    write_fig9(res.baseline, p9)
    rows = _read_csv(p9)
    assert {r["phase"] for r in rows} == set(res.baseline.breakdown)
    total = sum(float(r["energy_fraction"]) for r in rows)
    assert total == pytest.approx(1.0)
    pc = tmp_path / "case_study.csv"
    write_case_study(res, pc)
    rows = _read_csv(pc)
    sections = {r["section"] for r in rows}
    assert {"baseline", "adapted", "derived_load", "savings",
            "sample"} <= sections
    savings_row = next(r for r in rows if r["section"] == "savings")
    assert float(savings_row["p_avg"]) == res.savings
