"""Transmit-power and packet-size adaptation on top of the energy model.

Produces energy-versus-pathloss curves per transmit level, extracts the
switching thresholds where adjacent curves cross, sweeps payload size at a
constant application data rate, and runs the reference deployment scenario
end to end.

The scenario evaluation reports two configurations. The baseline keeps
every node at the highest transmit level (the plain deployment the
headline power, failure and delay figures describe). The adapted
configuration picks the cheapest sufficient level per pathloss via the
thresholds (channel inversion) and is what the savings figure compares
against the baseline. Both are averaged over the scenario's pathloss
distribution by plain quadrature on an equally spaced grid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .csma import lookup_contention
from .energy import LinkConditions, evaluate_link, inter_beacon_period
from .phy import packet_airtime, select_tx_level

# pathloss grid for curves and thresholds: fine enough to place crossings
# well inside the 1 dB accuracy of interest
CURVE_GRID_LOW_DB = 40.0
CURVE_GRID_HIGH_DB = 100.0
CURVE_GRID_STEP_DB = 0.25

# minimum quadrature points for scenario averages over uniform pathloss
MIN_QUADRATURE_POINTS = 256


@dataclass
class EnergyCurve:
    """Energy per bit versus pathloss at one transmit level."""

    tx_level: float
    samples: list   # (pathloss_db, energy_per_bit, pr_fail, delay)

    def validate(self):
        pls = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(pls, pls[1:])):
            raise ValueError("curve pathloss samples must be ascending")
        return self


@dataclass
class ThresholdSet:
    """Level-switching pathlosses from adjacent-curve crossings."""

    crossings: list        # dB, ascending, one per adjacent level pair
    feasibility_limit: float   # dB, beyond this even max power is poor
    at_edge: list          # flags: crossing not found, placed at grid edge

    def validate(self, n_levels):
        if len(self.crossings) != n_levels - 1:
            raise ValueError("need exactly one crossing per adjacent pair")
        if any(b < a for a, b in zip(self.crossings, self.crossings[1:])):
            raise ValueError("crossings must be ascending")
        return self


def derived_load(scenario, timing, mac):
    """Aggregate airtime fraction: every node sends once per beacon period."""
    t_packet = packet_airtime(timing, mac, scenario.payload_bytes)
    t_ib = inter_beacon_period(timing, scenario.beacon_order)
    return scenario.nodes_per_channel * t_packet / t_ib


def _grid(lo=CURVE_GRID_LOW_DB, hi=CURVE_GRID_HIGH_DB, step=CURVE_GRID_STEP_DB):
    n = int(round((hi - lo) / step))
    return [lo + k * step for k in range(n + 1)]


def _conditions(params, stats, pathloss_db, tx_level_dbm, payload_bytes=None):
    s = params.scenario
    return LinkConditions(
        profile=params.radio, timing=params.timing, mac=params.mac,
        ber=params.ber, stats=stats,
        payload_bytes=payload_bytes if payload_bytes is not None else s.payload_bytes,
        beacon_order=s.beacon_order, pathloss_db=pathloss_db,
        tx_level_dbm=tx_level_dbm)


def energy_curve(scenario, tx_level, table, params, grid=None, load=None):
    """Energy per bit over the pathloss range at one fixed transmit level.

    Contention statistics come from the table at the scenario's derived
    load (or an explicit ``load`` override); they do not depend on
    pathloss, so one lookup serves the curve.
    """
    if load is None:
        load = derived_load(scenario, params.timing, params.mac)
    stats = lookup_contention(table, load, scenario.payload_bytes)
    samples = []
    for pl in (grid if grid is not None else _grid()):
        r = evaluate_link(_conditions(params, stats, pl, tx_level))
        samples.append((pl, r.energy_per_bit, r.pr_fail, r.delay))
    return EnergyCurve(tx_level=tx_level, samples=samples).validate()


def compute_thresholds(curves, feasibility_ratio=2.0):
    """Crossing pathloss for each adjacent transmit-level pair.

    Curves must share one pathloss grid and come one per level. Below its
    crossing the weaker level is cheaper; past it the error-driven retries
    make the stronger level win. A pair with no sign change gets its
    threshold at the grid edge and a raised flag. The feasibility limit is
    where the strongest level's energy exceeds ``feasibility_ratio`` times
    its own minimum: past that, no power setting keeps the link efficient.
    """
    if len(curves) < 2:
        raise ValueError("need at least two curves")
    curves = sorted(curves, key=lambda c: c.tx_level)
    grid = [s[0] for s in curves[0].samples]
    for c in curves[1:]:
        if [s[0] for s in c.samples] != grid:
            raise ValueError("curves must share one pathloss grid")

    crossings, at_edge = [], []
    for lo, hi in zip(curves, curves[1:]):
        x = None
        for k in range(len(grid) - 1):
            a = lo.samples[k][1] - hi.samples[k][1]
            b = lo.samples[k + 1][1] - hi.samples[k + 1][1]
            if not (math.isfinite(a) and math.isfinite(b)):
                continue
            if a <= 0.0 < b or a < 0.0 <= b:
                x = grid[k] + (grid[k + 1] - grid[k]) * (-a) / (b - a)
                break
        if x is None:
            crossings.append(grid[-1])
            at_edge.append(True)
        else:
            crossings.append(x)
            at_edge.append(False)

    top = curves[-1]
    finite = [e for _, e, _, _ in top.samples if math.isfinite(e)]
    if not finite:
        raise ValueError("max-level curve has no feasible samples")
    cap = feasibility_ratio * min(finite)
    feasibility_limit = grid[-1]
    for pl, e, _, _ in top.samples:
        if not math.isfinite(e) or e > cap:
            feasibility_limit = pl
            break
    return ThresholdSet(crossings=crossings, feasibility_limit=feasibility_limit,
                        at_edge=at_edge).validate(len(curves))


@dataclass
class SweepPoint:
    payload_bytes: int
    load: float
    energy_per_bit: float


def packet_size_sweep(scenario, sizes, params, table, tx_level_dbm=None):
    """Energy per bit across payload sizes at a constant application rate.

    Each node generates ``data_rate_bps`` of payload continuously; a size-L
    packet is therefore sent every 8L / rate seconds, and the channel load
    rescales as nodes * airtime(L) / interval(L). Larger packets amortize
    the fixed MAC overhead over more bits, which is the effect the sweep
    exposes, so points are evaluated in the error-free regime: at the
    scenario's fixed pathloss when one is set, else at the midpoint of its
    pathloss bounds. (Averaging over the full pathloss distribution would
    fold the near-limit retry blowup, which grows with packet length, into
    every point and mask the overhead trend.)
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    for size in sizes:
        if not 1 <= size <= 123:
            raise ValueError(f"payload size out of [1, 123]: {size}")
    if tx_level_dbm is None:
        tx_level_dbm = max(params.radio.levels_ascending())
    if scenario.pathloss_fixed_db is not None:
        pl = scenario.pathloss_fixed_db
    else:
        lo, hi = scenario.pathloss_bounds()
        pl = (lo + hi) / 2.0
    points = []
    for size in sizes:
        t_packet = packet_airtime(params.timing, params.mac, size)
        interval = 8.0 * size / scenario.data_rate_bps
        load = min(1.0, scenario.nodes_per_channel * t_packet / interval)
        stats = lookup_contention(table, load, size)
        r = evaluate_link(_conditions(params, stats, pl, tx_level_dbm,
                                      payload_bytes=size))
        points.append(SweepPoint(payload_bytes=size, load=load,
                                 energy_per_bit=r.energy_per_bit))
    return points


@dataclass
class ScenarioReport:
    """Pathloss-averaged link metrics for one configuration."""

    p_avg: float
    pr_fail: float
    delay: float
    energy_per_bit: float
    breakdown: dict
    time_breakdown: dict


@dataclass
class CaseStudyResult:
    derived_load: float
    thresholds: ThresholdSet
    baseline: ScenarioReport      # all nodes at max level
    adapted: ScenarioReport       # channel inversion via thresholds
    savings: float                # best-case adapted vs baseline, per bit
    per_pathloss: list            # (pl, level, p_avg, pr_fail, delay, e_bit)


def _average_reports(pairs):
    """Plain quadrature average of per-pathloss reports.

    Breakdown fractions are combined weighted by each point's energy so
    the averaged fractions still describe shares of the total energy
    (likewise time fractions by active time).
    """
    n = len(pairs)
    p = sum(r.p_avg for r in pairs) / n
    fail = sum(r.pr_fail for r in pairs) / n
    delay = sum(r.delay for r in pairs) / n
    ebit = sum(r.energy_per_bit for r in pairs) / n
    br, tb = {}, {}
    wsum = twsum = 0.0
    for r in pairs:
        t_act = r.occupancy.t_idle + r.occupancy.t_tx + r.occupancy.t_rx
        for k, f in r.breakdown.items():
            br[k] = br.get(k, 0.0) + f * r.p_avg
        for k, f in r.time_breakdown.items():
            tb[k] = tb.get(k, 0.0) + f * t_act
        wsum += r.p_avg
        twsum += t_act
    br = {k: v / wsum for k, v in br.items()}
    tb = {k: v / twsum for k, v in tb.items()}
    return ScenarioReport(p_avg=p, pr_fail=fail, delay=delay,
                          energy_per_bit=ebit, breakdown=br, time_breakdown=tb)


def evaluate_case_study(scenario, params, table, transition_scale=1.0,
                        sense_power=None):
    """Full deployment evaluation over the scenario's pathloss distribution.

    Builds the per-level curves, extracts thresholds, then walks an
    equally spaced pathloss grid twice: once with every node at maximum
    power (baseline) and once with the threshold-selected level per
    pathloss (adapted). The savings figure is the best-case per-bit
    saving of adaptation over the baseline across the range ("up to"
    semantics; it peaks where the weakest level suffices).
    """
    load = derived_load(scenario, params.timing, params.mac)
    stats = lookup_contention(table, load, scenario.payload_bytes)
    levels = params.radio.levels_ascending()
    curves = [energy_curve(scenario, lvl, table, params) for lvl in levels]
    thresholds = compute_thresholds(curves)

    lo, hi = scenario.pathloss_bounds()
    if scenario.pathloss_fixed_db is not None:
        grid = [scenario.pathloss_fixed_db]
    else:
        n = max(MIN_QUADRATURE_POINTS, int(round((hi - lo) / 0.125)) + 1)
        grid = [lo + (hi - lo) * k / (n - 1) for k in range(n)]

    max_level = levels[-1]
    base_pts, adapt_pts, rows = [], [], []
    best_saving = 0.0
    for pl in grid:
        rb = evaluate_link(_conditions(params, stats, pl, max_level),
                           transition_scale=transition_scale,
                           sense_power=sense_power)
        lvl = select_tx_level(params.radio, thresholds.crossings, pl)
        ra = rb if lvl == max_level else evaluate_link(
            _conditions(params, stats, pl, lvl),
            transition_scale=transition_scale, sense_power=sense_power)
        base_pts.append(rb)
        adapt_pts.append(ra)
        rows.append((pl, lvl, ra.p_avg, ra.pr_fail, ra.delay,
                     ra.energy_per_bit))
        if math.isfinite(ra.energy_per_bit) and math.isfinite(rb.energy_per_bit):
            best_saving = max(best_saving,
                              1.0 - ra.energy_per_bit / rb.energy_per_bit)

    return CaseStudyResult(
        derived_load=load,
        thresholds=thresholds,
        baseline=_average_reports(base_pts),
        adapted=_average_reports(adapt_pts),
        savings=best_saving,
        per_pathloss=rows,
    )


def what_if_case_study(scenario, params, table, transition_scale=1.0,
                       sense_power=None):
    """Scenario-level hardware what-if on the baseline average power."""
    ref = evaluate_case_study(scenario, params, table)
    mod = evaluate_case_study(scenario, params, table,
                              transition_scale=transition_scale,
                              sense_power=sense_power)
    delta = (ref.baseline.p_avg - mod.baseline.p_avg) / ref.baseline.p_avg
    return ref, mod, delta


def write_fig7(curves, loads, path):
    """Energy-vs-pathloss curves, one row per (load tag, level, sample)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pathloss", "level", "energy_per_bit", "load"])
        for load, curve_set in zip(loads, curves):
            for c in curve_set:
                for pl, e, _, _ in c.samples:
                    w.writerow([repr(pl), repr(c.tx_level), repr(e), repr(load)])


def write_fig8(points, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["payload", "load", "energy_per_bit"])
        for p in points:
            w.writerow([p.payload_bytes, repr(p.load), repr(p.energy_per_bit)])


def write_fig9(report, path):
    """Per-phase energy and time shares of one ScenarioReport."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phase", "energy_fraction", "time_fraction"])
        for phase in sorted(report.breakdown):
            w.writerow([phase, repr(report.breakdown[phase]),
                        repr(report.time_breakdown.get(phase, 0.0))])


def write_case_study(result, path):
    """Summary block then per-pathloss rows; all full precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["section", "pathloss", "level", "p_avg", "pr_fail",
                    "delay", "energy_per_bit"])
        for name, rep in (("baseline", result.baseline),
                          ("adapted", result.adapted)):
            w.writerow([name, "", "", repr(rep.p_avg), repr(rep.pr_fail),
                        repr(rep.delay), repr(rep.energy_per_bit)])
        w.writerow(["derived_load", "", "", repr(result.derived_load), "", "", ""])
        w.writerow(["savings", "", "", repr(result.savings), "", "", ""])
        for pl, lvl, p, pf, dly, e in result.per_pathloss:
            w.writerow(["sample", repr(pl), repr(lvl), repr(p), repr(pf),
                        repr(dly), repr(e)])
