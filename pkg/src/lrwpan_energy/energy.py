"""Closed-form link energy model.

Takes the four contention statistics plus the radio and protocol constants
and produces state occupancy per inter-beacon period, average node power,
transmission failure probability, expected delay and energy per bit, with
a per-phase energy breakdown.

The node's duty cycle: wake t_si before the beacon (idle), transition and
listen to the beacon (receive), contend (backoff idle plus one receive-cost
sense per CCA), transmit, turn around and wait for the ack (idle then
receive). Failed attempts retry within the same superframe up to n_max
times; a packet that still fails is retried by the application a full
inter-beacon period later, which is what stretches delay and energy per
bit at high failure rates.

Two failure probabilities enter and they are deliberately distinct:
``pr_caf`` is the chance contention itself aborts (three busy-sense
rounds), taken straight from the simulator; ``pr_tf`` is the chance a
transmitted packet dies by collision or channel error and drives the
retry distribution. Conflating them double-counts contention failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .phy import bit_error_probability, packet_airtime, packet_error_probability

_PHASES = ("beacon_listen", "contention", "transmission", "ack_wait",
           "startup_idle")


@dataclass
class AttemptDistribution:
    """Truncated geometric retry distribution over attempts 1..n_max."""

    p_tr: list                  # p_tr[i-1] = probability exactly i attempts
    p_overflow: float           # probability all n_max attempts fail
    expected_attempts: float

    def validate(self):
        total = sum(self.p_tr) + self.p_overflow
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"attempt probabilities sum to {total}, not 1")
        n = len(self.p_tr)
        if not 1.0 - 1e-12 <= self.expected_attempts <= n + 1e-12:
            raise ValueError("expected_attempts outside [1, n_max]")
        return self


@dataclass
class StateOccupancy:
    """Seconds spent in each radio state per inter-beacon period."""

    t_idle: float
    t_tx: float
    t_rx: float

    def validate(self):
        if min(self.t_idle, self.t_tx, self.t_rx) < 0:
            raise ValueError("occupancy times must be >= 0")
        return self


@dataclass
class EnergyReport:
    occupancy: StateOccupancy
    p_avg: float                # W
    pr_fail: float
    delay: float                # s
    energy_per_bit: float       # J/bit
    breakdown: dict             # phase -> fraction of total energy
    time_breakdown: dict        # phase -> fraction of total active time


@dataclass
class LinkConditions:
    """Everything needed to evaluate one link operating point."""

    profile: object             # RadioProfile
    timing: object              # MacTiming
    mac: object                 # MacParams
    ber: object                 # BerModel
    stats: object               # ContentionStats
    payload_bytes: int
    beacon_order: int
    pathloss_db: float
    tx_level_dbm: float


def per_attempt_failure(pr_col, pr_e):
    """Probability one transmission attempt fails: collision or bit errors."""
    for name, p in (("pr_col", pr_col), ("pr_e", pr_e)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be in [0, 1]")
    return 1.0 - (1.0 - pr_col) * (1.0 - pr_e)


def attempt_distribution(pr_tf, n_max):
    if not 0.0 <= pr_tf <= 1.0:
        raise ValueError("pr_tf must be in [0, 1]")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    p_tr = [pr_tf ** (i - 1) * (1.0 - pr_tf) for i in range(1, n_max + 1)]
    p_overflow = pr_tf ** n_max
    expected = sum(i * p for i, p in enumerate(p_tr, start=1)) + n_max * p_overflow
    return AttemptDistribution(p_tr=p_tr, p_overflow=p_overflow,
                               expected_attempts=expected).validate()


def _components(stats, dist, timing, profile, t_tx_total):
    """Occupancy split into (phase, power class, duration) terms.

    ``t_tx_total`` is the total on-air transmit time per period, i.e.
    packet airtime times the expected number of completed attempts. Power
    classes: idle, rx, sense (CCA listening and ack-timeout listening,
    normally at receive power but separately overridable), tx. Everything
    downstream (occupancy, average power, breakdown) sums these same
    terms, so the three views cannot drift apart.
    """
    a = (1.0 - stats.pr_caf) * dist.expected_attempts
    retry_wait = sum(p * (i - 1) for i, p in enumerate(dist.p_tr, start=1))
    return [
        ("startup_idle", "idle", profile.t_si),
        ("beacon_listen", "rx", profile.t_ia + timing.t_beacon),
        ("contention", "sense",
         (stats.pr_caf + a) * stats.n_cca_mean * profile.t_ia),
        ("contention", "idle", (stats.pr_caf + a) * stats.t_cont_mean),
        ("transmission", "tx", t_tx_total),
        ("ack_wait", "idle", a * timing.t_ack_min),
        ("ack_wait", "sense", retry_wait * timing.t_ack_max),
        ("ack_wait", "rx", (1.0 - dist.p_overflow) * timing.t_ack_frame),
    ]


def state_occupancy(stats, dist, timing, profile, t_packet):
    """Idle/transmit/receive time per inter-beacon period.

    CCA sensing and ack waiting are receiver-on time and count toward
    t_rx. Transition delays ride on the active times: t_si precedes the
    wakeup, one t_ia precedes the beacon, and every CCA is charged a full
    t_ia of receive time.
    """
    if t_packet <= 0:
        raise ValueError("t_packet must be positive")
    t_tx = (1.0 - stats.pr_caf) * dist.expected_attempts * t_packet
    by_class = {"idle": 0.0, "rx": 0.0, "sense": 0.0, "tx": 0.0}
    for _, cls, dt in _components(stats, dist, timing, profile, t_tx):
        by_class[cls] += dt
    return StateOccupancy(t_idle=by_class["idle"], t_tx=by_class["tx"],
                          t_rx=by_class["rx"] + by_class["sense"]).validate()


def inter_beacon_period(timing, bo):
    if not 0 <= bo <= 15:
        raise ValueError("beacon order must be in [0, 15]")
    return timing.t_ib_min * 2 ** bo


def average_power(occ, profile, tx_level, t_ib):
    """Energy over one inter-beacon period divided by its duration.

    Time not covered by the occupancy is shutdown and contributes nothing.
    """
    if t_ib <= 0:
        raise ValueError("t_ib must be positive")
    e = (profile.p_idle * occ.t_idle + profile.p_tx(tx_level) * occ.t_tx
         + profile.p_rx * occ.t_rx)
    return e / t_ib


def transmission_failure(pr_caf, dist):
    if not 0.0 <= pr_caf <= 1.0:
        raise ValueError("pr_caf must be in [0, 1]")
    return 1.0 - (1.0 - pr_caf) * (1.0 - dist.p_overflow)


def expected_delay(t_ib, pr_fail):
    if not 0.0 <= pr_fail <= 1.0:
        raise ValueError("pr_fail must be in [0, 1]")
    if pr_fail == 1.0:
        raise ValueError("pr_fail = 1: delay is unbounded")
    return t_ib / (1.0 - pr_fail)


def energy_per_bit(p_avg, delay, payload_bytes):
    if payload_bytes < 1:
        raise ValueError("payload_bytes must be >= 1")
    return p_avg * delay / (8.0 * payload_bytes)


def phase_breakdown(occ, stats, dist, timing, profile, tx_level,
                    sense_power=None):
    """Fraction of the per-period energy spent in each activity phase.

    The terms are the same ones state_occupancy sums, weighted by their
    state power, so the fractions reconstruct the average power exactly.
    """
    return _breakdown_from_components(
        _components(stats, dist, timing, profile, occ.t_tx),
        profile, tx_level, sense_power)


def _power_of(profile, tx_level, cls, sense_power):
    if cls == "idle":
        return profile.p_idle
    if cls == "tx":
        return profile.p_tx(tx_level)
    if cls == "sense" and sense_power is not None:
        return sense_power
    return profile.p_rx


def _breakdown_from_components(comps, profile, tx_level, sense_power):
    energy = {phase: 0.0 for phase in _PHASES}
    for phase, cls, dt in comps:
        energy[phase] += _power_of(profile, tx_level, cls, sense_power) * dt
    total = sum(energy.values())
    if total <= 0:
        raise ValueError("no energy spent; breakdown undefined")
    return {phase: e / total for phase, e in energy.items()}


def evaluate_link(cond, transition_scale=1.0, sense_power=None):
    """Full pipeline for one operating point -> EnergyReport.

    transition_scale multiplies both state-transition delays (t_si, t_ia);
    sense_power, if given, replaces the receive power during CCAs and ack
    timeout listening only.
    """
    if transition_scale <= 0:
        raise ValueError("transition_scale must be positive")
    if sense_power is not None and sense_power < 0:
        raise ValueError("sense_power must be >= 0")
    profile = cond.profile
    if transition_scale != 1.0:
        profile = replace(profile, t_si=profile.t_si * transition_scale,
                          t_ia=profile.t_ia * transition_scale)

    rx_power = cond.tx_level_dbm - cond.pathloss_db
    pr_bit = bit_error_probability(cond.ber, rx_power)
    total_bytes = cond.mac.l_overhead + cond.payload_bytes
    pr_e = packet_error_probability(pr_bit, total_bytes, cond.mac)
    t_packet = packet_airtime(cond.timing, cond.mac, cond.payload_bytes)

    pr_tf = per_attempt_failure(cond.stats.pr_col, pr_e)
    dist = attempt_distribution(pr_tf, cond.mac.n_max)
    t_tx = (1.0 - cond.stats.pr_caf) * dist.expected_attempts * t_packet
    comps = _components(cond.stats, dist, cond.timing, profile, t_tx)

    by_class = {"idle": 0.0, "rx": 0.0, "sense": 0.0, "tx": 0.0}
    by_phase = {phase: 0.0 for phase in _PHASES}
    for phase, cls, dt in comps:
        by_class[cls] += dt
        by_phase[phase] += dt
    occ = StateOccupancy(t_idle=by_class["idle"], t_tx=by_class["tx"],
                         t_rx=by_class["rx"] + by_class["sense"]).validate()
    t_active = sum(by_phase.values())

    t_ib = inter_beacon_period(cond.timing, cond.beacon_order)
    e_period = sum(
        _power_of(profile, cond.tx_level_dbm, cls, sense_power) * dt
        for _, cls, dt in comps)
    p_avg = e_period / t_ib

    pr_fail = transmission_failure(cond.stats.pr_caf, dist)
    # a dead link (certain failure) reports unbounded delay and energy
    # instead of raising, so curve scans can mark it infeasible
    if pr_fail >= 1.0:
        delay = math.inf
        e_bit = math.inf
    else:
        delay = expected_delay(t_ib, pr_fail)
        e_bit = energy_per_bit(p_avg, delay, cond.payload_bytes)
    return EnergyReport(
        occupancy=occ,
        p_avg=p_avg,
        pr_fail=pr_fail,
        delay=delay,
        energy_per_bit=e_bit,
        breakdown=_breakdown_from_components(comps, profile,
                                             cond.tx_level_dbm, sense_power),
        time_breakdown={p: t / t_active for p, t in by_phase.items()},
    )


def what_if(cond, transition_scale=1.0, sense_power=None):
    """Re-evaluate a link with modified hardware assumptions.

    Returns (baseline, modified, relative power delta), the delta positive
    when the modification saves power.
    """
    baseline = evaluate_link(cond)
    modified = evaluate_link(cond, transition_scale=transition_scale,
                             sense_power=sense_power)
    delta = (baseline.p_avg - modified.p_avg) / baseline.p_avg
    return baseline, modified, delta
