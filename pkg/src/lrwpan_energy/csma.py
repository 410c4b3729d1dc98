"""Monte Carlo simulation of slotted CSMA/CA contention.

The engine reproduces the beacon-mode contention procedure at slot
granularity: every active node draws an initial random backoff at beacon
end, then needs ``cw_init`` consecutive clear channel assessments (CCAs) on
slot boundaries before transmitting. A busy CCA re-randomizes the backoff
with an incremented exponent; after ``max_be_increments`` increments a
further busy sense aborts the attempt (channel access failure). Nodes whose
transmissions start in the same slot collide for their full airtime.
Acknowledgement traffic after each successful packet occupies the channel
for ``t_ack_min + t_ack_frame`` (switch off via ``SimConfig.ack_busy``).

Load realization. Each node sends at most one packet per superframe, and
its packet becomes ready at a slot drawn uniformly over the contention
period (minus one worst-case attempt span, so a fresh arrival can always
complete); backoff counts from the arrival slot, and the reported
contention time is measured from arrival to transmission start. With the
default contention period (``nodes * packet_airtime``, the saturation
period) each node participates with probability equal to the requested
load, so the expected number of contenders scales with load and the
expected aggregate airtime fraction equals the load exactly. Passing an
explicit ``t_period`` instead pins the period (e.g. to a physical
inter-beacon period) and the participation probability becomes
``load * t_period / (nodes * airtime)``, clamped at 1; loads beyond the
achievable maximum saturate at full participation. An attempt that cannot
finish contention plus transmission before the period ends counts as a
channel access failure.

Internally all times are integer symbol counts, which keeps event
comparisons exact and the engine bit-reproducible across platforms. The
random stream is a Philox counter-based generator; table cells derive
their seeds from the base seed through ``numpy.random.SeedSequence`` spawn
keys (the documented mixing function), so any cell can be reproduced in
isolation.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np

_OK, _COLLIDED, _FAILED = 0, 1, 2


@dataclass
class SimConfig:
    """One contention simulation setup."""

    nodes: int = 100
    payload_bytes: int = 120
    load: float = 0.4            # requested airtime fraction, (0, 1]
    superframes: int = 10000
    seed: int = 1
    t_period: float = None       # s, contention period; None = saturation period
    ack_busy: bool = True        # acks occupy the channel for CCA purposes

    def validate(self):
        if self.nodes < 1:
            raise ValueError("nodes must be >= 1")
        if self.payload_bytes < 1:
            raise ValueError("payload_bytes must be >= 1")
        if not 0.0 < self.load <= 1.0:
            raise ValueError("load must be in (0, 1]")
        if self.superframes < 1:
            raise ValueError("superframes must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.t_period is not None and self.t_period <= 0:
            raise ValueError("t_period must be positive")
        return self


@dataclass
class ContentionStats:
    """Aggregated per-attempt contention statistics with standard errors."""

    t_cont_mean: float           # s, beacon end to transmission start / abort
    n_cca_mean: float            # CCAs per attempt
    pr_col: float                # collision probability given channel access
    pr_caf: float                # channel access failure probability
    se_t_cont: float
    se_n_cca: float
    se_pr_col: float
    se_pr_caf: float
    trials: int                  # total node-attempts aggregated

    def validate(self, cw_init):
        eps = 1e-9
        for name in ("pr_col", "pr_caf"):
            p = getattr(self, name)
            if not -eps <= p <= 1 + eps:
                raise ValueError(f"{name} out of [0, 1]: {p}")
        if self.t_cont_mean < 0:
            raise ValueError("t_cont_mean must be >= 0")
        if self.n_cca_mean < cw_init * (1.0 - self.pr_caf) - eps:
            raise ValueError("n_cca_mean below cw_init * (1 - pr_caf)")
        return self


def cell_seed_sequence(base_seed, load_index, payload_index):
    """Seed mixing for table cells: SeedSequence(base, spawn_key=(i, j))."""
    return np.random.SeedSequence(entropy=int(base_seed),
                                  spawn_key=(int(load_index), int(payload_index)))


def _symbols(timing, seconds):
    n = int(round(seconds / timing.t_symbol))
    if n < 0:
        raise ValueError("negative duration")
    return n


def _worst_case_span(timing, mac, t_packet):
    # longest a single attempt can take: maximal backoff draws at every
    # exponent, a full CCA window per round, the start slot, the packet and
    # its ack exchange
    slots = sum(2 ** (mac.min_be + j) - 1
                for j in range(mac.max_be_increments + 1))
    slots += (mac.max_be_increments + 1) * mac.cw_init + 1
    return slots * timing.t_slot + t_packet + timing.t_ack_min + timing.t_ack_frame


def _run_superframe(rng, m, mac, slot_sym, packet_sym, ack_gap_sym,
                    ack_frame_sym, period_sym, max_arrival_slot, ack_busy):
    """Simulate one superframe with m contenders; returns integer tallies.

    Returns (caf, tx, col, sum_t_cont_slots, sum_cca).
    """
    cw = [mac.cw_init] * m
    inc = [0] * m
    ccas = [0] * m
    done = [False] * m

    caf = tx = col = 0
    sum_tc = 0

    # events: (slot, kind, node); kind 0 = transmission start, 1 = CCA.
    # Transmission events sort before CCAs in the same slot, so a CCA on a
    # transmission's start boundary senses it busy.
    arrival = rng.integers(0, max_arrival_slot + 1, size=m)
    backoff = rng.integers(0, 2 ** mac.min_be, size=m)
    events = [(int(a + b), 1, i) for i, (a, b) in enumerate(zip(arrival, backoff))]
    heapq.heapify(events)

    busy = []      # [start_sym, end_sym) intervals, ascending starts
    prune = 0

    while events:
        slot = events[0][0]
        starters = []
        while events and events[0][0] == slot and events[0][1] == 0:
            starters.append(heapq.heappop(events)[2])
        t = slot * slot_sym

        if starters:
            assert t % slot_sym == 0
            busy.append((t, t + packet_sym))
            if len(starters) == 1:
                tx += 1
                if ack_busy:
                    a0 = t + packet_sym + ack_gap_sym
                    busy.append((a0, a0 + ack_frame_sym))
            else:
                tx += len(starters)
                col += len(starters)
            for i in starters:
                done[i] = True
                sum_tc += slot - arrival[i]

        while events and events[0][0] == slot:
            _, _, i = heapq.heappop(events)
            # attempt must still be able to complete inside the period
            if (slot + cw[i]) * slot_sym + packet_sym > period_sym:
                done[i] = True
                caf += 1
                sum_tc += slot - arrival[i]
                continue
            while prune < len(busy) and busy[prune][1] <= t:
                prune += 1
            k = prune
            is_busy = False
            while k < len(busy) and busy[k][0] <= t:
                if t < busy[k][1]:
                    is_busy = True
                    break
                k += 1
            ccas[i] += 1
            if is_busy:
                if inc[i] >= mac.max_be_increments:
                    done[i] = True
                    caf += 1
                    sum_tc += slot + 1 - arrival[i]
                else:
                    inc[i] += 1
                    cw[i] = mac.cw_init
                    d = int(rng.integers(0, 2 ** (mac.min_be + inc[i])))
                    heapq.heappush(events, (slot + 1 + d, 1, i))
            else:
                cw[i] -= 1
                kind = 0 if cw[i] == 0 else 1
                heapq.heappush(events, (slot + 1, kind, i))

    assert all(done), "superframe ended with unresolved attempts"
    return caf, tx, col, sum_tc, sum(ccas)


def _ratio_se(x, n, total_n):
    """Linearized cluster standard error of R = sum(x)/sum(n)."""
    b = len(x)
    if total_n == 0 or b < 2:
        return 0.0
    r = float(np.sum(x)) / total_n
    resid = np.asarray(x, dtype=float) - r * np.asarray(n, dtype=float)
    var = float(np.sum(resid * resid)) * b / (b - 1) / (total_n ** 2)
    return math.sqrt(max(var, 0.0))


def simulate_contention(cfg, timing, mac, seed_seq=None):
    """Run the contention Monte Carlo and aggregate per-attempt statistics.

    ``seed_seq`` overrides the generator seeding (used by the table builder
    to hand each cell its mixed SeedSequence); by default the stream is
    Philox seeded with ``cfg.seed``.
    """
    cfg.validate()
    t_packet = (mac.l_overhead + cfg.payload_bytes) * timing.t_byte
    period = cfg.t_period
    if period is None:
        period = max(cfg.nodes * t_packet, _worst_case_span(timing, mac, t_packet))
    q = min(1.0, cfg.load * period / (cfg.nodes * t_packet))

    slot_sym = _symbols(timing, timing.t_slot)
    packet_sym = _symbols(timing, t_packet)
    ack_gap_sym = _symbols(timing, timing.t_ack_min)
    ack_frame_sym = _symbols(timing, timing.t_ack_frame)
    period_sym = _symbols(timing, period)
    if slot_sym < 1 or packet_sym < 1:
        raise ValueError("slot and packet must be at least one symbol long")
    span_sym = _symbols(timing, _worst_case_span(timing, mac, t_packet))
    span_slots = -(-span_sym // slot_sym)
    max_arrival_slot = max(0, period_sym // slot_sym - span_slots)

    if seed_seq is None:
        seed_seq = np.random.SeedSequence(int(cfg.seed))
    rng = np.random.Generator(np.random.Philox(seed_seq))

    per_sf = []
    for _ in range(cfg.superframes):
        if q < 1.0:
            m = int(np.count_nonzero(rng.random(cfg.nodes) < q))
        else:
            m = cfg.nodes
        if m == 0:
            per_sf.append((0, 0, 0, 0, 0, 0))
            continue
        caf, tx, col, sum_tc, sum_cca = _run_superframe(
            rng, m, mac, slot_sym, packet_sym, ack_gap_sym, ack_frame_sym,
            period_sym, max_arrival_slot, cfg.ack_busy)
        per_sf.append((m, caf, tx, col, sum_tc, sum_cca))

    arr = np.asarray(per_sf, dtype=np.int64)
    att, cafs, txs, cols, tcs, ncca = (arr[:, k] for k in range(6))
    n_att = int(att.sum())
    if n_att == 0:
        raise ValueError("no attempts simulated; raise superframes or load")
    n_tx = int(txs.sum())

    t_slot_s = timing.t_slot
    t_cont_mean = float(tcs.sum()) / n_att * t_slot_s
    n_cca_mean = float(ncca.sum()) / n_att
    pr_caf = float(cafs.sum()) / n_att
    pr_col = float(cols.sum()) / n_tx if n_tx else 0.0

    stats = ContentionStats(
        t_cont_mean=t_cont_mean,
        n_cca_mean=n_cca_mean,
        pr_col=pr_col,
        pr_caf=pr_caf,
        se_t_cont=_ratio_se(tcs, att, n_att) * t_slot_s,
        se_n_cca=_ratio_se(ncca, att, n_att),
        se_pr_col=_ratio_se(cols, txs, n_tx) if n_tx else 0.0,
        se_pr_caf=_ratio_se(cafs, att, n_att),
        trials=n_att,
    )
    return stats.validate(mac.cw_init)


@dataclass
class ContentionTable:
    """Contention statistics on a (load, payload) grid."""

    loads: list
    payloads: list
    cells: list = field(default_factory=list)   # cells[i][j] -> ContentionStats

    def validate(self):
        if not self.loads or not self.payloads:
            raise ValueError("table axes must be non-empty")
        for axis, name in ((self.loads, "loads"), (self.payloads, "payloads")):
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ValueError(f"{name} must be strictly ascending")
        if len(self.cells) != len(self.loads) or any(
                len(row) != len(self.payloads) for row in self.cells):
            raise ValueError("every grid cell must be populated")
        return self


def build_contention_table(loads, payloads, base, timing, mac):
    """One simulation per grid cell, each with its mixed cell seed."""
    table = ContentionTable(loads=list(loads), payloads=list(payloads))
    if not table.loads or not table.payloads:
        raise ValueError("table axes must be non-empty")
    for i, load in enumerate(table.loads):
        row = []
        for j, payload in enumerate(table.payloads):
            cfg = replace(base, load=load, payload_bytes=int(payload))
            seq = cell_seed_sequence(base.seed, i, j)
            row.append(simulate_contention(cfg, timing, mac, seed_seq=seq))
        table.cells.append(row)
    return table.validate()


def _bracket(axis, x):
    """Clamped bracketing indices and interpolation weight."""
    if x <= axis[0]:
        return 0, 0, 0.0
    if x >= axis[-1]:
        return len(axis) - 1, len(axis) - 1, 0.0
    hi = next(k for k, v in enumerate(axis) if v >= x)
    lo = hi - 1
    if axis[hi] == x:
        return hi, hi, 0.0
    w = (x - axis[lo]) / (axis[hi] - axis[lo])
    return lo, hi, w


_INTERP_FIELDS = ("t_cont_mean", "n_cca_mean", "pr_col", "pr_caf",
                  "se_t_cont", "se_n_cca", "se_pr_col", "se_pr_caf")


def lookup_contention(table, load, payload_bytes):
    """Bilinear interpolation over the grid, clamped at the edges."""
    table.validate()
    i0, i1, wi = _bracket(table.loads, load)
    j0, j1, wj = _bracket(table.payloads, payload_bytes)
    corners = [
        (table.cells[i0][j0], (1 - wi) * (1 - wj)),
        (table.cells[i0][j1], (1 - wi) * wj),
        (table.cells[i1][j0], wi * (1 - wj)),
        (table.cells[i1][j1], wi * wj),
    ]
    values = {}
    for name in _INTERP_FIELDS:
        values[name] = sum(getattr(c, name) * w for c, w in corners)
    trials = int(round(sum(c.trials * w for c, w in corners)))
    return ContentionStats(trials=trials, **values)


_CSV_HEADER = ["load", "payload_bytes", "t_cont_mean", "n_cca_mean", "pr_col",
               "pr_caf", "se_t_cont", "se_n_cca", "se_pr_col", "se_pr_caf",
               "trials"]


def save_table(table, path):
    """Write the table as CSV, full float precision, row-major by load."""
    table.validate()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for i, load in enumerate(table.loads):
            for j, payload in enumerate(table.payloads):
                c = table.cells[i][j]
                writer.writerow(
                    [repr(load), repr(payload)]
                    + [repr(getattr(c, name)) for name in _INTERP_FIELDS]
                    + [c.trials])


def load_table(path):
    """Read a table written by :func:`save_table`; schema-checked."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in _CSV_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"table file missing column {missing[0]!r}")
        entries = {}
        for row in reader:
            key = (float(row["load"]), float(row["payload_bytes"]))
            entries[key] = ContentionStats(
                trials=int(row["trials"]),
                **{name: float(row[name]) for name in _INTERP_FIELDS})
    if not entries:
        raise ValueError("table file has no rows")
    loads = sorted({k[0] for k in entries})
    payloads = sorted({k[1] for k in entries})
    cells = []
    for load in loads:
        row = []
        for payload in payloads:
            if (load, payload) not in entries:
                raise ValueError(
                    f"table grid incomplete at load={load}, payload={payload}")
            row.append(entries[(load, payload)])
        cells.append(row)
    return ContentionTable(loads=loads, payloads=payloads, cells=cells).validate()
