"""Physical-layer arithmetic: link budget, error probabilities, airtime.

All functions are pure. The bit error probability uses an exponential
regression against received power in dBm; it is clamped at 1 outside the
fitted range rather than bounded, since no validity limits are published
for the fit.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LinkState:
    """One link budget: rx_power is maintained as tx_level - pathloss."""

    pathloss: float       # dB
    tx_level: float       # dBm
    rx_power: float       # dBm

    @classmethod
    def make(cls, tx_level, pathloss):
        return cls(pathloss=pathloss, tx_level=tx_level,
                   rx_power=tx_level - pathloss)


def received_power(tx_level_dbm, pathloss_db):
    """Received power in dBm for a transmit level and a pathloss."""
    return tx_level_dbm - pathloss_db


def bit_error_probability(ber, rx_power_dbm):
    """Bit error probability at the given received power, clamped to [0, 1]."""
    return min(1.0, ber.coeff * math.exp(-ber.rate * rx_power_dbm))


def packet_airtime(timing, mac, payload_bytes):
    """On-air duration of a frame with the given payload, in seconds."""
    if payload_bytes < 0:
        raise ValueError("payload_bytes must be >= 0")
    return (mac.l_overhead + payload_bytes) * timing.t_byte


def packet_error_probability(pr_bit, total_packet_bytes, mac):
    """Probability that at least one error-checked bit of the frame is corrupted.

    The synchronization preamble is excluded from the error check, so the
    exponent counts (total_packet_bytes - l_preamble) * 8 bits.
    """
    if not 0.0 <= pr_bit <= 1.0:
        raise ValueError("pr_bit must be in [0, 1]")
    if total_packet_bytes <= mac.l_preamble:
        raise ValueError("total_packet_bytes must exceed l_preamble")
    bits = (total_packet_bytes - mac.l_preamble) * 8
    return 1.0 - (1.0 - pr_bit) ** bits


def select_tx_level(profile, thresholds, pathloss_db):
    """Channel inversion: pick the weakest level adequate for the pathloss.

    ``thresholds`` are the ascending crossing pathlosses between adjacent
    levels (weakest pair first), exactly len(levels) - 1 entries. Pathloss
    below the first threshold maps to the minimum level; above the last, to
    the maximum.
    """
    levels = profile.levels_ascending()
    thresholds = list(thresholds)
    if len(thresholds) != len(levels) - 1:
        raise ValueError(
            f"need {len(levels) - 1} thresholds for {len(levels)} levels, "
            f"got {len(thresholds)}")
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be ascending")
    return levels[bisect.bisect_right(thresholds, pathloss_db)]
