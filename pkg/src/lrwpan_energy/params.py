"""Parameter types, defaults and config-file handling.

Unit conventions, used everywhere in the package: times in seconds, powers
in watts, energies in joules. Quantities expressed in dBm / dB carry a
``_dbm`` / ``_db`` suffix and are converted at the API boundary only.

The config file format is flat ``key = value`` text with ``#`` comments.
Keys are section-prefixed field names (``radio.p_idle``, ``mac.t_slot``,
``scenario.payload_bytes``). Unknown keys and malformed values raise
:class:`ConfigError` naming the offending key. The transmit power table is
written as comma-separated ``dbm:watts`` pairs, descending dBm.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace


class ConfigError(ValueError):
    """Invalid configuration value; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def _default_tx_table():
    # Representative transmit-power consumption per output level, descending
    # dBm over the radio's 8-step 0..-15 dBm range. DC draw is modeled as a
    # fixed PA overhead plus a term linear in radiated power; see the README
    # for how to substitute a measured table.
    overhead_w = 2.8e-3
    slope_w_per_mw = 15.0e-3
    return [
        (dbm, overhead_w + slope_w_per_mw * 10.0 ** (dbm / 10.0))
        for dbm in (0.0, -1.0, -3.0, -5.0, -7.0, -10.0, -12.0, -15.0)
    ]


@dataclass
class RadioProfile:
    """Power and transition figures of the modeled transceiver.

    Defaults are representative of a low-power 802.15.4 transceiver board
    (receiver considerably more expensive than the transmitter at these
    output levels); every field is configurable and the analysis carries no
    hidden dependence on these particular numbers.
    """

    p_idle: float = 712e-6        # W, idle (clock running, radio off)
    p_rx: float = 60e-3           # W, receive / channel sensing
    p_shutdown: float = 0.0       # W, shutdown state
    t_si: float = 1e-3            # s, shutdown -> idle transition
    t_ia: float = 194e-6          # s, idle -> active (rx or tx) transition
    e_si: float = 691e-12         # J, energy of one shutdown -> idle ramp
    p_sense_low: float = 5e-3     # W, low-power sensing mode (what-if studies)
    p_tx_table: list = field(default_factory=_default_tx_table)

    def validate(self):
        for key in ("p_idle", "p_rx", "t_si", "t_ia"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"radio.{key}", "must be positive")
        for key in ("p_shutdown", "e_si", "p_sense_low"):
            if getattr(self, key) < 0:
                raise ConfigError(f"radio.{key}", "must be non-negative")
        if not self.p_tx_table:
            raise ConfigError("radio.p_tx_table", "must have at least one level")
        dbms = [dbm for dbm, _ in self.p_tx_table]
        if any(b >= a for a, b in zip(dbms, dbms[1:])):
            raise ConfigError("radio.p_tx_table", "levels must be strictly descending dBm")
        if any(w <= 0 for _, w in self.p_tx_table):
            raise ConfigError("radio.p_tx_table", "power draws must be positive")

    def p_tx(self, tx_dbm):
        """DC power draw for an exact table level, in watts."""
        for dbm, watts in self.p_tx_table:
            if dbm == tx_dbm:
                return watts
        raise ConfigError("radio.p_tx_table", f"no such level: {tx_dbm} dBm")

    def levels_ascending(self):
        """Transmit levels sorted ascending in dBm (weakest first)."""
        return sorted(dbm for dbm, _ in self.p_tx_table)


@dataclass
class MacTiming:
    """Beacon-mode MAC timing constants."""

    t_symbol: float = 16e-6       # s, one modulation symbol
    t_byte: float = 32e-6         # s, one byte on air (2 symbols)
    t_slot: float = 320e-6        # s, backoff slot (20 symbols)
    t_ack_min: float = 192e-6     # s, earliest ack after packet end
    t_ack_max: float = 864e-6     # s, ack wait timeout
    t_ib_min: float = 15.36e-3    # s, inter-beacon period at beacon order 0
    t_beacon: float = 608e-6      # s, beacon frame airtime (19 bytes)
    t_ack_frame: float = 352e-6   # s, ack frame airtime (11 bytes)

    def validate(self):
        for key in ("t_symbol", "t_byte", "t_slot", "t_ack_min", "t_ack_max",
                    "t_ib_min", "t_beacon", "t_ack_frame"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"mac.{key}", "must be positive")
        if self.t_ack_max <= self.t_ack_min:
            raise ConfigError("mac.t_ack_max", "must exceed t_ack_min")
        # consistency with the symbol clock, loose tolerance for float configs
        if abs(self.t_byte - 2 * self.t_symbol) > 1e-9 * self.t_byte:
            raise ConfigError("mac.t_byte", "must equal 2 * t_symbol")
        if abs(self.t_slot - 20 * self.t_symbol) > 1e-9 * self.t_slot:
            raise ConfigError("mac.t_slot", "must equal 20 * t_symbol")


@dataclass
class MacParams:
    """Contention and retry parameters."""

    min_be: int = 3               # initial backoff exponent
    max_be_increments: int = 2    # busy senses tolerated before giving up
    cw_init: int = 2              # consecutive clear CCAs required
    n_max: int = 5                # transmission attempts per packet
    l_overhead: int = 13          # bytes, non-payload frame overhead
    l_preamble: int = 4           # bytes, preamble (not error-checked)

    def validate(self):
        if self.min_be < 0:
            raise ConfigError("mac.min_be", "must be >= 0")
        if self.max_be_increments < 0:
            raise ConfigError("mac.max_be_increments", "must be >= 0")
        if self.cw_init < 1:
            raise ConfigError("mac.cw_init", "must be >= 1")
        if self.n_max < 1:
            raise ConfigError("mac.n_max", "must be >= 1")
        if self.l_overhead < 0:
            raise ConfigError("mac.l_overhead", "must be >= 0")
        if not 0 <= self.l_preamble <= self.l_overhead:
            raise ConfigError("mac.l_preamble", "must be within [0, l_overhead]")


@dataclass
class BerModel:
    """Exponential fit of bit error probability vs received power in dBm."""

    coeff: float = 2.35e-30       # prefactor of the fit
    rate: float = 0.659           # 1/dBm decay rate

    def validate(self):
        if self.coeff <= 0:
            raise ConfigError("ber.coeff", "must be positive")
        if self.rate <= 0:
            raise ConfigError("ber.rate", "must be positive")


@dataclass
class Scenario:
    """Network-level scenario under study.

    Pathloss is either fixed (``pathloss_fixed_db``) or uniform over
    [``pathloss_low_db``, ``pathloss_high_db``]; exactly one form must be
    active. Defaults describe the dense-network case study: 100 nodes per
    channel, 120-byte payloads every 960 ms, beacon order 6.
    """

    nodes_per_channel: int = 100
    payload_bytes: int = 120
    beacon_order: int = 6
    data_rate_bps: float = 1000.0     # application bits/s per node
    pathloss_fixed_db: float = None   # dB, set for a single-link scenario
    pathloss_low_db: float = 55.0     # dB, uniform range lower edge
    pathloss_high_db: float = 95.0    # dB, uniform range upper edge

    def validate(self):
        if self.nodes_per_channel < 1:
            raise ConfigError("scenario.nodes_per_channel", "must be >= 1")
        if self.payload_bytes < 1:
            raise ConfigError("scenario.payload_bytes", "must be >= 1")
        if not 0 <= self.beacon_order <= 15:
            raise ConfigError("scenario.beacon_order", "must be within [0, 15]")
        if self.data_rate_bps <= 0:
            raise ConfigError("scenario.data_rate_bps", "must be positive")
        if self.pathloss_fixed_db is None:
            if self.pathloss_high_db < self.pathloss_low_db:
                raise ConfigError("scenario.pathloss_high_db",
                                  "must be >= pathloss_low_db")

    def pathloss_bounds(self):
        """(low, high) dB of the active pathloss model."""
        if self.pathloss_fixed_db is not None:
            return self.pathloss_fixed_db, self.pathloss_fixed_db
        return self.pathloss_low_db, self.pathloss_high_db


@dataclass
class ParameterSet:
    """Everything the model needs, bundled."""

    radio: RadioProfile = field(default_factory=RadioProfile)
    timing: MacTiming = field(default_factory=MacTiming)
    mac: MacParams = field(default_factory=MacParams)
    ber: BerModel = field(default_factory=BerModel)
    scenario: Scenario = field(default_factory=Scenario)

    def validate(self):
        self.radio.validate()
        self.timing.validate()
        self.mac.validate()
        self.ber.validate()
        self.scenario.validate()
        return self


_SECTIONS = {
    "radio": "radio",
    "mac": None,      # resolved per-field between MacTiming and MacParams
    "ber": "ber",
    "scenario": "scenario",
}


def _parse_tx_table(key, text):
    table = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            dbm_s, w_s = chunk.split(":")
            table.append((float(dbm_s), float(w_s)))
        except ValueError:
            raise ConfigError(key, f"bad table entry {chunk!r}, want dbm:watts")
    if not table:
        raise ConfigError(key, "empty transmit power table")
    return table


def _coerce(key, obj, name, raw):
    current = getattr(obj, name)
    if name == "p_tx_table":
        return _parse_tx_table(key, raw)
    try:
        if isinstance(current, bool):
            return raw.strip().lower() in ("1", "true", "yes")
        if isinstance(current, int) and not isinstance(current, bool):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse value {raw!r}")


def _assign(ps, key, raw):
    if "." not in key:
        raise ConfigError(key, "keys must be section.field")
    section, name = key.split(".", 1)
    if section == "radio":
        targets = [ps.radio]
    elif section == "mac":
        targets = [ps.timing, ps.mac]
    elif section == "ber":
        targets = [ps.ber]
    elif section == "scenario":
        targets = [ps.scenario]
    else:
        raise ConfigError(key, f"unknown section {section!r}")
    for obj in targets:
        if name in {f.name for f in dataclasses.fields(obj)}:
            # "none" clears optional fields (pathloss_fixed_db)
            if raw.strip().lower() == "none":
                setattr(obj, name, None)
            else:
                setattr(obj, name, _coerce(key, obj, name, raw))
            return
    raise ConfigError(key, "unknown field")


def load_config(path=None, overrides=()):
    """Build a validated :class:`ParameterSet` from a file plus overrides.

    ``overrides`` are ``key=value`` strings applied after the file, last one
    wins. ``path=None`` gives pure defaults (plus overrides).
    """
    ps = ParameterSet()
    if path is not None:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}", "expected key = value")
                key, raw = (part.strip() for part in line.split("=", 1))
                _assign(ps, key, raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must be key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        _assign(ps, key, raw)
    return ps.validate()


def apply_overrides(ps, overrides):
    """Copy ``ps`` with ``key=value`` overrides applied, then re-validate."""
    out = ParameterSet(
        radio=replace(ps.radio, p_tx_table=list(ps.radio.p_tx_table)),
        timing=replace(ps.timing),
        mac=replace(ps.mac),
        ber=replace(ps.ber),
        scenario=replace(ps.scenario),
    )
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must be key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        _assign(out, key, raw)
    return out.validate()


def save_config(ps, path):
    """Serialize a full parameter set as key = value text.

    Floats are written with repr so a load of the result is bit-for-bit
    identical to the source values.
    """
    lines = ["# generated parameter set"]
    pairs = [
        ("radio", ps.radio),
        ("mac", ps.timing),
        ("mac", ps.mac),
        ("ber", ps.ber),
        ("scenario", ps.scenario),
    ]
    for section, obj in pairs:
        for f in dataclasses.fields(obj):
            value = getattr(obj, f.name)
            if f.name == "p_tx_table":
                text = ", ".join(f"{dbm!r}:{w!r}" for dbm, w in value)
            elif value is None:
                text = "none"
            else:
                text = repr(value)
            lines.append(f"{section}.{f.name} = {text}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
