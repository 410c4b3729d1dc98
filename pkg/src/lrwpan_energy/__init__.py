"""Energy efficiency of beacon-mode low-rate WPAN uplinks.

Contention Monte Carlo, closed-form link power/delay/energy model, and
transmit-power / packet-size adaptation built on top of it.
"""

from .params import (
    BerModel,
    ConfigError,
    MacParams,
    MacTiming,
    ParameterSet,
    RadioProfile,
    Scenario,
    apply_overrides,
    load_config,
    save_config,
)
from .phy import (
    LinkState,
    bit_error_probability,
    packet_airtime,
    packet_error_probability,
    received_power,
    select_tx_level,
)
from .csma import (
    ContentionStats,
    ContentionTable,
    SimConfig,
    build_contention_table,
    cell_seed_sequence,
    load_table,
    lookup_contention,
    save_table,
    simulate_contention,
)
from .energy import (
    AttemptDistribution,
    EnergyReport,
    LinkConditions,
    StateOccupancy,
    attempt_distribution,
    average_power,
    energy_per_bit,
    evaluate_link,
    expected_delay,
    inter_beacon_period,
    per_attempt_failure,
    phase_breakdown,
    state_occupancy,
    transmission_failure,
    what_if,
)
from .link_adapt import (
    CaseStudyResult,
    EnergyCurve,
    ScenarioReport,
    SweepPoint,
    ThresholdSet,
    compute_thresholds,
    derived_load,
    energy_curve,
    evaluate_case_study,
    packet_size_sweep,
    what_if_case_study,
)

__all__ = [
    "BerModel", "ConfigError", "MacParams", "MacTiming", "ParameterSet",
    "RadioProfile", "Scenario", "apply_overrides", "load_config",
    "save_config",
    "LinkState", "bit_error_probability", "packet_airtime",
    "packet_error_probability", "received_power", "select_tx_level",
    "ContentionStats", "ContentionTable", "SimConfig",
    "build_contention_table", "cell_seed_sequence", "load_table",
    "lookup_contention", "save_table", "simulate_contention",
    "AttemptDistribution", "EnergyReport", "LinkConditions",
    "StateOccupancy", "attempt_distribution", "average_power",
    "energy_per_bit", "evaluate_link", "expected_delay",
    "inter_beacon_period", "per_attempt_failure", "phase_breakdown",
    "state_occupancy", "transmission_failure", "what_if",
    "CaseStudyResult", "EnergyCurve", "ScenarioReport", "SweepPoint",
    "ThresholdSet", "compute_thresholds", "derived_load", "energy_curve",
    "evaluate_case_study", "packet_size_sweep", "what_if_case_study",
]

__version__ = "0.1.0"
