"""Headway synthesis, stability certification and simulation for delayed vehicle platoons."""

from platoon_headway.gains import (
    CharacteristicRootError,
    ConfigError,
    ControllerGains,
    DomainError,
    EffectiveGains,
    Mode,
)
from platoon_headway.synthesis import (
    GainRegion,
    gain_region,
    min_headway,
    region_contains,
    sample_feasible_gains,
    to_effective,
)
from platoon_headway.string_stability import (
    FrequencyGrid,
    SweepReport,
    counterexample_frequency,
    h_magnitude_sq,
    ka_necessity_check,
    robust_sweep,
    sufficient_condition,
)
from platoon_headway.internal_stability import (
    InterlacingReport,
    QuasiPolyParams,
    RootList,
    certify_internal,
    condition_b,
)
from platoon_headway.simulation import PlatoonScenario, SimulationTrace, simulate

__version__ = "0.1.0"

__all__ = [
    "CharacteristicRootError",
    "ConfigError",
    "ControllerGains",
    "DomainError",
    "EffectiveGains",
    "FrequencyGrid",
    "GainRegion",
    "InterlacingReport",
    "Mode",
    "PlatoonScenario",
    "QuasiPolyParams",
    "RootList",
    "SimulationTrace",
    "SweepReport",
    "certify_internal",
    "condition_b",
    "counterexample_frequency",
    "gain_region",
    "h_magnitude_sq",
    "ka_necessity_check",
    "min_headway",
    "region_contains",
    "robust_sweep",
    "sample_feasible_gains",
    "simulate",
    "sufficient_condition",
    "to_effective",
]
