"""
sbvsim: multi-operator DSL simulator
Compares non-vectored spectrum sharing with Sub-band Vectoring on a shared copper cable
"""

from .channel import CableModelParams, direct_gain, fext_gain, insertion_loss_db, load_cable_params
from .config import VERSION, ScenarioConfig, parse_config
from .coverage import (
    CLUSTER_PRESETS,
    ClusterPreset,
    CoverageCurve,
    DistanceDistribution,
    coverage_ccdf,
    get_cluster_preset,
    load_empirical_cdf,
    run_cluster_scenario,
    sample_distance,
)
from .exceptions import (
    ConfigError,
    DomainError,
    ModelValidityError,
    SbvSimError,
    ScenarioError,
    SchemaError,
    ValidationError,
)
from .linkrate import LinkScenario, Mode, RateResult, bits_per_tone, operator_rate, sweep_distance, sweep_fmax, tone_snr
from .spectrum import (
    AllocationOrder,
    BandPlan,
    SubBandAllocation,
    ToneGrid,
    allocate_subbands,
    build_17a_bandplan,
    tones_for_operator,
)

__version__ = VERSION.lstrip("v")

__all__ = [
    "AllocationOrder",
    "BandPlan",
    "CLUSTER_PRESETS",
    "CableModelParams",
    "ClusterPreset",
    "ConfigError",
    "CoverageCurve",
    "DistanceDistribution",
    "DomainError",
    "LinkScenario",
    "Mode",
    "ModelValidityError",
    "RateResult",
    "SbvSimError",
    "ScenarioConfig",
    "ScenarioError",
    "SchemaError",
    "SubBandAllocation",
    "ToneGrid",
    "VERSION",
    "ValidationError",
    "allocate_subbands",
    "bits_per_tone",
    "build_17a_bandplan",
    "coverage_ccdf",
    "direct_gain",
    "fext_gain",
    "get_cluster_preset",
    "insertion_loss_db",
    "load_cable_params",
    "load_empirical_cdf",
    "operator_rate",
    "parse_config",
    "run_cluster_scenario",
    "sample_distance",
    "sweep_distance",
    "sweep_fmax",
    "tone_snr",
    "tones_for_operator",
]
