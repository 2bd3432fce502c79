#!/usr/bin/env python3
"""
SBV Simulator Configuration Module
Parses run descriptions (`[section]` / `key = value` files) into validated settings
"""

import math
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Type, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, field_validator, model_validator

from .channel import CableModelParams, load_cable_params
from .coverage import (
    DEFAULT_CAB_TO_DP,
    DEFAULT_DP_TO_HOME,
    DEFAULT_N_SAMPLES,
    DEFAULT_THRESHOLDS,
    DistanceDistribution,
    DistanceRole,
    DistributionKind,
    load_empirical_cdf,
)
from .exceptions import ValidationError
from .fileio import PathLike, read_ini
from .linkrate import LinkScenario, Mode
from .logging_config import get_logger
from .rng import MAX_SEED
from .spectrum import DEFAULT_BLOCK_WIDTH, DEFAULT_DELTA_F, LEGACY_EDGE_HZ, AllocationOrder, ToneGrid, allocate_subbands

logger = get_logger(__name__)

# Version Information for the application
VERSION = "v0.3.0"

# The only environment variable the simulator reads
SEED_ENV_VAR = "SBVSIM_SEED"

DEFAULT_CABLE_FILE = Path(__file__).resolve().parent.parent / "config" / "cable_default.ini"
DEFAULT_FMAX_SWEEP = (17.664e6, 35.2e6, 70.4e6, 105.6e6)
DEFAULT_DISTANCES = tuple(float(d) for d in range(0, 1001, 50))


class SweepKind(Enum):
    FMAX = "fmax"
    DISTANCE = "distance"


class OutputFormat(Enum):
    CSV = "csv"
    SVG = "svg"


def parse_number_list(text: Any) -> Tuple[float, ...]:
    """Parse `a, b, c` or an inclusive `start:stop:step` range"""
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    text = str(text).strip()
    if not text:
        raise ValueError("empty list")
    if ":" in text:
        parts = [p.strip() for p in text.split(":")]
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if not step > 0 or stop < start:
            raise ValueError(f"range needs step > 0 and stop >= start, got {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(count))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _split_words(text: Any) -> Tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(str(v).strip() for v in text)
    return tuple(w.strip() for w in str(text).split(",") if w.strip())


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CableSection(_Section):
    file: Optional[str] = Field(default=None, description="Cable parameter file, relative to the config file")


class ScenarioSection(_Section):
    mode: Mode = Field(..., description="NV, SBV or FULL_VECTOR")
    n_op: int = Field(..., ge=1, description="Operators sharing the cable")
    operator: int = Field(default=0, ge=0, description="Reference operator for rate and coverage")
    n_us: int = Field(default=24, ge=0, description="Interfering pairs in the binder")
    r_v_db: float = Field(default=10.0, ge=0, description="Residual vectoring degradation, dB")
    f_max_hz: float = Field(default=35.2e6, gt=0)
    width_hz: float = Field(default=DEFAULT_BLOCK_WIDTH, gt=0, description="Sub-band block width")
    order: AllocationOrder = AllocationOrder.SNAKE
    distance_m: float = Field(default=100.0, ge=0, description="Distance used by `rate` and the f_max sweep")
    sweep: SweepKind = SweepKind.FMAX
    f_max_list_hz: Tuple[float, ...] = DEFAULT_FMAX_SWEEP
    distances_m: Tuple[float, ...] = DEFAULT_DISTANCES
    sweep_modes: Tuple[Mode, ...] = (Mode.NV, Mode.SBV)
    psd_tx_dbm_hz: float = -60.0
    noise_bg_dbm_hz: float = -140.0
    gamma_db: float = 9.75
    margin_db: float = 6.0
    coding_gain_db: float = 3.0
    b_max: float = Field(default=15.0, ge=1)
    f_sym_hz: float = Field(default=4000.0, gt=0)
    delta_f_hz: float = Field(default=DEFAULT_DELTA_F, gt=0)
    integer_bits: bool = False
    workers: int = Field(default=1, ge=1, description="Threads for sweep evaluation")

    @field_validator("mode", "order", mode="before")
    @classmethod
    def _upper(cls, value):
        return value.strip().upper() if isinstance(value, str) else value

    @field_validator("sweep", mode="before")
    @classmethod
    def _lower(cls, value):
        return value.strip().lower() if isinstance(value, str) else value

    @field_validator("f_max_list_hz", "distances_m", mode="before")
    @classmethod
    def _numbers(cls, value):
        return parse_number_list(value)

    @field_validator("sweep_modes", mode="before")
    @classmethod
    def _modes(cls, value):
        return tuple(w.upper() for w in _split_words(value))

    @model_validator(mode="after")
    def _cross_field(self) -> "ScenarioSection":
        if self.mode is Mode.FULL_VECTOR and self.n_op != 1:
            raise ValueError(f"mode FULL_VECTOR requires n_op = 1, got n_op = {self.n_op}")
        if self.operator >= self.n_op:
            raise ValueError(f"operator must be < n_op ({self.n_op}), got {self.operator}")
        if self.gamma_db + self.margin_db - self.coding_gain_db <= 0:
            raise ValueError("gamma_db + margin_db - coding_gain_db must be > 0")
        if Mode.FULL_VECTOR in self.sweep_modes and self.n_op != 1:
            raise ValueError("sweep_modes contains FULL_VECTOR, which requires n_op = 1")
        if not self.f_max_list_hz or any(b <= a for a, b in zip(self.f_max_list_hz, self.f_max_list_hz[1:])):
            raise ValueError("f_max_list_hz must be a nonempty strictly ascending list")
        if not self.distances_m or any(d < 0 for d in self.distances_m):
            raise ValueError("distances_m must be a nonempty list of distances >= 0")
        if not self.sweep_modes:
            raise ValueError("sweep_modes must name at least one mode")
        return self


class CoverageSection(_Section):
    cab_to_dp_kind: DistributionKind = DistributionKind.LOGNORMAL
    cab_to_dp_mu: float = DEFAULT_CAB_TO_DP.mu
    cab_to_dp_sigma: float = Field(default=DEFAULT_CAB_TO_DP.sigma, gt=0)
    cab_to_dp_value_m: float = Field(default=200.0, ge=0)
    cab_to_dp_file: Optional[str] = None
    dp_to_home_kind: DistributionKind = DistributionKind.CONSTANT
    dp_to_home_mu: float = math.log(DEFAULT_DP_TO_HOME.value)
    dp_to_home_sigma: float = Field(default=0.5, gt=0)
    dp_to_home_value_m: float = Field(default=DEFAULT_DP_TO_HOME.value, ge=0)
    dp_to_home_file: Optional[str] = None
    n_samples: int = Field(default=DEFAULT_N_SAMPLES, ge=1)
    seed: int = Field(default=1, ge=0, le=MAX_SEED)
    thresholds_mbps: Tuple[float, ...] = DEFAULT_THRESHOLDS
    n_us_list: Tuple[int, ...] = (24, 12)
    f_max_list_hz: Tuple[float, ...] = (35.2e6,)
    # None reports [scenario] operator only
    operators: Optional[Union[Literal["all"], Tuple[int, ...]]] = None

    @field_validator("cab_to_dp_kind", "dp_to_home_kind", mode="before")
    @classmethod
    def _upper(cls, value):
        return value.strip().upper() if isinstance(value, str) else value

    @field_validator("thresholds_mbps", "f_max_list_hz", mode="before")
    @classmethod
    def _numbers(cls, value):
        return parse_number_list(value)

    @field_validator("n_us_list", mode="before")
    @classmethod
    def _counts(cls, value):
        numbers = parse_number_list(value)
        if any(n != int(n) or n < 0 for n in numbers):
            raise ValueError(f"n_us_list must hold counts >= 0, got {numbers}")
        return tuple(int(n) for n in numbers)

    @field_validator("operators", mode="before")
    @classmethod
    def _operators(cls, value):
        if isinstance(value, str) and value.strip().lower() == "all":
            return "all"
        numbers = parse_number_list(value)
        if any(n != int(n) or n < 0 for n in numbers) or len(set(numbers)) != len(numbers):
            raise ValueError(f"operators must be 'all' or distinct operator indices, got {value!r}")
        return tuple(int(n) for n in numbers)

    @model_validator(mode="after")
    def _cross_field(self) -> "CoverageSection":
        if not self.thresholds_mbps or any(b <= a for a, b in zip(self.thresholds_mbps, self.thresholds_mbps[1:])):
            raise ValueError("thresholds_mbps must be a nonempty strictly increasing list")
        for prefix in ("cab_to_dp", "dp_to_home"):
            if getattr(self, f"{prefix}_kind") is DistributionKind.EMPIRICAL and not getattr(self, f"{prefix}_file"):
                raise ValueError(f"{prefix}_kind EMPIRICAL requires {prefix}_file")
        return self

    @property
    def sets_distributions(self) -> bool:
        return any(key.startswith(("cab_to_dp_", "dp_to_home_")) for key in self.model_fields_set)


class OutputSection(_Section):
    directory: str = "out"
    formats: Tuple[OutputFormat, ...] = (OutputFormat.CSV, OutputFormat.SVG)

    @field_validator("formats", mode="before")
    @classmethod
    def _formats(cls, value):
        return tuple(w.lower() for w in _split_words(value))


SECTIONS: Dict[str, Type[_Section]] = {
    "cable": CableSection,
    "scenario": ScenarioSection,
    "coverage": CoverageSection,
    "output": OutputSection,
}


class ScenarioConfig(BaseModel):
    """Validated run description"""
    model_config = ConfigDict(frozen=True)

    path: Optional[Path] = None
    cable_file: Optional[Path] = None
    cable_params: CableModelParams = Field(default_factory=CableModelParams)
    scenario: ScenarioSection
    coverage: CoverageSection = Field(default_factory=CoverageSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @property
    def base_dir(self) -> Path:
        return self.path.parent if self.path else Path.cwd()

    def resolve(self, relative: str) -> Path:
        candidate = Path(relative)
        return candidate if candidate.is_absolute() else self.base_dir / candidate

    def link_scenario(self, f_max: Optional[float] = None, mode: Optional[Mode] = None,
                      n_us: Optional[int] = None) -> LinkScenario:
        s = self.scenario
        f_max = s.f_max_hz if f_max is None else f_max
        grid = ToneGrid(f_max=f_max, delta_f=s.delta_f_hz)
        alloc = allocate_subbands(s.n_op, f_max, s.width_hz, s.order) if f_max > LEGACY_EDGE_HZ else None
        return LinkScenario(
            mode=s.mode if mode is None else mode,
            n_op=s.n_op,
            grid=grid,
            params=self.cable_params,
            alloc=alloc,
            n_us=s.n_us if n_us is None else n_us,
            r_v_db=s.r_v_db,
            psd_tx_dbm_hz=s.psd_tx_dbm_hz,
            noise_bg_dbm_hz=s.noise_bg_dbm_hz,
            gamma_db=s.gamma_db,
            margin_db=s.margin_db,
            coding_gain_db=s.coding_gain_db,
            b_max=s.b_max,
            f_sym=s.f_sym_hz,
            integer_bits=s.integer_bits,
        )

    def radio_overrides(self) -> Dict[str, Any]:
        s = self.scenario
        return {
            "r_v_db": s.r_v_db,
            "psd_tx_dbm_hz": s.psd_tx_dbm_hz,
            "noise_bg_dbm_hz": s.noise_bg_dbm_hz,
            "gamma_db": s.gamma_db,
            "margin_db": s.margin_db,
            "coding_gain_db": s.coding_gain_db,
            "b_max": s.b_max,
            "f_sym": s.f_sym_hz,
            "integer_bits": s.integer_bits,
        }

    def report_operators(self) -> Tuple[int, ...]:
        """Operators that get a coverage curve"""
        operators = self.coverage.operators
        if operators is None:
            return (self.scenario.operator,)
        if operators == "all":
            return tuple(range(self.scenario.n_op))
        return operators

    def distributions(self) -> Tuple[DistanceDistribution, DistanceDistribution]:
        return (self._distribution("cab_to_dp", DistanceRole.CAB_TO_DP),
                self._distribution("dp_to_home", DistanceRole.DP_TO_HOME))

    def _distribution(self, prefix: str, role: DistanceRole) -> DistanceDistribution:
        c = self.coverage
        kind = getattr(c, f"{prefix}_kind")
        if kind is DistributionKind.EMPIRICAL:
            return load_empirical_cdf(self.resolve(getattr(c, f"{prefix}_file")), role)
        if kind is DistributionKind.LOGNORMAL:
            return DistanceDistribution.lognormal(getattr(c, f"{prefix}_mu"), getattr(c, f"{prefix}_sigma"), role)
        return DistanceDistribution.constant(getattr(c, f"{prefix}_value_m"), role)


def _describe(error: PydanticValidationError, section: str) -> str:
    errors = error.errors()
    # unknown keys are reported ahead of missing ones
    first = next((e for e in errors if e.get("type") == "extra_forbidden"), errors[0])
    key = ".".join(str(p) for p in first.get("loc", ()))
    message = first.get("msg", "invalid value")
    if first.get("type") == "extra_forbidden":
        return f"unknown key '{key}' in [{section}]"
    if first.get("type") == "missing":
        return f"[{section}] missing required key '{key}'"
    where = f"[{section}] {key}" if key else f"[{section}]"
    return f"{where}: {message}"


def parse_config(path: PathLike) -> ScenarioConfig:
    """Read, default and validate a run description; cross-field rules are checked here"""
    path = Path(path)
    sections = read_ini(path)

    for name in sections:
        if name not in SECTIONS:
            raise ValidationError(f"{path}: unknown section [{name}], expected one of "
                                  f"{', '.join('[' + s + ']' for s in SECTIONS)}")
    if "scenario" not in sections:
        raise ValidationError(f"{path}: missing [scenario] section (mode and n_op are required)")

    models = {}
    for name, model in SECTIONS.items():
        try:
            models[name] = model(**sections.get(name, {}))
        except PydanticValidationError as e:
            raise ValidationError(f"{path}: {_describe(e, name)}")

    cable_file = models["cable"].file
    if cable_file:
        cable_path = Path(cable_file)
        if not cable_path.is_absolute():
            cable_path = path.parent / cable_path
        cable_params = load_cable_params(cable_path)
    elif DEFAULT_CABLE_FILE.exists():
        cable_path = DEFAULT_CABLE_FILE
        cable_params = load_cable_params(cable_path)
    else:
        logger.warning(f"Default cable file {DEFAULT_CABLE_FILE} not found, using built-in calibrated parameters")
        cable_params = CableModelParams()
        cable_path = None

    scenario = models["scenario"]
    operators = models["coverage"].operators
    if isinstance(operators, tuple) and any(op >= scenario.n_op for op in operators):
        raise ValidationError(f"{path}: [coverage] operators {list(operators)} out of range "
                              f"for n_op = {scenario.n_op}")
    all_fmax = (scenario.f_max_hz,) + scenario.f_max_list_hz + models["coverage"].f_max_list_hz
    too_high = [f for f in all_fmax if f > cable_params.f_valid_max]
    if too_high:
        raise ValidationError(f"{path}: f_max {too_high[0]:g} Hz exceeds cable model validity "
                              f"{cable_params.f_valid_max:g} Hz")

    config = ScenarioConfig(
        path=path,
        cable_file=cable_path,
        cable_params=cable_params,
        scenario=scenario,
        coverage=models["coverage"],
        output=models["output"],
    )
    logger.debug(f"Parsed {path}: mode={scenario.mode.value}, n_op={scenario.n_op}, n_us={scenario.n_us}")
    return config


def resolve_seed(config: ScenarioConfig, flag: Optional[int] = None) -> int:
    """Seed precedence: command line flag, then SBVSIM_SEED, then the config file"""
    if flag is not None:
        seed = flag
    elif os.getenv(SEED_ENV_VAR):
        raw = os.getenv(SEED_ENV_VAR).strip()
        try:
            seed = int(raw, 0)
        except ValueError:
            raise ValidationError(f"{SEED_ENV_VAR}={raw!r} is not an integer")
        logger.info(f"Seed {seed} taken from {SEED_ENV_VAR}")
    else:
        seed = config.coverage.seed
    if not 0 <= seed <= MAX_SEED:
        raise ValidationError(f"seed must be in [0, 2^64), got {seed}")
    return seed
