"""
Link Rate Engine
Per-tone SNR, gap-approximation bit loading and per-operator downstream rates
under non-vectored sharing (NV), Sub-band Vectoring (SBV) and full vectoring
"""

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .channel import CableModelParams, direct_gain, fext_gain
from .exceptions import DomainError, ModelValidityError, ScenarioError
from .logging_config import get_logger
from .runner import evaluate_ordered
from .spectrum import (
    DEFAULT_BLOCK_WIDTH,
    LEGACY_EDGE_HZ,
    AllocationOrder,
    BandPlan,
    SubBandAllocation,
    ToneGrid,
    allocate_subbands,
    build_17a_bandplan,
    extension_tones,
    legacy_ds_tones,
)

logger = get_logger(__name__)

SWEEP_COLUMNS = ["x", "operator", "mode", "rate_mbps", "legacy_mbps", "extension_mbps"]


class Mode(Enum):
    """How the operators share the cable"""
    NV = "NV"
    SBV = "SBV"
    FULL_VECTOR = "FULL_VECTOR"


@dataclass(frozen=True)
class LinkScenario:
    """Everything needed to compute one operator's rate at one distance"""
    mode: Mode
    n_op: int
    grid: ToneGrid
    params: CableModelParams = field(default_factory=CableModelParams)
    alloc: Optional[SubBandAllocation] = None
    n_us: int = 24
    r_v_db: float = 10.0
    psd_tx_dbm_hz: float = -60.0
    noise_bg_dbm_hz: float = -140.0
    gamma_db: float = 9.75
    margin_db: float = 6.0
    coding_gain_db: float = 3.0
    b_max: float = 15.0
    f_sym: float = 4000.0
    integer_bits: bool = False
    plan: BandPlan = field(default_factory=build_17a_bandplan)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.n_op < 1:
            raise ScenarioError(f"n_op must be >= 1, got {self.n_op}")
        if self.n_us < 0:
            raise ScenarioError(f"n_us must be >= 0, got {self.n_us}")
        if self.r_v_db < 0:
            raise ScenarioError(f"r_v_db must be >= 0, got {self.r_v_db}")
        if self.b_max < 1:
            raise ScenarioError(f"b_max must be >= 1, got {self.b_max}")
        if not self.f_sym > 0:
            raise ScenarioError(f"f_sym must be > 0, got {self.f_sym}")
        if not self.gap_eff_db > 0:
            raise ScenarioError(f"effective gap must be > 0 dB, got {self.gap_eff_db:g}")
        if self.grid.f_max > self.params.f_valid_max:
            raise ModelValidityError(
                f"f_max {self.grid.f_max:g} Hz beyond cable model validity {self.params.f_valid_max:g} Hz"
            )
        if self.mode is Mode.FULL_VECTOR and self.n_op != 1:
            raise ScenarioError(f"FULL_VECTOR needs a single operator, got n_op={self.n_op}")
        if self.mode is Mode.SBV and self.has_extension:
            if self.alloc is None:
                raise ScenarioError("SBV over an extension band needs a sub-band allocation")
            if self.alloc.n_op != self.n_op:
                raise ScenarioError(f"allocation is for {self.alloc.n_op} operators, scenario has {self.n_op}")
            if self.alloc.f_max != self.grid.f_max:
                raise ScenarioError(
                    f"allocation ends at {self.alloc.f_max:g} Hz but the grid at {self.grid.f_max:g} Hz"
                )

    @property
    def gap_eff_db(self) -> float:
        return self.gamma_db + self.margin_db - self.coding_gain_db

    @property
    def p_tx(self) -> float:
        """Transmit PSD, mW/Hz"""
        return 10.0 ** (self.psd_tx_dbm_hz / 10.0)

    @property
    def noise_bg(self) -> float:
        """Background noise PSD, mW/Hz"""
        return 10.0 ** (self.noise_bg_dbm_hz / 10.0)

    @property
    def has_extension(self) -> bool:
        return self.grid.f_max > LEGACY_EDGE_HZ

    @cached_property
    def _legacy_freqs(self) -> np.ndarray:
        return self.grid.frequencies()[legacy_ds_tones(self.grid, self.plan)]

    @cached_property
    def _extension_freqs(self) -> np.ndarray:
        return self.grid.frequencies()[extension_tones(self.grid)]

    @cached_property
    def _owned_freqs(self) -> Tuple[np.ndarray, ...]:
        ext = self._extension_freqs
        if self.alloc is None:
            return tuple(ext[:0] for _ in range(self.n_op))
        owners = self.alloc.owners_for(ext)
        return tuple(ext[owners == op] for op in range(self.n_op))

    def with_mode(self, mode: Union[Mode, str]) -> "LinkScenario":
        return dataclasses.replace(self, mode=Mode(mode))

    def with_fmax(self, f_max: float) -> "LinkScenario":
        """Same scenario on a grid ending at f_max, sub-bands reallocated with the same width and order"""
        width = self.alloc.width_nominal if self.alloc else DEFAULT_BLOCK_WIDTH
        order = self.alloc.order if self.alloc else AllocationOrder.SNAKE
        grid = ToneGrid(f_max=f_max, delta_f=self.grid.delta_f, f_start=self.grid.f_start)
        alloc = allocate_subbands(self.n_op, f_max, width, order) if f_max > LEGACY_EDGE_HZ else None
        return dataclasses.replace(self, grid=grid, alloc=alloc)


@dataclass(frozen=True)
class RateResult:
    """Per-operator downstream rate split into legacy and extension contributions, Mbit/s"""
    rate_mbps: float
    legacy_mbps: float
    extension_mbps: float


def tone_snr(sc: LinkScenario, f, d: float, vectored: bool):
    """
    Linear SNR of the tones at f for a loop of length d.
    Vectored tones see background noise raised by r_v; non-vectored ones see
    background noise plus power-sum FEXT from n_us disturbers.
    """
    if not sc.grid.contains(f):
        raise DomainError(f"frequency outside tone grid [{sc.grid.f_start:g}, {sc.grid.f_max:g}) Hz")
    return _snr(sc, np.asarray(f, dtype=float), d, vectored)


def _snr(sc: LinkScenario, f: np.ndarray, d: float, vectored: bool):
    signal = sc.p_tx * np.asarray(direct_gain(sc.params, f, d))
    if vectored:
        noise = sc.noise_bg * 10.0 ** (sc.r_v_db / 10.0)
    else:
        noise = sc.noise_bg + sc.p_tx * np.asarray(fext_gain(sc.params, f, d, sc.n_us))
    snr = signal / noise
    return float(snr) if snr.ndim == 0 else snr


def bits_per_tone(snr, gap_eff_db: float, b_max: float, integer: bool = False):
    """Gap-approximation loading: min(b_max, log2(1 + snr/gap)), optionally floored"""
    bits = np.minimum(b_max, np.log2(1.0 + np.asarray(snr, dtype=float) / 10.0 ** (gap_eff_db / 10.0)))
    if integer:
        bits = np.floor(bits)
    return float(bits) if bits.ndim == 0 else bits


def _band_rate_mbps(sc: LinkScenario, freqs: np.ndarray, d: float, vectored: bool) -> float:
    if freqs.size == 0:
        return 0.0
    bits = bits_per_tone(_snr(sc, freqs, d, vectored), sc.gap_eff_db, sc.b_max, sc.integer_bits)
    return sc.f_sym * float(np.sum(bits)) / 1e6


def operator_rate(sc: LinkScenario, op: int, d: float) -> RateResult:
    """
    Downstream rate of operator op at distance d.

    The shared legacy band is loaded non-vectored and split evenly across the
    n_op operators. Above the legacy edge SBV loads the operator's own blocks
    vectored, NV loads every extension tone with alien FEXT and splits it, and
    FULL_VECTOR (single operator) vectors every DS tone.
    """
    if not 0 <= op < sc.n_op:
        raise DomainError(f"operator {op} out of range 0..{sc.n_op - 1}")
    if not d >= 0:
        raise DomainError(f"distance must be >= 0 m, got {d}")

    if sc.mode is Mode.FULL_VECTOR:
        legacy = _band_rate_mbps(sc, sc._legacy_freqs, d, vectored=True)
        extension = _band_rate_mbps(sc, sc._extension_freqs, d, vectored=True)
    else:
        legacy = _band_rate_mbps(sc, sc._legacy_freqs, d, vectored=False) / sc.n_op
        if sc.mode is Mode.SBV:
            extension = _band_rate_mbps(sc, sc._owned_freqs[op], d, vectored=True)
        else:
            extension = _band_rate_mbps(sc, sc._extension_freqs, d, vectored=False) / sc.n_op

    return RateResult(rate_mbps=legacy + extension, legacy_mbps=legacy, extension_mbps=extension)


def fairness_gap(sc: LinkScenario, d: float) -> float:
    """Largest relative deviation of an operator's rate from the operator mean at distance d"""
    rates = np.array([operator_rate(sc, op, d).rate_mbps for op in range(sc.n_op)])
    mean = rates.mean()
    if mean == 0:
        return 0.0
    return float(np.max(np.abs(rates - mean)) / mean)


@dataclass(frozen=True)
class SweepPoint:
    x: float
    operator: int
    mode: Mode
    result: RateResult


def sweep_fmax(template: LinkScenario, d: float, f_max_list: Sequence[float],
               modes: Sequence[Union[Mode, str]] = (Mode.NV, Mode.SBV),
               operators: Optional[Sequence[int]] = None, workers: int = 1) -> List[SweepPoint]:
    """Rate of every requested operator and mode at distance d for each f_max"""
    f_max_list = [float(f) for f in f_max_list]
    if not f_max_list:
        raise DomainError("f_max list is empty")
    if any(b <= a for a, b in zip(f_max_list, f_max_list[1:])):
        raise DomainError(f"f_max list must be strictly ascending: {f_max_list}")
    modes = [Mode(m) for m in modes]
    if not modes:
        raise DomainError("no mode requested")
    operators = list(range(template.n_op)) if operators is None else list(operators)

    scenarios = {}
    for f_max in f_max_list:
        base = template.with_fmax(f_max)
        for mode in modes:
            scenarios[(mode, f_max)] = base.with_mode(mode)

    tasks = [(mode, op, f_max) for mode in modes for op in operators for f_max in f_max_list]

    def evaluate(task):
        mode, op, f_max = task
        return SweepPoint(x=f_max, operator=op, mode=mode,
                          result=operator_rate(scenarios[(mode, f_max)], op, d))

    logger.info(f"Sweeping f_max over {len(f_max_list)} values at d={d:g} m, modes "
                f"{','.join(m.value for m in modes)}")
    return evaluate_ordered(evaluate, tasks, workers, name="f_max points")


def sweep_distance(sc: LinkScenario, op: int, d_list: Sequence[float], workers: int = 1) -> List[SweepPoint]:
    d_list = [float(d) for d in d_list]
    if not d_list:
        raise DomainError("distance list is empty")
    if any(not d >= 0 for d in d_list):
        raise DomainError(f"distances must be >= 0 m: {d_list}")
    if not 0 <= op < sc.n_op:
        raise DomainError(f"operator {op} out of range 0..{sc.n_op - 1}")

    def evaluate(d):
        return SweepPoint(x=d, operator=op, mode=sc.mode, result=operator_rate(sc, op, d))

    return evaluate_ordered(evaluate, d_list, workers, name="distance points")


def sweep_frame(points: Sequence[SweepPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (p.x, p.operator, p.mode.value, p.result.rate_mbps, p.result.legacy_mbps, p.result.extension_mbps)
            for p in points
        ],
        columns=SWEEP_COLUMNS,
    )
