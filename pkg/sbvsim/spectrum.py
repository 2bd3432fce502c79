"""
Spectrum Plan
DMT tone grid, the legacy 17a band plan and the two-level SBV partition of the extension band
"""

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from .exceptions import DomainError, ScenarioError
from .logging_config import get_logger

logger = get_logger(__name__)

DEFAULT_DELTA_F = 4312.5
# Tone-aligned top of the legacy 17a plan (tone 4096); everything above is DS extension spectrum
LEGACY_EDGE_HZ = 17.664e6
DEFAULT_BLOCK_WIDTH = 5e6


class Direction(Enum):
    """Transmission direction of a band"""
    DS = "DS"
    US = "US"


class AllocationOrder(Enum):
    """Order in which extension blocks are dealt to operators"""
    LINEAR = "LINEAR"
    SNAKE = "SNAKE"


@dataclass(frozen=True)
class ToneGrid:
    """Uniform DMT tone grid; tone i sits at f_start + i·delta_f"""
    f_max: float
    delta_f: float = DEFAULT_DELTA_F
    f_start: Optional[float] = None

    def __post_init__(self):
        if self.f_start is None:
            object.__setattr__(self, "f_start", self.delta_f)
        if not self.delta_f > 0:
            raise DomainError(f"delta_f must be > 0, got {self.delta_f}")
        if not 0 <= self.f_start < self.f_max:
            raise DomainError(f"need 0 <= f_start < f_max, got f_start={self.f_start}, f_max={self.f_max}")
        if self.n_tones < 1:
            raise DomainError(f"grid [{self.f_start}, {self.f_max}) holds no tone at spacing {self.delta_f}")

    @property
    def n_tones(self) -> int:
        return int(math.floor((self.f_max - self.f_start) / self.delta_f + 1e-9))

    @cached_property
    def _frequencies(self) -> np.ndarray:
        freqs = self.f_start + self.delta_f * np.arange(self.n_tones, dtype=float)
        freqs.setflags(write=False)
        return freqs

    def frequencies(self) -> np.ndarray:
        """Tone frequencies in Hz (read-only array)"""
        return self._frequencies

    def contains(self, f) -> bool:
        f_arr = np.asarray(f, dtype=float)
        return bool(np.all((f_arr >= self.f_start) & (f_arr < self.f_max)))


@dataclass(frozen=True)
class BandInterval:
    """Half-open frequency interval [f_lo, f_hi) with a transmission direction"""
    name: str
    f_lo: float
    f_hi: float
    direction: Direction

    @property
    def width(self) -> float:
        return self.f_hi - self.f_lo

    def __str__(self) -> str:
        return f"{self.name} {self.direction.value} [{self.f_lo / 1e6:.3f}, {self.f_hi / 1e6:.3f}) MHz"


EXTENSION_BAND = BandInterval("EXT", LEGACY_EDGE_HZ, math.inf, Direction.DS)


@dataclass(frozen=True)
class BandPlan:
    """Sorted, gap-free list of legacy intervals ending at the legacy edge"""
    intervals: Tuple[BandInterval, ...]

    def __post_init__(self):
        if not self.intervals:
            raise DomainError("band plan needs at least one interval")
        for iv in self.intervals:
            if not iv.f_lo < iv.f_hi:
                raise DomainError(f"empty interval {iv}")
        for prev, nxt in zip(self.intervals, self.intervals[1:]):
            if prev.f_hi != nxt.f_lo:
                raise DomainError(f"intervals {prev} and {nxt} overlap or leave a gap")
        if self.intervals[-1].f_hi != LEGACY_EDGE_HZ:
            raise DomainError(f"legacy plan must end at {LEGACY_EDGE_HZ:g} Hz")

    @property
    def f_lo(self) -> float:
        return self.intervals[0].f_lo

    def lookup(self, f: float) -> BandInterval:
        """Interval containing f; the extension band above the legacy edge is always DS"""
        if f >= LEGACY_EDGE_HZ:
            return EXTENSION_BAND
        i = bisect_right([iv.f_lo for iv in self.intervals], f) - 1
        if i < 0:
            raise DomainError(f"{f:g} Hz is below the band plan ({self.f_lo:g} Hz)")
        return self.intervals[i]

    def ds_mask(self, freqs: np.ndarray) -> np.ndarray:
        """Legacy DS membership of each frequency (extension tones excluded)"""
        freqs = np.asarray(freqs, dtype=float)
        mask = np.zeros(freqs.shape, dtype=bool)
        for iv in self.intervals:
            if iv.direction is Direction.DS:
                mask |= (freqs >= iv.f_lo) & (freqs < iv.f_hi)
        return mask

    def width(self, direction: Direction) -> float:
        return sum(iv.width for iv in self.intervals if iv.direction is direction)


def build_17a_bandplan() -> BandPlan:
    """VDSL2 profile 17a plan with 998ADE17-style edges"""
    edges = [
        ("US0", 0.025e6, 0.138e6, Direction.US),
        ("DS1", 0.138e6, 3.75e6, Direction.DS),
        ("US1", 3.75e6, 5.2e6, Direction.US),
        ("DS2", 5.2e6, 8.5e6, Direction.DS),
        ("US2", 8.5e6, 12.0e6, Direction.US),
        ("DS3", 12.0e6, LEGACY_EDGE_HZ, Direction.DS),
    ]
    return BandPlan(tuple(BandInterval(*e) for e in edges))


@dataclass(frozen=True)
class SubBlock:
    index: int
    f_lo: float
    f_hi: float
    owner: int

    @property
    def width(self) -> float:
        return self.f_hi - self.f_lo


@dataclass(frozen=True)
class SubBandAllocation:
    """
    Second level of the SBV partition: the extension band [legacy edge, f_max] cut into
    blocks, each owned by one operator. The legacy band stays shared and non-vectored.
    """
    n_op: int
    f_max: float
    blocks: Tuple[SubBlock, ...]
    width_nominal: float = DEFAULT_BLOCK_WIDTH
    order: AllocationOrder = AllocationOrder.SNAKE
    shared_legacy: Tuple[float, float] = (0.0, LEGACY_EDGE_HZ)

    def __post_init__(self):
        if not self.blocks:
            raise DomainError("allocation has no blocks")
        if self.blocks[0].f_lo != LEGACY_EDGE_HZ or self.blocks[-1].f_hi != self.f_max:
            raise DomainError(f"blocks must tile [{LEGACY_EDGE_HZ:g}, {self.f_max:g}] Hz")
        for prev, nxt in zip(self.blocks, self.blocks[1:]):
            if prev.f_hi != nxt.f_lo:
                raise DomainError(f"blocks {prev.index} and {nxt.index} are not contiguous")
        for block in self.blocks:
            if not 0 <= block.owner < self.n_op:
                raise DomainError(f"block {block.index} owner {block.owner} outside 0..{self.n_op - 1}")
        per_op = self.bandwidth_by_operator()
        if max(per_op) - min(per_op) > self.width_nominal * (1 + 1e-12):
            raise DomainError(f"per-operator bandwidth spread exceeds one block: {per_op}")

    @cached_property
    def _lows(self) -> np.ndarray:
        return np.array([b.f_lo for b in self.blocks])

    @cached_property
    def _owners(self) -> np.ndarray:
        return np.array([b.owner for b in self.blocks], dtype=int)

    def bandwidth_by_operator(self) -> Tuple[float, ...]:
        totals = [0.0] * self.n_op
        for block in self.blocks:
            totals[block.owner] += block.width
        return tuple(totals)

    def owners_for(self, freqs: np.ndarray) -> np.ndarray:
        """Owner of each frequency; -1 outside [legacy edge, f_max)"""
        freqs = np.asarray(freqs, dtype=float)
        idx = np.searchsorted(self._lows, freqs, side="right") - 1
        inside = (idx >= 0) & (freqs < self.f_max)
        return np.where(inside, self._owners[np.clip(idx, 0, None)], -1)

    def owner_of(self, f: float) -> int:
        owner = int(self.owners_for(np.array([f]))[0])
        if owner < 0:
            raise DomainError(f"{f:g} Hz is outside the extension band [{LEGACY_EDGE_HZ:g}, {self.f_max:g})")
        return owner


def _snake_owner(j: int, n_op: int) -> int:
    cycle, r = divmod(j, n_op)
    return r if cycle % 2 == 0 else n_op - 1 - r


def allocate_subbands(n_op: int, f_max: float, width: float = DEFAULT_BLOCK_WIDTH,
                      order: AllocationOrder = AllocationOrder.SNAKE) -> SubBandAllocation:
    """Tile [legacy edge, f_max] into `width` blocks (last one may be short) and deal them out"""
    if n_op < 1:
        raise DomainError(f"n_op must be >= 1, got {n_op}")
    if not width > 0:
        raise DomainError(f"block width must be > 0, got {width}")
    if not f_max > LEGACY_EDGE_HZ:
        raise DomainError(f"f_max {f_max:g} Hz leaves no extension band above {LEGACY_EDGE_HZ:g} Hz")

    order = AllocationOrder(order)
    blocks = []
    j = 0
    while f_max - (LEGACY_EDGE_HZ + j * width) > 1e-9 * width:
        lo = LEGACY_EDGE_HZ + j * width
        hi = min(LEGACY_EDGE_HZ + (j + 1) * width, f_max)
        if f_max - hi <= 1e-9 * width:
            hi = f_max
        owner = j % n_op if order is AllocationOrder.LINEAR else _snake_owner(j, n_op)
        blocks.append(SubBlock(index=j, f_lo=lo, f_hi=hi, owner=owner))
        j += 1

    alloc = SubBandAllocation(n_op=n_op, f_max=f_max, blocks=tuple(blocks),
                              width_nominal=width, order=order)
    logger.debug(f"Allocated {len(blocks)} blocks of {width / 1e6:g} MHz to {n_op} operators ({order.value})")
    return alloc


@dataclass(frozen=True, eq=False)
class ToneSets:
    """Tone indices an operator transmits on"""
    legacy_ds_shared: np.ndarray = field(repr=False)
    extension_owned: np.ndarray = field(repr=False)


def legacy_ds_tones(grid: ToneGrid, plan: BandPlan) -> np.ndarray:
    return np.flatnonzero(plan.ds_mask(grid.frequencies()))


def extension_tones(grid: ToneGrid) -> np.ndarray:
    return np.flatnonzero(grid.frequencies() >= LEGACY_EDGE_HZ)


def tones_for_operator(grid: ToneGrid, plan: BandPlan, alloc: SubBandAllocation, op: int) -> ToneSets:
    """Shared legacy DS tones plus the extension tones falling in blocks owned by op"""
    if not 0 <= op < alloc.n_op:
        raise DomainError(f"operator {op} out of range 0..{alloc.n_op - 1}")
    if grid.f_max > alloc.f_max:
        raise ScenarioError(f"grid reaches {grid.f_max:g} Hz but the allocation stops at {alloc.f_max:g} Hz")
    ext = extension_tones(grid)
    owners = alloc.owners_for(grid.frequencies()[ext])
    return ToneSets(legacy_ds_shared=legacy_ds_tones(grid, plan), extension_owned=ext[owners == op])


def allocation_frame(alloc: SubBandAllocation) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "block_index": [b.index for b in alloc.blocks],
            "f_lo_hz": [b.f_lo for b in alloc.blocks],
            "f_hi_hz": [b.f_hi for b in alloc.blocks],
            "owner": [b.owner for b in alloc.blocks],
        }
    )
