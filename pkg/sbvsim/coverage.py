"""
Coverage Estimation
Loop-length distributions, Monte Carlo sampling of CAB-to-terminal distances
and the coverage C-CDF (probability that the achievable rate reaches a threshold)
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import ndtri

from .channel import CableModelParams
from .exceptions import DomainError, SchemaError, ValidationError
from .fileio import PathLike, read_csv_checked
from .linkrate import LinkScenario, Mode, operator_rate
from .logging_config import get_logger
from .rng import uniform_variates
from .spectrum import (
    DEFAULT_BLOCK_WIDTH,
    DEFAULT_DELTA_F,
    LEGACY_EDGE_HZ,
    AllocationOrder,
    ToneGrid,
    allocate_subbands,
)

logger = get_logger(__name__)

COVERAGE_COLUMNS = ["threshold_mbps", "coverage", "mode", "n_op", "n_us", "f_max_hz", "seed", "n_samples"]
# Appended to the coverage columns only when a frame holds curves of several operators
OPERATOR_COLUMN = "operator"
EMPIRICAL_CDF_COLUMNS = ["distance_m", "cdf"]
CDF_END_TOLERANCE = 1e-6

DEFAULT_N_SAMPLES = 100_000
DEFAULT_THRESHOLDS = tuple(float(t) for t in range(0, 301, 5))
# Rate targets reported in run summaries, Mbit/s
REPORT_TARGETS = (30.0, 100.0)
SAMPLE_CHUNK = 65_536


class DistributionKind(Enum):
    EMPIRICAL = "EMPIRICAL"
    LOGNORMAL = "LOGNORMAL"
    CONSTANT = "CONSTANT"


class DistanceRole(Enum):
    CAB_TO_DP = "CAB_TO_DP"
    DP_TO_HOME = "DP_TO_HOME"
    TOTAL = "TOTAL"


@dataclass(frozen=True)
class DistanceDistribution:
    """
    Loop-length distribution of one network section.

    EMPIRICAL uses `points` ((distance m, CDF) pairs, inverted piecewise-linearly),
    LOGNORMAL uses `mu`/`sigma` of the natural log of the distance in metres,
    CONSTANT uses `value`.
    """
    kind: DistributionKind
    role: DistanceRole = DistanceRole.TOTAL
    points: Tuple[Tuple[float, float], ...] = ()
    mu: float = 0.0
    sigma: float = 1.0
    value: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DistributionKind(self.kind))
        object.__setattr__(self, "role", DistanceRole(self.role))
        if self.kind is DistributionKind.EMPIRICAL:
            _check_empirical(self.points)
        elif self.kind is DistributionKind.LOGNORMAL:
            if not (self.sigma > 0 and math.isfinite(self.sigma) and math.isfinite(self.mu)):
                raise ValidationError(f"lognormal needs finite mu and sigma > 0, got mu={self.mu}, sigma={self.sigma}")
        elif not (self.value >= 0 and math.isfinite(self.value)):
            raise ValidationError(f"constant distance must be >= 0 m, got {self.value}")

    @classmethod
    def empirical(cls, points: Sequence[Tuple[float, float]],
                  role: DistanceRole = DistanceRole.TOTAL) -> "DistanceDistribution":
        return cls(DistributionKind.EMPIRICAL, role,
                   points=tuple((float(d), float(p)) for d, p in points))

    @classmethod
    def lognormal(cls, mu: float, sigma: float, role: DistanceRole = DistanceRole.TOTAL) -> "DistanceDistribution":
        return cls(DistributionKind.LOGNORMAL, role, mu=float(mu), sigma=float(sigma))

    @classmethod
    def lognormal_from_median(cls, median_m: float, sigma: float,
                              role: DistanceRole = DistanceRole.TOTAL) -> "DistanceDistribution":
        if not median_m > 0:
            raise ValidationError(f"lognormal median must be > 0 m, got {median_m}")
        return cls.lognormal(math.log(median_m), sigma, role)

    @classmethod
    def constant(cls, value_m: float, role: DistanceRole = DistanceRole.TOTAL) -> "DistanceDistribution":
        return cls(DistributionKind.CONSTANT, role, value=float(value_m))

    def quantile(self, u) -> np.ndarray:
        """Inverse CDF at variates u in [0, 1)"""
        u = np.asarray(u, dtype=float)
        if self.kind is DistributionKind.CONSTANT:
            return np.full(u.shape, self.value)
        if self.kind is DistributionKind.LOGNORMAL:
            return np.exp(self.mu + self.sigma * ndtri(u))

        dist = np.array([p[0] for p in self.points])
        cdf = np.array([p[1] for p in self.points])
        # First tabulated point whose CDF reaches u; interpolate on the rising segment before it
        j = np.searchsorted(cdf, u, side="left")
        hi = np.clip(j, 1, len(cdf) - 1)
        lo = hi - 1
        span = cdf[hi] - cdf[lo]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(span > 0, (u - cdf[lo]) / span, 0.0)
        out = dist[lo] + np.clip(frac, 0.0, 1.0) * (dist[hi] - dist[lo])
        out = np.where(j == 0, dist[0], out)
        return np.where(j >= len(cdf), dist[-1], out)

    def median(self) -> float:
        return float(self.quantile(0.5))

    def describe(self) -> str:
        if self.kind is DistributionKind.CONSTANT:
            return f"{self.role.value} constant {self.value:g} m"
        if self.kind is DistributionKind.LOGNORMAL:
            return f"{self.role.value} lognormal median {math.exp(self.mu):.1f} m sigma {self.sigma:g}"
        return f"{self.role.value} empirical ({len(self.points)} points, median {self.median():.1f} m)"


def _check_empirical(points: Sequence[Tuple[float, float]]):
    if len(points) < 2:
        raise ValidationError("empirical CDF needs at least two points")
    prev_d, prev_p = None, None
    for i, (d, p) in enumerate(points):
        if not (math.isfinite(d) and d >= 0):
            raise ValidationError(f"empirical point {i}: distance must be >= 0 m, got {d}")
        if not (math.isfinite(p) and 0 <= p <= 1):
            raise ValidationError(f"empirical point {i}: CDF must be in [0, 1], got {p}")
        if prev_d is not None and d <= prev_d:
            raise ValidationError(f"empirical point {i}: distances must be strictly increasing ({d} after {prev_d})")
        if prev_p is not None and p < prev_p:
            raise ValidationError(f"empirical point {i}: CDF must be nondecreasing ({p} after {prev_p})")
        prev_d, prev_p = d, p
    if abs(prev_p - 1.0) > CDF_END_TOLERANCE:
        raise ValidationError(f"empirical CDF must end at 1 (within {CDF_END_TOLERANCE:g}), ends at {prev_p}")


def _check_variates(u: np.ndarray):
    if np.any(~((u >= 0) & (u < 1))):
        raise DomainError("uniform variates must lie in [0, 1)")


def sample_distance(cab_to_dp: DistanceDistribution, dp_to_home: DistanceDistribution,
                    draw: Sequence[float]) -> float:
    """Total CAB-to-terminal distance from two uniform variates"""
    u = np.asarray(draw, dtype=float)
    if u.shape != (2,):
        raise DomainError(f"need exactly two variates, got shape {u.shape}")
    return float(sample_distances(cab_to_dp, dp_to_home, u.reshape(1, 2))[0])


def sample_distances(cab_to_dp: DistanceDistribution, dp_to_home: DistanceDistribution,
                     variates: np.ndarray) -> np.ndarray:
    """Vector form of sample_distance over an (n, 2) variate array"""
    variates = np.asarray(variates, dtype=float)
    _check_variates(variates)
    return cab_to_dp.quantile(variates[:, 0]) + dp_to_home.quantile(variates[:, 1])


def load_empirical_cdf(path: PathLike, role: DistanceRole = DistanceRole.TOTAL) -> DistanceDistribution:
    """Read a `distance_m,cdf` file, reporting the first offending data row"""
    frame = read_csv_checked(path, EMPIRICAL_CDF_COLUMNS)
    extra = [c for c in frame.columns if c not in EMPIRICAL_CDF_COLUMNS]
    if extra:
        raise SchemaError(f"{path}: unexpected columns {', '.join(extra)}")
    if frame.empty:
        raise ValidationError(f"{path}: no data rows")

    points = []
    prev_d, prev_p = None, None
    for i, (raw_d, raw_p) in enumerate(zip(frame["distance_m"], frame["cdf"]), start=1):
        where = f"{path}: row {i} (line {i + 1})"
        try:
            d, p = float(raw_d), float(raw_p)
        except (TypeError, ValueError):
            raise ValidationError(f"{where}: non-numeric value {raw_d!r}, {raw_p!r}")
        if not (math.isfinite(d) and math.isfinite(p)):
            raise ValidationError(f"{where}: missing or non-finite value")
        if d < 0:
            raise ValidationError(f"{where}: negative distance {d:g} m")
        if not 0 <= p <= 1:
            raise ValidationError(f"{where}: CDF {p:g} outside [0, 1]")
        if prev_d is not None and d <= prev_d:
            raise ValidationError(f"{where}: distance {d:g} m not above previous {prev_d:g} m")
        if prev_p is not None and p < prev_p:
            raise ValidationError(f"{where}: CDF {p:g} decreases from {prev_p:g}")
        points.append((d, p))
        prev_d, prev_p = d, p

    if abs(prev_p - 1.0) > CDF_END_TOLERANCE:
        raise ValidationError(f"{path}: row {len(points)} (line {len(points) + 1}): CDF ends at {prev_p:g}, "
                              f"expected 1 within {CDF_END_TOLERANCE:g}")
    if len(points) < 2:
        raise ValidationError(f"{path}: need at least two rows")

    dist = DistanceDistribution.empirical(points, role)
    logger.info(f"Loaded empirical CDF from {path}: {len(points)} points, median {dist.median():.1f} m")
    return dist


@dataclass(frozen=True)
class CoverageCurve:
    """Empirical C-CDF of an operator's rate over sampled loop lengths"""
    thresholds: Tuple[float, ...]
    coverage: Tuple[float, ...]
    n_samples: int
    seed: int
    mode: Mode
    n_op: int
    n_us: int
    f_max_hz: float
    operator: int = 0
    label: str = ""

    def __post_init__(self):
        if len(self.thresholds) != len(self.coverage) or not self.thresholds:
            raise DomainError("coverage curve needs one value per threshold")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise DomainError("coverage thresholds must be strictly increasing")
        if any(not 0 <= c <= 1 for c in self.coverage):
            raise DomainError("coverage values must lie in [0, 1]")
        if any(b > a for a, b in zip(self.coverage, self.coverage[1:])):
            raise DomainError("coverage must be nonincreasing in the threshold")

    def at(self, threshold: float) -> float:
        """Coverage at the largest tabulated threshold not above `threshold`"""
        i = int(np.searchsorted(self.thresholds, threshold, side="right")) - 1
        if i < 0:
            return 1.0
        return self.coverage[i]


def _validate_thresholds(thresholds: Sequence[float]) -> Tuple[float, ...]:
    thresholds = tuple(float(t) for t in thresholds)
    if not thresholds:
        raise DomainError("threshold list is empty")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise DomainError(f"thresholds must be strictly increasing: {thresholds}")
    return thresholds


def draw_distances(cab_to_dp: DistanceDistribution, dp_to_home: DistanceDistribution,
                   n_samples: int, seed: int, chunk: int = SAMPLE_CHUNK) -> np.ndarray:
    """n_samples total distances; sample i depends only on (seed, i)"""
    parts = []
    for start in range(0, n_samples, chunk):
        count = min(chunk, n_samples - start)
        parts.append(sample_distances(cab_to_dp, dp_to_home, uniform_variates(seed, start, count)))
    return np.concatenate(parts)


def coverage_ccdf(sc: LinkScenario, op: int, cab_to_dp: DistanceDistribution, dp_to_home: DistanceDistribution,
                  thresholds: Sequence[float] = DEFAULT_THRESHOLDS, n_samples: int = DEFAULT_N_SAMPLES,
                  seed: int = 1, label: str = "") -> CoverageCurve:
    """
    Fraction of sampled terminals whose rate reaches each threshold.

    Rate is nonincreasing in distance, so the samples are sorted once and each
    threshold is located by bisection; operator_rate is evaluated exactly at the
    sampled distances it touches. The counts equal a per-sample evaluation.
    """
    thresholds = _validate_thresholds(thresholds)
    if n_samples < 1:
        raise DomainError(f"n_samples must be >= 1, got {n_samples}")
    if not 0 <= op < sc.n_op:
        raise DomainError(f"operator {op} out of range 0..{sc.n_op - 1}")

    distances = np.sort(draw_distances(cab_to_dp, dp_to_home, n_samples, seed))
    cache: Dict[float, float] = {}

    def rate_at(i: int) -> float:
        d = float(distances[i])
        if d not in cache:
            cache[d] = operator_rate(sc, op, d).rate_mbps
        return cache[d]

    counts = []
    upper = n_samples
    for t in thresholds:
        lo, hi = 0, upper
        while lo < hi:
            mid = (lo + hi) // 2
            if rate_at(mid) >= t:
                lo = mid + 1
            else:
                hi = mid
        counts.append(lo)
        upper = lo

    curve = CoverageCurve(
        thresholds=thresholds,
        coverage=tuple(c / n_samples for c in counts),
        n_samples=n_samples,
        seed=seed,
        mode=sc.mode,
        n_op=sc.n_op,
        n_us=sc.n_us,
        f_max_hz=sc.grid.f_max,
        operator=op,
        label=label,
    )
    logger.debug(f"Coverage {label or sc.mode.value}: {len(cache)} rate evaluations for {n_samples} samples")
    return curve


def log_targets(curve: CoverageCurve):
    summary = ", ".join(f"{t:g} Mbit/s: {curve.at(t):.3f}" for t in REPORT_TARGETS)
    logger.info(f"{curve.label or curve.mode.value} (n_us={curve.n_us}, f_max={curve.f_max_hz / 1e6:g} MHz, "
                f"operator {curve.operator}/{curve.n_op}) coverage {summary}")


DEFAULT_CAB_TO_DP = DistanceDistribution.lognormal_from_median(200.0, 0.817, DistanceRole.CAB_TO_DP)
DEFAULT_DP_TO_HOME = DistanceDistribution.constant(30.0, DistanceRole.DP_TO_HOME)


@dataclass(frozen=True)
class ClusterPreset:
    """
    Market-area scenario: operator count, distance model and descriptive census figures.
    `operator_counts` lists the operator counts the cluster is studied with; `n_op` is the default.
    """
    name: str
    n_op: int
    operator_counts: Tuple[int, ...] = ()
    cab_to_dp: DistanceDistribution = DEFAULT_CAB_TO_DP
    dp_to_home: DistanceDistribution = DEFAULT_DP_TO_HOME
    municipalities: str = ""
    population_millions: float = 0.0
    population_share: float = 0.0
    households_millions: float = 0.0
    ds_target_mbps: float = 100.0

    def __post_init__(self):
        if self.n_op < 2:
            raise ValidationError(f"cluster preset {self.name} needs n_op >= 2, got {self.n_op}")
        if not self.operator_counts:
            object.__setattr__(self, "operator_counts", (self.n_op,))
        elif self.n_op not in self.operator_counts:
            raise ValidationError(f"cluster preset {self.name}: default n_op {self.n_op} "
                                  f"not among {self.operator_counts}")

    def check_operator_count(self, n_op: int):
        if n_op not in self.operator_counts:
            allowed = ", ".join(str(n) for n in self.operator_counts)
            raise ValidationError(f"cluster {self.name} is run with n_op in {{{allowed}}}, got n_op = {n_op}")


CLUSTER_PRESETS: Dict[str, ClusterPreset] = {
    "A": ClusterPreset(name="A", n_op=3, operator_counts=(3, 2), municipalities="15",
                       population_millions=9.4, population_share=0.15, households_millions=3.9),
    "B": ClusterPreset(name="B", n_op=2, operator_counts=(2,), municipalities="~1,120",
                       population_millions=27.0, population_share=0.45, households_millions=11.2),
}


def get_cluster_preset(name: str) -> ClusterPreset:
    try:
        return CLUSTER_PRESETS[name.strip().upper()]
    except KeyError:
        raise ValidationError(f"unknown cluster '{name}', expected one of {', '.join(CLUSTER_PRESETS)}")


@dataclass(frozen=True)
class ScenarioOverrides:
    """
    Knobs for run_cluster_scenario; None means take the preset's value.
    `operators` asks for one curve per listed operator; None means just `operator`.
    """
    n_op: Optional[int] = None
    operator: int = 0
    operators: Optional[Tuple[int, ...]] = None
    n_us_values: Tuple[int, ...] = (24, 12)
    f_max_values: Tuple[float, ...] = (35.2e6,)
    modes: Tuple[Mode, ...] = (Mode.NV, Mode.SBV)
    thresholds: Tuple[float, ...] = DEFAULT_THRESHOLDS
    n_samples: int = DEFAULT_N_SAMPLES
    seed: int = 1
    params: CableModelParams = field(default_factory=CableModelParams)
    cab_to_dp: Optional[DistanceDistribution] = None
    dp_to_home: Optional[DistanceDistribution] = None
    width: float = DEFAULT_BLOCK_WIDTH
    order: AllocationOrder = AllocationOrder.SNAKE
    delta_f: float = DEFAULT_DELTA_F
    baseline: bool = True
    radio: Mapping[str, Any] = field(default_factory=dict)


def _cluster_scenario(mode: Mode, n_op: int, n_us: int, f_max: float, ov: ScenarioOverrides) -> LinkScenario:
    grid = ToneGrid(f_max=f_max, delta_f=ov.delta_f)
    alloc = allocate_subbands(n_op, f_max, ov.width, ov.order) if f_max > LEGACY_EDGE_HZ else None
    return LinkScenario(mode=mode, n_op=n_op, grid=grid, params=ov.params, alloc=alloc, n_us=n_us, **ov.radio)


def run_cluster_scenario(preset: ClusterPreset, overrides: Optional[ScenarioOverrides] = None) -> List[CoverageCurve]:
    """
    Coverage curves for every (n_us, f_max, mode, operator) combination of a cluster,
    plus a non-vectored 17a-only baseline per n_us and operator.
    """
    ov = overrides or ScenarioOverrides()
    n_op = ov.n_op if ov.n_op is not None else preset.n_op
    operators = tuple(ov.operators) if ov.operators is not None else (ov.operator,)
    if not operators or any(not 0 <= op < n_op for op in operators):
        raise DomainError(f"operators {operators} out of range 0..{n_op - 1}")
    cab_to_dp = ov.cab_to_dp or preset.cab_to_dp
    dp_to_home = ov.dp_to_home or preset.dp_to_home
    logger.info(f"Cluster {preset.name}: {n_op} operators, reporting {', '.join(map(str, operators))}, "
                f"{cab_to_dp.describe()} + {dp_to_home.describe()}")

    curves = []
    for n_us in ov.n_us_values:
        runs = [(Mode(mode), f_max, f"{Mode(mode).value} {f_max / 1e6:g} MHz")
                for f_max in ov.f_max_values for mode in ov.modes]
        if ov.baseline:
            runs.append((Mode.NV, LEGACY_EDGE_HZ, "17a"))
        for mode, f_max, label in runs:
            sc = _cluster_scenario(mode, n_op, n_us, f_max, ov)
            for op in operators:
                suffix = f" operator {op}" if len(operators) > 1 else ""
                curve = coverage_ccdf(sc, op, cab_to_dp, dp_to_home, ov.thresholds, ov.n_samples, ov.seed,
                                      label=f"Cluster {preset.name} {label}{suffix}")
                log_targets(curve)
                curves.append(curve)
    return curves


def coverage_frame(curves: Sequence[CoverageCurve]) -> pd.DataFrame:
    per_operator = len({curve.operator for curve in curves}) > 1
    columns = COVERAGE_COLUMNS + [OPERATOR_COLUMN] if per_operator else COVERAGE_COLUMNS
    rows = []
    for curve in curves:
        f_max = int(round(curve.f_max_hz)) if float(curve.f_max_hz).is_integer() else curve.f_max_hz
        for t, c in zip(curve.thresholds, curve.coverage):
            row = (t, c, curve.mode.value, curve.n_op, curve.n_us, f_max, curve.seed, curve.n_samples)
            rows.append(row + (curve.operator,) if per_operator else row)
    return pd.DataFrame(rows, columns=columns)
