"""
Copper Pair Channel Model
Direct-path insertion loss and power-sum FEXT coupling of a twisted pair
"""

from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .exceptions import DomainError, ModelValidityError, ValidationError
from .fileio import PathLike, read_ini
from .logging_config import get_logger

logger = get_logger(__name__)

FloatOrArray = Union[float, np.ndarray]

MHZ = 1e6
# Reference disturber count of the power-sum FEXT model
FEXT_REFERENCE_DISTURBERS = 49
FEXT_DISTURBER_EXPONENT = 0.6

# Keys of the cable parameter file, mapped to field names
CABLE_FILE_KEYS = {
    "k1": "k1",
    "k2": "k2",
    "kx_db": "kx_db",
    "f0_hz": "f0",
    "d0_m": "d0",
    "f_valid_max_hz": "f_valid_max",
}


class CableModelParams(BaseModel):
    """Parametric attenuation and FEXT coupling coefficients of a twisted-pair cable"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    k1: float = Field(default=10.0, ge=0, description="dB per km per sqrt(MHz)")
    k2: float = Field(default=0.2, ge=0, description="dB per km per MHz")
    kx_db: float = Field(default=-21.0, lt=0, description="FEXT coupling at f0 and d0, dB")
    f0: float = Field(default=1e6, gt=0, description="FEXT reference frequency, Hz")
    d0: float = Field(default=1000.0, gt=0, description="FEXT reference coupling length, m")
    f_valid_max: float = Field(default=200e6, gt=0, description="Upper model validity frequency, Hz")

    @model_validator(mode="after")
    def _finite(self) -> "CableModelParams":
        for name in CABLE_FILE_KEYS.values():
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self


def _check_domain(params: CableModelParams, f: FloatOrArray, d: FloatOrArray) -> tuple:
    f_arr = np.asarray(f, dtype=float)
    d_arr = np.asarray(d, dtype=float)
    invalid = ~((f_arr > 0) & (f_arr <= params.f_valid_max))
    if np.any(invalid):
        bad = float(np.ravel(f_arr)[np.argmax(np.ravel(invalid))])
        raise ModelValidityError(
            f"frequency {bad:g} Hz outside model range (0, {params.f_valid_max:g}] Hz"
        )
    if np.any(~(d_arr >= 0)):
        raise DomainError(f"distance must be >= 0 m, got {float(np.min(d_arr)):g}")
    return f_arr, d_arr


def _out(value: np.ndarray) -> FloatOrArray:
    return float(value) if np.ndim(value) == 0 else value


def insertion_loss_db(params: CableModelParams, f: FloatOrArray, d: FloatOrArray) -> FloatOrArray:
    """
    Insertion loss in dB: (k1·sqrt(f/1 MHz) + k2·f/1 MHz)·d/1 km.
    Accepts scalars or numpy arrays for f and d.
    """
    f_arr, d_arr = _check_domain(params, f, d)
    f_mhz = f_arr / MHZ
    return _out((params.k1 * np.sqrt(f_mhz) + params.k2 * f_mhz) * (d_arr / 1000.0))


def direct_gain(params: CableModelParams, f: FloatOrArray, d: FloatOrArray) -> FloatOrArray:
    """Linear power gain of the direct path"""
    return _out(np.power(10.0, -np.asarray(insertion_loss_db(params, f, d)) / 10.0))


def fext_gain(params: CableModelParams, f: FloatOrArray, d: FloatOrArray, n_disturbers: int) -> FloatOrArray:
    """
    Power-sum FEXT gain from n_disturbers equal-level disturbers:
    H·10^(kx/10)·(n/49)^0.6·(d/d0)·(f/f0)^2
    """
    if n_disturbers < 0:
        raise DomainError(f"n_disturbers must be >= 0, got {n_disturbers}")
    h = np.asarray(direct_gain(params, f, d))
    f_arr = np.asarray(f, dtype=float)
    d_arr = np.asarray(d, dtype=float)
    coupling = 10.0 ** (params.kx_db / 10.0)
    count = (n_disturbers / FEXT_REFERENCE_DISTURBERS) ** FEXT_DISTURBER_EXPONENT
    return _out(h * coupling * count * (d_arr / params.d0) * (f_arr / params.f0) ** 2)


def load_cable_params(path: PathLike) -> CableModelParams:
    """Load a cable parameter file; keys missing from the file keep their calibrated defaults"""
    sections = read_ini(path)
    unknown_sections = [s for s in sections if s != "cable"]
    if unknown_sections:
        raise ValidationError(f"{path}: unknown section [{unknown_sections[0]}], only [cable] is allowed")
    if "cable" not in sections:
        raise ValidationError(f"{path}: missing [cable] section")

    values = {}
    for key, raw in sections["cable"].items():
        if key not in CABLE_FILE_KEYS:
            raise ValidationError(
                f"{path}: unknown key '{key}' in [cable], expected one of {', '.join(CABLE_FILE_KEYS)}"
            )
        try:
            values[CABLE_FILE_KEYS[key]] = float(raw)
        except ValueError:
            raise ValidationError(f"{path}: key '{key}' must be a number, got {raw!r}")

    try:
        params = CableModelParams(**values)
    except ValueError as e:
        raise ValidationError(f"{path}: invalid cable parameters: {_first_error(e)}")
    logger.debug(f"Loaded cable parameters from {path}: {params}")
    return params


def _first_error(error: Exception) -> str:
    errors = getattr(error, "errors", None)
    if callable(errors):
        first = errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ())) or "value"
        return f"{where}: {first.get('msg')}"
    return str(error)
