"""
Parameter objects shared by every module of the laboratory.

ChannelParams is the single source of truth for (P, sigma^2, L). All
internal math is done in nats; conversion to bits happens only when a
value is reported.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Union

from core.errors import (
    NegativeAlphaError,
    NegativePowerError,
    NonFiniteError,
    ValidationError,
    ZeroOversamplingError,
)

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


class Units(str, Enum):
    """Reporting units for information quantities"""
    BITS = 'bits'
    NATS = 'nats'

    @classmethod
    def parse(cls, value: Union[str, 'Units']) -> 'Units':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"Unknown units '{value}', expected bits or nats")


@dataclass(frozen=True)
class ChannelParams:
    """
    OWPN channel parameters.

    Attributes:
        power: average waveform power P (>= 0); per-sample budget is P/L
        sigma2: frequency-noise variance per symbol interval (>= 0)
        oversampling: samples per symbol L (>= 1). Integer when simulating,
            any real >= 1 when evaluating closed forms.
        blocks: number of symbols M for simulations
        units: reporting units
    """
    power: float
    sigma2: float
    oversampling: float = 1
    blocks: int = 1
    units: Units = Units.NATS

    @property
    def snr(self) -> float:
        """SNR of the channel, P/2 (additive noise has E|W|^2 = 2)"""
        return self.power / 2.0

    @property
    def sample_power(self) -> float:
        """Per-sample power budget P/L"""
        return self.power / self.oversampling

    @property
    def samples_per_symbol(self) -> int:
        """Integer L for the sampler; rejects fractional oversampling"""
        if float(self.oversampling) != int(self.oversampling):
            raise ValidationError(
                f"Simulation needs an integer oversampling factor, got {self.oversampling}"
            )
        return int(self.oversampling)

    def with_units(self, units: Union[str, Units]) -> 'ChannelParams':
        return ChannelParams(self.power, self.sigma2, self.oversampling,
                             self.blocks, Units.parse(units))


def validate(params: ChannelParams) -> ChannelParams:
    """
    Check the ChannelParams invariants.

    Returns:
        The same object, unchanged, when P >= 0, sigma2 >= 0 and L >= 1

    Raises:
        NonFiniteError, NegativePowerError, ZeroOversamplingError,
        ValidationError (negative sigma2 or block count)
    """
    for name in ('power', 'sigma2', 'oversampling'):
        value = getattr(params, name)
        if value is None or not math.isfinite(float(value)):
            raise NonFiniteError(f"{name} must be finite, got {value}")

    if params.power < 0:
        raise NegativePowerError(f"Power must be >= 0, got {params.power}")
    if params.sigma2 < 0:
        raise ValidationError(f"sigma2 must be >= 0, got {params.sigma2}")
    if params.oversampling < 1:
        raise ZeroOversamplingError(
            f"Oversampling factor must be >= 1, got {params.oversampling}"
        )
    if params.blocks < 1:
        raise ValidationError(f"Block count must be >= 1, got {params.blocks}")

    return params


def convert_units(value_nats: float, units: Union[str, Units]) -> float:
    """Convert a nats value to the requested units (bits = nats / ln 2)"""
    if Units.parse(units) is Units.BITS:
        return value_nats / LN2
    return value_nats


def log_e(units: Union[str, Units]) -> float:
    """log(e) in the reporting base: 1 for nats, log2(e) for bits"""
    return convert_units(1.0, units)


@dataclass(frozen=True)
class GdofParams:
    """Oversampling exponent alpha with the rule L = max(1, floor(P^alpha))"""
    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise NonFiniteError(f"alpha must be finite, got {self.alpha}")
        if self.alpha < 0:
            raise NegativeAlphaError(f"alpha must be >= 0, got {self.alpha}")

    def oversampling(self, power: float, integer: bool = True) -> float:
        """
        Oversampling factor at power P.

        Args:
            power: average power P > 0
            integer: floor P^alpha (simulation) or keep it real (closed forms)
        """
        if power <= 0:
            return 1
        raw = power ** self.alpha
        if integer:
            return max(1, int(math.floor(raw)))
        return max(1.0, raw)

    def channel_params(self, power: float, sigma2: float, integer: bool = True,
                       units: Union[str, Units] = Units.NATS) -> ChannelParams:
        return ChannelParams(power, sigma2, self.oversampling(power, integer),
                             units=Units.parse(units))


@dataclass(frozen=True)
class BoundReport:
    """
    Value of a named bound with regime and diagnostic metadata.

    `value` is in `units`. Non-finite or clamped values are always listed
    in `flags`.
    """
    bound_name: str
    value: float
    units: Units = Units.NATS
    regime: Optional[str] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    flags: Tuple[str, ...] = ()

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def in_units(self, units: Union[str, Units]) -> float:
        """Value re-expressed in other units (only meaningful for unit-free forms)"""
        target = Units.parse(units)
        if target is self.units:
            return self.value
        nats = self.value * LN2 if self.units is Units.BITS else self.value
        return convert_units(nats, target)
