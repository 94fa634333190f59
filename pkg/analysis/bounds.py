"""
Capacity bound evaluators

- WPN channel (L = 1): three-regime outer bound and constant gaps
- OWPN channel: the earlier outer bound with an unspecified O(1) term
- OWPN channel: the I-MMSE outer bound, with its amplitude-channel and
  phase-channel parts available separately

Everything is evaluated in nats and converted at the end. All functions
are pure and safe to run concurrently.
"""

import logging
import math
from enum import Enum
from typing import Callable, Dict, Tuple

from core.errors import UndefinedAtZeroPowerError, ValidationError
from core.params import BoundReport, ChannelParams, Units, convert_units, log_e, validate

logger = logging.getLogger(__name__)

LN_2PI = math.log(2.0 * math.pi)
HALF_LN_2PI_OVER_E = 0.5 * (LN_2PI - 1.0)
LARGE_NOISE_THRESHOLD = 2.0 * math.pi / math.e

_E_MINUS = math.exp(-LARGE_NOISE_THRESHOLD)
# 1/2 ln(4 pi e) + 2 e^{-2pi/e} / (1 - e^{-2pi/e}) log e, nats
_LARGE_NOISE_TERM = 0.5 * math.log(4.0 * math.pi * math.e) + 2.0 * _E_MINUS / (1.0 - _E_MINUS)


class WpnRegime(str, Enum):
    LARGE_NOISE = 'large_noise'
    INTERMEDIATE = 'intermediate'
    SMALL_NOISE = 'small_noise'


# bpcu gap between the WPN outer bound and capacity, per regime
GAP_CONSTANTS: Dict[WpnRegime, float] = {
    WpnRegime.LARGE_NOISE: 4.0,
    WpnRegime.INTERMEDIATE: 7.36,
    WpnRegime.SMALL_NOISE: 1.8,
}


def wpn_regime(power: float, sigma2: float) -> WpnRegime:
    """
    Regime of the WPN bound. Boundary ties go to the intermediate regime,
    whose inequalities are the non-strict ones.
    """
    if power <= 0:
        raise UndefinedAtZeroPowerError("The P^-1 regime threshold needs P > 0")
    if sigma2 > LARGE_NOISE_THRESHOLD:
        return WpnRegime.LARGE_NOISE
    if sigma2 >= 1.0 / power:
        return WpnRegime.INTERMEDIATE
    return WpnRegime.SMALL_NOISE


def _awgn_term(power: float) -> float:
    """1/2 ln(1 + P/2)"""
    return 0.5 * math.log1p(power / 2.0)


def wpn_outer_bound(params: ChannelParams) -> BoundReport:
    """
    Three-regime outer bound on the WPN channel capacity (L = 1).

    The intermediate regime's (log e)^2 term is taken in the reporting base,
    so the bits value is not the nats value divided by ln 2.
    """
    validate(params)
    if params.oversampling != 1:
        raise ValidationError(f"The WPN bound is defined for L = 1, got L = {params.oversampling}")

    regime = wpn_regime(params.power, params.sigma2)
    units = params.units
    base = _awgn_term(params.power)

    if regime is WpnRegime.LARGE_NOISE:
        value = convert_units(base + _LARGE_NOISE_TERM, units)
    elif regime is WpnRegime.INTERMEDIATE:
        nats = base + 0.5 * math.log(2.0 / params.sigma2) + LN_2PI
        value = convert_units(nats, units) + log_e(units) ** 2
    else:
        value = convert_units(2.0 * base, units)

    gap = GAP_CONSTANTS[regime]
    upper_bits = value if units is Units.BITS else value / math.log(2.0)
    diagnostics = {
        'gap_bits': gap,
        'capacity_lower_bits': max(0.0, upper_bits - gap),
        'large_noise_threshold': LARGE_NOISE_THRESHOLD,
        'small_noise_threshold': 1.0 / params.power,
        'log2e_interpretation': '(log e)^2 in reporting base',
    }

    logger.debug(f"WPN bound P={params.power:g} sigma2={params.sigma2:g}: {regime.value} -> {value:.6g}")
    return BoundReport('wpn_th1', value, units, regime.value, diagnostics)


def wpn_capacity_interval(params: ChannelParams) -> Tuple[float, float]:
    """(outer - gap, outer) in bits; the lower end is clamped at 0"""
    report = wpn_outer_bound(params.with_units(Units.BITS))
    return report.diagnostics['capacity_lower_bits'], report.value


def owpn_old_outer_bound(params: ChannelParams, o1_constant: float = 0.0) -> BoundReport:
    """
    Earlier OWPN outer bound 1/2 log(1 + P/2) + 1/2 log(2 pi L / (e sigma2)) + O(1).

    The O(1) term is o1_constant, in the reporting units. sigma2 = 0 gives
    +inf, flagged.
    """
    validate(params)
    units = params.units
    diagnostics = {'o1_constant': o1_constant}

    if params.sigma2 == 0:
        logger.warning("Old OWPN bound diverges at sigma2 = 0")
        return BoundReport('owpn_old_th3', math.inf, units, None, diagnostics, ('zero_phase_noise',))

    phase_term = 0.5 * math.log(2.0 * math.pi * params.oversampling / (math.e * params.sigma2))
    nats = _awgn_term(params.power) + phase_term
    diagnostics['phase_term'] = convert_units(phase_term, units)

    return BoundReport('owpn_old_th3', convert_units(nats, units) + o1_constant, units, None, diagnostics)


def amplitude_rate_bound(params: ChannelParams) -> float:
    """Amplitude-channel bound 1/2 log(2 pi e (P + 2)); independent of L and sigma2"""
    validate(params)
    return convert_units(0.5 * math.log(2.0 * math.pi * math.e * (params.power + 2.0)), params.units)


def phase_precision(a: float, b: float) -> float:
    """(b/2)(sqrt(1 + 4a/b) - 1), evaluated as 2ab / (b + sqrt(b^2 + 4ab))"""
    if b == 0:
        return 0.0
    if math.isinf(a):
        return math.inf
    return 2.0 * a * b / (b + math.sqrt(b * b + 4.0 * a * b))


def phase_rate_closed_form(a: float, b: float) -> float:
    """
    Unclamped phase-channel bound in nats, 1/2 ln(2 pi / e) + 1/2 ln(c),
    with a = L/sigma2 and b = P/L. -inf at b = 0, +inf at sigma2 = 0.
    """
    c = phase_precision(a, b)
    if c == 0:
        return -math.inf
    return HALF_LN_2PI_OVER_E + 0.5 * math.log(c)


def _phase_args(params: ChannelParams) -> Tuple[float, float]:
    a = math.inf if params.sigma2 == 0 else params.oversampling / params.sigma2
    return a, params.power / params.oversampling


def phase_rate_report(params: ChannelParams) -> BoundReport:
    """
    Phase-channel bound clamped to [0, log 2 pi]; the raw value and the
    clamp are recorded in diagnostics and flags.
    """
    validate(params)
    raw = phase_rate_closed_form(*_phase_args(params))
    flags = ()
    value = raw
    if raw < 0:
        value, flags = 0.0, ('clamped_low',)
    elif raw > LN_2PI:
        value, flags = LN_2PI, ('clamped_high',)

    if flags:
        logger.debug(f"Phase bound clamped ({flags[0]}) at P={params.power:g}, sigma2={params.sigma2:g}")

    units = params.units
    diagnostics = {'raw_value': convert_units(raw, units)}
    return BoundReport('phase', convert_units(value, units), units, None, diagnostics, flags)


def phase_rate_bound(params: ChannelParams, clamp: bool = True) -> float:
    """Phase-channel rate bound in the reporting units (clamped unless clamp=False)"""
    if clamp:
        return phase_rate_report(params).value
    validate(params)
    return convert_units(phase_rate_closed_form(*_phase_args(params)), params.units)


def owpn_new_outer_bound(params: ChannelParams) -> BoundReport:
    """
    I-MMSE outer bound on the OWPN capacity:

        1/2 log(1 + P/2) + log(2 pi) + 1/2 log(L^-1 P (sqrt(1 + 4 L^2 / (sigma2 P)) - 1))

    This equals amplitude_rate_bound + unclamped phase_rate_bound exactly;
    both parts are carried in diagnostics.
    """
    validate(params)
    if params.power <= 0 or params.sigma2 <= 0:
        raise ValidationError(
            f"The I-MMSE outer bound needs P > 0 and sigma2 > 0 "
            f"(got P={params.power}, sigma2={params.sigma2})"
        )

    units = params.units
    a, b = _phase_args(params)
    c = phase_precision(a, b)
    nats = _awgn_term(params.power) + LN_2PI + 0.5 * math.log(2.0 * c)

    amplitude = amplitude_rate_bound(params)
    phase = phase_rate_report(params)
    diagnostics = {
        'amplitude_rate_bound': amplitude,
        'phase_rate_bound': phase.value,
        'phase_rate_bound_raw': phase.diagnostics['raw_value'],
        'leading_awgn_term': convert_units(_awgn_term(params.power), units),
        'leading_chi_square_term': amplitude,
        'effective_precision': c,
    }
    return BoundReport('owpn_new_th4', convert_units(nats, units), units, None, diagnostics, phase.flags)


def compare_outer_bounds(params: ChannelParams, o1_constant: float = 0.0) -> BoundReport:
    """New minus old OWPN outer bound; negative when the I-MMSE bound is tighter"""
    new = owpn_new_outer_bound(params)
    old = owpn_old_outer_bound(params, o1_constant)
    difference = new.value - old.value
    diagnostics = {
        'new_bound': new.value,
        'old_bound': old.value,
        'tighter': 'new' if difference < 0 else 'old',
    }
    return BoundReport('compare', difference, params.units, None, diagnostics, old.flags)


def _amplitude_report(params: ChannelParams) -> BoundReport:
    return BoundReport('amplitude', amplitude_rate_bound(params), params.units)


# Name -> evaluator used by the CLI, the sweep runner and the GDoF module
BOUND_EVALUATORS: Dict[str, Callable[[ChannelParams], BoundReport]] = {
    'wpn_th1': wpn_outer_bound,
    'owpn_old_th3': owpn_old_outer_bound,
    'owpn_new_th4': owpn_new_outer_bound,
    'amplitude': _amplitude_report,
    'phase': phase_rate_report,
    'compare': compare_outer_bounds,
}


def get_evaluator(name: str) -> Callable[[ChannelParams], BoundReport]:
    try:
        return BOUND_EVALUATORS[name]
    except KeyError:
        raise ValidationError(
            f"Unknown bound '{name}', expected one of {', '.join(BOUND_EVALUATORS)}"
        )
