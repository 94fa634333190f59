"""
Bounds Test Script - WPN three-regime bound, old and new OWPN outer bounds

Oracles recompute every closed form directly with math, in the base
under test.
"""

import logging
import math
import sys

import numpy as np
import pytest

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

from core.errors import UndefinedAtZeroPowerError, ValidationError
from core.params import ChannelParams, Units
from analysis.bounds import (
    GAP_CONSTANTS,
    LARGE_NOISE_THRESHOLD,
    WpnRegime,
    amplitude_rate_bound,
    compare_outer_bounds,
    get_evaluator,
    owpn_new_outer_bound,
    owpn_old_outer_bound,
    phase_rate_bound,
    phase_rate_closed_form,
    phase_rate_report,
    wpn_capacity_interval,
    wpn_outer_bound,
    wpn_regime,
)
from analysis.immse import closed_form_fixed_point

LOG2E = 1.0 / math.log(2.0)
HALF_LN_2PI_OVER_E = 0.5 * math.log(2.0 * math.pi / math.e)


def test_wpn_small_noise_regime():
    report = wpn_outer_bound(ChannelParams(100.0, 1e-4, 1, units=Units.BITS))
    assert report.regime == 'small_noise'
    assert report.value == pytest.approx(math.log2(51.0), abs=1e-4)
    assert report.value == pytest.approx(5.6724, abs=1e-4)
    assert report.diagnostics['gap_bits'] == 1.8


def test_wpn_large_noise_regime():
    report = wpn_outer_bound(ChannelParams(2.0, 4.0, 1, units=Units.BITS))
    e_minus = math.exp(-2.0 * math.pi / math.e)
    expected = (0.5 * math.log2(2.0) + 0.5 * math.log2(4.0 * math.pi * math.e)
                + 2.0 * e_minus / (1.0 - e_minus) * LOG2E)
    assert report.regime == 'large_noise'
    assert report.value == pytest.approx(expected, abs=1e-12)
    assert report.value == pytest.approx(3.365, abs=1e-3)
    assert report.diagnostics['gap_bits'] == 4.0


def test_wpn_intermediate_regime_uses_squared_log_e_in_reporting_base():
    params = ChannelParams(100.0, 0.1, 1)
    assert wpn_regime(100.0, 0.1) is WpnRegime.INTERMEDIATE

    bits = wpn_outer_bound(params.with_units('bits'))
    nats = wpn_outer_bound(params)
    expected_bits = 0.5 * math.log2(51.0) + 0.5 * math.log2(20.0) + math.log2(2.0 * math.pi) + LOG2E ** 2
    expected_nats = 0.5 * math.log(51.0) + 0.5 * math.log(20.0) + math.log(2.0 * math.pi) + 1.0
    assert bits.value == pytest.approx(expected_bits, rel=1e-12)
    assert nats.value == pytest.approx(expected_nats, rel=1e-12)
    assert bits.diagnostics['log2e_interpretation'] == '(log e)^2 in reporting base'
    assert bits.diagnostics['gap_bits'] == GAP_CONSTANTS[WpnRegime.INTERMEDIATE]


def test_wpn_regime_boundaries():
    assert wpn_regime(100.0, 0.01) is WpnRegime.INTERMEDIATE
    assert wpn_regime(100.0, LARGE_NOISE_THRESHOLD) is WpnRegime.INTERMEDIATE
    assert wpn_regime(100.0, 0.0) is WpnRegime.SMALL_NOISE
    # P^-1 above 2 pi / e: the small-noise and large-noise regimes meet
    assert wpn_regime(0.1, 5.0) is WpnRegime.LARGE_NOISE
    assert wpn_regime(0.1, 1.0) is WpnRegime.SMALL_NOISE


def test_wpn_regime_is_exhaustive_and_exclusive():
    rng = np.random.default_rng(2024)
    powers = 10.0 ** rng.uniform(-3, 8, 10_000)
    sigmas = 10.0 ** rng.uniform(-9, 3, 10_000)
    for power, sigma2 in zip(powers, sigmas):
        matches = [
            sigma2 > LARGE_NOISE_THRESHOLD,
            1.0 / power <= sigma2 <= LARGE_NOISE_THRESHOLD,
            sigma2 < 1.0 / power and sigma2 <= LARGE_NOISE_THRESHOLD,
        ]
        assert sum(matches) == 1
        regime = wpn_regime(power, sigma2)
        assert regime is [WpnRegime.LARGE_NOISE, WpnRegime.INTERMEDIATE, WpnRegime.SMALL_NOISE][matches.index(True)]


def test_wpn_preconditions():
    with pytest.raises(UndefinedAtZeroPowerError):
        wpn_outer_bound(ChannelParams(0.0, 1.0, 1))
    with pytest.raises(ValidationError):
        wpn_outer_bound(ChannelParams(10.0, 1.0, 4))


def test_wpn_capacity_interval():
    lower, upper = wpn_capacity_interval(ChannelParams(100.0, 1e-4, 1))
    assert upper == pytest.approx(math.log2(51.0), rel=1e-12)
    assert lower == pytest.approx(math.log2(51.0) - 1.8, rel=1e-12)
    lower, _ = wpn_capacity_interval(ChannelParams(0.5, 4.0, 1))
    assert lower == 0.0


def test_old_outer_bound():
    params = ChannelParams(2.0, 2.0 * math.pi / math.e, 1, units=Units.BITS)
    assert owpn_old_outer_bound(params).value == pytest.approx(0.5, abs=1e-12)

    zero = owpn_old_outer_bound(ChannelParams(2.0, 0.0, 1))
    assert zero.value == math.inf
    assert 'zero_phase_noise' in zero.flags

    base = owpn_old_outer_bound(ChannelParams(50.0, 0.7, 8)).value
    doubled = owpn_old_outer_bound(ChannelParams(50.0, 0.7, 16)).value
    assert doubled - base == pytest.approx(0.5 * math.log(2.0), rel=1e-12)

    shifted = owpn_old_outer_bound(ChannelParams(50.0, 0.7, 8), o1_constant=1.5)
    assert shifted.value == pytest.approx(base + 1.5, rel=1e-15)
    assert shifted.diagnostics['o1_constant'] == 1.5


def test_amplitude_rate_bound():
    assert amplitude_rate_bound(ChannelParams(0.0, 1.0, 1)) == pytest.approx(
        0.5 * math.log(4.0 * math.pi * math.e), rel=1e-15)
    assert amplitude_rate_bound(ChannelParams(0.0, 1.0, 1)) == pytest.approx(1.7655, abs=1e-4)
    assert amplitude_rate_bound(ChannelParams(2.0, 1.0, 1, units=Units.BITS)) == pytest.approx(3.0471, abs=1e-4)
    # independent of L and sigma2
    assert amplitude_rate_bound(ChannelParams(7.0, 0.1, 3)) == amplitude_rate_bound(ChannelParams(7.0, 9.0, 40))


def test_phase_rate_bound_at_power_two():
    params = ChannelParams(2.0, 1.0, 1)
    expected = HALF_LN_2PI_OVER_E + 0.5 * math.log(math.sqrt(3.0) - 1.0)
    assert phase_rate_bound(params) == pytest.approx(expected, rel=1e-12)
    assert phase_rate_bound(params) == pytest.approx(0.26299, abs=1e-4)
    assert phase_rate_report(params).flags == ()


def test_phase_rate_bound_matches_fisher_fixed_point():
    for a in np.geomspace(1e-3, 1e3, 7):
        for b in np.geomspace(1e-3, 1e3, 7):
            j_star = closed_form_fixed_point(a, b)
            via_fisher = HALF_LN_2PI_OVER_E + 0.5 * math.log(a * j_star / (j_star + a))
            assert phase_rate_closed_form(a, b) == pytest.approx(via_fisher, rel=1e-9, abs=1e-12)


def test_phase_rate_bound_clamps():
    low = phase_rate_report(ChannelParams(1e-12, 1.0, 1))
    assert low.value == 0.0
    assert low.flags == ('clamped_low',)
    assert low.diagnostics['raw_value'] < 0

    zero = phase_rate_report(ChannelParams(0.0, 1.0, 1))
    assert zero.value == 0.0
    assert zero.diagnostics['raw_value'] == -math.inf

    high = phase_rate_report(ChannelParams(1e8, 1e-6, 1))
    assert high.value == pytest.approx(math.log(2.0 * math.pi))
    assert high.flags == ('clamped_high',)
    assert phase_rate_bound(ChannelParams(1e8, 1e-6, 1), clamp=False) > math.log(2.0 * math.pi)


def test_new_outer_bound_at_power_two():
    report = owpn_new_outer_bound(ChannelParams(2.0, 1.0, 1))
    expected = 0.5 * math.log(2.0) + math.log(2.0 * math.pi) + 0.5 * math.log(2.0 * (math.sqrt(3.0) - 1.0))
    assert report.value == pytest.approx(expected, rel=1e-12)
    assert report.value == pytest.approx(2.37507, abs=1e-4)
    bits = owpn_new_outer_bound(ChannelParams(2.0, 1.0, 1, units=Units.BITS))
    assert bits.value == pytest.approx(expected * LOG2E, rel=1e-12)


def test_new_outer_bound_decomposes_into_amplitude_and_phase():
    for power in (0.01, 2.0, 1e3, 1e7):
        for sigma2 in (0.05, 1.0, 20.0):
            for oversampling in (1, 7, 300):
                report = owpn_new_outer_bound(ChannelParams(power, sigma2, oversampling))
                parts = report.diagnostics['amplitude_rate_bound'] + report.diagnostics['phase_rate_bound_raw']
                assert report.value == pytest.approx(parts, rel=1e-12, abs=1e-13)


def test_new_outer_bound_preconditions():
    with pytest.raises(ValidationError):
        owpn_new_outer_bound(ChannelParams(0.0, 1.0, 1))
    with pytest.raises(ValidationError):
        owpn_new_outer_bound(ChannelParams(1.0, 0.0, 1))


def test_new_bound_beats_old_bound_when_alpha_above_half():
    comparison = compare_outer_bounds(ChannelParams(1e6, 1.0, 1e6))
    assert comparison.value < 0
    assert comparison.diagnostics['tighter'] == 'new'


def test_new_outer_bound_is_monotone_in_power():
    values = [owpn_new_outer_bound(ChannelParams(p, 0.5, 10)).value for p in np.geomspace(1e-2, 1e8, 41)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_phase_bound_asymptotics():
    def gap_slow(power):
        # alpha = 1/4: c -> L / sigma2
        oversampling = power ** 0.25
        raw = phase_rate_bound(ChannelParams(power, 1.0, oversampling), clamp=False)
        return abs(raw - HALF_LN_2PI_OVER_E - 0.5 * math.log(oversampling))

    def gap_fast(power):
        # alpha = 1: c -> sqrt(P / sigma2)
        raw = phase_rate_bound(ChannelParams(power, 1.0, power), clamp=False)
        return abs(raw - HALF_LN_2PI_OVER_E - 0.25 * math.log(power))

    for gap in (gap_slow, gap_fast):
        gaps = [gap(p) for p in (1e4, 1e6, 1e8)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3


def test_bound_registry():
    assert get_evaluator('owpn_new_th4') is owpn_new_outer_bound
    with pytest.raises(ValidationError):
        get_evaluator('th9')


def main():
    """Run all tests"""
    from utils.suite_runner import run_suite
    return run_suite("BOUNDS TEST SUITE", [
        test_wpn_small_noise_regime,
        test_wpn_large_noise_regime,
        test_wpn_intermediate_regime_uses_squared_log_e_in_reporting_base,
        test_wpn_regime_boundaries,
        test_wpn_regime_is_exhaustive_and_exclusive,
        test_wpn_preconditions,
        test_wpn_capacity_interval,
        test_old_outer_bound,
        test_amplitude_rate_bound,
        test_phase_rate_bound_at_power_two,
        test_phase_rate_bound_matches_fisher_fixed_point,
        test_phase_rate_bound_clamps,
        test_new_outer_bound_at_power_two,
        test_new_outer_bound_decomposes_into_amplitude_and_phase,
        test_new_outer_bound_preconditions,
        test_new_bound_beats_old_bound_when_alpha_above_half,
        test_new_outer_bound_is_monotone_in_power,
        test_phase_bound_asymptotics,
        test_bound_registry,
    ])


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
