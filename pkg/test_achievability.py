"""
Achievability Test Script - scheme input, receiver statistics, plug-in
mutual information and the rate experiment

Plug-in estimates are biased upward by about (Bx - 1)(By - 1) / (2N) nats,
which sets the tolerances below.
"""

import functools
import logging
import math
import sys

import numpy as np
import pytest
from scipy import stats

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

from core.errors import (
    InsufficientSamplesError,
    MissingPreviousBlockError,
    PowerBudgetExceededError,
    ValidationError,
)
from core.params import ChannelParams, GdofParams
from data.channel import TWO_PI, ChannelOutput, RngSeed, sample_phase, transmit, transmit_in_chunks
from analysis.achievability import (
    JointHistogram,
    QuantileBinning,
    SchemeConfig,
    plugin_rate_estimate,
    rate_from_histograms,
    receiver_statistics,
    sample_scheme_input,
    streamed_receiver_statistics,
)
from services.simulation import moment_checks, run_rate_experiment, simulate_run
from services.sweep_runner import SweepRunner

# (P, alpha, floor(P^alpha)) at sigma2 = 1
RATE_GRID = [
    (1e2, 0.25, 3), (1e2, 0.5, 10), (1e2, 1.0, 100),
    (1e3, 0.25, 5), (1e3, 0.5, 31), (1e3, 1.0, 1000),
]


def _circular_distance(a, b):
    diff = np.mod(np.asarray(a) - np.asarray(b), TWO_PI)
    return np.minimum(diff, TWO_PI - diff)


def test_scheme_input_power():
    params = ChannelParams(8.0, 1.0, 4)
    scheme = SchemeConfig(200_000, shift=0.5, seed=RngSeed(3))
    assert scheme.resolve_scale(params) == 1.5
    assert scheme.mean_power(params) == 2.0

    x = sample_scheme_input(scheme, params)
    power = np.abs(x) ** 2
    se = power.std(ddof=1) / math.sqrt(len(power))
    assert abs(power.mean() - 2.0) <= 4.0 * se
    assert power.min() >= 0.5


def test_scheme_rejects_power_budget():
    params = ChannelParams(8.0, 1.0, 4)
    with pytest.raises(PowerBudgetExceededError):
        SchemeConfig(100, shift=3.0).resolve_scale(params)
    with pytest.raises(PowerBudgetExceededError):
        sample_scheme_input(SchemeConfig(100, shift=0.5, scale=1.6), params)
    # explicit scale within budget
    assert SchemeConfig(100, shift=0.5, scale=1.0).mean_power(params) == 1.5


def test_scheme_config_validation():
    with pytest.raises(ValidationError):
        SchemeConfig(0)
    with pytest.raises(ValidationError):
        SchemeConfig(100, shift=-1.0)
    with pytest.raises(ValidationError):
        SchemeConfig(100, amplitude_bins=4)
    with pytest.raises(ValidationError):
        SchemeConfig(100, phase_bins=7)
    batch = SchemeConfig(100, seed=RngSeed(9)).for_batch(2, 40)
    assert batch.n_blocks == 40
    assert batch.seed == RngSeed(9, stream=2)


def test_input_phase_is_uniform():
    x = sample_scheme_input(SchemeConfig(100_000, seed=RngSeed(4)), ChannelParams(1.0, 1.0, 1))
    counts, _ = np.histogram(np.mod(np.angle(x), TWO_PI), bins=64, range=(0.0, TWO_PI))
    _, p_value = stats.chisquare(counts)
    assert p_value > 0.001


def test_noiseless_phase_statistic_recovers_input_phase():
    params = ChannelParams(4.0, 0.0, 3)
    scheme = SchemeConfig(500, seed=RngSeed(17))
    x = sample_scheme_input(scheme, params)
    phase = sample_phase(params, len(x), scheme.seed)
    output = transmit(params, x, phase, scheme.seed, add_noise=False)

    batch = receiver_statistics(output)
    assert len(batch) == 500
    assert len(batch.phi) == 499
    assert np.all(_circular_distance(batch.phi, np.angle(x[1:])) < 1e-9)
    assert np.allclose(batch.r, np.sqrt(3.0) * np.abs(x), rtol=1e-12)


def test_zero_input_block_norm():
    params = ChannelParams(0.0, 1.0, 4)
    _, _, output = simulate_run(params, SchemeConfig(100_000, seed=RngSeed(8)))
    squared = receiver_statistics(output).r ** 2
    se = squared.std(ddof=1) / math.sqrt(len(squared))
    assert abs(squared.mean() - 8.0) <= 4.0 * se


def test_statistics_are_rotation_invariant():
    params = ChannelParams(10.0, 0.3, 4)
    x, _, output = simulate_run(params, SchemeConfig(2_000, seed=RngSeed(5)))
    rotated = ChannelOutput(output.x, output.y * np.exp(1j * 1.234))

    original = receiver_statistics(output)
    turned = receiver_statistics(rotated)
    assert np.allclose(original.r, turned.r, rtol=1e-12)
    assert np.all(_circular_distance(original.phi, turned.phi) < 1e-9)


def test_statistics_accept_block_sequences():
    params = ChannelParams(10.0, 0.3, 2)
    _, _, output = simulate_run(params, SchemeConfig(50, seed=RngSeed(6)))
    from_blocks = receiver_statistics(list(output))
    from_arrays = receiver_statistics(output)
    assert np.array_equal(from_blocks.r, from_arrays.r)
    assert np.array_equal(from_blocks.phi, from_arrays.phi)

    assert from_arrays[0].phi is None
    assert from_arrays[3].phi == from_arrays.phase_statistic(3)
    with pytest.raises(MissingPreviousBlockError):
        from_arrays.phase_statistic(0)
    with pytest.raises(ValidationError):
        receiver_statistics(output, prev_phase=np.zeros(3))
    with pytest.raises(ValidationError):
        receiver_statistics(output[5:7] + output[8:9])


def test_identity_channel_mutual_information():
    rng = RngSeed(12).generator('input')
    codes = rng.integers(0, 16, 100_000)
    histogram = JointHistogram.from_codes(codes, codes, (16, 16))
    assert histogram.total == 100_000
    assert histogram.mutual_information() == pytest.approx(math.log(16.0), rel=0.01)


def test_independent_codes_have_small_mutual_information():
    rng = RngSeed(13).generator('input')
    histogram = JointHistogram.from_codes(rng.integers(0, 32, 100_000), rng.integers(0, 32, 100_000), (32, 32))
    # plug-in bias (31 * 31) / (2 * 1e5) ~ 0.005 nats
    assert 0.0 <= histogram.mutual_information() < 0.02


def test_shuffled_inputs_have_small_rate():
    params = ChannelParams(100.0, 0.1, 4)
    scheme = SchemeConfig(100_000, seed=RngSeed(21))
    x, _, output = simulate_run(params, scheme)
    batch = receiver_statistics(output)

    shuffled = scheme.seed.generator('shuffle').permutation(x)
    estimate = plugin_rate_estimate(shuffled, batch)
    assert estimate.rate_amplitude < 0.02
    assert estimate.rate_phase < 0.02

    genuine = plugin_rate_estimate(x, batch)
    assert genuine.rate_amplitude > 0.5
    assert genuine.rate_phase > 0.5


def test_histogram_merge():
    rng = RngSeed(14).generator('input')
    parts = [JointHistogram.from_codes(rng.integers(0, 8, 500), rng.integers(0, 8, 500), (8, 8))
             for _ in range(3)]
    left = parts[0].merge(parts[1]).merge(parts[2])
    right = parts[0].merge(parts[1].merge(parts[2]))
    swapped = parts[2].merge(parts[0]).merge(parts[1])
    assert np.array_equal(left.counts, right.counts)
    assert np.array_equal(left.counts, swapped.counts)
    assert left.total == 1500
    with pytest.raises(ValidationError):
        parts[0].merge(JointHistogram(np.zeros((4, 8))))


def test_quantile_binning_covers_out_of_sample_values():
    rng = RngSeed(15).generator('input')
    binning = QuantileBinning.fit(rng.standard_normal(10_000), 16)
    assert binning.n_bins == 16
    codes = binning.codes(np.array([-1e9, 0.0, 1e9]))
    assert codes.tolist()[0] == 0
    assert codes.tolist()[-1] == 15


def test_insufficient_samples():
    params = ChannelParams(10.0, 0.1, 2)
    scheme = SchemeConfig(5_000, seed=RngSeed(1))
    x, _, output = simulate_run(params, scheme)
    with pytest.raises(InsufficientSamplesError):
        plugin_rate_estimate(x, receiver_statistics(output))

    small = JointHistogram(np.ones((8, 8), dtype=np.int64))
    with pytest.raises(InsufficientSamplesError):
        rate_from_histograms(small, small)


def test_rate_stays_below_outer_bound():
    params = ChannelParams(100.0, 0.1, 4)
    result = run_rate_experiment(params, SchemeConfig(20_000, seed=RngSeed(2)))
    assert 0.0 < result.estimate.rate_total <= result.outer_bound
    assert result.estimate.phase_samples == 19_999
    assert result.estimate.amplitude_samples == 20_000
    assert len(result.row()) == 9


@pytest.mark.parametrize('power, alpha, oversampling', RATE_GRID)
def test_rate_below_outer_bound_over_power_and_alpha(power, alpha, oversampling):
    params = GdofParams(alpha).channel_params(power, 1.0)
    assert params.samples_per_symbol == oversampling
    result = run_rate_experiment(params, SchemeConfig(100_000, seed=RngSeed(8)))
    assert result.estimate.phase_samples == 99_999
    assert 0.0 < result.estimate.rate_total <= result.outer_bound


def test_streamed_statistics_match_whole_run():
    params = ChannelParams(50.0, 0.2, 4)
    scheme = SchemeConfig(1_000, seed=RngSeed(3))
    x, _, output = simulate_run(params, scheme)
    whole = receiver_statistics(output)

    streamed = streamed_receiver_statistics(transmit_in_chunks(params, x, scheme.seed, chunk_blocks=64))
    assert len(streamed) == 1_000
    assert len(streamed.phi) == 999
    assert np.allclose(streamed.r, whole.r, rtol=1e-9, atol=0)
    assert np.all(_circular_distance(streamed.phi, whole.phi) < 1e-9)
    assert np.all((streamed.phi >= 0) & (streamed.phi < TWO_PI))

    with pytest.raises(ValidationError):
        streamed_receiver_statistics([])


def test_rate_experiment_chunk_size_keeps_estimate():
    params = ChannelParams(100.0, 0.1, 4)
    scheme = SchemeConfig(20_000, seed=RngSeed(2))
    default = run_rate_experiment(params, scheme)
    chunked = run_rate_experiment(params, scheme, chunk_blocks=999)
    assert chunked.estimate.phase_samples == 19_999
    assert chunked.estimate.rate_amplitude == pytest.approx(default.estimate.rate_amplitude, abs=1e-3)
    assert chunked.estimate.rate_phase == pytest.approx(default.estimate.rate_phase, abs=1e-3)


def test_phase_rate_falls_with_phase_noise():
    scheme = SchemeConfig(50_000, phase_bins=64, seed=RngSeed(7))
    results = [run_rate_experiment(ChannelParams(1000.0, sigma2, 4), scheme) for sigma2 in (0.01, 0.1, 1.0)]
    phase_rates = [result.estimate.rate_phase for result in results]
    assert phase_rates[0] > phase_rates[1] > phase_rates[2]
    # amplitude statistic does not see the phase noise
    amplitude_rates = [result.estimate.rate_amplitude for result in results]
    assert max(amplitude_rates) - min(amplitude_rates) < 0.05


def test_rate_experiment_is_deterministic():
    params = ChannelParams(50.0, 0.2, 2)
    scheme = SchemeConfig(24_000, seed=RngSeed(99))
    sequential = run_rate_experiment(params, scheme, batches=2, runner=SweepRunner(1))
    threaded = run_rate_experiment(params, scheme, batches=2, runner=SweepRunner(4))
    assert sequential.estimate == threaded.estimate
    assert sequential.estimate.phase_samples == 23_998
    assert sequential.batches == 2

    with pytest.raises(ValidationError):
        run_rate_experiment(params, scheme, batches=0)
    with pytest.raises(ValidationError):
        run_rate_experiment(ChannelParams(0.0, 0.2, 2), scheme)


def test_moment_checks_pass():
    params = ChannelParams(10.0, 0.5, 4)
    checks, phase, output = moment_checks(params, SchemeConfig(50_000, seed=RngSeed(31)))
    names = [check.quantity for check in checks]
    assert 'block_norm_second_moment' in names
    assert 'phase_increment_variance' in names
    assert all(check.passed for check in checks), [(c.quantity, c.z_score) for c in checks]
    assert len(output) == 50_000
    assert phase.oversampling == 4


def test_channel_statistics_at_power_ten():
    params = ChannelParams(10.0, 1.0, 8)
    checks, _, _ = moment_checks(params, SchemeConfig(100_000, seed=RngSeed(0)))
    by_name = {check.quantity: check for check in checks}
    assert by_name['noise_power'].theory == 2.0
    assert by_name['noise_power'].z_score <= 3.0
    assert by_name['phase_increment_variance'].theory == 0.125
    assert by_name['phase_increment_variance'].z_score <= 3.0
    assert by_name['block_norm_second_moment'].theory == pytest.approx(26.0)
    assert by_name['block_norm_second_moment'].z_score <= 4.0


def main():
    """Run all tests"""
    from utils.suite_runner import run_suite
    return run_suite("ACHIEVABILITY TEST SUITE", [
        test_scheme_input_power,
        test_scheme_rejects_power_budget,
        test_scheme_config_validation,
        test_input_phase_is_uniform,
        test_noiseless_phase_statistic_recovers_input_phase,
        test_zero_input_block_norm,
        test_statistics_are_rotation_invariant,
        test_statistics_accept_block_sequences,
        test_identity_channel_mutual_information,
        test_independent_codes_have_small_mutual_information,
        test_shuffled_inputs_have_small_rate,
        test_histogram_merge,
        test_quantile_binning_covers_out_of_sample_values,
        test_insufficient_samples,
        test_rate_stays_below_outer_bound,
        *[functools.partial(test_rate_below_outer_bound_over_power_and_alpha, *point) for point in RATE_GRID],
        test_streamed_statistics_match_whole_run,
        test_rate_experiment_chunk_size_keeps_estimate,
        test_phase_rate_falls_with_phase_noise,
        test_rate_experiment_is_deterministic,
        test_moment_checks_pass,
        test_channel_statistics_at_power_ten,
    ])


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
