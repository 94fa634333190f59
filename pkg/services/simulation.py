# services/simulation.py
"""
Simulation service: channel moment checks and the achievability experiment.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.errors import InvariantViolationError, ValidationError
from core.params import ChannelParams, Units, convert_units, validate
from data.channel import (
    ChannelOutput,
    PhaseTrajectory,
    RngSeed,
    noise_samples,
    sample_phase,
    transmit,
    transmit_in_chunks,
)
from analysis.achievability import (
    JointHistogram,
    RateBinning,
    RateEstimate,
    SchemeConfig,
    StatisticsBatch,
    rate_from_histograms,
    sample_scheme_input,
    streamed_receiver_statistics,
)
from analysis.bounds import owpn_new_outer_bound
from services.sweep_runner import SweepRunner

logger = logging.getLogger(__name__)

# |estimate - theory| / SE above this fails a moment check
MOMENT_Z_LIMIT = 4.0

MOMENT_HEADER = ['quantity', 'estimate', 'theory', 'std_error', 'z_score', 'passed']
RATE_HEADER = ['P', 'sigma2', 'L', 'n_blocks', 'seed', 'rate_amp_est', 'rate_phase_est',
               'rate_total_est', 'outer_bound']


@dataclass(frozen=True)
class MomentCheck:
    quantity: str
    estimate: float
    theory: float
    std_error: float

    @property
    def z_score(self) -> float:
        diff = abs(self.estimate - self.theory)
        if self.std_error == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.std_error

    @property
    def passed(self) -> bool:
        return self.z_score <= MOMENT_Z_LIMIT


def _mean_check(quantity: str, samples: np.ndarray, theory: float) -> MomentCheck:
    samples = np.asarray(samples, dtype=float)
    se = float(np.std(samples, ddof=1) / math.sqrt(len(samples))) if len(samples) > 1 else 0.0
    return MomentCheck(quantity, float(np.mean(samples)), theory, se)


def simulate_run(params: ChannelParams, scheme: SchemeConfig) -> Tuple[np.ndarray, PhaseTrajectory, ChannelOutput]:
    """
    One run of the scheme through the channel. P = 0 sends X = 0.

    Returns:
        (inputs, phase trajectory, channel output)
    """
    validate(params)
    if params.power > 0:
        x = sample_scheme_input(scheme, params)
    else:
        x = np.zeros(scheme.n_blocks, dtype=complex)
    phase = sample_phase(params, scheme.n_blocks, scheme.seed)
    output = transmit(params, x, phase, scheme.seed)
    return x, phase, output


def moment_checks(params: ChannelParams, scheme: SchemeConfig) -> Tuple[List[MomentCheck], PhaseTrajectory, ChannelOutput]:
    """
    Sample moments of one run against their theoretical values.

    Covers noise power and circular symmetry, phase-increment variance,
    input power and the block-norm second moment.
    """
    x, phase, output = simulate_run(params, scheme)
    L = params.samples_per_symbol
    w = noise_samples(output, phase).reshape(-1)
    n = len(w)

    input_power = scheme.mean_power(params) if params.power > 0 else 0.0
    re, im = w.real, w.imag
    correlation = float(np.corrcoef(re, im)[0, 1])

    checks = [
        _mean_check('noise_power', np.abs(w) ** 2, 2.0),
        _mean_check('noise_re_variance', (re - re.mean()) ** 2, 1.0),
        _mean_check('noise_im_variance', (im - im.mean()) ** 2, 1.0),
        MomentCheck('noise_re_im_correlation', correlation, 0.0, 1.0 / math.sqrt(n)),
        _mean_check('phase_increment_variance', phase.increments() ** 2, phase.sigma2_per_sample),
        _mean_check('input_power', np.abs(x) ** 2, input_power),
        _mean_check('block_norm_second_moment', np.sum(np.abs(output.y) ** 2, axis=1),
                    L * input_power + 2.0 * L),
    ]

    for check in checks:
        level = logging.WARNING if not check.passed else logging.DEBUG
        logger.log(level, f"{check.quantity}: {check.estimate:.6g} vs {check.theory:.6g} "
                          f"(z = {check.z_score:.2f})")
    return checks, phase, output


@dataclass(frozen=True)
class RateExperimentResult:
    params: ChannelParams
    scheme: SchemeConfig
    estimate: RateEstimate
    outer_bound: float
    batches: int

    def row(self) -> List:
        units = self.params.units
        return [
            self.params.power, self.params.sigma2, self.params.oversampling,
            self.scheme.n_blocks, self.scheme.seed.seed,
            convert_units(self.estimate.rate_amplitude, units),
            convert_units(self.estimate.rate_phase, units),
            convert_units(self.estimate.rate_total, units),
            self.outer_bound,
        ]


def _batch_sizes(n_blocks: int, batches: int) -> List[int]:
    base, extra = divmod(n_blocks, batches)
    return [base + (1 if i < extra else 0) for i in range(batches)]


def _run_batch(params: ChannelParams, scheme: SchemeConfig,
               chunk_blocks: Optional[int] = None) -> Tuple[np.ndarray, StatisticsBatch]:
    """Inputs and receiver statistics of one stream, generated chunk by chunk"""
    x = sample_scheme_input(scheme, params)
    return x, streamed_receiver_statistics(transmit_in_chunks(params, x, scheme.seed, chunk_blocks))


def run_rate_experiment(params: ChannelParams, scheme: SchemeConfig, batches: int = 1,
                        runner: Optional[SweepRunner] = None,
                        chunk_blocks: Optional[int] = None) -> RateExperimentResult:
    """
    Plug-in rate of the scheme, split over independent streams 0..batches-1.

    Bins are fitted on stream 0; per-stream histograms are merged in
    stream order. Each running batch holds one chunk of chunk_blocks
    blocks (default from config.CHUNK_SAMPLES) of receiver samples.

    Raises:
        InvariantViolationError: estimate above the I-MMSE outer bound
    """
    validate(params)
    if params.power <= 0:
        raise ValidationError("The rate experiment needs P > 0")
    if not 1 <= batches <= scheme.n_blocks:
        raise ValidationError(f"batches must be in [1, {scheme.n_blocks}], got {batches}")

    runner = runner or SweepRunner()
    schemes = [scheme.for_batch(i, size) for i, size in enumerate(_batch_sizes(scheme.n_blocks, batches))]
    logger.info(f"Rate experiment: {scheme.n_blocks} blocks in {batches} batch(es), "
                f"P={params.power:g}, sigma2={params.sigma2:g}, L={params.oversampling:g}")

    runs = runner.map(lambda s: _run_batch(params, s, chunk_blocks), schemes)

    reference_x, reference_stats = runs[0]
    binning = RateBinning.fit(reference_x, reference_stats, scheme.amplitude_bins, scheme.phase_bins)
    amplitude: Optional[JointHistogram] = None
    phase: Optional[JointHistogram] = None
    for x, stats in runs:
        amp_hist, phase_hist = binning.histograms(x, stats)
        amplitude = amp_hist if amplitude is None else amplitude.merge(amp_hist)
        phase = phase_hist if phase is None else phase.merge(phase_hist)

    estimate = rate_from_histograms(amplitude, phase)
    bound_params = params.with_units(Units.NATS)
    outer_nats = owpn_new_outer_bound(bound_params).value

    if estimate.rate_total > outer_nats:
        raise InvariantViolationError(
            f"Rate estimate {estimate.rate_total:.6g} nats exceeds the outer bound {outer_nats:.6g}"
        )

    return RateExperimentResult(params, scheme, estimate, convert_units(outer_nats, params.units), batches)
