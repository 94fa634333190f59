# analysis/achievability.py
"""
Monte Carlo rendition of the shifted-exponential / uniform-phase scheme

- Input: X = A e^{j Phi}, A^2 = s + Exp(lambda), Phi ~ U[0, 2*pi)
- Receiver statistics: block norm r = ||Y_k|| for the amplitude and the
  genie-aided phase difference phi_k for the phase
- Plug-in mutual information between quantized inputs and statistics

The plug-in value is an estimate of the rate the scheme supports, biased
upward by roughly (Bx - 1)(By - 1) / (2N) nats per term. It is not a
certified lower bound.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

import config
from core.errors import (
    InsufficientSamplesError,
    MissingPreviousBlockError,
    PowerBudgetExceededError,
    ValidationError,
)
from core.params import ChannelParams, validate
from data.channel import TWO_PI, BlockObservation, ChannelOutput, RngSeed, wrap_phase

logger = logging.getLogger(__name__)

# Relative slack on s + lambda <= P/L for values read back from text
_BUDGET_RTOL = 1e-12


@dataclass(frozen=True)
class SchemeConfig:
    """
    Transmission scheme and estimator settings.

    Attributes:
        n_blocks: symbols per run
        shift: s >= 0, per-sample power units
        scale: lambda > 0; None spends the remaining budget P/L - s
        amplitude_bins: quantization of (A, r), >= 8
        phase_bins: quantization of (Phi, phi), >= 8
        seed: RNG seed; stream ids select batches
    """
    n_blocks: int
    shift: float = 0.0
    scale: Optional[float] = None
    amplitude_bins: int = config.DEFAULT_AMPLITUDE_BINS
    phase_bins: int = config.DEFAULT_PHASE_BINS
    seed: RngSeed = field(default_factory=lambda: RngSeed(config.DEFAULT_SEED))

    def __post_init__(self):
        if self.n_blocks < 1:
            raise ValidationError(f"n_blocks must be >= 1, got {self.n_blocks}")
        if not (math.isfinite(self.shift) and self.shift >= 0):
            raise ValidationError(f"Amplitude shift must be finite and >= 0, got {self.shift}")
        if self.scale is not None and not (math.isfinite(self.scale) and self.scale > 0):
            raise ValidationError(f"Amplitude scale must be finite and > 0, got {self.scale}")
        for name in ('amplitude_bins', 'phase_bins'):
            bins = getattr(self, name)
            if bins < config.MIN_QUANTIZATION_BINS:
                raise ValidationError(
                    f"{name} must be >= {config.MIN_QUANTIZATION_BINS}, got {bins}"
                )

    def resolve_scale(self, params: ChannelParams) -> float:
        """lambda for these params; enforces s + lambda <= P/L"""
        budget = params.sample_power
        scale = budget - self.shift if self.scale is None else self.scale
        if scale <= 0 or self.shift + scale > budget * (1.0 + _BUDGET_RTOL):
            raise PowerBudgetExceededError(
                f"s + lambda = {self.shift + max(scale, 0.0):g} exceeds the per-sample budget "
                f"P/L = {budget:g} (or leaves lambda <= 0)"
            )
        return scale

    def mean_power(self, params: ChannelParams) -> float:
        return self.shift + self.resolve_scale(params)

    def for_batch(self, stream: int, n_blocks: int) -> 'SchemeConfig':
        return SchemeConfig(n_blocks, self.shift, self.scale, self.amplitude_bins,
                            self.phase_bins, self.seed.with_stream(stream))


def sample_scheme_input(scheme: SchemeConfig, params: ChannelParams) -> np.ndarray:
    """
    Draw X_k = A_k e^{j Phi_k} for k = 0..n_blocks-1.

    Raises:
        PowerBudgetExceededError: s + lambda > P/L
    """
    validate(params)
    scale = scheme.resolve_scale(params)
    rng = scheme.seed.generator('input')

    amplitude2 = scheme.shift + rng.exponential(scale, scheme.n_blocks)
    phase = rng.uniform(0.0, TWO_PI, scheme.n_blocks)
    return np.sqrt(amplitude2) * np.exp(1j * phase)


@dataclass(frozen=True)
class ReceiverStatistics:
    """Statistics of one block; phi is None for a block without predecessor"""
    r: float
    phi: Optional[float]


@dataclass(frozen=True)
class StatisticsBatch:
    """
    Receiver statistics of consecutive blocks.

    r has one entry per block; phi has one entry per block after the
    first (phi[k-1] belongs to block k).
    """
    r: np.ndarray
    phi: np.ndarray

    def __len__(self) -> int:
        return len(self.r)

    def __getitem__(self, k: int) -> ReceiverStatistics:
        return ReceiverStatistics(float(self.r[k]), float(self.phi[k - 1]) if k > 0 else None)

    def phase_statistic(self, k: int) -> float:
        if k == 0:
            raise MissingPreviousBlockError("Block 0 has no predecessor for the phase statistic")
        return float(self.phi[k - 1])


def _as_arrays(blocks: Union[ChannelOutput, Sequence[BlockObservation]]) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(blocks, ChannelOutput):
        return blocks.x, blocks.y

    blocks = list(blocks)
    if not blocks:
        raise ValidationError("No blocks to compute statistics for")
    indices = [b.block_index for b in blocks]
    if any(j != i + 1 for i, j in zip(indices, indices[1:])):
        raise ValidationError(f"Blocks must be consecutive, got indices {indices[:5]}...")
    return np.array([b.x for b in blocks]), np.vstack([b.y for b in blocks])


def receiver_statistics(blocks: Union[ChannelOutput, Sequence[BlockObservation]],
                        prev_phase: Optional[Sequence[float]] = None) -> StatisticsBatch:
    """
    Block norms and phase-difference statistics.

    Args:
        blocks: consecutive block observations
        prev_phase: angle of X_{k-1} for each block k >= 1 (length M - 1);
            the true symbol phases when omitted

    Returns:
        StatisticsBatch with r_k = ||Y_k|| and
        phi_k = angle(Y_{kL} conj(Y_{kL-1} e^{-j angle X_{k-1}})) mod 2*pi
    """
    x, y = _as_arrays(blocks)
    r = np.linalg.norm(y, axis=1)

    if prev_phase is None:
        prev_phase = np.angle(x[:-1])
    prev_phase = np.asarray(prev_phase, dtype=float)
    if len(prev_phase) != len(x) - 1:
        raise ValidationError(
            f"prev_phase needs {len(x) - 1} entries for {len(x)} blocks, got {len(prev_phase)}"
        )

    return StatisticsBatch(r, _phase_differences(y[1:, 0], y[:-1, -1], prev_phase))


def _phase_differences(first: np.ndarray, last_before: np.ndarray, prev_phase: np.ndarray) -> np.ndarray:
    """angle(Y_{kL} conj(Y_{kL-1} e^{-j prev_phase})) in [0, 2*pi)"""
    reference = last_before * np.exp(-1j * prev_phase)
    return wrap_phase(np.angle(first * np.conj(reference)))


def streamed_receiver_statistics(chunks: Iterable[ChannelOutput]) -> StatisticsBatch:
    """
    receiver_statistics over consecutive chunks of one run, using the true
    symbol phases.

    The last sample and symbol of each chunk are carried into the next so
    the first phase statistic of a chunk is the one the whole run would
    give. Only r and phi are kept.
    """
    r_parts, phi_parts = [], []
    carry: Optional[Tuple[complex, complex]] = None
    for chunk in chunks:
        stats = receiver_statistics(chunk)
        r_parts.append(stats.r)
        if carry is not None:
            prev_x, prev_sample = carry
            phi_parts.append(_phase_differences(chunk.y[:1, 0], np.array([prev_sample]),
                                                np.array([np.angle(prev_x)])))
        phi_parts.append(stats.phi)
        carry = (chunk.x[-1], chunk.y[-1, -1])

    if carry is None:
        raise ValidationError("No blocks to compute statistics for")
    return StatisticsBatch(np.concatenate(r_parts), np.concatenate(phi_parts))


class JointHistogram:
    """
    Counts over (input bin, statistic bin).

    merge() adds counts, so batches on separate streams combine in any
    order to the same table.
    """

    def __init__(self, counts: np.ndarray):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2:
            raise ValidationError(f"Histogram counts must be 2-D, got shape {counts.shape}")
        self.counts = counts

    @classmethod
    def from_codes(cls, x_codes: Sequence[int], y_codes: Sequence[int],
                   shape: Tuple[int, int]) -> 'JointHistogram':
        """Contingency table of integer codes in [0, shape[0]) x [0, shape[1])"""
        table = pd.crosstab(pd.Series(np.asarray(x_codes), name='x'),
                            pd.Series(np.asarray(y_codes), name='y'))
        table = table.reindex(index=range(shape[0]), columns=range(shape[1]), fill_value=0)
        return cls(table.to_numpy())

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def shape(self) -> Tuple[int, int]:
        return self.counts.shape

    def merge(self, other: 'JointHistogram') -> 'JointHistogram':
        if self.shape != other.shape:
            raise ValidationError(f"Cannot merge histograms of shapes {self.shape} and {other.shape}")
        return JointHistogram(self.counts + other.counts)

    def mutual_information(self) -> float:
        """Plug-in mutual information in nats"""
        n = self.total
        if n == 0:
            return 0.0
        joint = self.counts / n
        px = joint.sum(axis=1, keepdims=True)
        py = joint.sum(axis=0, keepdims=True)
        mask = joint > 0
        return float(np.sum(joint[mask] * np.log(joint[mask] / (px @ py)[mask])))


class QuantileBinning:
    """
    Equal-probability bin edges fitted on a reference sample.

    The outer edges are opened to +-inf so other batches always land in a bin.
    """

    def __init__(self, edges: np.ndarray):
        self.edges = edges

    @classmethod
    def fit(cls, values: np.ndarray, bins: int) -> 'QuantileBinning':
        _, edges = pd.qcut(values, bins, retbins=True, duplicates='drop')
        edges = np.asarray(edges, dtype=float)
        edges[0], edges[-1] = -np.inf, np.inf
        return cls(edges)

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    def codes(self, values: np.ndarray) -> np.ndarray:
        return pd.cut(values, self.edges, labels=False, right=True, include_lowest=True).astype(np.int64)


@dataclass(frozen=True)
class RateBinning:
    """Quantizers for (A, r) and (Phi, phi)"""
    amplitude_in: QuantileBinning
    amplitude_out: QuantileBinning
    phase_in: QuantileBinning
    phase_out: QuantileBinning

    @classmethod
    def fit(cls, inputs: np.ndarray, stats: StatisticsBatch,
            amplitude_bins: int, phase_bins: int) -> 'RateBinning':
        return cls(
            QuantileBinning.fit(np.abs(inputs), amplitude_bins),
            QuantileBinning.fit(stats.r, amplitude_bins),
            QuantileBinning.fit(_input_phase(inputs[1:]), phase_bins),
            QuantileBinning.fit(stats.phi, phase_bins),
        )

    def histograms(self, inputs: np.ndarray, stats: StatisticsBatch) -> Tuple[JointHistogram, JointHistogram]:
        amplitude = JointHistogram.from_codes(
            self.amplitude_in.codes(np.abs(inputs)), self.amplitude_out.codes(stats.r),
            (self.amplitude_in.n_bins, self.amplitude_out.n_bins),
        )
        phase = JointHistogram.from_codes(
            self.phase_in.codes(_input_phase(inputs[1:])), self.phase_out.codes(stats.phi),
            (self.phase_in.n_bins, self.phase_out.n_bins),
        )
        return amplitude, phase


def _input_phase(x: np.ndarray) -> np.ndarray:
    return wrap_phase(np.angle(x))


@dataclass(frozen=True)
class RateEstimate:
    """Plug-in rate estimate (nats) with the counts it came from"""
    rate_amplitude: float
    rate_phase: float
    amplitude_samples: int
    phase_samples: int
    amplitude_bins: int
    phase_bins: int
    note: str = 'plug-in estimate, biased upward; not a certified bound'

    @property
    def rate_total(self) -> float:
        return self.rate_amplitude + self.rate_phase


def rate_from_histograms(amplitude: JointHistogram, phase: JointHistogram) -> RateEstimate:
    """Rate estimate from (merged) histograms"""
    if phase.total < config.MIN_PLUGIN_SAMPLES:
        raise InsufficientSamplesError(
            f"Plug-in estimate needs >= {config.MIN_PLUGIN_SAMPLES} symbol pairs, got {phase.total}"
        )
    return RateEstimate(
        rate_amplitude=amplitude.mutual_information(),
        rate_phase=phase.mutual_information(),
        amplitude_samples=amplitude.total,
        phase_samples=phase.total,
        amplitude_bins=amplitude.shape[0],
        phase_bins=phase.shape[0],
    )


def plugin_rate_estimate(inputs: np.ndarray, stats: StatisticsBatch,
                         amplitude_bins: int = config.DEFAULT_AMPLITUDE_BINS,
                         phase_bins: int = config.DEFAULT_PHASE_BINS) -> RateEstimate:
    """
    I(A; r) + I(Phi; phi) from quantile-binned samples of one run.

    The first block enters only the amplitude term.

    Raises:
        InsufficientSamplesError: fewer than 10^4 symbol pairs
    """
    inputs = np.asarray(inputs, dtype=complex)
    if len(inputs) != len(stats):
        raise ValidationError(f"{len(inputs)} inputs for {len(stats)} statistics")
    if len(inputs) - 1 < config.MIN_PLUGIN_SAMPLES:
        raise InsufficientSamplesError(
            f"Plug-in estimate needs >= {config.MIN_PLUGIN_SAMPLES} symbol pairs, got {len(inputs) - 1}"
        )

    binning = RateBinning.fit(inputs, stats, amplitude_bins, phase_bins)
    estimate = rate_from_histograms(*binning.histograms(inputs, stats))
    logger.debug(f"Plug-in rate over {len(inputs)} blocks: amplitude {estimate.rate_amplitude:.4f}, "
                 f"phase {estimate.rate_phase:.4f} nats")
    return estimate
