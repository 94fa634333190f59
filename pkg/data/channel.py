"""
OWPN Channel Sampler

Generates Wiener phase trajectories, additive noise and the
integrate-and-dump block outputs

    Y[mL + l] = X[m] * exp(j * Theta[mL + l]) + W[mL + l]

with W ~ CN(0, 2) and phase increments N(0, sigma2 / L).

Randomness comes from counter-based Philox streams keyed by
(seed, stream, purpose), so sweep points are reproducible no matter
which worker runs them.
"""

import logging
import math
from dataclasses import dataclass
from collections import abc
from typing import Iterator, List, Optional, Sequence, Tuple, Union, overload

import numpy as np

import config
from core.errors import PhaseTooShortError, ValidationError
from core.params import ChannelParams, validate

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def wrap_phase(values) -> np.ndarray:
    """Angles folded into [0, 2*pi)"""
    wrapped = np.mod(values, TWO_PI)
    # tiny negative angles round up to exactly 2*pi
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


# Sub-stream keys; each consumer of randomness gets its own Philox key
_PURPOSES = {
    'phase': 0,
    'noise': 1,
    'input': 2,
    'shuffle': 3,
}


@dataclass(frozen=True)
class RngSeed:
    """
    Seed plus stream id for reproducible parallel sampling.

    Identical (seed, stream) pairs reproduce identical draws bit-for-bit.
    """
    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.stream) < 0:
            raise ValidationError(f"Stream id must be >= 0, got {self.stream}")

    def generator(self, purpose: str) -> np.random.Generator:
        """Independent generator for one purpose ('phase', 'noise', 'input', 'shuffle')"""
        sequence = np.random.SeedSequence(
            entropy=int(self.seed),
            spawn_key=(int(self.stream), _PURPOSES[purpose]),
        )
        return np.random.Generator(np.random.Philox(sequence))

    def with_stream(self, stream: int) -> 'RngSeed':
        return RngSeed(self.seed, stream)


@dataclass(frozen=True)
class PhaseTrajectory:
    """
    Unwrapped Wiener phase realization.

    Attributes:
        initial: Theta[L-1], uniform on [0, 2*pi)
        theta: Theta[L], ..., Theta[(M+1)L - 1]; block m (0-based) owns
            theta[m*L:(m+1)*L]
        sigma2_per_sample: increment variance sigma2 / L
        oversampling: L
    """
    initial: float
    theta: np.ndarray
    sigma2_per_sample: float
    oversampling: int

    @property
    def n_blocks(self) -> int:
        return len(self.theta) // self.oversampling

    def increments(self) -> np.ndarray:
        """Theta[k+1] - Theta[k] for k = L-1, ..., including the first step"""
        return np.diff(self.theta, prepend=self.initial)

    def block(self, m: int) -> np.ndarray:
        L = self.oversampling
        return self.theta[m * L:(m + 1) * L]

    def wrapped(self) -> np.ndarray:
        """Phases folded into [0, 2*pi)"""
        return wrap_phase(self.theta)


@dataclass(frozen=True)
class BlockObservation:
    """One symbol X[m] and its L receiver samples"""
    x: complex
    y: np.ndarray
    block_index: int

    @property
    def oversampling(self) -> int:
        return len(self.y)


class ChannelOutput(abc.Sequence):
    """
    Sequence of BlockObservation backed by two arrays.

    x has shape (M,), y has shape (M, L). Indexing returns a
    BlockObservation; the arrays are available for vectorized statistics.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray):
        if y.ndim != 2 or y.shape[0] != len(x):
            raise ValidationError(f"Output shape {y.shape} does not match {len(x)} symbols")
        self.x = x
        self.y = y

    @property
    def oversampling(self) -> int:
        return self.y.shape[1]

    def __len__(self) -> int:
        return len(self.x)

    @overload
    def __getitem__(self, index: int) -> BlockObservation: ...

    @overload
    def __getitem__(self, index: slice) -> List[BlockObservation]: ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        if index < 0:
            index += len(self)
        if not 0 <= index < len(self):
            raise IndexError(index)
        return BlockObservation(complex(self.x[index]), self.y[index], index)

    def __iter__(self) -> Iterator[BlockObservation]:
        for m in range(len(self)):
            yield BlockObservation(complex(self.x[m]), self.y[m], m)


def sample_phase(params: ChannelParams, n_blocks: int, seed: RngSeed) -> PhaseTrajectory:
    """
    Sample a Wiener phase trajectory covering n_blocks symbols.

    Args:
        params: channel parameters (integer oversampling required)
        n_blocks: number of symbols to cover (>= 1)
        seed: RNG seed and stream

    Returns:
        PhaseTrajectory with n_blocks * L phases after a uniform initial phase
    """
    validate(params)
    if n_blocks < 1:
        raise ValidationError(f"n_blocks must be >= 1, got {n_blocks}")

    L = params.samples_per_symbol
    rng = seed.generator('phase')
    step_var = params.sigma2 / L

    initial = rng.uniform(0.0, TWO_PI)
    steps = rng.standard_normal(n_blocks * L) * math.sqrt(step_var)
    theta = initial + np.cumsum(steps)

    logger.debug(f"Sampled {n_blocks * L} phases (step variance {step_var:g})")
    return PhaseTrajectory(float(initial), theta, step_var, L)


def _block_samples(x: np.ndarray, theta: np.ndarray, noise_rng: Optional[np.random.Generator]) -> np.ndarray:
    """X e^{j Theta} (+ W) for theta of shape (M, L)"""
    y = x[:, None] * np.exp(1j * theta)
    if noise_rng is not None:
        noise = noise_rng.standard_normal(theta.shape + (2,))
        y += noise[..., 0] + 1j * noise[..., 1]
    return y


def transmit(params: ChannelParams, x: Union[Sequence[complex], np.ndarray],
             phase: PhaseTrajectory, seed: RngSeed, add_noise: bool = True,
             freeze_phase: bool = False) -> ChannelOutput:
    """
    Pass symbols through the OWPN channel.

    Args:
        params: channel parameters
        x: transmitted symbols X[0..M-1]
        phase: trajectory covering at least M blocks at the same L
        seed: RNG seed and stream for the additive noise
        add_noise: test hook; False zeroes W for exact oracles
        freeze_phase: test hook; True applies Theta[L-1] to every sample

    Returns:
        ChannelOutput of M blocks
    """
    validate(params)
    L = params.samples_per_symbol
    x = np.asarray(x, dtype=complex)
    M = len(x)

    if phase.oversampling != L:
        raise PhaseTooShortError(
            f"Trajectory was sampled at L={phase.oversampling}, channel uses L={L}"
        )
    if phase.n_blocks < M:
        raise PhaseTooShortError(
            f"Trajectory covers {phase.n_blocks} blocks, {M} requested"
        )

    if freeze_phase:
        theta = np.full((M, L), phase.initial)
    else:
        theta = phase.theta[:M * L].reshape(M, L)
    y = _block_samples(x, theta, seed.generator('noise') if add_noise else None)
    return ChannelOutput(x, y)


def transmit_in_chunks(params: ChannelParams, x: Union[Sequence[complex], np.ndarray],
                       seed: RngSeed, chunk_blocks: Optional[int] = None) -> Iterator[ChannelOutput]:
    """
    Sample the phase and pass symbols through the channel a chunk of
    blocks at a time.

    The walk continues from the last phase of the previous chunk and the
    phase and noise generators are drawn in order, so the chunks carry the
    same realization as sample_phase + transmit on the whole run. Only one
    chunk of receiver samples is held at a time.

    Args:
        chunk_blocks: blocks per chunk; default keeps a chunk at about
            config.CHUNK_SAMPLES receiver samples

    Yields:
        ChannelOutput per chunk, in block order
    """
    validate(params)
    L = params.samples_per_symbol
    x = np.asarray(x, dtype=complex)
    if chunk_blocks is None:
        chunk_blocks = max(1, config.CHUNK_SAMPLES // L)
    if chunk_blocks < 1:
        raise ValidationError(f"chunk_blocks must be >= 1, got {chunk_blocks}")

    phase_rng = seed.generator('phase')
    noise_rng = seed.generator('noise')
    step_sd = math.sqrt(params.sigma2 / L)

    last = phase_rng.uniform(0.0, TWO_PI)
    for start in range(0, len(x), chunk_blocks):
        chunk_x = x[start:start + chunk_blocks]
        M = len(chunk_x)
        theta = last + np.cumsum(phase_rng.standard_normal(M * L) * step_sd)
        last = float(theta[-1])
        yield ChannelOutput(chunk_x, _block_samples(chunk_x, theta.reshape(M, L), noise_rng))


def noise_samples(output: ChannelOutput, phase: PhaseTrajectory) -> np.ndarray:
    """Recover W = Y - X exp(j Theta) from an output and its trajectory"""
    M, L = output.y.shape
    theta = phase.theta[:M * L].reshape(M, L)
    return output.y - output.x[:, None] * np.exp(1j * theta)


def matched_block_statistic(block: BlockObservation) -> float:
    """|(1/sqrt(L)) * sum_l Y[mL + l]| for one block"""
    L = len(block.y)
    return float(abs(np.sum(block.y)) / math.sqrt(L))


def matched_block_statistics(output: ChannelOutput) -> np.ndarray:
    """Vectorized matched_block_statistic over all blocks"""
    return np.abs(output.y.sum(axis=1)) / math.sqrt(output.oversampling)


def trajectory_rows(phase: PhaseTrajectory, output: ChannelOutput) -> Iterator[Tuple[int, float, float, float]]:
    """
    Rows (k, theta, re_y, im_y), one per receiver sample; k counts from L
    as in the channel equation.
    """
    L = output.oversampling
    y = output.y.reshape(-1)
    for j, value in enumerate(y):
        yield (L + j, float(phase.theta[j]), float(value.real), float(value.imag))
