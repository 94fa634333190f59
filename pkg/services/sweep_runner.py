# services/sweep_runner.py
"""
Grid evaluation for bound sweeps and GDoF experiments.

Points are evaluated on a thread pool; results are collected by grid
index, so output order never depends on scheduling.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

import config
from core.errors import InvalidGridError, ValidationError
from core.params import BoundReport, ChannelParams, GdofParams, Units
from analysis.bounds import get_evaluator
from analysis.gdof import PrelogEstimate, empirical_prelog, validate_grid

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

SWEEP_HEADER = ['P', 'sigma2', 'L', 'alpha', 'bound', 'units', 'value', 'regime', 'flags']


class SweepRunner:
    """Ordered parallel map over grid points"""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or config.get_worker_count()

    def map(self, func: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """
        Apply func to every item concurrently.

        Returns:
            Results in item order

        Raises:
            The first failure in item order, after the remaining work is cancelled
        """
        items = list(items)
        if self.max_workers == 1 or len(items) <= 1:
            return [func(item) for item in items]

        results: List[Optional[R]] = [None] * len(items)
        errors = {}
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(func, item): i for i, item in enumerate(items)}
            for future in as_completed(futures):
                index = futures[future]
                try:
                    results[index] = future.result()
                except Exception as e:
                    errors[index] = e
                    for pending in futures:
                        pending.cancel()

        if errors:
            first = min(errors)
            logger.error(f"Sweep point {first} failed: {errors[first]}")
            raise errors[first]
        return results


@dataclass(frozen=True)
class SweepGrid:
    """
    Bound sweep axes: log-spaced P, a sigma2 list, and either an L list or
    an alpha list (L = max(1, floor(P^alpha)) per point).
    """
    p_start: float
    p_stop: float
    p_points: int
    sigma2: Tuple[float, ...]
    bounds: Tuple[str, ...]
    oversampling: Tuple[float, ...] = ()
    alphas: Tuple[float, ...] = ()
    units: Units = Units.NATS
    o1_constant: float = 0.0

    def __post_init__(self):
        if self.oversampling and self.alphas:
            raise ValidationError("Give either an L list or an alpha list, not both")
        if not self.sigma2 or not self.bounds or self.p_points < 1:
            raise InvalidGridError("Sweep grids must be non-empty")
        if not (0 < self.p_start <= self.p_stop) or not math.isfinite(self.p_stop):
            raise InvalidGridError(f"P range must satisfy 0 < start <= stop, got {self.p_start}..{self.p_stop}")
        if self.p_points == 1 and self.p_start != self.p_stop:
            raise InvalidGridError("A single-point P axis needs start == stop")
        for name in self.bounds:
            get_evaluator(name)
        for alpha in self.alphas:
            GdofParams(alpha)

    def powers(self) -> List[float]:
        return [float(p) for p in np.geomspace(self.p_start, self.p_stop, self.p_points)]

    def points(self) -> List[Tuple[float, float, float, Optional[float], str]]:
        """(P, sigma2, L, alpha, bound) in lexicographic axis order"""
        third_axis = self.alphas or self.oversampling or (1,)
        result = []
        for power in self.powers():
            for sigma2 in self.sigma2:
                for value in third_axis:
                    if self.alphas:
                        alpha = float(value)
                        oversampling = GdofParams(alpha).oversampling(power, integer=True)
                    else:
                        alpha, oversampling = None, value
                    for bound in self.bounds:
                        result.append((power, float(sigma2), oversampling, alpha, bound))
        return result

    def __len__(self) -> int:
        return len(self.points())


@dataclass(frozen=True)
class SweepRow:
    power: float
    sigma2: float
    oversampling: float
    alpha: Optional[float]
    report: BoundReport


def evaluate_bound(bound: str, params: ChannelParams, alpha: Optional[float] = None,
                   o1_constant: float = 0.0, strict: bool = True) -> SweepRow:
    """
    One bound at one point.

    With strict=False the WPN bound at L != 1 yields nan flagged
    not_applicable instead of raising.
    """
    evaluator = get_evaluator(bound)
    if bound == 'wpn_th1' and params.oversampling != 1 and not strict:
        report = BoundReport(bound, math.nan, params.units, flags=('not_applicable',))
    elif bound in ('owpn_old_th3', 'compare'):
        report = evaluator(params, o1_constant)
    else:
        report = evaluator(params)

    if report.flags:
        logger.warning(f"{bound} at P={params.power:g}, sigma2={params.sigma2:g}, "
                       f"L={params.oversampling:g} flagged {', '.join(report.flags)}")
    return SweepRow(params.power, params.sigma2, params.oversampling, alpha, report)


def evaluate_point(grid: SweepGrid, point: Tuple[float, float, float, Optional[float], str]) -> SweepRow:
    power, sigma2, oversampling, alpha, bound = point
    params = ChannelParams(power, sigma2, oversampling, units=grid.units)
    row = evaluate_bound(bound, params, alpha, grid.o1_constant, strict=False)
    logger.debug(f"{bound} at P={power:g}, sigma2={sigma2:g}, L={oversampling:g}: {row.report.value:.6g}")
    return row


def run_bound_sweep(grid: SweepGrid, runner: Optional[SweepRunner] = None) -> List[SweepRow]:
    runner = runner or SweepRunner()
    points = grid.points()
    logger.info(f"Evaluating {len(points)} sweep points on {runner.max_workers} workers")
    return runner.map(lambda point: evaluate_point(grid, point), points)


@dataclass(frozen=True)
class GdofExperiment:
    """Alpha list x bound list over one P grid"""
    alphas: Tuple[float, ...]
    p_grid: Tuple[float, ...]
    bounds: Tuple[str, ...] = ('owpn_new_th4',)
    sigma2: float = config.DEFAULT_GDOF_SIGMA2

    def __post_init__(self):
        if not self.alphas or not self.bounds:
            raise InvalidGridError("GDoF experiments need at least one alpha and one bound")
        for alpha in self.alphas:
            GdofParams(alpha)
        for name in self.bounds:
            get_evaluator(name)
        validate_grid(self.p_grid)


def run_gdof_experiment(experiment: GdofExperiment,
                        runner: Optional[SweepRunner] = None) -> List[PrelogEstimate]:
    """PrelogEstimate per (alpha, bound), alpha-major"""
    runner = runner or SweepRunner()
    jobs = [(alpha, bound) for alpha in experiment.alphas for bound in experiment.bounds]
    logger.info(f"Fitting {len(jobs)} pre-log slopes over {len(experiment.p_grid)} P values")
    return runner.map(
        lambda job: empirical_prelog(job[1], job[0], experiment.sigma2, experiment.p_grid),
        jobs,
    )
