# analysis/gdof.py
"""
Generalized degrees of freedom (pre-log) of the OWPN channel.

Closed-form GDoF curves for L = floor(P^alpha), and an empirical pre-log
extracted by regressing any bound evaluator against ln P.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import InvalidGridError, NegativeAlphaError
from core.params import BoundReport, ChannelParams, GdofParams, Units
from analysis.bounds import get_evaluator

logger = logging.getLogger(__name__)

Evaluator = Callable[[ChannelParams], BoundReport]


def _check_alpha(alpha: float) -> None:
    if not alpha >= 0:
        raise NegativeAlphaError(f"alpha must be >= 0, got {alpha}")


def gdof_exact(alpha: float) -> float:
    """GDoF (1 + alpha)/2 up to alpha = 1/2, then 3/4"""
    _check_alpha(alpha)
    return (1.0 + alpha) / 2.0 if alpha <= 0.5 else 0.75


def gdof_lower_bound(alpha: float) -> float:
    """Pre-log achieved by the shifted-exponential / uniform-phase scheme"""
    _check_alpha(alpha)
    return (1.0 + alpha) / 2.0 if alpha < 0.5 else 0.75


def gdof_known(alpha: float) -> Optional[float]:
    """GDoF as known from the earlier outer bound: (1 + alpha)/2 on [0, 1/2], open beyond"""
    _check_alpha(alpha)
    return (1.0 + alpha) / 2.0 if alpha <= 0.5 else None


def gdof_amplitude(alpha: float) -> float:
    """Amplitude-channel share of the pre-log"""
    _check_alpha(alpha)
    return 0.5


def gdof_phase(alpha: float) -> float:
    """Phase-channel share of the pre-log; saturates at 1/4"""
    _check_alpha(alpha)
    return min(alpha, 0.5) / 2.0


# Fitted-slope targets per bound name
SLOPE_TARGETS = {
    'owpn_new_th4': gdof_exact,
    'amplitude': gdof_amplitude,
    'phase': gdof_phase,
}


@dataclass(frozen=True)
class PrelogEstimate:
    """
    Least-squares slope of a bound (nats) against ln P.

    grid is the full P grid; only its top half enters the fit. points holds
    (P, L, value_nats) for every grid point.
    """
    alpha: float
    slope: float
    grid: Tuple[float, ...]
    residual: float
    bound_name: str = ''
    points: Tuple[Tuple[float, float, float], ...] = field(default_factory=tuple)

    @property
    def target(self) -> float:
        return SLOPE_TARGETS.get(self.bound_name, gdof_exact)(self.alpha)

    @property
    def abs_error(self) -> float:
        return abs(self.slope - self.target)


def validate_grid(p_grid: Sequence[float]) -> Tuple[float, ...]:
    """Strictly increasing, >= 3 points, all finite and > 1"""
    grid = tuple(float(p) for p in p_grid)
    if len(grid) < 3:
        raise InvalidGridError(f"P grid needs at least 3 points, got {len(grid)}")
    if not all(math.isfinite(p) and p > 1 for p in grid):
        raise InvalidGridError(f"P grid values must be finite and > 1: {list(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidGridError(f"P grid must be strictly increasing: {list(grid)}")

    steps = np.diff(np.log(grid))
    if not np.allclose(steps, steps[0], rtol=1e-6):
        logger.warning("P grid is not log-spaced; the fitted slope weights the points unevenly")
    return grid


def _value_nats(report: BoundReport) -> float:
    # slopes use the unclamped value where one exists
    value = report.diagnostics.get('raw_value', report.value)
    if report.units is Units.BITS:
        value *= math.log(2.0)
    return value


def empirical_prelog(bound: Union[str, Evaluator], alpha: float, sigma2: float,
                     p_grid: Sequence[float]) -> PrelogEstimate:
    """
    Fit the pre-log of a bound along L = max(1, P^alpha).

    Args:
        bound: bound name or evaluator
        alpha: oversampling exponent
        sigma2: phase-noise variance (GDoF does not depend on it)
        p_grid: log-spaced P values, at least 3, all > 1

    Returns:
        PrelogEstimate from ordinary least squares over the largest half
        of the grid (at least two points)
    """
    gdof_params = GdofParams(alpha)
    grid = validate_grid(p_grid)

    if isinstance(bound, str):
        bound_name, evaluator = bound, get_evaluator(bound)
    else:
        bound_name, evaluator = getattr(bound, '__name__', 'custom'), bound

    points = []
    for power in grid:
        params = gdof_params.channel_params(power, sigma2, integer=False)
        points.append((power, params.oversampling, _value_nats(evaluator(params))))

    fit = points[len(points) // 2:]
    x = np.log([p for p, _, _ in fit])
    y = np.array([v for _, _, v in fit])
    if not np.all(np.isfinite(y)):
        raise InvalidGridError(f"{bound_name} is not finite on the fitted grid for alpha={alpha}")

    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))

    logger.debug(f"Pre-log of {bound_name} at alpha={alpha:g}, sigma2={sigma2:g}: {slope:.6f}")
    return PrelogEstimate(alpha, float(slope), grid, residual, bound_name, tuple(points))


def prelog_table(bound_names: Sequence[str], alphas: Sequence[float], sigma2: float,
                 p_grid: Sequence[float]) -> List[PrelogEstimate]:
    """Estimates for every (alpha, bound) pair, alpha-major"""
    for alpha in alphas:
        _check_alpha(alpha)
    return [
        empirical_prelog(name, alpha, sigma2, p_grid)
        for alpha in alphas
        for name in bound_names
    ]
