# services/immse_verifier.py
"""
Cross-checks between the Fisher/I-MMSE machinery and the closed-form
phase bound, over an (a, b) grid or explicit (P, sigma2, L) points.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

import config
from core.errors import ValidationError
from analysis.bounds import phase_precision, phase_rate_closed_form
from analysis.immse import QuadratureConfig, fisher_fixed_point, effective_precision, immse_entropy_bound

logger = logging.getLogger(__name__)

VERIFY_HEADER = ['a', 'b', 'j_star_iter', 'j_star_closed', 'c', 'integral_quad',
                 'integral_analytic', 'phase_bound_immse', 'phase_bound_closed', 'max_abs_error']


@dataclass(frozen=True)
class VerificationRow:
    a: float
    b: float
    j_star_iter: float
    j_star_closed: float
    c: float
    integral_quad: float
    integral_analytic: float
    phase_bound_immse: float
    phase_bound_closed: float
    max_abs_error: float

    def values(self) -> List[float]:
        return [getattr(self, name) for name in VERIFY_HEADER]


def verify_point(a: float, b: float, perturb: float = 0.0,
                 quad: Optional[QuadratureConfig] = None,
                 fixed_point_tol: float = config.FIXED_POINT_TOL,
                 fixed_point_max_iter: int = config.FIXED_POINT_MAX_ITER) -> VerificationRow:
    """
    Run every cross-check at one (a, b).

    max_abs_error is the largest of: relative fixed-point disagreement,
    relative disagreement of the two forms of c, |quadrature - ln(cV)| and
    |phase bound via I-MMSE - closed-form phase bound|.

    Args:
        perturb: added to the quadrature result (exercises the failure path)
    """
    if b <= 0:
        raise ValidationError(f"Verification needs b > 0, got {b}")

    fixed = fisher_fixed_point(a, b, tol=fixed_point_tol, max_iter=fixed_point_max_iter)
    c = effective_precision(a, b)
    c_closed = phase_precision(a, b)
    bound = immse_entropy_bound(a, b, quad)

    integral_quad = bound.integral_value + perturb
    phase_immse = bound.phase_rate_upper_bound + 0.5 * perturb
    phase_closed = phase_rate_closed_form(a, b)

    errors = (
        abs(fixed.j_star_iterated - fixed.j_star) / fixed.j_star,
        abs(c - c_closed) / c_closed,
        abs(integral_quad - bound.integral_analytic),
        abs(phase_immse - phase_closed),
    )
    row = VerificationRow(a, b, fixed.j_star_iterated, fixed.j_star, c, integral_quad,
                          bound.integral_analytic, phase_immse, phase_closed, max(errors))
    logger.debug(f"Verified a={a:g}, b={b:g} in {fixed.iterations} iterations: max error {row.max_abs_error:.3g}")
    return row


def log_grid(grid_min: float, grid_max: float, points: int) -> List[Tuple[float, float]]:
    """All (a, b) pairs on a log-spaced square grid, a-major"""
    if not (0 < grid_min <= grid_max) or points < 1:
        raise ValidationError(f"Invalid verification grid [{grid_min}, {grid_max}] x {points}")
    axis = [float(v) for v in np.geomspace(grid_min, grid_max, points)]
    return [(a, b) for a in axis for b in axis]


def channel_points(triples: Iterable[Sequence[float]]) -> List[Tuple[float, float]]:
    """(P, sigma2, L) -> (a, b) = (L / sigma2, P / L)"""
    points = []
    for power, sigma2, oversampling in triples:
        if not (power > 0 and sigma2 > 0 and oversampling >= 1):
            raise ValidationError(f"Need P > 0, sigma2 > 0, L >= 1, got ({power}, {sigma2}, {oversampling})")
        points.append((oversampling / sigma2, power / oversampling))
    return points


def failing_rows(rows: Sequence[VerificationRow], tolerance: float) -> List[VerificationRow]:
    return [row for row in rows if not row.max_abs_error <= tolerance]
