"""
GDoF Test Script - closed-form pre-log curves and slopes fitted to the bounds

Slopes are fitted on P in {1e4, ..., 1e8} over the top half of the grid
and repeated at sigma2 in {0.1, 1, 10}.
"""

import logging
import math
import sys

import pytest

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

from core.errors import InvalidGridError, NegativeAlphaError
from core.params import BoundReport
from analysis.gdof import (
    empirical_prelog,
    gdof_amplitude,
    gdof_exact,
    gdof_known,
    gdof_lower_bound,
    gdof_phase,
    prelog_table,
    validate_grid,
)

P_GRID = [1e4, 1e5, 1e6, 1e7, 1e8]
ALPHAS = [0.0, 0.1, 0.25, 0.4, 0.5, 0.75, 1.0, 2.0]
SIGMA2_VALUES = [0.1, 1.0, 10.0]


def test_gdof_closed_forms():
    assert gdof_exact(0.0) == 0.5
    assert gdof_exact(0.25) == 0.625
    assert gdof_exact(0.5) == 0.75
    assert gdof_exact(1.0) == 0.75
    assert gdof_exact(2.0) == 0.75

    assert gdof_lower_bound(0.25) == 0.625
    assert gdof_lower_bound(0.5) == 0.75
    assert gdof_lower_bound(3.0) == 0.75

    assert gdof_known(0.5) == 0.75
    assert gdof_known(0.75) is None

    assert gdof_amplitude(5.0) == 0.5
    assert gdof_phase(0.25) == 0.125
    assert gdof_phase(1.0) == 0.25


def test_gdof_is_continuous_at_half():
    assert gdof_exact(0.5 - 1e-12) == pytest.approx(0.75, abs=1e-12)
    assert gdof_exact(0.5 + 1e-12) == 0.75
    for alpha in (0.0, 0.2, 0.5, 0.9, 4.0):
        assert gdof_exact(alpha) == pytest.approx(gdof_amplitude(alpha) + gdof_phase(alpha), abs=1e-15)
        assert gdof_lower_bound(alpha) == gdof_exact(alpha)


def test_gdof_rejects_negative_alpha():
    for func in (gdof_exact, gdof_lower_bound, gdof_known, gdof_amplitude, gdof_phase):
        with pytest.raises(NegativeAlphaError):
            func(-0.1)
    with pytest.raises(NegativeAlphaError):
        empirical_prelog('owpn_new_th4', -1.0, 1.0, P_GRID)


def test_new_bound_slope_at_quarter_and_one():
    estimate = empirical_prelog('owpn_new_th4', 0.25, 1.0, P_GRID)
    assert estimate.slope == pytest.approx(0.625, abs=0.02)
    assert estimate.target == 0.625

    estimate = empirical_prelog('owpn_new_th4', 1.0, 1.0, P_GRID)
    assert estimate.slope == pytest.approx(0.75, abs=0.02)
    assert estimate.abs_error <= 0.02


def test_new_bound_slope_recovers_gdof_at_every_sigma2():
    for sigma2 in SIGMA2_VALUES:
        for alpha in ALPHAS:
            estimate = empirical_prelog('owpn_new_th4', alpha, sigma2, P_GRID)
            assert math.isfinite(estimate.slope)
            assert abs(estimate.slope - gdof_exact(alpha)) <= 0.02, (alpha, sigma2, estimate.slope)


def test_phase_slope_saturates_at_quarter():
    for sigma2 in SIGMA2_VALUES:
        for alpha in ALPHAS:
            phase = empirical_prelog('phase', alpha, sigma2, P_GRID)
            total = empirical_prelog('owpn_new_th4', alpha, sigma2, P_GRID)
            assert phase.target == min(alpha / 2.0, 0.25)
            assert phase.abs_error <= 0.02, (alpha, sigma2, phase.slope)
            assert total.slope >= phase.slope


def test_amplitude_slope_is_half():
    for alpha in ALPHAS:
        estimate = empirical_prelog('amplitude', alpha, 1.0, P_GRID)
        assert estimate.target == 0.5
        assert estimate.slope == pytest.approx(0.5, abs=0.01)


def test_old_bound_slope_below_half():
    for alpha in (0.0, 0.1, 0.25, 0.4):
        estimate = empirical_prelog('owpn_old_th3', alpha, 1.0, P_GRID)
        assert estimate.slope == pytest.approx(gdof_known(alpha), abs=0.02)


def test_prelog_accepts_callables():
    def synthetic(params):
        return BoundReport('synthetic', 0.3 * math.log(params.power) + 2.0)

    estimate = empirical_prelog(synthetic, 0.5, 1.0, P_GRID)
    assert estimate.bound_name == 'synthetic'
    assert estimate.slope == pytest.approx(0.3, abs=1e-12)
    assert estimate.residual < 1e-12


def test_prelog_records_points():
    estimate = empirical_prelog('owpn_new_th4', 0.5, 1.0, P_GRID)
    assert estimate.grid == tuple(P_GRID)
    assert len(estimate.points) == 5
    power, oversampling, _ = estimate.points[2]
    assert power == 1e6
    # real-valued L in closed forms
    assert oversampling == pytest.approx(1e3)


def test_prelog_table_order():
    table = prelog_table(['owpn_new_th4', 'phase'], [0.0, 1.0], 1.0, P_GRID)
    assert [(e.alpha, e.bound_name) for e in table] == [
        (0.0, 'owpn_new_th4'), (0.0, 'phase'), (1.0, 'owpn_new_th4'), (1.0, 'phase'),
    ]
    with pytest.raises(NegativeAlphaError):
        prelog_table(['phase'], [0.5, -2.0], 1.0, P_GRID)


def test_invalid_grids():
    assert validate_grid(P_GRID) == tuple(P_GRID)
    for grid in ([1e4, 1e5], [1e4, 1e4, 1e5], [0.5, 10.0, 100.0], [10.0, math.nan, 1e3], [1e5, 1e4, 1e6]):
        with pytest.raises(InvalidGridError):
            validate_grid(grid)
    with pytest.raises(InvalidGridError):
        empirical_prelog('owpn_new_th4', 0.5, 1.0, [1e4, 1e5])
    # uneven spacing is allowed, with a warning
    assert validate_grid([10.0, 20.0, 1e4]) == (10.0, 20.0, 1e4)


def main():
    """Run all tests"""
    from utils.suite_runner import run_suite
    return run_suite("GDOF TEST SUITE", [
        test_gdof_closed_forms,
        test_gdof_is_continuous_at_half,
        test_gdof_rejects_negative_alpha,
        test_new_bound_slope_at_quarter_and_one,
        test_new_bound_slope_recovers_gdof_at_every_sigma2,
        test_phase_slope_saturates_at_quarter,
        test_amplitude_slope_is_half,
        test_old_bound_slope_below_half,
        test_prelog_accepts_callables,
        test_prelog_records_points,
        test_prelog_table_order,
        test_invalid_grids,
    ])


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
