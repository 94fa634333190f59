"""
CSV Generators

One generator per output table. Every table is plain comma-separated text
with a header row and '\n' line endings; floats carry 17 significant digits.
"""

import csv
import logging
import os
import sys
import tempfile
from io import StringIO
from typing import Iterable, List, Optional, Sequence, TextIO

from core.params import BoundReport
from helpers import format_csv_number, format_flags, render_pretty
from analysis.gdof import PrelogEstimate, gdof_known
from services.immse_verifier import VERIFY_HEADER, VerificationRow
from services.simulation import MOMENT_HEADER, RATE_HEADER, MomentCheck, RateExperimentResult
from services.sweep_runner import SWEEP_HEADER, SweepRow

logger = logging.getLogger(__name__)

GDOF_POINT_HEADER = ['alpha', 'P', 'L', 'bound_name', 'value_nats']
GDOF_SUMMARY_HEADER = ['alpha', 'slope', 'target', 'abs_error', 'bound_name', 'gdof_known', 'residual']
TRAJECTORY_HEADER = ['k', 'theta', 're_y', 'im_y']
INTEGRAND_HEADER = ['rho', 'integrand', 'J_rho']


class BaseCsvGenerator:
    """
    Turns result objects into table rows and renders them as CSV or as an
    aligned text table.
    """

    header: List[str] = []

    def rows(self, results) -> Iterable[Sequence]:
        raise NotImplementedError

    def generate(self, results, pretty: bool = False) -> str:
        rows = [list(row) for row in self.rows(results)]
        if pretty:
            return render_pretty(self.header, rows)

        output = StringIO()
        writer = csv.writer(output, lineterminator='\n')
        writer.writerow(self.header)
        for row in rows:
            writer.writerow([format_csv_number(value) for value in row])

        content = output.getvalue()
        output.close()
        logger.debug(f"{type(self).__name__}: {len(rows)} rows")
        return content


class BoundCsvGenerator(BaseCsvGenerator):
    """Sweep rows (also used for a single `bound eval` row)"""

    header = SWEEP_HEADER

    def rows(self, results: Iterable[SweepRow]):
        for row in results:
            report: BoundReport = row.report
            yield [
                row.power, row.sigma2, row.oversampling, row.alpha,
                report.bound_name, report.units.value, report.value,
                report.regime or '', format_flags(report.flags),
            ]


class GdofPointCsvGenerator(BaseCsvGenerator):
    header = GDOF_POINT_HEADER

    def rows(self, results: Iterable[PrelogEstimate]):
        for estimate in results:
            for power, oversampling, value in estimate.points:
                yield [estimate.alpha, power, oversampling, estimate.bound_name, value]


class GdofSummaryCsvGenerator(BaseCsvGenerator):
    header = GDOF_SUMMARY_HEADER

    def rows(self, results: Iterable[PrelogEstimate]):
        for estimate in results:
            yield [
                estimate.alpha, estimate.slope, estimate.target, estimate.abs_error,
                estimate.bound_name, gdof_known(estimate.alpha), estimate.residual,
            ]


class VerificationCsvGenerator(BaseCsvGenerator):
    header = VERIFY_HEADER

    def rows(self, results: Iterable[VerificationRow]):
        for row in results:
            yield row.values()


class IntegrandCsvGenerator(BaseCsvGenerator):
    header = INTEGRAND_HEADER

    def rows(self, results):
        return results


class MomentCsvGenerator(BaseCsvGenerator):
    header = MOMENT_HEADER

    def rows(self, results: Iterable[MomentCheck]):
        for check in results:
            yield [check.quantity, check.estimate, check.theory, check.std_error,
                   check.z_score, check.passed]


class TrajectoryCsvGenerator(BaseCsvGenerator):
    header = TRAJECTORY_HEADER

    def rows(self, results):
        return results


class RateCsvGenerator(BaseCsvGenerator):
    header = RATE_HEADER

    def rows(self, results: Iterable[RateExperimentResult]):
        for result in results:
            yield result.row()


def write_output(content: str, path: Optional[str] = None, stream: Optional[TextIO] = None) -> None:
    """
    Write content to path, or to stream when no path is given.

    Files are written to a temporary sibling and renamed into place, so a
    failed run never leaves partial output behind.
    """
    if not path:
        (stream or sys.stdout).write(content)
        return

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix='.owpn-', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'w', newline='') as handle:
            handle.write(content)
        os.replace(tmp_path, path)
        logger.info(f"Wrote {path}")
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise

