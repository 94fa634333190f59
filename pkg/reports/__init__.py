"""
Reports Package - CSV tables for every command

- Bound evaluations and sweeps
- GDoF per-point values and slope summaries
- I-MMSE verification rows and integrand dumps
- Simulation moment checks, trajectories and rate estimates
"""

from reports.csv_generators import BaseCsvGenerator, write_output

__all__ = ['BaseCsvGenerator', 'write_output']
