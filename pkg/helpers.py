import math

import pandas as pd

import config


def format_csv_number(value) -> str:
    """
    Format a value for CSV output

    Floats use 17 significant digits so a rerun can be compared byte for
    byte; None becomes an empty field.
    """
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if value.is_integer() and abs(value) < 1e15:
            return str(int(value))
        return f"{value:.{config.FLOAT_DIGITS}g}"
    if hasattr(value, 'item'):
        # numpy scalars
        return format_csv_number(value.item())
    return str(value)


def format_pretty_number(value, digits: int = 6) -> str:
    """Human-readable number for --pretty output"""
    if value is None:
        return ''
    if isinstance(value, float) or hasattr(value, 'item'):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return f"{value:.{digits}g}"
    return str(value)


def format_flags(flags) -> str:
    """Flags joined by ';' (empty when none)"""
    return ';'.join(flags)


def create_results_table(header, rows) -> pd.DataFrame:
    """
    Create a formatted table from result rows for display

    Args:
        header: column names
        rows: sequences of cell values, in header order

    Returns:
        pandas.DataFrame of display strings
    """
    formatted = [[format_pretty_number(value) for value in row] for row in rows]
    return pd.DataFrame(formatted, columns=list(header))


def render_pretty(header, rows) -> str:
    """Aligned plain-text table, one line per row"""
    table = create_results_table(header, rows)
    if table.empty:
        return ' '.join(header) + '\n'
    return table.to_string(index=False) + '\n'
