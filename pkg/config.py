# config.py - numeric defaults and environment overrides for the OWPN laboratory

import os

# Fisher-information fixed point
FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 10 ** 18   # recursion steps; reached by repeated squaring

# I-MMSE quadrature
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200
QUAD_TOLERANCE = 1e-8       # QuadratureFailure above this estimated error
QUAD_TAIL_FACTOR = 10.0     # split point rho0 = factor * max(c, 1/V)

# Cross-check tolerance used by `immse verify`
IMMSE_VERIFY_TOL = 1e-6

# GDoF experiments
DEFAULT_GDOF_SIGMA2 = 1.0
DEFAULT_P_GRID = [1e4, 1e5, 1e6, 1e7, 1e8]
DEFAULT_ALPHAS = [0.0, 0.1, 0.25, 0.4, 0.5, 0.75, 1.0, 2.0]
GDOF_SLOPE_TOL = 0.02

# Achievability scheme
DEFAULT_AMPLITUDE_BINS = 32
DEFAULT_PHASE_BINS = 32
MIN_QUANTIZATION_BINS = 8
MIN_PLUGIN_SAMPLES = 10_000

# Reporting
FLOAT_DIGITS = 17           # round-trip precision in CSV output
DEFAULT_SEED = 0

# Receiver samples held per chunk by the rate experiment
CHUNK_SAMPLES = 1 << 20

# Parallel sweep settings
SWEEP_CONFIG = {
    'max_workers': 0,       # 0 = auto
}


def get_worker_count() -> int:
    """Worker count for sweeps; OWPN_THREADS caps it (0 = auto)"""
    raw = os.getenv('OWPN_THREADS', str(SWEEP_CONFIG['max_workers']))
    try:
        requested = int(raw)
    except ValueError:
        requested = 0

    if requested <= 0:
        return max(1, os.cpu_count() or 1)
    return requested


def get_settings_path() -> str:
    """Path of the YAML experiment settings (OWPN_SETTINGS overrides)"""
    default = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'lab_settings.yaml')
    return os.getenv('OWPN_SETTINGS', default)


def get_log_level() -> str:
    return os.getenv('OWPN_LOG_LEVEL', 'WARNING').upper()
