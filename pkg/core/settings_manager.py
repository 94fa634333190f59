"""
Settings Manager for the OWPN laboratory

Loads experiment defaults from lab_settings.yaml and exposes them as
typed sections with validation.
"""

import yaml
import logging
from dataclasses import dataclass
from typing import Optional, List, Dict, Any
from pathlib import Path

import config
from core.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass
class QuadratureSettings:
    """Adaptive quadrature configuration for the I-MMSE integral"""
    epsabs: float
    epsrel: float
    limit: int
    tolerance: float
    tail_factor: float


@dataclass
class FixedPointSettings:
    """Fisher recursion stopping rule"""
    tol: float
    max_iter: int


@dataclass
class GdofSettings:
    """Defaults for GDoF slope experiments"""
    sigma2: float
    p_grid: List[float]
    alphas: List[float]
    slope_tolerance: float
    bounds: List[str]


@dataclass
class ImmseVerifySettings:
    """Log-spaced (a, b) grid for the proof-machinery cross-check"""
    grid_min: float
    grid_max: float
    grid_points: int
    tolerance: float


@dataclass
class SchemeSettings:
    """Achievability scheme defaults"""
    amplitude_bins: int
    phase_bins: int
    shift: float
    batches: int


@dataclass
class SweepSettings:
    """Default bound sweep grid"""
    p_start: float
    p_stop: float
    p_points: int
    sigma2: List[float]
    oversampling: List[int]
    bounds: List[str]
    units: str


class SettingsManager:
    """
    Manages laboratory settings from a YAML file.

    Usage:
        settings = SettingsManager()
        quad = settings.get_quadrature_settings()
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize settings manager

        Args:
            config_path: Path to YAML settings (defaults to config.get_settings_path())
        """
        self.config_path = Path(config_path or config.get_settings_path())
        self.config: Dict[str, Any] = {}

        self.load_settings()

    def load_settings(self) -> None:
        """Load and validate settings from the YAML file"""
        try:
            if not self.config_path.exists():
                raise FileNotFoundError(
                    f"Settings file not found: {self.config_path}"
                )

            with open(self.config_path, 'r', encoding='utf-8') as f:
                self.config = yaml.safe_load(f) or {}

            logger.info(f"Loaded settings from {self.config_path}")

            self._validate_settings()

        except Exception as e:
            logger.error(f"Failed to load settings: {e}")
            raise

    def _section(self, name: str) -> Dict[str, Any]:
        section = self.config.get(name)
        if not isinstance(section, dict):
            raise ValidationError(f"Settings section '{name}' missing or malformed")
        return section

    def _validate_settings(self) -> None:
        """Validate loaded settings"""
        quad = self.get_quadrature_settings()
        if quad.tolerance <= 0 or quad.limit < 1:
            raise ValidationError("Quadrature tolerance must be > 0 and limit >= 1")

        gdof = self.get_gdof_settings()
        if len(gdof.p_grid) < 3:
            raise ValidationError(f"GDoF P grid needs >= 3 points, got {len(gdof.p_grid)}")
        if any(p <= 1 for p in gdof.p_grid):
            raise ValidationError("GDoF P grid values must all be > 1")
        if gdof.p_grid[-1] < 1e6:
            logger.warning(
                f"GDoF P grid tops out at {gdof.p_grid[-1]:g}; slopes may be far from their limits"
            )

        scheme = self.get_scheme_settings()
        for name in ('amplitude_bins', 'phase_bins'):
            if getattr(scheme, name) < config.MIN_QUANTIZATION_BINS:
                raise ValidationError(
                    f"scheme.{name} must be >= {config.MIN_QUANTIZATION_BINS}"
                )

        logger.info("Settings validation passed")

    def get_quadrature_settings(self) -> QuadratureSettings:
        quad = self._section('quadrature')
        return QuadratureSettings(
            epsabs=float(quad['epsabs']),
            epsrel=float(quad['epsrel']),
            limit=int(quad['limit']),
            tolerance=float(quad['tolerance']),
            tail_factor=float(quad.get('tail_factor', config.QUAD_TAIL_FACTOR))
        )

    def get_fixed_point_settings(self) -> FixedPointSettings:
        fp = self._section('fixed_point')
        return FixedPointSettings(tol=float(fp['tol']), max_iter=int(fp['max_iter']))

    def get_gdof_settings(self) -> GdofSettings:
        gdof = self._section('gdof')
        return GdofSettings(
            sigma2=float(gdof['sigma2']),
            p_grid=[float(p) for p in gdof['p_grid']],
            alphas=[float(a) for a in gdof['alphas']],
            slope_tolerance=float(gdof.get('slope_tolerance', config.GDOF_SLOPE_TOL)),
            bounds=list(gdof.get('bounds', ['owpn_new_th4']))
        )

    def get_immse_verify_settings(self) -> ImmseVerifySettings:
        imm = self._section('immse_verify')
        return ImmseVerifySettings(
            grid_min=float(imm['grid_min']),
            grid_max=float(imm['grid_max']),
            grid_points=int(imm['grid_points']),
            tolerance=float(imm.get('tolerance', config.IMMSE_VERIFY_TOL))
        )

    def get_scheme_settings(self) -> SchemeSettings:
        scheme = self._section('scheme')
        return SchemeSettings(
            amplitude_bins=int(scheme['amplitude_bins']),
            phase_bins=int(scheme['phase_bins']),
            shift=float(scheme.get('shift', 0.0)),
            batches=int(scheme.get('batches', 1))
        )

    def get_sweep_settings(self) -> SweepSettings:
        sweep = self._section('sweep')
        return SweepSettings(
            p_start=float(sweep['p_start']),
            p_stop=float(sweep['p_stop']),
            p_points=int(sweep['p_points']),
            sigma2=[float(s) for s in sweep['sigma2']],
            oversampling=[int(l) for l in sweep['oversampling']],
            bounds=list(sweep['bounds']),
            units=str(sweep.get('units', 'nats'))
        )

    def __repr__(self) -> str:
        return f"SettingsManager(config_path={self.config_path})"


# Singleton instance
_settings_instance: Optional[SettingsManager] = None


def get_settings() -> SettingsManager:
    """
    Get the global settings instance (singleton pattern)

    Returns:
        SettingsManager instance
    """
    global _settings_instance
    if _settings_instance is None:
        _settings_instance = SettingsManager()
    return _settings_instance


def reload_settings() -> SettingsManager:
    """Force reload settings from file"""
    global _settings_instance
    _settings_instance = SettingsManager()
    return _settings_instance
