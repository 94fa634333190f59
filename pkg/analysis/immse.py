"""
I-MMSE / Fisher information engine

Numerics behind the phase-channel outer bound:
- scalar Fisher information recursion with interior coefficients
  D11 = a, D12 = -a, D22 = a + b (a = L/sigma2, b = P/L)
- its fixed point J* (positive root of J^2 - bJ - ab = 0)
- the final-step information J(rho) = rho + c, c = a J* / (J* + a)
- the Bayesian Cramer-Rao MMSE bound 1 / J(rho)
- the I-MMSE entropy integral, by adaptive quadrature with an analytic tail

The integral has the closed form ln(c V) with V = pi^2 / 3; that closed
form is the module's own oracle for the quadrature.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

import config
from core.errors import (
    InvariantViolationError,
    NonConvergenceError,
    QuadratureFailureError,
    ValidationError,
)

logger = logging.getLogger(__name__)

# Variance of a phase uniform on [0, 2*pi): (2*pi)^2 / 12
PRIOR_VARIANCE = math.pi ** 2 / 3.0
LN_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class FisherParams:
    """a = L/sigma2 (increment precision), b = P/L (sample power), rho >= 0"""
    a: float
    b: float
    rho: float = 0.0

    def __post_init__(self):
        _check_ab(self.a, self.b)
        if not self.rho >= 0:
            raise ValidationError(f"rho must be >= 0, got {self.rho}")

    @classmethod
    def from_channel(cls, power: float, sigma2: float, oversampling: float,
                     rho: float = 0.0) -> 'FisherParams':
        if sigma2 <= 0:
            raise ValidationError("Fisher parameters need sigma2 > 0")
        return cls(a=oversampling / sigma2, b=power / oversampling, rho=rho)


@dataclass(frozen=True)
class FixedPointResult:
    """
    Interior fixed point of the Fisher recursion.

    residual is |J - f(J)| / max(J, 1) at the reported j_star.
    """
    j_star: float
    iterations: int
    residual: float
    j_star_iterated: Optional[float] = None


@dataclass(frozen=True)
class QuadratureConfig:
    """scipy.integrate.quad settings plus the split factor for the analytic tail"""
    epsabs: float = config.QUAD_EPSABS
    epsrel: float = config.QUAD_EPSREL
    limit: int = config.QUAD_LIMIT
    tolerance: float = config.QUAD_TOLERANCE
    tail_factor: float = config.QUAD_TAIL_FACTOR

    @classmethod
    def from_settings(cls, settings) -> 'QuadratureConfig':
        quad = settings.get_quadrature_settings()
        return cls(quad.epsabs, quad.epsrel, quad.limit, quad.tolerance, quad.tail_factor)


@dataclass(frozen=True)
class EntropyBound:
    """Lower bound on h(Theta | ...) and the phase-rate bound it implies (nats)"""
    variance_theta: float
    precision: float
    integral_value: float
    integral_analytic: float
    integral_error: float
    entropy_lower_bound: float
    phase_rate_upper_bound: float
    flags: Tuple[str, ...] = field(default_factory=tuple)


def _check_ab(a: float, b: float) -> None:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValidationError(f"a and b must be finite, got a={a}, b={b}")
    if a <= 0:
        raise ValidationError(f"a must be > 0, got {a}")
    if b < 0:
        raise ValidationError(f"b must be >= 0, got {b}")


def _recursion_step(a: float, b: float, j: float) -> float:
    # D22 - D12^2 / (J + D11) = (a + b) - a^2 / (J + a), without the cancellation
    return b + a * j / (j + a)


def fisher_recursion(a: float, b: float, k: int, j0: float = 0.0) -> np.ndarray:
    """
    Iterates J_1..J_k of the Fisher information recursion.

    Args:
        a: D11 = -D12 = L/sigma2
        b: D22 - D11 = P/L
        k: number of iterates (>= 1)
        j0: starting information (>= 0)

    Returns:
        Array of the k iterates
    """
    _check_ab(a, b)
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if j0 < 0:
        raise ValidationError(f"j0 must be >= 0, got {j0}")

    out = np.empty(k)
    j = float(j0)
    for i in range(k):
        j = _recursion_step(a, b, j)
        out[i] = j
    return out


def closed_form_fixed_point(a: float, b: float) -> float:
    """Positive root (b/2)(1 + sqrt(1 + 4a/b)) of J^2 - bJ - ab = 0; 0 when b = 0"""
    _check_ab(a, b)
    if b == 0:
        return 0.0
    return 0.5 * b + math.sqrt(0.25 * b * b + a * b)


def fisher_fixed_point(a: float, b: float, tol: float = config.FIXED_POINT_TOL,
                       max_iter: int = config.FIXED_POINT_MAX_ITER,
                       iterate: bool = True) -> FixedPointResult:
    """
    Fixed point of the recursion, by closed form and (optionally) iteration.

    The recursion is the Moebius map J -> ((a+b) J + ab) / (J + a), so n
    steps from J = 0 are M^n applied to 0, M = [[a+b, ab], [1, a]]. Squaring M
    doubles the step count, which reaches the 10^6+ steps needed when
    a >> b (contraction 1 - q* ~ 2 sqrt(b/a)) in a few dozen products.

    With f'(J_n)^n bounding the contraction over the next n steps, the
    iteration stops once |J_2n - J_n| * r / (1 - r) <= tol * J_2n,
    r = f'(J_n)^n, which bounds the relative distance of J_2n to the fixed
    point by tol.

    Args:
        max_iter: cap on recursion steps n

    Raises:
        NonConvergenceError: step cap reached
        InvariantViolationError: iterated and closed-form roots disagree by
            more than 10 * tol (relative)
    """
    _check_ab(a, b)
    if tol <= 0:
        raise ValidationError(f"tol must be > 0, got {tol}")

    j_closed = closed_form_fixed_point(a, b)
    residual = abs(j_closed - _recursion_step(a, b, j_closed)) / max(j_closed, 1.0)

    if not iterate or b == 0:
        return FixedPointResult(j_closed, 0, residual, j_closed if b == 0 else None)

    # M / a = I + E; E is squared on its own, (I + E)^2 = I + (2E + E^2),
    # while it is small so that b is not rounded away against a
    e = np.array([[b / a, b], [1.0 / a, 0.0]])
    power: Optional[np.ndarray] = None
    steps = 1
    j = b
    while True:
        if 2 * steps > max_iter:
            raise NonConvergenceError(
                f"Fisher recursion did not converge in {max_iter} iterations (a={a:g}, b={b:g})"
            )
        if power is None:
            e = 2.0 * e + e @ e
            if e.max() >= 1.0:
                power = np.eye(2) + e
        else:
            power = power @ power
            # entries are positive; rescaling keeps them finite
            power /= power.max()
        nxt = e[0, 1] / (1.0 + e[1, 1]) if power is None else power[0, 1] / power[1, 1]
        log_r = -2.0 * steps * math.log1p(j / a)
        steps *= 2
        r = math.exp(log_r)
        if nxt == j or abs(nxt - j) * r <= tol * nxt * -math.expm1(log_r):
            j = nxt
            break
        j = nxt

    if abs(j - j_closed) > 10 * tol * j_closed:
        raise InvariantViolationError(
            f"Iterated fixed point {j!r} disagrees with closed form {j_closed!r}"
        )

    logger.debug(f"Fixed point a={a:g} b={b:g}: J*={j_closed:.12g} after {steps} steps")
    return FixedPointResult(j_closed, steps, residual, j)


def effective_precision(a: float, b: float) -> float:
    """c = a J* / (J* + a), the prior precision seen by the last step"""
    j_star = closed_form_fixed_point(a, b)
    if j_star == 0:
        return 0.0
    return a * j_star / (j_star + a)


def final_step_information(a: float, b: float, rho: float) -> float:
    """J(rho) = (a + rho) - a^2 / (J* + a) = rho + c"""
    FisherParams(a, b, rho)
    return rho + effective_precision(a, b)


def mmse_lower_bound(a: float, b: float, rho: float) -> float:
    """Bayesian Cramer-Rao bound 1 / J(rho); +inf when J(rho) = 0"""
    information = final_step_information(a, b, rho)
    if information == 0:
        logger.warning(f"Zero Fisher information at a={a:g}, b={b:g}, rho={rho:g}; MMSE bound is +inf")
        return math.inf
    return 1.0 / information


def immse_integrand(rho: float, precision: float, variance: float = PRIOR_VARIANCE) -> float:
    """V / (1 + rho V) - 1 / (rho + c)"""
    return 1.0 / (rho + 1.0 / variance) - 1.0 / (rho + precision)


def immse_entropy_bound(a: float, b: float, quad: Optional[QuadratureConfig] = None) -> EntropyBound:
    """
    I-MMSE lower bound on the conditional phase entropy.

    The integral over [0, inf) is split at rho0 = tail_factor * max(c, 1/V):
    adaptive quadrature on [0, rho0], closed-form tail beyond.

    Raises:
        QuadratureFailureError: estimated quadrature error above quad.tolerance
    """
    _check_ab(a, b)
    quad = quad or QuadratureConfig()
    variance = PRIOR_VARIANCE
    prior_entropy = 0.5 * math.log(2.0 * math.pi * math.e * variance)
    c = effective_precision(a, b)

    if c == 0:
        logger.warning(f"Zero precision at a={a:g}, b={b:g}: entropy bound is +inf")
        return EntropyBound(variance, c, -math.inf, -math.inf, 0.0, math.inf, -math.inf,
                            ('zero_precision',))

    inv_v = 1.0 / variance
    rho0 = quad.tail_factor * max(c, inv_v)
    breakpoints = sorted({c, inv_v})

    value, abserr = integrate.quad(
        immse_integrand, 0.0, rho0, args=(c, variance),
        epsabs=quad.epsabs, epsrel=quad.epsrel, limit=quad.limit, points=breakpoints,
    )
    if not abserr <= quad.tolerance:
        raise QuadratureFailureError(
            f"I-MMSE quadrature error {abserr:.3g} above tolerance {quad.tolerance:.3g} "
            f"(a={a:g}, b={b:g})"
        )

    # int_{rho0}^inf = ln((rho0 + c) / (rho0 + 1/V))
    tail = math.log1p((c - inv_v) / (rho0 + inv_v))
    integral = value + tail
    analytic = math.log(c * variance)

    entropy = prior_entropy - 0.5 * integral
    flags = ('below_prior_precision',) if c < inv_v else ()
    if flags:
        logger.debug(f"c={c:g} < 1/V: entropy bound exceeds the Gaussian-matched prior entropy")

    return EntropyBound(
        variance_theta=variance,
        precision=c,
        integral_value=integral,
        integral_analytic=analytic,
        integral_error=abserr,
        entropy_lower_bound=entropy,
        phase_rate_upper_bound=LN_2PI - entropy,
        flags=flags,
    )


def immse_integrand_table(a: float, b: float, rho_grid: Sequence[float]) -> List[Tuple[float, float, float]]:
    """Rows (rho, integrand, J_rho) for plotting the I-MMSE integrand"""
    c = effective_precision(a, b)
    rows = []
    for rho in rho_grid:
        rows.append((float(rho), immse_integrand(rho, c), float(rho) + c))
    return rows
