"""Reference-phase estimation, quadrature symmetrization, and the phase-noise
budget that converts detection asymmetry into excess noise.

The phase estimator is the quadrant-aware arctangent of the block means of
(P, X); the plain tangent ratio is ambiguous across quadrants and a full
rotation sweep needs all four.  All phase differences are wrapped to
(-pi, pi] before any variance is taken, and variances use the population
form (denominator n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalDomainError, ValidationError
from .traces import TWO_PI, QuadratureTrace


def wrap_phase(theta):
    """Map angles to (-pi, pi]."""
    wrapped = np.mod(theta, TWO_PI)
    return np.where(wrapped > math.pi, wrapped - TWO_PI, wrapped)


def estimate_phase(trace: QuadratureTrace, block: int = 1) -> np.ndarray:
    """Per-block reference phase: atan2(<P>, <X>) over consecutive blocks.

    block = 1 gives per-sample phases.  Blocks whose X and P means are both
    exactly zero have no defined phase and are returned as NaN rather than a
    silent 0; callers count and skip them.
    """
    if int(block) != block or block < 1:
        raise ValidationError(f"block must be an integer >= 1, got {block}")
    if trace.n % block != 0:
        raise ValidationError(f"sample count {trace.n} is not divisible by block {block}")
    x_mean = trace.x.reshape(-1, int(block)).mean(axis=1)
    p_mean = trace.p.reshape(-1, int(block)).mean(axis=1)
    theta = np.arctan2(p_mean, x_mean)
    theta[theta == -math.pi] = math.pi
    undefined = (x_mean == 0.0) & (p_mean == 0.0)
    if undefined.any():
        theta = theta.copy()
        theta[undefined] = np.nan
    return theta


def min_max_scale(trace: QuadratureTrace) -> QuadratureTrace:
    """Symmetrize a trace by mapping the X span onto the P span:

        X_scaled = (X - X_min) / (X_max - X_min) * (P_max - P_min) + P_min

    P is unchanged.  min(X_scaled) == P_min and max(X_scaled) == P_max
    exactly.  The trace must cover a phase rotation so both spans are
    nondegenerate.
    """
    trace.require_samples(2, "min-max scaling")
    x_min, x_max = float(trace.x.min()), float(trace.x.max())
    p_min, p_max = float(trace.p.min()), float(trace.p.max())
    if x_max == x_min or p_max == p_min:
        raise ValidationError(
            "degenerate quadrature range: the trace does not cover a phase rotation"
        )
    scaled = (trace.x - x_min) / (x_max - x_min) * (p_max - p_min) + p_min
    scaled[trace.x == x_min] = p_min
    scaled[trace.x == x_max] = p_max
    return QuadratureTrace(scaled, trace.p, trace.phase_true, trace.convention)


def drift_phase_variance(linewidth_a: float, linewidth_b: float, dt: float) -> float:
    """Inherent phase drift between the two free-running lasers:
    2 pi (dv_A + dv_B) |t_R - t_S|  [rad^2]."""
    if linewidth_a < 0 or linewidth_b < 0 or dt < 0:
        raise ValidationError("linewidths and pulse separation must be >= 0")
    return TWO_PI * (linewidth_a + linewidth_b) * dt


def _wrapped_difference_variance(a, b, what: str) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"{what}: sequences differ in length ({a.size} vs {b.size})")
    if a.size < 2:
        raise ValidationError(f"{what}: need at least 2 samples, got {a.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValidationError(f"{what}: non-finite phase values")
    diff = wrap_phase(a - b)
    return float(np.var(diff))


def path_phase_variance(theta_s_path, theta_r_path) -> float:
    """Phase drift from the signal/reference optical path difference:
    population variance of the wrapped elementwise difference  [rad^2]."""
    return _wrapped_difference_variance(theta_s_path, theta_r_path, "path variance")


def detection_phase_variance(theta_scaled, theta_asym) -> float:
    """Asymmetry-induced phase estimation error: population variance of the
    wrapped difference between scaled (ideal-proxy) and asymmetric phase
    estimates  [rad^2]."""
    return _wrapped_difference_variance(theta_scaled, theta_asym, "detection variance")


def excess_noise_from_phase_variance(v_a: float, v: float) -> float:
    """Excess noise a phase-error variance v [rad^2] imprints on quantum
    signals of modulation variance v_a:  2 v_A (1 - exp(-v/2))  [SNU].

    For small v this is approximately v_a * v.
    """
    if not (v_a > 0):
        raise ValidationError(f"modulation variance must be positive, got {v_a}")
    if v < 0:
        raise ValidationError(f"phase variance must be >= 0, got {v}")
    return 2.0 * v_a * -math.expm1(-v / 2.0)


def phase_variance_from_excess_noise(v_a: float, xi: float) -> float:
    """Inverse of :func:`excess_noise_from_phase_variance`:
    v = -2 ln(1 - xi / (2 v_A))."""
    if not (v_a > 0):
        raise ValidationError(f"modulation variance must be positive, got {v_a}")
    if xi < 0:
        raise ValidationError(f"excess noise must be >= 0, got {xi}")
    if xi >= 2.0 * v_a:
        raise NumericalDomainError(
            f"xi = {xi} is unreachable: the phase-noise model saturates at 2 v_A = {2 * v_a}"
        )
    return -2.0 * math.log1p(-xi / (2.0 * v_a))


@dataclass(frozen=True)
class PhaseNoiseBudget:
    """The three independent phase-misalignment contributions [rad^2] plus
    the laser/timing inputs that produced the drift term."""

    v_drift: float = 0.0
    v_path: float = 0.0
    v_det: float = 0.0
    linewidth_a: float = 0.0
    linewidth_b: float = 0.0
    pulse_separation: float = 0.0

    def __post_init__(self):
        for name in ("v_drift", "v_path", "v_det"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.linewidth_a < 0 or self.linewidth_b < 0 or self.pulse_separation < 0:
            raise ValidationError("linewidths and pulse separation must be >= 0")

    @property
    def v_total(self) -> float:
        """Overall phase misalignment: exact sum of the three components."""
        return self.v_drift + self.v_path + self.v_det

    def excess_noise(self, v_a: float) -> float:
        """Total misalignment excess noise for modulation variance v_a."""
        return excess_noise_from_phase_variance(v_a, self.v_total)
