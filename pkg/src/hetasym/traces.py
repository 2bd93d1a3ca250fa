"""Core quadrature data types and unit conventions.

All quadrature values are dimensionless shot-noise units (SNU): the vacuum
quadrature variance is 1 at the detector output after normalization.
Tomography uses a second convention internally (vacuum variance 1/2); the
bridge between the two is a division by sqrt(2) on ingestion and is exposed
here so every module shares a single definition.

Phases are radians everywhere; degrees appear only in CLI presentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi

#: Conversion factor between external (SNU, vacuum variance 1) and internal
#: tomography quadratures (vacuum variance 1/2).
INTERNAL_SCALE = math.sqrt(2.0)


def _readonly_float_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class UnitConvention:
    """Quadrature normalization contract.

    vacuum_variance is the SNU definition (vacuum quadrature variance seen
    externally); tomography_scale is the factor dividing external values on
    ingestion into the internal vacuum-variance-1/2 convention.
    """

    vacuum_variance: float = 1.0
    tomography_scale: float = INTERNAL_SCALE


#: The single convention used across the package.
UNITS = UnitConvention()


@dataclass(frozen=True)
class QuadratureTrace:
    """Paired X/P quadrature samples, optionally tagged with the true phase.

    The universal data currency: every module accepts any trace that this
    constructor accepts.  ``convention`` is "snu" (vacuum variance 1) or
    "internal" (vacuum variance 1/2, used by tomography).
    """

    x: np.ndarray
    p: np.ndarray
    phase_true: np.ndarray | None = None
    convention: str = "snu"

    def __post_init__(self):
        object.__setattr__(self, "x", _readonly_float_array(self.x, "x"))
        object.__setattr__(self, "p", _readonly_float_array(self.p, "p"))
        if len(self.x) != len(self.p):
            raise ValidationError(
                f"x and p must have equal length, got {len(self.x)} and {len(self.p)}"
            )
        if len(self.x) == 0:
            raise ValidationError("trace must contain at least one sample")
        if self.phase_true is not None:
            phases = _readonly_float_array(self.phase_true, "phase_true")
            if len(phases) != len(self.x):
                raise ValidationError(
                    f"phase_true length {len(phases)} does not match sample count {len(self.x)}"
                )
            object.__setattr__(self, "phase_true", phases)
        if self.convention not in ("snu", "internal"):
            raise ValidationError(f"unknown convention {self.convention!r}")

    @property
    def n(self) -> int:
        return len(self.x)

    def require_samples(self, minimum: int, what: str) -> None:
        """Guard for operations that need a range or variance (n >= 2)."""
        if self.n < minimum:
            raise ValidationError(f"{what} requires at least {minimum} samples, trace has {self.n}")


@dataclass(frozen=True)
class ReferenceSignalSpec:
    """Description of the phase-swept reference (pilot) signal.

    amplitude_sq is the squared quadrature amplitude of the reference in SNU
    (e.g. 552 for the monitored reference level); phases holds the true
    phase of each phase point and pulses_per_phase repeats each point.
    """

    amplitude_sq: float
    phases: np.ndarray = field(default=None)  # type: ignore[assignment]
    pulses_per_phase: int = 1

    def __post_init__(self):
        if not (self.amplitude_sq > 0):
            raise ValidationError(f"amplitude_sq must be positive, got {self.amplitude_sq}")
        if self.phases is None:
            object.__setattr__(self, "phases", make_phase_ramp(360, 0.0, TWO_PI))
        else:
            object.__setattr__(self, "phases", _readonly_float_array(self.phases, "phases"))
        if len(self.phases) == 0:
            raise ValidationError("phase sweep must contain at least one point")
        if int(self.pulses_per_phase) != self.pulses_per_phase or self.pulses_per_phase < 1:
            raise ValidationError(f"pulses_per_phase must be an integer >= 1, got {self.pulses_per_phase}")

    @classmethod
    def ramp(cls, amplitude_sq: float, n_phases: int, start: float = 0.0,
             stop: float = TWO_PI, pulses_per_phase: int = 1) -> "ReferenceSignalSpec":
        return cls(amplitude_sq, make_phase_ramp(n_phases, start, stop), pulses_per_phase)

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.amplitude_sq)

    @property
    def n_samples(self) -> int:
        return len(self.phases) * self.pulses_per_phase

    @property
    def spans_full_rotation(self) -> bool:
        """True when the sweep covers one full period (required before the
        trace can be used for asymmetry estimation)."""
        if len(self.phases) < 2:
            return False
        span = float(np.max(self.phases) - np.min(self.phases))
        step = span / (len(self.phases) - 1)
        return span + step >= TWO_PI - 1e-9

    def sample_phases(self) -> np.ndarray:
        """Per-sample true phases (each phase point repeated per pulse)."""
        return np.repeat(self.phases, self.pulses_per_phase)


def make_phase_ramp(n: int, start: float, stop: float) -> np.ndarray:
    """n equally spaced phases covering [start, stop), first element == start."""
    if int(n) != n or n < 2:
        raise ValidationError(f"phase ramp needs n >= 2, got {n}")
    if not stop > start:
        raise ValidationError(f"phase ramp needs stop > start, got [{start}, {stop}]")
    return start + (stop - start) * np.arange(int(n)) / int(n)


def to_internal_quadratures(trace: QuadratureTrace) -> QuadratureTrace:
    """Convert an SNU trace to the internal tomography convention
    (vacuum variance 1/2): x and p divided by sqrt(2)."""
    if trace.convention != "snu":
        raise ValidationError("trace is already in the internal convention")
    return QuadratureTrace(
        trace.x / UNITS.tomography_scale,
        trace.p / UNITS.tomography_scale,
        trace.phase_true,
        convention="internal",
    )


def to_external_quadratures(trace: QuadratureTrace) -> QuadratureTrace:
    """Inverse of :func:`to_internal_quadratures`."""
    if trace.convention != "internal":
        raise ValidationError("trace is already in the external SNU convention")
    return QuadratureTrace(
        trace.x * UNITS.tomography_scale,
        trace.p * UNITS.tomography_scale,
        trace.phase_true,
        convention="snu",
    )
