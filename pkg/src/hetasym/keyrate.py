"""Asymptotic secret-key rate under collective attacks with reverse
reconciliation, for Gaussian-modulated coherent states read out by
heterodyne detection with trusted detector noise.

The rate is r = (B n/N) (beta I(A;B) - chi(B;E)) per symbol; Eve's Holevo
information chi(B;E) comes from the symplectic spectrum of the shared
two-mode covariance matrix before and after Bob's measurement.  Detection
efficiency eta and electronic noise v_elec enter only through chi_het
(trusted-detector model).
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace

from .errors import NumericalDomainError, ValidationError

#: Tolerated numerical undershoot on discriminants and symplectic
#: eigenvalues before parameters are declared unphysical.
CLAMP_TOL = 1e-9


def transmittance(alpha_db_per_km: float, distance_km: float) -> float:
    """Fiber power transmittance T = 10^(-alpha d / 10)."""
    if alpha_db_per_km < 0 or distance_km < 0:
        raise ValidationError("loss coefficient and distance must be >= 0")
    return 10.0 ** (-alpha_db_per_km * distance_km / 10.0)


def chi_line(t: float, xi_ex: float) -> float:
    """Channel-referred added noise: chi_line = 1/T - 1 + xi_ex  [SNU]."""
    if not (0.0 < t <= 1.0):
        raise ValidationError(f"transmittance must be in (0, 1], got {t}")
    if xi_ex < 0:
        raise ValidationError(f"excess noise must be >= 0, got {xi_ex}")
    return 1.0 / t - 1.0 + xi_ex


def chi_het(eta: float, v_elec: float) -> float:
    """Heterodyne detection added noise: (2 - eta + 2 v_elec) / eta  [SNU]."""
    if not (0.0 < eta <= 1.0):
        raise ValidationError(f"detection efficiency must be in (0, 1], got {eta}")
    if v_elec < 0:
        raise ValidationError(f"electronic noise must be >= 0, got {v_elec}")
    return (2.0 - eta + 2.0 * v_elec) / eta


def mutual_information(v: float, chi_line_value: float) -> float:
    """Alice-Bob mutual information for heterodyne readout:
    I(A;B) = 1/2 log2((v + chi_line) / (1 + chi_line))  [bits/symbol],
    with v = V_A + 1."""
    if not (v > 1.0):
        raise ValidationError(f"v = V_A + 1 must exceed 1, got {v}")
    if chi_line_value < 0:
        raise ValidationError(f"chi_line must be >= 0, got {chi_line_value}")
    return 0.5 * math.log2((v + chi_line_value) / (1.0 + chi_line_value))


def g_entropy(x: float) -> float:
    """Bosonic entropy g(x) = (x+1) log2(x+1) - x log2 x, with g(0) = 0."""
    if x < 0:
        raise ValidationError(f"g(x) needs x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    return (x + 1.0) * math.log2(x + 1.0) - x * math.log2(x)


def _clamped_sqrt(value: float, what: str, slack: float = CLAMP_TOL) -> float:
    if value < -slack:
        raise NumericalDomainError(f"{what} = {value} is negative beyond tolerance (unphysical parameters)")
    return math.sqrt(max(value, 0.0))

#: Cancellation in A^2 - 4B is at machine epsilon relative to A^2, so the
#: physicality guards must scale with the discriminant inputs; a fixed
#: absolute tolerance rejects exactly degenerate points such as T = 1.
_EPS = sys.float_info.epsilon


def symplectic_spectrum(v: float, t: float, chi_line_value: float,
                        chi_het_value: float) -> tuple[float, float, float, float]:
    """Symplectic eigenvalues (lambda1..4) of the shared state before and
    after Bob's heterodyne measurement.

    With chi_total = chi_line + chi_het / T:

        A = v^2 (1 - 2T) + 2T + T^2 (v + chi_line)^2
        B = T^2 (1 + v chi_line)^2
        C = (A chi_het^2 + B + 1 + 2 chi_het [v sqrt(B) + T (v + chi_line)]
             + 2T (v^2 - 1)) / (T (v + chi_total))^2
        D = (v + chi_het sqrt(B))^2 / (T (v + chi_total))^2
        lambda_{1,2} = sqrt((A +/- sqrt(A^2 - 4B)) / 2), likewise for C, D.

    Eigenvalues are >= 1 up to a clamped undershoot of CLAMP_TOL; larger
    violations raise NumericalDomainError.
    """
    if not (v > 1.0):
        raise ValidationError(f"v = V_A + 1 must exceed 1, got {v}")
    if not (0.0 < t <= 1.0):
        raise ValidationError(f"transmittance must be in (0, 1], got {t}")
    if chi_line_value < 0 or chi_het_value < 0:
        raise ValidationError("added-noise terms must be >= 0")

    chi_total = chi_line_value + chi_het_value / t
    a = v * v * (1.0 - 2.0 * t) + 2.0 * t + (t * (v + chi_line_value)) ** 2
    b = (t * (1.0 + v * chi_line_value)) ** 2
    sqrt_b = math.sqrt(b)
    denom = (t * (v + chi_total)) ** 2
    c = (a * chi_het_value ** 2 + b + 1.0
         + 2.0 * chi_het_value * (v * sqrt_b + t * (v + chi_line_value))
         + 2.0 * t * (v * v - 1.0)) / denom
    d = (v + chi_het_value * sqrt_b) ** 2 / denom

    lams = []
    for big, small, tag in ((a, b, "A^2 - 4B"), (c, d, "C^2 - 4D")):
        disc_slack = CLAMP_TOL + 16.0 * _EPS * big * big
        disc = _clamped_sqrt(big * big - 4.0 * small, tag, disc_slack)
        lam_slack = CLAMP_TOL + 4.0 * math.sqrt(_EPS) * max(1.0, big)
        for sign in (1.0, -1.0):
            lam = _clamped_sqrt(0.5 * (big + sign * disc), "symplectic eigenvalue^2")
            if lam < 1.0 - lam_slack:
                raise NumericalDomainError(
                    f"symplectic eigenvalue {lam} < 1 beyond tolerance (unphysical parameters)"
                )
            lams.append(max(lam, 1.0))
    return lams[0], lams[1], lams[2], lams[3]


def holevo_bound(lams: tuple[float, float, float, float]) -> float:
    """Eve's Holevo information from the symplectic spectrum:
    chi(B;E) = g((l1-1)/2) + g((l2-1)/2) - g((l3-1)/2) - g((l4-1)/2),
    clamped below at 0  [bits/symbol]."""
    if len(lams) != 4:
        raise ValidationError(f"expected four symplectic eigenvalues, got {len(lams)}")
    cleaned = []
    for lam in lams:
        if lam < 1.0 - CLAMP_TOL:
            raise NumericalDomainError(f"symplectic eigenvalue {lam} < 1 beyond tolerance")
        cleaned.append(max(lam, 1.0))
    l1, l2, l3, l4 = cleaned
    value = (g_entropy((l1 - 1.0) / 2.0) + g_entropy((l2 - 1.0) / 2.0)
             - g_entropy((l3 - 1.0) / 2.0) - g_entropy((l4 - 1.0) / 2.0))
    return max(value, 0.0)


@dataclass(frozen=True)
class KeyRateParams:
    """All inputs of the asymptotic key-rate chain."""

    v_a: float = 10.0
    beta: float = 0.93
    xi_line: float = 0.02
    xi_det: float = 0.0
    eta: float = 0.68
    v_elec: float = 0.1
    alpha_db_per_km: float = 0.2
    distance_km: float = 0.0
    baud: float = 1.0
    frame_ratio: float = 1.0

    def __post_init__(self):
        if not (self.v_a > 0):
            raise ValidationError(f"v_a must be positive, got {self.v_a}")
        if not (0.0 < self.beta <= 1.0):
            raise ValidationError(f"beta must be in (0, 1], got {self.beta}")
        if self.xi_line < 0 or self.xi_det < 0:
            raise ValidationError("excess-noise terms must be >= 0")
        if not (0.0 < self.eta <= 1.0):
            raise ValidationError(f"eta must be in (0, 1], got {self.eta}")
        if self.v_elec < 0:
            raise ValidationError(f"v_elec must be >= 0, got {self.v_elec}")
        if self.alpha_db_per_km < 0 or self.distance_km < 0:
            raise ValidationError("loss coefficient and distance must be >= 0")
        if not (self.baud > 0):
            raise ValidationError(f"baud must be positive, got {self.baud}")
        if not (0.0 < self.frame_ratio <= 1.0):
            raise ValidationError(f"frame_ratio must be in (0, 1], got {self.frame_ratio}")

    @property
    def v(self) -> float:
        return self.v_a + 1.0

    @property
    def xi_ex(self) -> float:
        """Total excess noise: lumped channel noise plus asymmetry noise."""
        return self.xi_line + self.xi_det


@dataclass(frozen=True)
class KeyRateBreakdown:
    """Every intermediate of one key-rate evaluation."""

    transmittance: float
    chi_line: float
    chi_het: float
    chi_total: float
    mutual_info: float
    lambdas: tuple[float, float, float, float]
    holevo: float
    rate_per_symbol: float
    rate_bits_per_sec: float

    @property
    def has_key(self) -> bool:
        """False flags a negative rate (no key); rates are never clamped."""
        return self.rate_per_symbol > 0.0


def key_rate(params: KeyRateParams) -> KeyRateBreakdown:
    """Full chain: transmittance -> added noises -> I(A;B) -> symplectic
    spectrum -> Holevo -> r = beta I - chi  [bits/symbol], plus the
    throughput-scaled rate in bits/s.

    xi_line and xi_det are quoted at the receiver, where both are measured;
    composing them into chi_line refers them back to the channel input
    through the transmittance (xi_ex / T), so their penalty grows with
    distance and every noisy curve has a finite cutoff.  Back to back
    (T = 1) the two conventions coincide.
    """
    t = transmittance(params.alpha_db_per_km, params.distance_km)
    chi_l = chi_line(t, params.xi_ex / t)
    chi_h = chi_het(params.eta, params.v_elec)
    info = mutual_information(params.v, chi_l)
    lams = symplectic_spectrum(params.v, t, chi_l, chi_h)
    holevo = holevo_bound(lams)
    rate = params.beta * info - holevo
    return KeyRateBreakdown(
        transmittance=t,
        chi_line=chi_l,
        chi_het=chi_h,
        chi_total=chi_l + chi_h / t,
        mutual_info=info,
        lambdas=lams,
        holevo=holevo,
        rate_per_symbol=rate,
        rate_bits_per_sec=params.baud * params.frame_ratio * rate,
    )


def max_distance(params: KeyRateParams, resolution_km: float = 0.01,
                 max_search_km: float = 1000.0) -> float:
    """Largest distance with a positive key rate, bisection-refined to
    resolution_km.  Returns 0.0 when no key is possible even back to back,
    and math.inf when the rate is still positive at max_search_km (no
    cutoff within the search grid).  params.distance_km is ignored.
    """
    if not (resolution_km > 0):
        raise ValidationError(f"resolution must be positive, got {resolution_km}")

    def rate_at(d: float) -> float:
        return key_rate(replace(params, distance_km=d)).rate_per_symbol

    if rate_at(0.0) <= 0.0:
        return 0.0
    if rate_at(max_search_km) > 0.0:
        return math.inf

    # march to bracket the FIRST sign change (the achievable range is the
    # contiguous interval from zero; near-threshold parameters can produce
    # re-entrant positive windows farther out, which do not count)
    steps = min(4096, max(64, int(math.ceil(max_search_km / resolution_km))))
    lo, hi = 0.0, max_search_km
    for i in range(1, steps + 1):
        d = max_search_km * i / steps
        if rate_at(d) <= 0.0:
            hi = d
            lo = max_search_km * (i - 1) / steps
            break
    while hi - lo > resolution_km:
        mid = 0.5 * (lo + hi)
        if rate_at(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo
