"""Maximum-likelihood state reconstruction from phase-tagged quadrature
samples, Wigner-function evaluation, and fidelity against coherent states.

Everything here uses the internal convention: vacuum quadrature variance
1/2, so the vacuum Wigner function peaks at 1/pi.  SNU traces are divided
by sqrt(2) on ingestion (see :mod:`hetasym.traces`).

The reconstruction is the iterative fixed point rho <- N[R rho R] with
R = (1/n) sum_i Pi_i / Tr(rho Pi_i), where Pi_i is the rank-1 projector
onto the quadrature eigenstate |x_i, theta_i>.  The per-sample
log-likelihood never decreases across accepted iterations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalDomainError, ValidationError
from .phase import estimate_phase
from .traces import QuadratureTrace

#: Probabilities are floored here before the likelihood ratio to avoid
#: division underflow; floored samples are counted as a diagnostic.
PROBABILITY_FLOOR = 1e-300

_HERMITICITY_TOL = 1e-10
_TRACE_TOL = 1e-10
_EIGENVALUE_TOL = 1e-10
_WIGNER_BOUND_TOL = 1e-6


@dataclass(frozen=True)
class DensityMatrix:
    """Fock-truncated density matrix: Hermitian, unit trace, PSD (all up to
    small numerical tolerances checked at construction)."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128, copy=True)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise ValidationError(f"density matrix must be square, got shape {mat.shape}")
        if not np.all(np.isfinite(mat.view(np.float64))):
            raise ValidationError("density matrix contains non-finite entries")
        if np.max(np.abs(mat - mat.conj().T)) > _HERMITICITY_TOL:
            raise ValidationError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(mat).real - 1.0) > _TRACE_TOL or abs(np.trace(mat).imag) > _TRACE_TOL:
            raise ValidationError("density matrix trace differs from 1 beyond tolerance")
        if np.linalg.eigvalsh(mat).min() < -_EIGENVALUE_TOL:
            raise ValidationError("density matrix has a negative eigenvalue beyond tolerance")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True)
class PhaseTaggedSamples:
    """Quadrature samples x (internal convention) tagged with the LO phase."""

    theta: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64, copy=True)
        x = np.array(self.x, dtype=np.float64, copy=True)
        if theta.ndim != 1 or x.ndim != 1 or theta.size != x.size:
            raise ValidationError("theta and x must be equal-length 1-D sequences")
        if theta.size == 0:
            raise ValidationError("samples are empty")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(x))):
            raise ValidationError("samples contain non-finite values")
        distinct = np.unique(theta)
        if distinct.size < 2 or distinct.max() - distinct.min() < math.pi:
            warnings.warn(
                "phase tags span less than pi: reconstruction is not informationally complete",
                stacklevel=2,
            )
        theta.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.theta.size


def _hermite_gauss_table(x: np.ndarray, dim: int) -> np.ndarray:
    """psi_n(x) for n < dim, vacuum variance 1/2.

    Upward recurrence psi_{n} = sqrt(2/n) x psi_{n-1} - sqrt((n-1)/n) psi_{n-2}
    starting from the Gaussian ground state keeps every value bounded, so no
    renormalization is needed at any order.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(x.shape + (dim,))
    out[..., 0] = math.pi ** -0.25 * np.exp(-x * x / 2.0)
    if dim > 1:
        out[..., 1] = math.sqrt(2.0) * x * out[..., 0]
    for n in range(2, dim):
        out[..., n] = (math.sqrt(2.0 / n) * x * out[..., n - 1]
                       - math.sqrt((n - 1) / n) * out[..., n - 2])
    return out


def quadrature_projector(theta, x, dim: int) -> np.ndarray:
    """Fock components of the quadrature eigenstate |x, theta>:
    component n is psi_n(x) exp(-i n theta).

    Scalars give a (dim,) vector; equal-length arrays give (len, dim).
    """
    if int(dim) != dim or dim < 1:
        raise ValidationError(f"dim must be an integer >= 1, got {dim}")
    theta_arr = np.asarray(theta, dtype=np.float64)
    x_arr = np.asarray(x, dtype=np.float64)
    table = _hermite_gauss_table(x_arr, int(dim)).astype(np.complex128)
    table *= np.exp(-1j * np.multiply.outer(theta_arr, np.arange(int(dim))))
    return table


@dataclass(frozen=True)
class MLEResult:
    """Reconstruction output plus convergence diagnostics."""

    rho: DensityMatrix
    converged: bool
    iterations: int
    log_likelihood: np.ndarray  # per-sample log-likelihood after each accepted iterate
    floored: int                # samples whose probability hit the floor
    grouped: bool               # whether the grouped fast path was used


class _DenseEngine:
    """Per-sample complex projectors; works for arbitrary tag sets."""

    def __init__(self, samples: PhaseTaggedSamples, dim: int):
        self.psi = quadrature_projector(samples.theta, samples.x, dim)
        self.n = samples.n

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        v = self.psi @ rho.T
        return np.einsum("ij,ij->i", self.psi.conj(), v).real

    def update(self, rho: np.ndarray, probs: np.ndarray) -> np.ndarray:
        r = (self.psi / probs[:, None]).T @ self.psi.conj() / self.n
        return r @ rho @ r


class _GroupedEngine:
    """Real-arithmetic path for samples sharing repeated phase tags.

    For a tag t the projector factorizes as diag(e^{-i n t}) psi(x), so the
    quadratic forms reduce to real batched products against the rotated
    density matrix Re(rho * e^{i t (m - n)}).  Groups are bucketed by size so
    each bucket runs as one batched matmul; probabilities come back in
    engine-internal (bucket-major) order, which the iteration treats as a
    bag, so no scatter-back is needed.
    """

    def __init__(self, samples: PhaseTaggedSamples, dim: int):
        tags, inverse, counts = np.unique(samples.theta, return_inverse=True,
                                          return_counts=True)
        order = np.argsort(inverse, kind="stable")
        xs_sorted = samples.x[order]
        offsets = np.concatenate([[0], np.cumsum(counts)])
        diff = np.arange(dim)[:, None] - np.arange(dim)[None, :]
        self.buckets = []
        for size in np.unique(counts):
            group_ids = np.flatnonzero(counts == size)
            xs = np.stack([xs_sorted[offsets[g]:offsets[g] + size] for g in group_ids])
            phase = np.exp(1j * tags[group_ids][:, None, None] * diff[None, :, :])
            self.buckets.append((_hermite_gauss_table(xs, dim), phase))
        self.n = samples.n

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        parts = []
        for h, phase in self.buckets:
            rotated = (rho[None, :, :] * phase).real
            v = h @ rotated
            parts.append(np.einsum("tmd,tmd->tm", h, v).ravel())
        return np.concatenate(parts)

    def update(self, rho: np.ndarray, probs: np.ndarray) -> np.ndarray:
        r = np.zeros_like(rho)
        start = 0
        for h, phase in self.buckets:
            stop = start + h.shape[0] * h.shape[1]
            weights = h / probs[start:stop].reshape(h.shape[:2])[:, :, None]
            s = np.matmul(h.transpose(0, 2, 1), weights)
            r += (s * phase.conj()).sum(axis=0)
            start = stop
        r /= self.n
        return r @ rho @ r


def _make_engine(samples: PhaseTaggedSamples, dim: int):
    # grouping pays once tags repeat enough; the cap keeps the per-group
    # phase tables (groups x dim x dim complex) at tens of megabytes
    distinct = np.unique(samples.theta).size
    if distinct * 8 <= samples.n and distinct <= 4096:
        return _GroupedEngine(samples, dim), True
    return _DenseEngine(samples, dim), False


def mle_reconstruct(samples: PhaseTaggedSamples, dim: int, max_iter: int = 2000,
                    tol: float = 1e-10) -> MLEResult:
    """Iterative maximum-likelihood reconstruction (R rho R fixed point).

    Starts from the maximally mixed state I/dim and stops when the
    per-sample log-likelihood improves by less than tol, or after max_iter
    iterations (returned with converged=False).  An iterate that would
    decrease the likelihood is discarded, so the recorded log-likelihood
    trajectory is non-decreasing.
    """
    if int(dim) != dim or dim < 1:
        raise ValidationError(f"dim must be an integer >= 1, got {dim}")
    if max_iter < 0:
        raise ValidationError(f"max_iter must be >= 0, got {max_iter}")
    if not (tol > 0):
        raise ValidationError(f"tol must be positive, got {tol}")

    dim = int(dim)
    engine, grouped = _make_engine(samples, dim)
    floored = 0

    def evaluate(rho):
        nonlocal floored
        probs = engine.probabilities(rho)
        low = probs < PROBABILITY_FLOOR
        if low.any():
            floored += int(low.sum())
            probs = np.maximum(probs, PROBABILITY_FLOOR)
        return probs, float(np.log(probs).mean())

    rho = np.eye(dim, dtype=np.complex128) / dim
    probs, loglik = evaluate(rho)
    history = [loglik]
    converged = False
    for _ in range(int(max_iter)):
        candidate = engine.update(rho, probs)
        candidate = 0.5 * (candidate + candidate.conj().T)
        candidate /= np.trace(candidate).real
        cand_probs, cand_loglik = evaluate(candidate)
        gain = cand_loglik - loglik
        if gain >= 0.0:
            rho, probs, loglik = candidate, cand_probs, cand_loglik
            history.append(loglik)
        if gain < tol:
            converged = True
            break

    # RrhoR preserves positivity; scrub rounding noise so the result always
    # satisfies the DensityMatrix contract.
    eigvals, eigvecs = np.linalg.eigh(rho)
    eigvals = np.clip(eigvals, 0.0, None)
    eigvals /= eigvals.sum()
    rho = (eigvecs * eigvals) @ eigvecs.conj().T
    rho = 0.5 * (rho + rho.conj().T)

    return MLEResult(
        rho=DensityMatrix(rho),
        converged=converged,
        iterations=len(history) - 1,
        log_likelihood=np.asarray(history),
        floored=floored,
        grouped=grouped,
    )


def required_coherent_dim(alpha: complex) -> int:
    """Fock cutoff guidance for coherent amplitudes: |a|^2 + 5|a| + 10."""
    mag = abs(alpha)
    return int(math.ceil(mag * mag + 5.0 * mag + 10.0))


def ideal_coherent_state(alpha: complex, dim: int) -> DensityMatrix:
    """Pure coherent state |alpha><alpha| truncated to dim Fock levels and
    renormalized.  Rejects cutoffs that drop more than 1e-8 of the norm."""
    if int(dim) != dim or dim < 1:
        raise ValidationError(f"dim must be an integer >= 1, got {dim}")
    alpha = complex(alpha)
    amps = np.empty(int(dim), dtype=np.complex128)
    amps[0] = 1.0
    for k in range(1, int(dim)):
        amps[k] = amps[k - 1] * alpha / math.sqrt(k)
    amps *= math.exp(-abs(alpha) ** 2 / 2.0)
    norm_sq = float(np.vdot(amps, amps).real)
    if norm_sq < 1.0 - 1e-8:
        raise ValidationError(
            f"dim = {dim} truncates |alpha|={abs(alpha):.3f} too hard "
            f"(kept norm^2 = {norm_sq:.9f}); use dim >= {required_coherent_dim(alpha)}"
        )
    amps /= math.sqrt(norm_sq)
    return DensityMatrix(np.outer(amps, amps.conj()))


def fit_coherent(rho: DensityMatrix) -> complex:
    """Amplitude of the mean-matched coherent state: Tr(rho a)."""
    mat = rho.matrix
    k = np.arange(1, rho.dim)
    return complex((np.sqrt(k) * np.diag(mat, -1)).sum())


def fidelity(rho: DensityMatrix, sigma: DensityMatrix, convention: str = "sqrt") -> float:
    """State fidelity from the eigenvalues lam_i of sqrt(rho) sigma sqrt(rho).

    Small negative eigenvalues are truncated to zero before the square
    roots.  convention="sqrt" returns sum_i sqrt(lam_i) (the default,
    matching common library output); convention="squared" returns its
    square (the Uhlmann form).
    """
    if convention not in ("sqrt", "squared"):
        raise ValidationError(f"unknown fidelity convention {convention!r}")
    if rho.dim != sigma.dim:
        raise ValidationError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    w, v = np.linalg.eigh(rho.matrix)
    w = np.clip(w, 0.0, None)
    sqrt_rho = (v * np.sqrt(w)) @ v.conj().T
    mid = sqrt_rho @ sigma.matrix @ sqrt_rho
    lams = np.linalg.eigvalsh(0.5 * (mid + mid.conj().T))
    value = float(np.sqrt(np.clip(lams, 0.0, None)).sum())
    if value > 1.0 + 1e-6:
        raise NumericalDomainError(f"fidelity {value} exceeds 1 beyond numerical tolerance")
    value = min(value, 1.0)
    return value * value if convention == "squared" else value


@dataclass(frozen=True)
class WignerGrid:
    """W(x, p) sampled on a rectangular grid; values[i, j] = W(x_axis[i],
    p_axis[j]).  Convention: hbar = 1, vacuum variance 1/2, so the vacuum
    peaks at 1/pi and |W| <= 1/pi for every state."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x_axis = np.array(self.x_axis, dtype=np.float64, copy=True)
        p_axis = np.array(self.p_axis, dtype=np.float64, copy=True)
        values = np.array(self.values, dtype=np.float64, copy=True)
        for axis, name in ((x_axis, "x_axis"), (p_axis, "p_axis")):
            if axis.ndim != 1 or axis.size < 2:
                raise ValidationError(f"{name} must be 1-D with at least 2 points")
            if not np.all(np.isfinite(axis)) or not np.all(np.diff(axis) > 0):
                raise ValidationError(f"{name} must be finite and strictly increasing")
        if values.shape != (x_axis.size, p_axis.size):
            raise ValidationError(
                f"values shape {values.shape} does not match axes "
                f"({x_axis.size}, {p_axis.size})"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("Wigner values contain non-finite entries")
        if np.abs(values).max() > 1.0 / math.pi + _WIGNER_BOUND_TOL:
            raise ValidationError("Wigner values exceed the 1/pi bound beyond tolerance")
        for arr in (x_axis, p_axis, values):
            arr.setflags(write=False)
        object.__setattr__(self, "x_axis", x_axis)
        object.__setattr__(self, "p_axis", p_axis)
        object.__setattr__(self, "values", values)

    def normalization(self) -> float:
        """Riemann sum of W over the grid; ~1 when the grid covers the state."""
        dx = float(np.mean(np.diff(self.x_axis)))
        dp = float(np.mean(np.diff(self.p_axis)))
        return float(self.values.sum() * dx * dp)


def wigner(rho: DensityMatrix, x_axis, p_axis) -> WignerGrid:
    """Wigner function of a Fock-basis density matrix.

    Evaluates the Fock expansion

        W_{m n}(x, p) = (1/pi) e^{-r^2} (-1)^n (x - i p)^{m-n}
                        sqrt(2^{m-n} n! / m!) L_n^{m-n}(2 r^2),   m >= n

    with the generalized-Laguerre three-term recurrence carried over the
    grid for every diagonal, which stays stable for desk-scale cutoffs.
    The complex accumulation cancels to a real result; any imaginary
    residue above 1e-10 is a hard error.
    """
    x_axis = np.asarray(x_axis, dtype=np.float64)
    p_axis = np.asarray(p_axis, dtype=np.float64)
    mat = rho.matrix
    dim = rho.dim
    grid_x, grid_p = np.meshgrid(x_axis, p_axis, indexing="ij")
    r_sq = grid_x * grid_x + grid_p * grid_p
    envelope = np.exp(-r_sq) / math.pi
    z = grid_x - 1j * grid_p
    y = 2.0 * r_sq

    total = np.zeros_like(z)
    z_pow = np.ones_like(z)
    for k in range(dim):  # k = m - n, the diagonal offset
        lag_prev2 = None
        lag_prev = None
        for j in range(dim - k):
            if j == 0:
                lag = np.ones_like(y)
            elif j == 1:
                lag = 1.0 + k - y
            else:
                lag = ((2.0 * j - 1.0 + k - y) * lag_prev - (j - 1.0 + k) * lag_prev2) / j
            lag_prev2, lag_prev = lag_prev, lag
            sign = -1.0 if j % 2 else 1.0
            coef = sign * math.exp(0.5 * (k * math.log(2.0)
                                          + math.lgamma(j + 1) - math.lgamma(j + k + 1)))
            term = (coef * z_pow) * lag
            if k == 0:
                total += mat[j, j].real * term
            else:
                contrib = mat[j + k, j] * term
                total += contrib + (mat[j, j + k] * term.conj())
        z_pow = z_pow * z

    values = envelope * total
    residue = np.abs(values.imag).max() if values.size else 0.0
    if residue > 1e-10:
        raise NumericalDomainError(f"Wigner imaginary residue {residue} exceeds 1e-10")
    return WignerGrid(x_axis, p_axis, values.real)


def samples_from_trace(trace: QuadratureTrace, use_true_phase: bool = True,
                       block: int = 1, amplitude_scale: float = 1.0) -> PhaseTaggedSamples:
    """Turn a heterodyne trace into phase-tagged quadrature samples.

    Each shot contributes its X value at the tag theta and its P value at
    theta - pi/2.  Tags come from phase_true, or from the block-averaged
    phase estimator when use_true_phase is False.  SNU traces are divided
    by sqrt(2); amplitude_scale is an extra divisor for normalizing bright
    references into a workable Fock cutoff (1.0 = off).
    """
    if not (amplitude_scale > 0):
        raise ValidationError(f"amplitude_scale must be positive, got {amplitude_scale}")
    if use_true_phase:
        if trace.phase_true is None:
            raise ValidationError("trace carries no phase_true column; estimate phases instead")
        tags = trace.phase_true
    else:
        tags = np.repeat(estimate_phase(trace, block=block), block)

    scale = amplitude_scale * (math.sqrt(2.0) if trace.convention == "snu" else 1.0)
    x_int = trace.x / scale
    p_int = trace.p / scale

    keep = np.isfinite(tags)
    dropped = int(tags.size - keep.sum())
    if dropped:
        warnings.warn(f"dropping {dropped} samples with undefined phase", stacklevel=2)
        tags, x_int, p_int = tags[keep], x_int[keep], p_int[keep]
    theta_all = np.concatenate([tags, tags - math.pi / 2.0])
    x_all = np.concatenate([x_int, p_int])
    return PhaseTaggedSamples(theta_all, x_all)
