"""Flat key/value run configuration.

Format: one ``key = value`` per line, ``#`` comments, nothing nested.
Unknown keys are hard errors so typos cannot be silently absorbed.  Any key
can be overridden through the environment with the ``HETASYM_`` prefix
(e.g. ``HETASYM_V_A=12``); command-line flags override both.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, fields

from .errors import ValidationError
from .traces import TWO_PI

ENV_PREFIX = "HETASYM_"


@dataclass
class RunConfig:
    """Every tunable of the pipeline, with the defaults used throughout.

    Key-rate defaults follow the reference operating point: V_A = 10,
    beta = 0.93, xi_line = 0.02, eta = 0.68, v_elec = 0.1, alpha = 0.2.
    """

    seed: int = 12345
    out: str = "out.csv"
    jobs: int = 1

    # reference signal
    amplitude_sq: float = 552.0
    n_phases: int = 1000
    pulses_per_phase: int = 1
    phase_start: float = 0.0
    phase_stop: float = TWO_PI

    # detector
    gain_x: float = 1.0
    gain_p: float = 1.0
    asymmetry_percent: float = -1.0  # >= 0 overrides gain_x/gain_p via gains_from_percent
    hybrid_phase_error: float = 0.0
    shot_noise_var: float = 1.0
    elec_noise_var: float = 0.0

    # phase alignment / noise budget
    v_a: float = 10.0
    block: int = 1
    linewidth_a: float = 0.0
    linewidth_b: float = 0.0
    pulse_separation: float = 0.0

    # key rate
    beta: float = 0.93
    xi_line: float = 0.02
    xi_det: float = 0.0
    eta: float = 0.68
    v_elec: float = 0.1
    alpha_db_per_km: float = 0.2
    distance_km: float = 50.0
    baud: float = 1.0
    frame_ratio: float = 1.0
    distance_min_km: float = 0.0
    distance_max_km: float = 60.0
    distance_step_km: float = 1.0
    xi_det_values: str = "0.1091,0.0318,0.0140,0.0032,0.0016,0.0"
    max_distance_resolution_km: float = 0.01

    # tomography
    dim: int = 25
    max_iter: int = 2000
    tol: float = 1e-10
    use_true_phase: bool = True
    amplitude_scale: float = 1.0
    wigner_extent: float = 6.0
    wigner_points: int = 121
    convention: str = "sqrt"

    def xi_det_list(self) -> list[float]:
        try:
            values = [float(tok) for tok in self.xi_det_values.split(",") if tok.strip()]
        except ValueError as exc:
            raise ValidationError(f"bad xi_det_values list: {self.xi_det_values!r}") from exc
        if not values:
            raise ValidationError("xi_det_values is empty")
        return values

    #: Execution details that do not influence computed data; they are kept
    #: out of output headers and the config hash so results are byte-identical
    #: across output paths and worker counts.
    _non_semantic = ("out", "jobs")

    def resolved_items(self) -> list[tuple[str, str]]:
        """Stable (key, rendered value) listing used for output headers."""
        return [(f.name, _render(getattr(self, f.name))) for f in fields(self)
                if f.name not in self._non_semantic]

    def config_hash(self) -> str:
        digest = hashlib.sha256()
        for key, value in self.resolved_items():
            digest.update(f"{key} = {value}\n".encode("utf-8"))
        return digest.hexdigest()[:16]


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(name: str, kind, text: str):
    text = text.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if kind is int:
            value = int(text)
        elif kind is float:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError("non-finite value")
        else:
            return text
    except ValueError as exc:
        raise ValidationError(f"config key {name}: cannot parse {text!r} as {kind.__name__}") from exc
    return value


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines over the defaults; unknown keys raise."""
    config = RunConfig() if base is None else base
    kinds = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in kinds:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        setattr(config, key, _coerce(key, kinds[key], value))
    return config


def load_config(path: str | None, env: dict | None = None) -> RunConfig:
    """Defaults, then the config file (if any), then HETASYM_* environment
    overrides."""
    config = RunConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            config = parse_config_text(handle.read(), config)
    env = os.environ if env is None else env
    kinds = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}
    for key in sorted(kinds):
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            setattr(config, key, _coerce(key, kinds[key], env[env_key]))
    return config
