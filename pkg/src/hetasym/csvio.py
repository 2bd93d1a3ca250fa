"""Deterministic CSV serialization for traces, density matrices and Wigner
grids.

Schema: comment header block (tool version, command, resolved config hash,
seed, resolved config), then a header row, then data rows.  Comma
separator, decimal point, LF line endings, UTF-8.  Floats are rendered
with shortest round-trip repr so identical runs are byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import ValidationError
from .tomography import DensityMatrix, WignerGrid
from .traces import QuadratureTrace


def _fmt(value: float) -> str:
    return repr(float(value))


def header_lines(command: str, config: RunConfig) -> list[str]:
    lines = [
        f"# hetasym {__version__}",
        f"# command: {command}",
        f"# config_sha256: {config.config_hash()}",
        f"# seed: {config.seed}",
    ]
    lines += [f"# config: {key} = {value}" for key, value in config.resolved_items()]
    return lines


def write_lines(path: str | Path, lines: list[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_trace_csv(path: str | Path, trace: QuadratureTrace, command: str,
                    config: RunConfig, extra_comments: list[str] | None = None) -> None:
    lines = header_lines(command, config)
    if extra_comments:
        lines += [f"# {comment}" for comment in extra_comments]
    has_phase = trace.phase_true is not None
    lines.append("index,x,p,phase_true" if has_phase else "index,x,p")
    for i in range(trace.n):
        row = f"{i},{_fmt(trace.x[i])},{_fmt(trace.p[i])}"
        if has_phase:
            row += f",{_fmt(trace.phase_true[i])}"
        lines.append(row)
    write_lines(path, lines)


def read_trace_csv(path: str | Path) -> QuadratureTrace:
    rows = []
    header = None
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(line.split(","))
    if header is None or not rows:
        raise ValidationError(f"{path}: no data rows")
    columns = {name: idx for idx, name in enumerate(header)}
    for required in ("index", "x", "p"):
        if required not in columns:
            raise ValidationError(f"{path}: missing column {required!r}")
    try:
        x = np.array([float(row[columns["x"]]) for row in rows])
        p = np.array([float(row[columns["p"]]) for row in rows])
        phase = None
        if "phase_true" in columns:
            phase = np.array([float(row[columns["phase_true"]]) for row in rows])
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed data row") from exc
    return QuadratureTrace(x, p, phase)


def write_density_csv(path: str | Path, rho: DensityMatrix, command: str,
                      config: RunConfig, extra_comments: list[str] | None = None) -> None:
    lines = header_lines(command, config)
    if extra_comments:
        lines += [f"# {comment}" for comment in extra_comments]
    lines.append("row,col,re,im")
    mat = rho.matrix
    for i in range(rho.dim):
        for j in range(rho.dim):
            lines.append(f"{i},{j},{_fmt(mat[i, j].real)},{_fmt(mat[i, j].imag)}")
    write_lines(path, lines)


def read_density_csv(path: str | Path) -> DensityMatrix:
    entries = []
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("row,"):
                continue
            entries.append(line.split(","))
    if not entries:
        raise ValidationError(f"{path}: no data rows")
    try:
        size = max(int(entry[0]) for entry in entries) + 1
        mat = np.zeros((size, size), dtype=np.complex128)
        for entry in entries:
            mat[int(entry[0]), int(entry[1])] = float(entry[2]) + 1j * float(entry[3])
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed density-matrix row") from exc
    return DensityMatrix(mat)


def write_wigner_csv(path: str | Path, grid: WignerGrid, command: str,
                     config: RunConfig, extra_comments: list[str] | None = None) -> None:
    lines = header_lines(command, config)
    if extra_comments:
        lines += [f"# {comment}" for comment in extra_comments]
    lines.append("x,p,w")
    for i, x in enumerate(grid.x_axis):
        for j, p in enumerate(grid.p_axis):
            lines.append(f"{_fmt(x)},{_fmt(p)},{_fmt(grid.values[i, j])}")
    write_lines(path, lines)


def write_report(path: str | Path, command: str, config: RunConfig,
                 entries: list[tuple[str, str]]) -> None:
    """Small deterministic key = value report with the standard header."""
    lines = header_lines(command, config)
    lines += [f"{key} = {value}" for key, value in entries]
    write_lines(path, lines)
