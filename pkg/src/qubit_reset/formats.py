"""Flat-file formats: trajectory, protocol and sweep CSVs plus the run-result JSON.

CSV floats use 15 significant digits, LF line endings and a mandatory header,
so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .unbounded import Trajectory
from .verify import ControlProtocol, SampledGap

TRAJECTORY_HEADER = ("t", "p_e", "lambda_H")
PROTOCOL_HEADER = ("t", "lambda_H")
SWEEP_HEADER = ("tau", "epsilon", "case", "W_ex", "J")
DIAGRAM_HEADER = ("tau", "epsilon", "case")
BOUNDARY_HEADER = ("epsilon", "tau_c1", "tau_c2")


class ProtocolFormatError(ValueError):
    """Malformed protocol file; ``line`` is 1-based (0 for whole-file problems)."""

    def __init__(self, message: str, line: int = 0) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def fmt(x: float | str | None) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".15g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def trajectory_csv(traj: Trajectory) -> str:
    return csv_text(TRAJECTORY_HEADER, zip(traj.ts, traj.p_e, traj.lambda_H))


def protocol_csv(protocol: ControlProtocol) -> str:
    return csv_text(PROTOCOL_HEADER, zip(*protocol.samples()))


def parse_protocol(text: str) -> ControlProtocol:
    """Read a ``t,lambda_H`` table into a piecewise-linear protocol."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ProtocolFormatError("empty protocol file")
    header = tuple(h.strip() for h in lines[0].split(","))
    if header != PROTOCOL_HEADER:
        raise ProtocolFormatError(f"expected header {','.join(PROTOCOL_HEADER)!r}, got {lines[0]!r}", 1)
    ts: list[float] = []
    vs: list[float] = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise ProtocolFormatError(f"expected 2 columns, got {len(cells)}", k)
        try:
            t, v = float(cells[0]), float(cells[1])
        except ValueError:
            raise ProtocolFormatError(f"not a number: {line!r}", k) from None
        if not (math.isfinite(t) and math.isfinite(v)):
            raise ProtocolFormatError("non-finite value", k)
        if v < 0:
            raise ProtocolFormatError(f"negative gap {v!r}", k)
        if not ts and t != 0.0:
            raise ProtocolFormatError(f"first time must be 0, got {t!r}", k)
        if ts and t <= ts[-1]:
            raise ProtocolFormatError(f"time {t!r} does not increase", k)
        ts.append(t)
        vs.append(v)
    if len(ts) < 2:
        raise ProtocolFormatError("need at least two samples")
    return ControlProtocol([SampledGap(np.array(ts), np.array(vs))])


def read_protocol(path: str | Path) -> ControlProtocol:
    with open(path, encoding="utf-8") as fh:
        return parse_protocol(fh.read())


def parse_trajectory(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != TRAJECTORY_HEADER:
        raise ValueError("not a trajectory file")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    return data[:, 0], data[:, 1], data[:, 2]


@dataclass
class RunResult:
    tau: float | None = None
    epsilon: float | None = None
    lambda_max: float | None = None
    case: str | None = None
    t_star: float | None = None
    tau_c1: float | None = None
    tau_c2: float | None = None
    j: float | None = None
    j1: float | None = None
    j2: float | None = None
    w_sc1: float | None = None
    w_qa2: float | None = None
    w_sc: float | None = None
    w_qs: float | None = None
    w_ex: float | None = None
    shooting_parameter: float | None = None
    terminal_gap: float | None = None
    residual: float | None = None
    iterations: int | None = None
    reset_error: float | None = None
    work_direct: float | None = None
    reason: str | None = None
    threshold: float | None = None
    message: str | None = None
    artifacts: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        # json writes floats with repr, which round-trips exactly.
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunResult":
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown RunResult fields: {sorted(unknown)}")
        return cls(**data)
