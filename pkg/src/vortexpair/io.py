"""VPF field files and ``key=value`` reports."""
from __future__ import annotations

import os
from typing import Iterable, Mapping

import numpy as np

from .grid import Domain, Field

VPF_MAGIC = "VPF 1"


class VPFError(ValueError):
    """Malformed VPF file."""


def format_vpf(f: Field) -> str:
    d = f.domain
    lines = [VPF_MAGIC, f"{d.nx} {d.ny} {d.half_width!r} {d.strip_height!r}"]
    for row in f.values:
        lines.append(" ".join(format(float(v), ".17g") for v in row))
    return "\n".join(lines) + "\n"


def parse_vpf(text: str, nonneg: bool = True) -> Field:
    lines = text.splitlines()
    if not lines or lines[0].strip() != VPF_MAGIC:
        raise VPFError(f"bad magic line {lines[0]!r}" if lines else "empty file")
    if len(lines) < 2:
        raise VPFError("missing header line")
    head = lines[1].split()
    if len(head) != 4:
        raise VPFError(f"header must be 'nx ny L Z', got {lines[1]!r}")
    try:
        nx, ny = int(head[0]), int(head[1])
        L, Z = float(head[2]), float(head[3])
    except ValueError as exc:
        raise VPFError(f"unparseable header {lines[1]!r}") from exc
    tokens = " ".join(lines[2:]).split()
    if len(tokens) != nx * ny:
        raise VPFError(f"expected {nx * ny} values, found {len(tokens)}")
    try:
        values = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise VPFError("non-numeric value") from exc
    domain = Domain(half_width=L, strip_height=Z, nx=nx, ny=ny)
    return Field(domain, values, nonneg=nonneg)


def write_vpf(path, f: Field) -> None:
    with open(path, "w") as fh:
        fh.write(format_vpf(f))


def read_vpf(path, nonneg: bool = True) -> Field:
    with open(path) as fh:
        return parse_vpf(fh.read(), nonneg=nonneg)


def _format_value(v) -> str:
    if isinstance(v, bool) or isinstance(v, (np.bool_,)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(_format_value(x) for x in v)
    return str(v)


def format_kv(record: Mapping) -> str:
    return " ".join(f"{k}={_format_value(v)}" for k, v in record.items())


def write_report(path, record: Mapping) -> None:
    with open(path, "w") as fh:
        for k, v in record.items():
            fh.write(f"{k}={_format_value(v)}\n")


def read_report(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or "=" not in line:
                continue
            k, v = line.split("=", 1)
            out[k] = v
    return out


def write_trace(path, records: Iterable[Mapping]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(format_kv(rec) + "\n")


def list_vpf(directory) -> list[str]:
    names = sorted(n for n in os.listdir(directory) if n.endswith(".vpf"))
    return [os.path.join(directory, n) for n in names]
