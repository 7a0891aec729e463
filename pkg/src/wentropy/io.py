"""Artifact formats: 17-significant-digit decimals, trajectory files and flat key-value configs.

A trajectory file is one JSON header line followed by one CSV block per
snapshot::

    {"format": "wentropy-trajectory", "version": 1, "nodes": 128, ...}
    # t=0.0
    mu,u,f
    -1.0,0.0,...
    ...

Values are written with ``repr``-exact 17 significant digits, so a round trip
reproduces every float bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .flow_engine import FlowTrajectory
from .grid import get_grid

TRAJECTORY_FORMAT = "wentropy-trajectory"


def format_float(x) -> str:
    """17 significant digits (``nan``/``inf`` spelled out)."""
    x = float(x)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.17g}"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        return float(v) if np.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (int, str, bool)) or v is None:
        return v
    return str(v)


def trajectory_to_text(traj: FlowTrajectory, params: dict | None = None) -> str:
    header = {
        "format": TRAJECTORY_FORMAT,
        "version": 1,
        "nodes": traj.grid.n,
        "snapshots": len(traj.times),
        "has_potential": traj.f is not None,
        "meta": _jsonable(traj.meta),
        "params": _jsonable(params or {}),
    }
    lines = [json.dumps(header, sort_keys=True)]
    mu = traj.grid.mu
    for i, t in enumerate(traj.times):
        lines.append(f"# t={format_float(t)}")
        lines.append("mu,u,f" if traj.f is not None else "mu,u")
        for j in range(len(mu)):
            row = [format_float(mu[j]), format_float(traj.u[i, j])]
            if traj.f is not None:
                row.append(format_float(traj.f[i, j]))
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def save_trajectory(traj: FlowTrajectory, path, params: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trajectory_to_text(traj, params))
    return path


def trajectory_from_text(text: str) -> FlowTrajectory:
    lines = text.splitlines()
    header = json.loads(lines[0])
    if header.get("format") != TRAJECTORY_FORMAT:
        raise ValueError("not a trajectory file")
    n = int(header["nodes"])
    grid = get_grid(n)
    times, us, fs = [], [], []
    k = 1
    while k < len(lines):
        line = lines[k]
        if not line.startswith("# t="):
            raise ValueError(f"line {k + 1}: expected a snapshot marker")
        times.append(float(line[4:]))
        cols = lines[k + 1].split(",")
        block = np.array([[float(x) for x in lines[k + 2 + j].split(",")] for j in range(n)])
        if not np.allclose(block[:, 0], grid.mu, rtol=0.0, atol=1e-15):
            raise ValueError(f"snapshot at line {k + 1}: nodes do not match a {n}-node grid")
        us.append(block[:, 1])
        if "f" in cols:
            fs.append(block[:, 2])
        k += 2 + n
    f = np.array(fs) if fs else None
    meta = dict(header.get("meta", {}))
    meta["params"] = header.get("params", {})
    return FlowTrajectory(grid, np.array(times), np.array(us), f, meta)


def load_trajectory(path) -> FlowTrajectory:
    return trajectory_from_text(Path(path).read_text())


# --------------------------------------------------------------------------
# flat key-value configs
# --------------------------------------------------------------------------

class ConfigError(ValueError):
    pass


def parse_config_entries(text: str, source: str = "<config>") -> dict[str, tuple[str, int]]:
    """``key = value`` per line into ``{key: (value, line_number)}``.

    ``#`` starts a comment; malformed lines and duplicate keys raise
    :class:`ConfigError` naming the source and line.
    """
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {out[key][1]})")
        out[key] = (value, lineno)
    return out


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    """Like :func:`parse_config_entries` without the line numbers."""
    return {k: v for k, (v, _) in parse_config_entries(text, source).items()}


def load_config(path) -> dict[str, str]:
    path = Path(path)
    return parse_config(path.read_text(), str(path))
