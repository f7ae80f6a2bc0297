"""JSON run configuration (schema version 1).

Scalar data (f, mu, u0) is specified as ``{"constant": x}`` and/or
``{"modes": [{"k": [k1, ...], "amplitude": [re, im]}, ...]}``; each mode
contributes ``2 Re(A exp(i 2 pi k.x / L))`` so the materialized field is
real.  Mode vectors must stay below the dealiasing cutoff N//3.  Complex
scalars are written as ``[re, im]`` pairs throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import sampling
from .errors import ConfigError
from .flow import DtControl
from .grid import TWO_PI, PeriodicGrid
from .snapshot import KIND_CURV, KIND_HERM3, read_snapshot

SCHEMA_VERSION = 1
COMMANDS = ("verify", "symbol", "flow-fuyau", "flow-torus")


@dataclass
class RunConfig:
    command: str
    seed: int
    out_dir: str
    snapshot_interval: int
    raw: dict = field(repr=False, default_factory=dict)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
    out = raw.get("output", {})
    return RunConfig(
        command=command,
        seed=int(raw.get("seed", 0)),
        out_dir=str(out.get("dir", ".")),
        snapshot_interval=int(out.get("snapshot_interval", 0)),
        raw=raw,
    )


def parse_grid(spec: dict) -> PeriodicGrid:
    try:
        return PeriodicGrid(
            int(spec.get("complex_dims", 1)),
            int(spec.get("points_per_dim", 16)),
            float(spec.get("period", TWO_PI)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad grid spec: {exc}") from exc


def materialize_scalar(grid: PeriodicGrid, spec, name="field") -> np.ndarray:
    """Real scalar field from a {constant, modes} specification."""
    if spec is None:
        return np.zeros(grid.shape)
    if isinstance(spec, (int, float)):
        return float(spec) * np.ones(grid.shape)
    if not isinstance(spec, dict):
        raise ConfigError(f"{name}: expected a number or an object, got {type(spec)}")
    out = float(spec.get("constant", 0.0)) * np.ones(grid.shape)
    xs = grid.coords()
    for mode in spec.get("modes", []):
        k = mode.get("k")
        amp = mode.get("amplitude")
        if k is None or amp is None or len(k) != 2 * grid.complex_dims:
            raise ConfigError(f"{name}: each mode needs k (length {2*grid.complex_dims}) and amplitude")
        if max(abs(int(ki)) for ki in k) > grid.dealias_kmax:
            raise ConfigError(
                f"{name}: mode {k} exceeds the dealiasing cutoff {grid.dealias_kmax}"
            )
        a = complex(amp[0], amp[1]) if isinstance(amp, (list, tuple)) else complex(amp)
        arg = sum(TWO_PI / grid.period * int(ki) * x for ki, x in zip(k, xs))
        out = out + 2.0 * np.real(a * np.exp(1j * arg))
    return out


def parse_complex(x, name="value") -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(x[0], x[1])
    raise ConfigError(f"{name}: expected number or [re, im] pair")


def parse_matrix(spec, shape, name="matrix") -> np.ndarray:
    arr = np.asarray(
        [[parse_complex(x, name) for x in row] for row in spec], dtype=complex
    )
    if arr.shape != shape:
        raise ConfigError(f"{name}: expected shape {shape}, got {arr.shape}")
    return arr


def parse_omega_point(spec, default_scale=1.0) -> np.ndarray:
    if spec is None:
        return default_scale * np.eye(3, dtype=complex)
    if "identity" in spec:
        return float(spec["identity"]) * np.eye(3, dtype=complex)
    if "inline" in spec:
        return parse_matrix(spec["inline"], (3, 3), "omega")
    if "snapshot" in spec:
        grid, fieldv, kind = read_snapshot(spec["snapshot"])
        if kind != KIND_HERM3:
            raise ConfigError("omega snapshot must hold a Herm3 field")
        at = tuple(int(i) for i in spec.get("at", (0,) * 2 * grid.complex_dims))
        return np.asarray(fieldv[at], dtype=complex)
    raise ConfigError("omega spec needs identity, inline or snapshot")


def parse_curvature(spec, seed=0, omega=None) -> np.ndarray:
    if spec is None or spec.get("zero"):
        return np.zeros((3, 3, 3, 3), dtype=complex)
    if "adversarial" in spec:
        return sampling.trace_curvature(float(spec["adversarial"]))
    if "random" in spec:
        sub = spec["random"]
        rng = np.random.default_rng(int(sub.get("seed", seed)))
        scale = float(sub.get("scale", 1.0))
        # reality-respecting relative to the metric it will be used with
        if omega is not None:
            return sampling.random_curvature_for_metric(rng, omega, scale)
        return sampling.random_curvature(rng, scale)
    if "inline" in spec:
        arr = np.asarray(
            [
                [[[parse_complex(x, "R") for x in row] for row in mat] for mat in blk]
                for blk in spec["inline"]
            ],
            dtype=complex,
        )
        if arr.shape != (3, 3, 3, 3):
            raise ConfigError(f"R: expected shape (3,3,3,3), got {arr.shape}")
        return arr
    if "snapshot" in spec:
        grid, fieldv, kind = read_snapshot(spec["snapshot"])
        if kind != KIND_CURV:
            raise ConfigError("curvature snapshot must hold a curvature field")
        at = tuple(int(i) for i in spec.get("at", (0,) * 2 * grid.complex_dims))
        return np.asarray(fieldv[at], dtype=complex)
    raise ConfigError("curvature spec needs zero, adversarial, random, inline or snapshot")


def parse_dt_control(spec) -> DtControl:
    spec = spec or {}
    return DtControl(
        cfl=float(spec.get("cfl", 0.2)),
        dt_fixed=(float(spec["dt_fixed"]) if spec.get("dt_fixed") else None),
        dt_max=float(spec.get("dt_max", np.inf)),
        dt_min=float(spec.get("dt_min", 1e-12)),
        margin_min=float(spec.get("margin_min", 0.0)),
    )
