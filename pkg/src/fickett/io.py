"""Configuration documents, columnar output, stored runs and t-x diagrams."""
from __future__ import annotations

import dataclasses
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import SimParams
from .solver import FieldState, Grid, RunRecord, SolverConfig

FLOAT_FMT = "{:.15g}"


class ConfigError(ValueError):
    """A configuration key is unknown, mistyped or violates a constraint."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class OutputError(OSError):
    pass


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs, serialised as a JSON object."""

    K: float
    epsilon: float
    Q: float = 1.0
    nu: float = 1.0
    t_end: float = 4.0
    domain_length: float = 3.0
    cfl: float = 0.9
    snapshot_interval: float = 0.01
    points_per_unit: int = 1600
    reaction_end_threshold: float = 0.99
    kinetics: bool = True
    out_dir: str = "out"
    seeds: list = field(default_factory=list)       # [[x0, t0], ...]; empty means piston fan
    seed_spacing: float = 0.1
    emit_snapshots: bool = False
    emit_trajectories: bool = True
    emit_diagram: bool = True
    emit_svg: bool = False
    grid: list = field(default_factory=list)        # [[K, epsilon], ...] for sweeps
    workers: int = 1
    x_max: float = 0.9
    n_iter: int = 4
    n_nodes: int = 1024
    compare_x_max: float = 0.5

    @property
    def params(self) -> SimParams:
        return SimParams(self.K, self.epsilon, self.Q, self.nu)

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(t_end=self.t_end, domain_length=self.domain_length, cfl=self.cfl,
                            snapshot_interval=self.snapshot_interval,
                            points_per_unit=self.points_per_unit, kinetics=self.kinetics,
                            reaction_end_threshold=self.reaction_end_threshold)

    def sweep_params(self) -> list:
        return [SimParams(float(K), float(eps), self.Q, self.nu) for K, eps in self.grid]


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_REQUIRED = [name for name, f in _FIELDS.items()
             if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING]

_CONSTRAINTS = {
    "K": (lambda v: v > 0, "must be > 0"),
    "epsilon": (lambda v: v > 0, "must be > 0"),
    "Q": (lambda v: v >= 0, "must be >= 0"),
    "nu": (lambda v: v >= 0, "must be >= 0"),
    "t_end": (lambda v: v > 0, "must be > 0"),
    "domain_length": (lambda v: v > 0, "must be > 0"),
    "cfl": (lambda v: 0 < v <= 1, "must lie in (0, 1]"),
    "snapshot_interval": (lambda v: v > 0, "must be > 0"),
    "points_per_unit": (lambda v: v >= 1, "must be >= 1"),
    "reaction_end_threshold": (lambda v: 0 < v < 1, "must lie in (0, 1)"),
    "seed_spacing": (lambda v: v > 0, "must be > 0"),
    "workers": (lambda v: v >= 1, "must be >= 1"),
    "x_max": (lambda v: 0 < v <= 0.95, "must lie in (0, 0.95]"),
    "n_iter": (lambda v: v >= 1, "must be >= 1"),
    "n_nodes": (lambda v: v >= 2, "must be >= 2"),
    "compare_x_max": (lambda v: v > 0, "must be > 0"),
}


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_pairs(key, value):
    if not isinstance(value, list):
        raise ConfigError(key, "expected a list of [a, b] pairs")
    out = []
    for item in value:
        if not (isinstance(item, list) and len(item) == 2 and all(_is_number(v) for v in item)):
            raise ConfigError(key, f"entry {item!r} is not a pair of numbers")
        out.append([float(item[0]), float(item[1])])
    return out


def _coerce(key, value):
    kind = _FIELDS[key].type
    if kind == "float":
        if not _is_number(value):
            raise ConfigError(key, f"expected a number, got {type(value).__name__}")
        value = float(value)
        if not np.isfinite(value):
            raise ConfigError(key, "must be finite")
    elif kind == "int":
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(key, f"expected an integer, got {type(value).__name__}")
    elif kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true or false, got {type(value).__name__}")
    elif kind == "str":
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {type(value).__name__}")
    elif kind == "list":
        value = _check_pairs(key, value)
    rule = _CONSTRAINTS.get(key)
    if rule is not None and not rule[0](value):
        raise ConfigError(key, f"{rule[1]}, got {value!r}")
    return value


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "expected a JSON object")
    unknown = sorted(set(doc) - set(_FIELDS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise ConfigError(missing[0], "required key is missing")
    values = {k: _coerce(k, v) for k, v in doc.items()}
    cfg = RunConfig(**values)
    for x0, t0 in cfg.seeds:
        if x0 < 0 or t0 < 0:
            raise ConfigError("seeds", f"seed ({x0}, {t0}) must have x0 >= 0 and t0 >= 0")
    return cfg


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"not valid JSON ({exc})") from None
    return config_from_dict(doc)


def config_to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# ---------------------------------------------------------------- files

def atomic_write_bytes(path, data: bytes) -> Path:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    return FLOAT_FMT.format(float(v))


def format_columns(names, columns) -> str:
    columns = [np.atleast_1d(np.asarray(c)) if not isinstance(c, list) else c for c in columns]
    n = len(columns[0]) if columns else 0
    if any(len(c) != n for c in columns):
        raise ValueError("all columns must have the same length")
    lines = [",".join(names)]
    for i in range(n):
        lines.append(",".join(_cell(c[i]) for c in columns))
    return "\n".join(lines) + "\n"


def write_columns(path, names, columns) -> Path:
    return atomic_write_text(path, format_columns(names, columns))


def read_columns(path) -> dict:
    """Numeric columnar file back to a dict of float arrays."""
    with open(path) as fh:
        names = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        return {name: np.empty(0) for name in names}
    return {name: data[:, i] for i, name in enumerate(names)}


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# ---------------------------------------------------------------- stored runs

_RECORD_ARRAYS = ("frame_times", "rho", "lambda_i", "lambda_r", "shock_time", "fire_time",
                  "reaction_end_time")


def save_record(record: RunRecord, path) -> Path:
    meta = {
        "params": dataclasses.asdict(record.params),
        "config": dataclasses.asdict(record.config),
        "n_cells": record.grid.n_cells,
        "final_time": record.final.time,
        "inflow": record.final.inflow,
        "outflow": record.final.outflow,
        "n_steps": record.n_steps,
        "dt_min": record.dt_min,
        "dt_max": record.dt_max,
    }
    arrays = {name: getattr(record, name) for name in _RECORD_ARRAYS}
    arrays["final_rho"] = record.final.rho
    arrays["final_lambda_i"] = record.final.lambda_i
    arrays["final_lambda_r"] = record.final.lambda_r
    buf = io.BytesIO()
    np.savez_compressed(buf, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)
    return atomic_write_bytes(path, buf.getvalue())


def load_record(path) -> RunRecord:
    try:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            arrays = {name: data[name].copy() for name in data.files if name != "meta"}
    except (OSError, KeyError, ValueError) as exc:
        raise OutputError(f"cannot read record {path}: {exc}") from exc
    params = SimParams(**meta["params"])
    config = SolverConfig(**meta["config"])
    grid = Grid(meta["n_cells"], config.points_per_unit)
    final = FieldState(grid, meta["final_time"], arrays["final_rho"], arrays["final_lambda_i"],
                       arrays["final_lambda_r"], arrays["shock_time"], arrays["fire_time"],
                       arrays["reaction_end_time"], meta["inflow"], meta["outflow"])
    return RunRecord(params=params, config=config, grid=grid, final=final,
                     n_steps=meta["n_steps"], dt_min=meta["dt_min"], dt_max=meta["dt_max"],
                     **{name: arrays[name] for name in _RECORD_ARRAYS})


# ---------------------------------------------------------------- products

FRAME_COLUMNS = ("x", "rho", "p", "lambda_i", "lambda_r")


def emit_frames(record: RunRecord, out_dir) -> list:
    """One columnar file per stored frame, named by frame index."""
    out_dir = Path(out_dir)
    x = record.x
    p = record.pressure_frames()
    width = max(5, len(str(record.frame_times.size - 1)))
    paths = []
    for k in range(record.frame_times.size):
        path = out_dir / f"frame_{k:0{width}d}.csv"
        write_columns(path, FRAME_COLUMNS,
                      [x, record.rho[k], p[k], record.lambda_i[k], record.lambda_r[k]])
        paths.append(path)
    write_columns(out_dir / "times.csv", ("frame", "t"),
                  [np.arange(record.frame_times.size), record.frame_times])
    return paths


PATH_COLUMNS = ("path", "seed_x", "seed_t", "t", "x", "rho", "p", "lambda_i", "lambda_r")


def write_paths(paths, path) -> Path:
    cols = [[] for _ in PATH_COLUMNS]
    for i, cp in enumerate(paths):
        n = len(cp)
        for col, values in zip(cols, (np.full(n, i), np.full(n, cp.seed[0]), np.full(n, cp.seed[1]),
                                      cp.t, cp.x, cp.rho, cp.p, cp.lambda_i, cp.lambda_r)):
            col.extend(np.asarray(values, dtype=float).tolist())
    return write_columns(path, PATH_COLUMNS, cols)


STYLE = {
    "shock": ("#d62728", ""),
    "fire": ("#2ca02c", ""),
    "reaction_end": ("#1f77b4", ""),
    "internal_shock": ("#9467bd", ""),
    "analytic": ("#000000", "6,4"),
    "cplus": ("#000000", ""),
}


def emit_diagram(record: RunRecord, trajectories: dict, paths, out_dir, svg: bool = True,
                 stem: str = "diagram") -> list:
    """Write each trajectory and the traced paths as columnar files, plus an SVG.

    ``trajectories`` maps a series name (shock, fire, reaction_end,
    internal_shock, analytic) to a :class:`~fickett.fronts.Trajectory`.
    """
    out_dir = Path(out_dir)
    written = []
    for name, traj in trajectories.items():
        if traj is None:
            continue
        written.append(write_columns(out_dir / f"{name}.csv", ("x", "t"), [traj.x, traj.t]))
    if paths:
        written.append(write_paths(paths, out_dir / "cplus.csv"))
    if svg:
        text = render_svg(trajectories, paths, x_max=record.grid.length, t_max=record.t_end)
        written.append(atomic_write_text(out_dir / f"{stem}.svg", text))
    return written


def render_svg(trajectories: dict, paths, x_max: float, t_max: float,
               width: int = 640, height: int = 640, margin: int = 50) -> str:
    """Standalone t-x diagram: x to the right, t upward."""
    sx = (width - 2 * margin) / x_max
    sy = (height - 2 * margin) / t_max

    def pts(x, t):
        keep = (np.asarray(t) <= t_max) & (np.asarray(x) <= x_max)
        px = margin + sx * np.asarray(x)[keep]
        py = height - margin - sy * np.asarray(t)[keep]
        return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))

    def polyline(x, t, style, w=1.5):
        color, dash = style
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return (f'<polyline fill="none" stroke="{color}" stroke-width="{w}"{dash_attr} '
                f'points="{pts(x, t)}"/>')

    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}" '
        'fill="none" stroke="#888888"/>',
    ]
    for cp in paths or []:
        if len(cp) > 1:
            body.append(polyline(cp.x, cp.t, STYLE["cplus"], 0.6))
    for name in ("reaction_end", "internal_shock", "fire", "shock", "analytic"):
        traj = trajectories.get(name)
        if traj is not None and len(traj) > 1:
            body.append(polyline(traj.x, traj.t, STYLE[name], 2.0))
    for k in range(5):
        xv, tv = x_max * k / 4, t_max * k / 4
        body.append(f'<text x="{margin + sx * xv:.2f}" y="{height - margin + 18}" font-size="11" '
                    f'text-anchor="middle">{xv:.3g}</text>')
        body.append(f'<text x="{margin - 8}" y="{height - margin - sy * tv + 4:.2f}" font-size="11" '
                    f'text-anchor="end">{tv:.3g}</text>')
    body.append(f'<text x="{width / 2:.0f}" y="{height - 10}" font-size="13" text-anchor="middle">x</text>')
    body.append(f'<text x="14" y="{height / 2:.0f}" font-size="13">t</text>')
    body.append("</svg>")
    return "\n".join(body) + "\n"
