"""Characteristic paths traced through stored frames.

Forward acoustic paths follow dx/dt = rho, and pressure along them changes
at the rate Q r / 2.  Particle paths are vertical in the Lagrangian
coordinate.  Paths are traced after the run, through bilinear
interpolation of the frame stack.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fronts import shock_trajectory
from .model import SimParams, pressure, reaction_rate
from .solver import RunRecord

CPLUS = "Cplus"
CZERO = "Czero"


class FieldInterpolator:
    """Bilinear (x, t) interpolation of a run's frames.

    The piston face x = 0 is an extra node carrying the boundary density 1
    and the first cell's reaction variables.
    """

    def __init__(self, record: RunRecord):
        self.record = record
        self.times = record.frame_times
        self.nodes = np.concatenate(([0.0], record.x))
        self.x_max = float(record.x[-1])
        self.t_min = float(self.times[0])
        self.t_max = float(self.times[-1])

    def contains(self, x, t) -> bool:
        return 0.0 <= x <= self.grid_length and self.t_min <= t <= self.t_max

    @property
    def grid_length(self) -> float:
        return self.record.grid.length

    def _weights(self, x, t):
        times, nodes = self.times, self.nodes
        k = np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2)
        wt = np.clip((t - times[k]) / (times[k + 1] - times[k]), 0.0, 1.0)
        i = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, nodes.size - 2)
        wx = np.clip((x - nodes[i]) / (nodes[i + 1] - nodes[i]), 0.0, 1.0)
        return k, wt, i, wx

    def _column(self, frames, k, i, piston_value):
        cell = np.maximum(i - 1, 0)
        inner = frames[k, cell]
        if piston_value is None:
            return inner
        return np.where(i == 0, piston_value, inner)

    def _evaluate(self, frames, x, t, piston_value):
        k, wt, i, wx = self._weights(np.asarray(x, float), np.asarray(t, float))
        a = (1 - wx) * self._column(frames, k, i, piston_value) + wx * frames[k, i]
        b = (1 - wx) * self._column(frames, k + 1, i, piston_value) + wx * frames[k + 1, i]
        out = (1 - wt) * a + wt * b
        return out[()] if np.ndim(out) == 0 else out

    def rho(self, x, t):
        return self._evaluate(self.record.rho, x, t, 1.0)

    def lambda_i(self, x, t):
        return self._evaluate(self.record.lambda_i, x, t, None)

    def lambda_r(self, x, t):
        return self._evaluate(self.record.lambda_r, x, t, None)

    def pressure(self, x, t):
        return pressure(self.rho(x, t), self.lambda_r(x, t), self.record.params.Q)


@dataclass(frozen=True)
class CharacteristicPath:
    family: str
    seed: tuple
    t: np.ndarray
    x: np.ndarray
    rho: np.ndarray
    p: np.ndarray
    lambda_i: np.ndarray
    lambda_r: np.ndarray
    stop_reason: str = ""

    def __len__(self):
        return self.t.size

    def subset(self, mask) -> "CharacteristicPath":
        mask = np.asarray(mask, dtype=bool)
        return CharacteristicPath(self.family, self.seed, self.t[mask], self.x[mask],
                                  self.rho[mask], self.p[mask], self.lambda_i[mask],
                                  self.lambda_r[mask], self.stop_reason)


def _sample(interp: FieldInterpolator, family, seed, t, x, reason) -> CharacteristicPath:
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    rho = interp.rho(x, t)
    lam_r = interp.lambda_r(x, t)
    return CharacteristicPath(
        family=family, seed=seed, t=t, x=x, rho=rho,
        p=pressure(rho, lam_r, interp.record.params.Q),
        lambda_i=interp.lambda_i(x, t), lambda_r=lam_r, stop_reason=reason,
    )


def _check_seed(interp: FieldInterpolator, seed):
    x0, t0 = float(seed[0]), float(seed[1])
    if not (0.0 <= x0 <= interp.grid_length and interp.t_min <= t0 <= interp.t_max):
        raise ValueError(f"seed {seed!r} lies outside the stored space-time domain")
    return x0, t0


def trace_cplus(record: RunRecord, seed, substeps: int = 4,
                interp: FieldInterpolator | None = None) -> CharacteristicPath:
    """Integrate dx/dt = rho from ``seed = (x0, t0)`` with the explicit midpoint rule.

    The step is the snapshot interval divided by ``substeps``.  Tracing stops
    at the domain edge, at the last frame, or once a path that was behind
    the lead shock comes within one cell of it.  That margin is widened by
    the distance the shock travels between frames, since time interpolation
    smears it over that distance.
    """
    interp = interp or FieldInterpolator(record)
    x, t = _check_seed(interp, seed)
    shock = shock_trajectory(record)
    dx = record.dx
    h = record.config.snapshot_interval / substeps

    frame_dt = record.config.snapshot_interval

    def shock_x(tt):
        return float(shock.position_at(tt)) if len(shock) and tt >= shock.t[0] else 0.0

    def margin(tt):
        return dx + max(shock_x(tt + frame_dt) - shock_x(tt), 0.0)

    behind = x < shock_x(t) - margin(t)
    ts, xs = [t], [x]
    reason = "t_end"
    while t < interp.t_max - 1e-12:
        hh = min(h, interp.t_max - t)
        xm = x + 0.5 * hh * interp.rho(x, t)
        x = x + hh * interp.rho(xm, t + 0.5 * hh)
        t = t + hh
        if x > interp.grid_length:
            reason = "domain_edge"
            break
        ts.append(t)
        xs.append(x)
        gap = shock_x(t) - x
        if behind and gap <= margin(t):
            reason = "lead_shock"
            break
        if not behind and gap > margin(t):
            behind = True
    return _sample(interp, CPLUS, (float(seed[0]), float(seed[1])), ts, xs, reason)


def trace_czero(record: RunRecord, seed, interp: FieldInterpolator | None = None) -> CharacteristicPath:
    """Particle path: fixed x, sampled at every frame from ``t0`` on."""
    interp = interp or FieldInterpolator(record)
    x0, t0 = _check_seed(interp, seed)
    later = record.frame_times[record.frame_times > t0]
    t = np.concatenate(([t0], later))
    return _sample(interp, CZERO, (x0, t0), t, np.full(t.size, x0), "t_end")


@dataclass(frozen=True)
class FanResult:
    paths: list
    failures: list      # (seed, message)


def default_piston_seeds(record: RunRecord, spacing: float = 0.1) -> list:
    times = np.arange(spacing, record.t_end - 0.5 * spacing, spacing)
    return [(0.0, float(t)) for t in times]


def cplus_fan(record: RunRecord, seeds=None, spacing: float = 0.1, substeps: int = 4) -> FanResult:
    if seeds is None:
        seeds = default_piston_seeds(record, spacing)
    interp = FieldInterpolator(record)
    paths, failures = [], []
    for seed in seeds:
        try:
            paths.append(trace_cplus(record, seed, substeps=substeps, interp=interp))
        except (ValueError, FloatingPointError) as exc:
            failures.append((tuple(seed), str(exc)))
    return FanResult(paths, failures)


@dataclass(frozen=True)
class ResidualStats:
    max_abs: float
    rms: float
    n: int


def characteristic_residual(path: CharacteristicPath, params: SimParams, mask=None) -> ResidualStats:
    """Residual of dp/dt - Q r / 2 along a forward path.

    ``dp/dt`` is differentiated numerically from the sampled pressures and
    ``r`` is evaluated from the interpolated reaction variables.  ``mask``
    restricts the statistics to a subset of samples (derivatives still use
    the full path).
    """
    if path.family != CPLUS:
        raise ValueError("residual is defined along forward (Cplus) paths")
    if len(path) < 10:
        raise ValueError(f"need at least 10 samples, got {len(path)}")
    dpdt = np.gradient(path.p, path.t)
    source = 0.5 * params.Q * reaction_rate(path.lambda_i, path.lambda_r, params.K, params.nu)
    res = dpdt - source
    if mask is not None:
        res = res[np.asarray(mask, dtype=bool)]
    if res.size == 0:
        return ResidualStats(0.0, 0.0, 0)
    return ResidualStats(float(np.max(np.abs(res))), float(np.sqrt(np.mean(res * res))), int(res.size))


def reaction_zone_mask(path: CharacteristicPath, interior: int = 2) -> np.ndarray:
    """Samples strictly inside the reaction zone (induction fully expired).

    ``interior`` drops that many samples at each boundary of a zone segment,
    where the one-sided derivative straddles the fire.
    """
    inside = path.lambda_i == 0.0
    return _erode(inside, interior)


def induction_zone_mask(path: CharacteristicPath, interior: int = 2) -> np.ndarray:
    inside = (path.lambda_i > 0.0) & (path.lambda_r == 0.0) & (path.rho > 0.5)
    return _erode(inside, interior)


def _erode(mask: np.ndarray, n: int) -> np.ndarray:
    out = mask.copy()
    for shift in range(1, n + 1):
        out[shift:] &= mask[:-shift]
        out[:-shift] &= mask[shift:]
        out[:shift] = False
        out[-shift:] = False
    return out
