"""Finite-volume integration of the piston-driven reactive Burgers problem.

The hydrodynamic step is first-order Godunov on a uniform Lagrangian grid.
Kinetics are Strang-split around it, and the per-cell ODEs are integrated
exactly with density frozen over each half step.  The run loop also records
per-cell event times: shock arrival, fire onset and end of reaction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .model import CellState, SimParams, pressure

SHOCK_THRESHOLD = 0.5   # half the nominal post-shock density
RHO_FLOOR = 1e-12
DT_UNDERFLOW = 1e-14
GUARD_FRACTION = 0.02
DISTURBANCE_LEVEL = 1e-6


class SolverError(RuntimeError):
    """Numerical failure during integration."""


class DomainTooShortError(SolverError):
    pass


class TimeStepUnderflowError(SolverError):
    pass


@dataclass(frozen=True)
class Grid:
    n_cells: int
    points_per_unit: int = 1600
    x_left: float = 0.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError(f"need at least 2 cells, got {self.n_cells}")
        if self.points_per_unit < 1:
            raise ValueError("points_per_unit must be >= 1")

    @classmethod
    def from_length(cls, length: float, points_per_unit: int = 1600) -> "Grid":
        return cls(n_cells=int(round(length * points_per_unit)), points_per_unit=points_per_unit)

    @property
    def dx(self) -> float:
        return 1.0 / self.points_per_unit

    @property
    def length(self) -> float:
        return self.n_cells * self.dx

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class SolverConfig:
    t_end: float = 4.0
    domain_length: float = 3.0
    cfl: float = 0.9
    snapshot_interval: float = 0.01
    points_per_unit: int = 1600
    fire_record: bool = True
    kinetics: bool = True
    reaction_end_threshold: float = 0.99

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if not self.snapshot_interval > 0.0:
            raise ValueError(f"snapshot_interval must be > 0, got {self.snapshot_interval}")
        if not self.domain_length > 0.0:
            raise ValueError(f"domain_length must be > 0, got {self.domain_length}")
        if not 0.0 < self.reaction_end_threshold < 1.0:
            raise ValueError("reaction_end_threshold must lie in (0, 1)")

    def grid(self) -> Grid:
        return Grid.from_length(self.domain_length, self.points_per_unit)

    @property
    def n_frames(self) -> int:
        return int(math.floor(self.t_end / self.snapshot_interval + 1e-9)) + 1


@dataclass
class FieldState:
    """Cell-centred fields at one time level plus per-cell event times.

    Event times are NaN until the event happens.  ``inflow``/``outflow`` are
    the time-integrated boundary fluxes used for the mass balance.
    """

    grid: Grid
    time: float
    rho: np.ndarray
    lambda_i: np.ndarray
    lambda_r: np.ndarray
    shock_time: np.ndarray = None
    fire_time: np.ndarray = None
    reaction_end_time: np.ndarray = None
    inflow: float = 0.0
    outflow: float = 0.0

    def __post_init__(self):
        n = self.grid.n_cells
        self.rho = np.array(self.rho, dtype=float)
        self.lambda_i = np.array(self.lambda_i, dtype=float)
        self.lambda_r = np.array(self.lambda_r, dtype=float)
        for name in ("shock_time", "fire_time", "reaction_end_time"):
            if getattr(self, name) is None:
                setattr(self, name, np.full(n, np.nan))
            else:
                setattr(self, name, np.array(getattr(self, name), dtype=float))
        for name in ("rho", "lambda_i", "lambda_r", "shock_time", "fire_time", "reaction_end_time"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")

    @classmethod
    def uniform(cls, grid: Grid, rho: float, lambda_i: float = 1.0, lambda_r: float = 0.0,
                time: float = 0.0) -> "FieldState":
        CellState(rho, lambda_i, lambda_r)
        n = grid.n_cells
        return cls(grid, time, np.full(n, rho), np.full(n, lambda_i), np.full(n, lambda_r))

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.time, self.rho.copy(), self.lambda_i.copy(),
                          self.lambda_r.copy(), self.shock_time.copy(), self.fire_time.copy(),
                          self.reaction_end_time.copy(), self.inflow, self.outflow)

    def cell(self, j: int) -> CellState:
        return CellState(float(self.rho[j]), float(self.lambda_i[j]), float(self.lambda_r[j]))

    def pressure(self, Q: float) -> np.ndarray:
        return pressure(self.rho, self.lambda_r, Q)

    @property
    def mass(self) -> float:
        return float(np.sum(self.rho) * self.grid.dx)


@dataclass
class RunRecord:
    """Everything a completed run produces.

    Frame arrays have shape ``(n_frames, n_cells)``; event-time arrays have
    one entry per cell.
    """

    params: SimParams
    config: SolverConfig
    grid: Grid
    frame_times: np.ndarray
    rho: np.ndarray
    lambda_i: np.ndarray
    lambda_r: np.ndarray
    shock_time: np.ndarray
    fire_time: np.ndarray
    reaction_end_time: np.ndarray
    final: FieldState
    n_steps: int = 0
    dt_min: float = float("nan")
    dt_max: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def t_end(self) -> float:
        return float(self.final.time)

    def pressure_frames(self) -> np.ndarray:
        return pressure(self.rho, self.lambda_r, self.params.Q)


def initial_state(grid: Grid) -> FieldState:
    """Quiescent unshocked medium: rho = 0, lambda_i = 1, lambda_r = 0."""
    return FieldState.uniform(grid, rho=0.0, lambda_i=1.0, lambda_r=0.0)


def hydro_flux(rho_left, rho_right, lambda_r_upwind, Q):
    """Godunov flux for p(rho; lambda_r) with lambda_r taken from the upwind cell.

    For nonnegative densities (the only case arising in the piston problem)
    this is the upwind flux p(rho_left).
    """
    rl = np.asarray(rho_left, dtype=float)
    rr = np.asarray(rho_right, dtype=float)
    shock = rl >= rr
    s = 0.5 * (rl + rr)
    from_shock = np.where(s >= 0.0, rl, rr)
    from_fan = np.where(rl >= 0.0, rl, np.where(rr <= 0.0, rr, 0.0))
    state = np.where(shock, from_shock, from_fan)
    out = pressure(state, lambda_r_upwind, Q)
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _godunov(rl, rr, lam, Q):
    if rl >= rr:
        r = rl if 0.5 * (rl + rr) >= 0.0 else rr
    elif rl >= 0.0:
        r = rl
    elif rr <= 0.0:
        r = rr
    else:
        r = 0.0
    return 0.5 * (r * r + lam * Q)


@njit(cache=True)
def _react(lam, K, nu, h):
    """Exact solution of d(lam)/dt = K (1 - lam)**nu after time h."""
    rem = 1.0 - lam
    if rem <= 0.0 or h <= 0.0:
        return lam
    if nu == 1.0:
        rem = rem * math.exp(-K * h)
    elif nu == 0.0:
        rem = rem - K * h
    else:
        u = rem ** (1.0 - nu) - (1.0 - nu) * K * h
        rem = u ** (1.0 / (1.0 - nu)) if u > 0.0 else 0.0
    if rem <= 0.0:
        return 1.0
    return 1.0 - rem


@njit(cache=True)
def _time_to_progress(lam0, lam1, K, nu):
    """Time for the reaction to take progress from lam0 to lam1 (< 1)."""
    r0 = 1.0 - lam0
    r1 = 1.0 - lam1
    if nu == 1.0:
        return math.log(r0 / r1) / K
    return (r0 ** (1.0 - nu) - r1 ** (1.0 - nu)) / ((1.0 - nu) * K)


@njit(cache=True)
def _kinetics(rho, li, lr, ts, tf, te, t0, h, eps, K, nu, lam_end, record_fire):
    t1 = t0 + h
    for j in range(rho.size):
        start = t0
        if li[j] > 0.0:
            # induction is switched on by the passage of the lead shock
            if math.isnan(ts[j]):
                continue
            if ts[j] > start:
                start = ts[j]
            dur = t1 - start
            if dur <= 0.0:
                continue
            w = math.exp((rho[j] - 1.0) / eps)
            if w * dur < li[j]:
                li[j] -= w * dur
                continue
            start += li[j] / w
            li[j] = 0.0
            if record_fire:
                tf[j] = start
        dur = t1 - start
        if dur <= 0.0 or lr[j] >= 1.0:
            continue
        new = _react(lr[j], K, nu, dur)
        if math.isnan(te[j]) and new >= lam_end:
            if lr[j] >= lam_end:
                te[j] = start
            else:
                te[j] = start + min(_time_to_progress(lr[j], lam_end, K, nu), dur)
        lr[j] = new


@njit(cache=True)
def _hydro(rho, lr, ts, Q, t0, dt, dx, threshold):
    n = rho.size
    old = rho.copy()
    c = dt / dx
    # piston ghost: rho = 1, lambda_r copied from the first cell
    fl = _godunov(1.0, old[0], lr[0], Q)
    f_in = fl
    for j in range(n):
        right = old[j + 1] if j + 1 < n else old[j]
        fr = _godunov(old[j], right, lr[j], Q)
        rho[j] = old[j] - c * (fr - fl)
        fl = fr
    for j in range(n):
        if math.isnan(ts[j]) and rho[j] >= threshold:
            if rho[j] > old[j] and old[j] < threshold:
                ts[j] = t0 + dt * (threshold - old[j]) / (rho[j] - old[j])
            else:
                ts[j] = t0
    return f_in, fl


@njit(cache=True)
def _mark_shocked(rho, ts, t0, threshold):
    for j in range(rho.size):
        if math.isnan(ts[j]) and rho[j] >= threshold:
            ts[j] = t0


# ---------------------------------------------------------------- stepping

def stable_dt(state: FieldState, config: SolverConfig) -> float:
    # the piston ghost (rho = 1) takes part in the wave-speed bound
    speed = max(float(np.max(state.rho)), 1.0, RHO_FLOOR)
    return config.cfl * state.grid.dx / speed


def _kinetic_half(state: FieldState, params: SimParams, config: SolverConfig, t0: float, h: float):
    _kinetics(state.rho, state.lambda_i, state.lambda_r, state.shock_time, state.fire_time,
              state.reaction_end_time, t0, h, params.epsilon, params.K, params.nu,
              config.reaction_end_threshold, config.fire_record)


def advance_kinetics(state: FieldState, params: SimParams, dt: float,
                     config: SolverConfig | None = None) -> FieldState:
    """Integrate only the kinetics over ``dt`` (density frozen); returns a new state."""
    config = config or SolverConfig()
    new = state.copy()
    _mark_shocked(new.rho, new.shock_time, new.time, SHOCK_THRESHOLD)
    _kinetic_half(new, params, config, new.time, dt)
    new.time = state.time + dt
    return new


def _advance(state: FieldState, params: SimParams, config: SolverConfig, dt: float) -> None:
    if not (dt > DT_UNDERFLOW and math.isfinite(dt)):
        raise TimeStepUnderflowError(f"time step underflow (dt={dt!r}) at t={state.time}")
    t0 = state.time
    _mark_shocked(state.rho, state.shock_time, t0, SHOCK_THRESHOLD)
    if config.kinetics:
        _kinetic_half(state, params, config, t0, 0.5 * dt)
    f_in, f_out = _hydro(state.rho, state.lambda_r, state.shock_time, params.Q, t0, dt,
                         state.grid.dx, SHOCK_THRESHOLD)
    if config.kinetics:
        _kinetic_half(state, params, config, t0 + 0.5 * dt, 0.5 * dt)
    state.inflow += dt * f_in
    state.outflow += dt * f_out
    state.time = t0 + dt
    if not np.isfinite(state.rho).all():
        raise SolverError(f"non-finite density at t={state.time}")
    guard = max(1, int(math.ceil(GUARD_FRACTION * state.grid.n_cells)))
    if np.any(state.rho[-guard:] > DISTURBANCE_LEVEL):
        raise DomainTooShortError(
            f"lead disturbance reached the last {GUARD_FRACTION:.0%} of the domain at "
            f"t={state.time:.6g}; increase domain_length")


def step(state: FieldState, params: SimParams, config: SolverConfig,
         dt: float | None = None) -> FieldState:
    """One Strang-split step (half kinetics, hydro, half kinetics); returns a new state."""
    new = state.copy()
    _advance(new, params, config, stable_dt(state, config) if dt is None else dt)
    return new


def run(params: SimParams, config: SolverConfig) -> RunRecord:
    """Integrate the piston problem from t = 0 to ``config.t_end``.

    Frames are stored at exact multiples of ``snapshot_interval``; the step
    size is shortened to land on them.
    """
    grid = config.grid()
    state = initial_state(grid)
    n_frames = config.n_frames
    frame_times = config.snapshot_interval * np.arange(n_frames)
    frames = {name: np.empty((n_frames, grid.n_cells)) for name in ("rho", "lambda_i", "lambda_r")}

    def store(k):
        frames["rho"][k] = state.rho
        frames["lambda_i"][k] = state.lambda_i
        frames["lambda_r"][k] = state.lambda_r

    store(0)
    k = 1
    n_steps = 0
    dt_min, dt_max = math.inf, 0.0
    while True:
        if k < n_frames:
            target = frame_times[k]
        elif config.t_end - state.time <= 1e-9 * config.t_end:
            break
        else:
            target = config.t_end
        dt = stable_dt(state, config)
        landing = target - state.time <= dt * (1.0 + 1e-12)
        if landing:
            dt = target - state.time
        _advance(state, params, config, dt)
        n_steps += 1
        dt_min, dt_max = min(dt_min, dt), max(dt_max, dt)
        if landing:
            state.time = float(target)
            if k < n_frames:
                store(k)
                k += 1

    return RunRecord(
        params=params, config=config, grid=grid, frame_times=frame_times,
        rho=frames["rho"], lambda_i=frames["lambda_i"], lambda_r=frames["lambda_r"],
        shock_time=state.shock_time.copy(), fire_time=state.fire_time.copy(),
        reaction_end_time=state.reaction_end_time.copy(), final=state,
        n_steps=n_steps, dt_min=dt_min, dt_max=dt_max,
    )


def with_resolution(config: SolverConfig, points_per_unit: int) -> SolverConfig:
    return replace(config, points_per_unit=points_per_unit)
