"""Ignition-regime classification, parameter sweeps and chi-invariance checks."""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import closed_form_fire
from .fronts import Trajectory, fire_trajectory, front_speed, internal_shock_events, merge_speed
from .model import SimParams, cj_speed
from .solver import RunRecord, SolverConfig, SolverError, run

SMOOTH = "smooth_acceleration"
SUB_CJ = "internal_shock_subCJ"
SUPER_CJ = "internal_shock_superCJ"

CHI_NOTE = ("chi is always K/epsilon of the run; the K=5, epsilon=0.2 case is chi=25 "
            "(a quoted value of 50 does not match K/epsilon)")


class AsymptoticsWindowError(ValueError):
    """Too few fire samples ahead of the internal shock to fit the origin law."""


@dataclass(frozen=True)
class RegimeReport:
    params: SimParams
    chi: float
    regime: str
    internal_shock_formation: tuple | None = None
    merge_event: tuple | None = None           # (x, t, speed)
    speed_ratio_to_cj: float | None = None
    internal_speed: float | None = None        # tail speed, also without a merge
    supersonic: bool | None = None
    speed_variance: float | None = None
    fire_origin_acceleration_fit: float | None = None
    note: str = CHI_NOTE

    def __post_init__(self):
        if (self.regime == SMOOTH) != (self.internal_shock_formation is None):
            raise ValueError("regime must be smooth exactly when no internal shock formed")
        if (self.merge_event is None) != (self.speed_ratio_to_cj is None):
            raise ValueError("speed ratio is reported exactly when a merge event exists")


def fit_origin_acceleration(traj: Trajectory, fraction: float = 0.1, min_points: int = 20) -> float:
    """Second derivative of x*(t) at the start of a fire trajectory.

    Least squares on the first ``fraction`` of the samples with
    x - x0 = c1 tau + c2 tau^2 + c3 tau^3, tau = t - t0, anchored at the
    first sample; returns 2 c2.  The cubic term absorbs the curvature drift
    over the window, which a pure quadratic would fold into c2.
    """
    n = int(len(traj) * fraction)
    if n < min_points:
        raise AsymptoticsWindowError(
            f"asymptotics window too small: {n} fire samples in the fit window, need {min_points}")
    tau = traj.t[:n] - traj.t[0]
    y = traj.x[:n] - traj.x[0]
    A = np.vstack([tau, tau**2, tau**3]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(2.0 * coef[1])


def pre_shock_fire(record: RunRecord, events=None) -> Trajectory:
    """Fire trajectory up to the internal-shock formation time, if any."""
    events = internal_shock_events(record) if events is None else events
    fire = fire_trajectory(record)
    if events.found:
        fire = fire.restrict(t_max=events.formation[1])
    return fire


def acceleration_fit(record: RunRecord, events=None) -> float:
    return fit_origin_acceleration(pre_shock_fire(record, events))


def classify(record: RunRecord) -> RegimeReport:
    """Regime of a completed run from its front-tracker outputs.

    The internal-wave speed is measured over the last 10% of its trajectory
    and compared with the CJ speed into the shocked, unreacted medium (rho=1).
    """
    params = record.params
    events = internal_shock_events(record)
    try:
        accel = acceleration_fit(record, events)
    except AsymptoticsWindowError:
        accel = None
    if not events.found:
        return RegimeReport(params, params.chi, SMOOTH, fire_origin_acceleration_fit=accel)

    cj = cj_speed(1.0, params.Q)
    speed = variance = None
    if len(events.trajectory) >= 2:
        speed = merge_speed(events)
        local = _local_speeds(events.trajectory)
        if local is not None:
            variance = float(np.var(local[local.size // 2:]))
    regime = SUB_CJ if speed is None or speed < cj else SUPER_CJ
    merge = ratio = None
    if events.merge is not None and speed is not None:
        merge = (events.merge[0], events.merge[1], speed)
        ratio = speed / cj
    supersonic = None if speed is None else bool(speed > events.upstream_rho)
    return RegimeReport(
        params, params.chi, regime,
        internal_shock_formation=events.formation, merge_event=merge,
        speed_ratio_to_cj=ratio, internal_speed=speed, supersonic=supersonic,
        speed_variance=variance, fire_origin_acceleration_fit=accel,
    )


def _local_speeds(traj: Trajectory, window: int = 11):
    if len(traj) < window + 1:
        return None
    return front_speed(traj, window)


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepResult:
    reports: list                       # RegimeReport or None, in grid order
    failures: list = field(default_factory=list)    # (params, message)

    def regime_map(self) -> dict:
        return {(r.params.K, r.params.epsilon, r.chi): r.regime for r in self.reports if r is not None}


def _run_and_classify(params: SimParams, config: SolverConfig):
    try:
        return classify(run(params, config)), None
    except (SolverError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def sweep(grid, config: SolverConfig, workers: int = 1) -> SweepResult:
    """Run and classify every parameter set; failures are recorded, not raised."""
    grid = list(grid)
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_and_classify, grid, itertools.repeat(config)))
    else:
        outcomes = [_run_and_classify(p, config) for p in grid]
    result = SweepResult([])
    for params, (report, err) in zip(grid, outcomes):
        result.reports.append(report)
        if err is not None:
            result.failures.append((params, err))
    return result


# ---------------------------------------------------------------- chi invariance

@dataclass(frozen=True)
class InvarianceReport:
    chi: float
    pairs: list
    reports: list
    formations: list                    # (x, t) or None per pair
    deviations: dict                    # (i, j) -> (rel dx, rel dt)
    mode: str                           # "internal_shock" or "fire_locus"
    fire_deviation: list | None = None  # per pair, max rel deviation from the closed form

    @property
    def max_deviation(self) -> float:
        if not self.deviations:
            return 0.0
        return float(max(max(v) for v in self.deviations.values()))

    def within(self, tol: float) -> bool:
        return self.max_deviation <= tol


def relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def chi_invariance_suite(chi: float, pairs, Q: float = 1.0, config: SolverConfig | None = None,
                         nu: float = 1.0, records=None, fire_x_max: float = 0.5) -> InvarianceReport:
    """Compare runs sharing chi = K/epsilon.

    With internal shocks in every run, formation points are compared pairwise
    (relative gap in x and in t).  When all runs are smooth the fire loci are
    compared with the closed-form trajectory instead, which depends on chi
    only through Q zeta.  ``records`` skips the runs.
    """
    pairs = [tuple(map(float, p)) for p in pairs]
    for K, eps in pairs:
        if not np.isclose(K / eps, chi, rtol=1e-12, atol=0.0):
            raise ValueError(f"pair (K={K}, epsilon={eps}) has K/epsilon={K / eps}, not chi={chi}")
    if records is None:
        config = config or SolverConfig()
        records = [run(SimParams(K, eps, Q, nu), config) for K, eps in pairs]
    reports = [classify(r) for r in records]
    formations = [r.internal_shock_formation for r in reports]
    deviations = {}
    if all(f is not None for f in formations):
        for i, j in itertools.combinations(range(len(pairs)), 2):
            (xi, ti), (xj, tj) = formations[i], formations[j]
            deviations[(i, j)] = (relative_gap(xi, xj), relative_gap(ti, tj))
        return InvarianceReport(chi, pairs, reports, formations, deviations, "internal_shock")

    fires = [pre_shock_fire(rec).restrict(x_max=fire_x_max) for rec in records]
    fire_dev = []
    for fire in fires:
        t_cf = closed_form_fire(fire.x, Q, chi)
        fire_dev.append(float(np.max(np.abs(fire.t - t_cf) / t_cf)) if len(fire) else float("nan"))
    for i, j in itertools.combinations(range(len(pairs)), 2):
        a, b = fires[i], fires[j]
        lo, hi = max(a.x[0], b.x[0]), min(a.x[-1], b.x[-1])
        x = np.linspace(lo, hi, 256)
        ta, tb = a.time_at(x), b.time_at(x)
        deviations[(i, j)] = (float(np.max(np.abs(ta - tb) / np.maximum(ta, tb))),)
    return InvarianceReport(chi, pairs, reports, formations, deviations, "fire_locus", fire_dev)
