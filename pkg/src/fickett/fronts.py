"""Front extraction from completed runs: lead shock, fire, end of reaction, internal shocks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .solver import RunRecord

KINDS = ("shock", "fire", "reaction_end", "internal_shock", "analytic")


@dataclass(frozen=True)
class Trajectory:
    """A sampled front locus, ordered along the front.

    Fronts in this problem move forward, so ``x`` must be strictly
    increasing; monotonicity of ``t`` is a physical property checked by
    :meth:`is_monotone` rather than enforced.
    """

    x: np.ndarray
    t: np.ndarray
    kind: str

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if x.shape != t.shape or x.ndim != 1:
            raise ValueError("x and t must be 1-D arrays of equal length")
        if self.kind not in KINDS:
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if x.size > 1 and not np.all(np.diff(x) > 0.0):
            raise ValueError("trajectory x must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    def __len__(self):
        return self.x.size

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.t) > 0.0))

    def position_at(self, t) -> np.ndarray:
        """Front position x(t) by linear interpolation (clamped at the ends)."""
        return np.interp(t, self.t, self.x)

    def time_at(self, x) -> np.ndarray:
        return np.interp(x, self.x, self.t)

    def restrict(self, x_max=None, t_max=None) -> "Trajectory":
        keep = np.ones(len(self), dtype=bool)
        if x_max is not None:
            keep &= self.x <= x_max
        if t_max is not None:
            keep &= self.t < t_max
        return Trajectory(self.x[keep], self.t[keep], self.kind)


def _from_cell_times(record: RunRecord, times: np.ndarray, kind: str) -> Trajectory:
    ok = np.isfinite(times)
    return Trajectory(record.x[ok], times[ok], kind)


def shock_trajectory(record: RunRecord) -> Trajectory:
    """Lead shock t_s(x): first time each cell's density reaches 0.5.

    Crossing times are recorded inside the run with linear interpolation
    across the step, so they are not quantised to the frame cadence.
    """
    return _from_cell_times(record, record.shock_time, "shock")


def fire_trajectory(record: RunRecord) -> Trajectory:
    return _from_cell_times(record, record.fire_time, "fire")


def reaction_end_trajectory(record: RunRecord, threshold: float = 0.99) -> Trajectory:
    """First time the reaction progress exceeds ``threshold`` in each cell.

    Uses the exact in-run crossing times when ``threshold`` matches the one
    the run recorded, otherwise interpolates linearly between frames.
    """
    if np.isclose(threshold, record.config.reaction_end_threshold, rtol=0.0, atol=1e-15):
        return _from_cell_times(record, record.reaction_end_time, "reaction_end")
    lam = record.lambda_r
    above = lam >= threshold
    reached = above.any(axis=0)
    k = np.argmax(above, axis=0)
    times = np.full(record.grid.n_cells, np.nan)
    cols = np.nonzero(reached)[0]
    for j in cols:
        kj = k[j]
        if kj == 0:
            times[j] = record.frame_times[0]
            continue
        l0, l1 = lam[kj - 1, j], lam[kj, j]
        t0, t1 = record.frame_times[kj - 1], record.frame_times[kj]
        times[j] = t0 + (t1 - t0) * (threshold - l0) / (l1 - l0)
    return _from_cell_times(record, times, "reaction_end")


def front_speed(traj: Trajectory, window: int = 21) -> np.ndarray:
    """Local speed dx/dt by least squares over a sliding window of samples.

    Windows are centred where possible and shifted inward at the ends, so
    every sample gets a full-width fit.
    """
    n = len(traj)
    if window < 2:
        raise ValueError("window must be >= 2")
    if n < window + 1:
        raise ValueError(f"need at least {window + 1} samples, got {n}")
    half = window // 2
    speeds = np.empty(n)
    for i in range(n):
        lo = min(max(i - half, 0), n - window)
        t = traj.t[lo:lo + window]
        x = traj.x[lo:lo + window]
        tc = t - t.mean()
        speeds[i] = np.dot(tc, x - x.mean()) / np.dot(tc, tc)
    return speeds


def mean_speed(traj: Trajectory) -> float:
    """Least-squares slope dx/dt over the whole trajectory."""
    if len(traj) < 2:
        raise ValueError("need at least 2 samples")
    tc = traj.t - traj.t.mean()
    return float(np.dot(tc, traj.x - traj.x.mean()) / np.dot(tc, tc))


@dataclass(frozen=True)
class InternalShock:
    """Internal-shock detection result.

    ``trajectory`` is parameterised by frame time; ``merge`` is the first
    frame at which the shock is no longer distinguishable from the lead
    shock, located at the lead-shock position of that frame.
    """

    formation: tuple | None
    trajectory: Trajectory | None
    merge: tuple | None
    lead_position: np.ndarray
    frame_times: np.ndarray
    jump: np.ndarray          # largest interior relative jump per frame
    upstream_rho: float | None = None

    @property
    def found(self) -> bool:
        return self.formation is not None


def lead_shock_index(rho: np.ndarray, threshold: float = 0.5) -> int:
    """Index of the foremost cell at or above ``threshold`` (-1 if none)."""
    hits = np.nonzero(rho >= threshold)[0]
    return int(hits[-1]) if hits.size else -1


def internal_shock_events(record: RunRecord, theta: float = 0.03, band: int = 6,
                          merge_gap: int = 32) -> InternalShock:
    """Detect shocks strictly between the piston and the lead shock.

    A frame contains an internal shock when some adjacent-cell jump
    ``|rho[j+1] - rho[j]|`` exceeds ``theta * max(rho)``, searching cells
    from ``band`` to ``lead - band`` so neither the piston face nor the
    smeared lead shock triggers it.  Once an internal shock has been seen,
    the first frame without one is a merge if the last detected position was
    within ``merge_gap`` cells of the lead shock.
    """
    n_frames = record.frame_times.size
    lead = np.full(n_frames, -1)
    jump = np.zeros(n_frames)
    pos = np.full(n_frames, np.nan)
    upstream = np.full(n_frames, np.nan)
    for k in range(n_frames):
        rho = record.rho[k]
        lead[k] = lead_shock_index(rho)
        hi = lead[k] - band
        if hi - band < 2:
            continue
        d = np.abs(np.diff(rho[band:hi]))
        j = int(np.argmax(d))
        peak = float(rho.max())
        jump[k] = d[j] / peak
        if d[j] > theta * peak:
            pos[k] = record.x[band + j] + 0.5 * record.dx
            upstream[k] = rho[band + j + 1]
    lead_x = np.where(lead >= 0, record.x[np.maximum(lead, 0)], 0.0)

    seen = np.nonzero(np.isfinite(pos))[0]
    if seen.size == 0:
        return InternalShock(None, None, None, lead_x, record.frame_times, jump)
    k0 = int(seen[0])
    # follow the first contiguous run of detections
    k1 = k0
    while k1 + 1 < n_frames and np.isfinite(pos[k1 + 1]):
        k1 += 1
    ts, xs = [], []
    for k in range(k0, k1 + 1):
        if not xs or pos[k] > xs[-1]:
            ts.append(record.frame_times[k])
            xs.append(pos[k])
    traj = Trajectory(np.array(xs), np.array(ts), "internal_shock")
    merge = None
    if k1 + 1 < n_frames:
        gap = lead[k1] - (pos[k1] - 0.5 * record.dx) / record.dx
        if gap <= merge_gap:
            merge = (float(lead_x[k1 + 1]), float(record.frame_times[k1 + 1]))
    return InternalShock(
        formation=(float(pos[k0]), float(record.frame_times[k0])),
        trajectory=traj, merge=merge, lead_position=lead_x,
        frame_times=record.frame_times, jump=jump, upstream_rho=float(upstream[k1]),
    )


def merge_speed(events: InternalShock, fraction: float = 0.1, min_points: int = 5) -> float:
    """Internal-shock speed over the final ``fraction`` of its trajectory."""
    traj = events.trajectory
    if traj is None or len(traj) < 2:
        raise ValueError("no internal-shock trajectory to measure")
    n = len(traj)
    m = min(n, max(min_points, int(round(fraction * n))))
    tail = Trajectory(traj.x[-m:], traj.t[-m:], traj.kind)
    return mean_speed(tail)
