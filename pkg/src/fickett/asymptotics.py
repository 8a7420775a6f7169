"""High-activation-energy solution for the early fire trajectory.

To leading order the fire follows the inert delay t = 1 + 2x.  The O(eps)
density perturbation is built region by region:

* S, between the shock t = 2x and the first disturbance t = 1 + x: zero;
* R, behind the fire: (zeta Q / 2)(t*(x) - 1);
* D, between the first disturbance and the fire: the value carried from the
  fire along the unit-speed forward characteristic through (x, t), i.e.
  (zeta Q / 2)(t*(x_ref) - 1), where x - x_ref = t - t*(x_ref).

The fire is then fixed by requiring the perturbed induction integral from
1 + x to t*(x) to equal x.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .model import SimParams

X_MAX_LIMIT = 0.95
SERIES_SWITCH = 1e-8


class AsymptoticsError(RuntimeError):
    pass


class RegionError(ValueError):
    """(x, t) is not in the region an evaluator was asked to handle."""


def closed_form_fire(x, Q: float, zeta: float):
    """One-iteration fire trajectory: 1 + x + log(1 + Q zeta x) / (Q zeta).

    Valid for 0 <= x < 1.  Small ``Q zeta x`` uses the series of the log term
    so the inert limit 1 + 2x is recovered without dividing by zero.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("closed_form_fire needs x >= 0")
    c = Q * zeta
    cx = c * x
    small = np.abs(cx) < SERIES_SWITCH
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(small, x * (1.0 - 0.5 * cx + cx * cx / 3.0), np.log1p(cx) / np.where(c == 0.0, 1.0, c))
    out = 1.0 + x + log_term
    return out[()] if out.ndim == 0 else out


def inert_fire(x):
    x = np.asarray(x, dtype=float)
    return 1.0 + 2.0 * x


def origin_acceleration(params: SimParams) -> float:
    """Acceleration of the fire at the piston: Q zeta / 8 = chi Q / 8."""
    return params.Q * params.zeta / 8.0


@dataclass(frozen=True)
class FireMap:
    """Monotone piecewise-linear fire trajectory t*(x) on sampled nodes."""

    x: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if x.ndim != 1 or x.shape != t.shape or x.size < 2:
            raise ValueError("FireMap needs matching 1-D node arrays with >= 2 nodes")
        if not np.all(np.diff(x) > 0.0):
            raise ValueError("FireMap nodes must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)

    @classmethod
    def sample(cls, func, x_max: float, n_nodes: int = 1024) -> "FireMap":
        x = np.linspace(0.0, x_max, n_nodes)
        return cls(x, np.asarray(func(x), dtype=float))

    def __call__(self, s):
        return np.interp(s, self.x, self.t)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.t) / np.diff(self.x)

    @property
    def x_max(self) -> float:
        return float(self.x[-1])


def _bisect(func, lo, hi, tol, max_iter=200):
    f_lo = func(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if abs(f_mid) < tol or hi - lo < 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_xref(x: float, t: float, fire_map, tol: float = 1e-12) -> float:
    """Fire position whose forward characteristic passes through (x, t).

    Root of g(s) = x - s - t + t*(s) on [0, x]; g is increasing when the fire
    map has slope > 1, so the root is unique.  Sampled :class:`FireMap`
    instances are solved exactly on the bracketing linear segment; any other
    callable is bisected.
    """
    def g(s):
        return x - s - t + float(fire_map(s))

    g_lo, g_hi = g(0.0), g(x)
    if g_lo > tol or g_hi < -tol:
        raise RegionError(f"({x}, {t}) is not in the disturbed induction region")
    if abs(g_lo) <= tol:
        return 0.0
    if abs(g_hi) <= tol:
        return float(x)
    if isinstance(fire_map, FireMap):
        # h(s) = t*(s) - s is piecewise linear and increasing
        nodes = fire_map.x
        h = fire_map.t - nodes
        target = t - x
        k = int(np.clip(np.searchsorted(h, target, side="right") - 1, 0, nodes.size - 2))
        dh = h[k + 1] - h[k]
        s = nodes[k] + (target - h[k]) * (nodes[k + 1] - nodes[k]) / dh
        return float(min(max(s, 0.0), x))
    return _bisect(g, 0.0, x, tol)


def classify_region(x: float, t: float, fire_map) -> str:
    if t < 2.0 * x:
        raise RegionError(f"({x}, {t}) lies ahead of the lead shock t = 2x")
    if t < 1.0 + x:
        return "S"
    if t <= float(fire_map(x)):
        return "D"
    return "R"


def rho2_field(x: float, t: float, fire_map, params: SimParams) -> float:
    """O(eps) density perturbation at (x, t) for a given fire trajectory."""
    half = 0.5 * params.zeta * params.Q
    region = classify_region(x, t, fire_map)
    if region == "S":
        return 0.0
    if region == "R":
        return half * (float(fire_map(x)) - 1.0)
    return half * (float(fire_map(solve_xref(x, t, fire_map))) - 1.0)


def lambda_r2_field(x: float, t: float, fire_map, params: SimParams) -> float:
    """O(eps) reaction progress: zeta (t - t*(x)) behind the fire, zero elsewhere."""
    if classify_region(x, t, fire_map) != "R":
        return 0.0
    return params.zeta * (t - float(fire_map(x)))


def _cumulative_exposure(fire_map: FireMap, c: float) -> np.ndarray:
    """G(s) = integral_0^s exp(c (t*(u) - 1) / 2) (t*'(u) - 1) du at the nodes.

    Along the characteristic launched from the fire at u, the induction
    integrand is the constant exp(c (t*(u) - 1) / 2), and a point x sees
    launch points u in [0, x_ref]; substituting t = t*(u) + x - u turns the
    induction integral into G(x_ref), independent of x.  Exact per segment.
    """
    dx = np.diff(fire_map.x)
    b = fire_map.slopes
    base = np.exp(0.5 * c * (fire_map.t[:-1] - 1.0))
    z = 0.5 * c * b * dx
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = np.where(np.abs(z) < 1e-12, 1.0 + 0.5 * z, np.expm1(z) / np.where(z == 0.0, 1.0, z))
    pieces = (b - 1.0) * base * dx * growth
    return np.concatenate(([0.0], np.cumsum(pieces)))


def _iterate_segments(prev: FireMap, c: float) -> np.ndarray:
    x = prev.x
    if np.any(prev.slopes <= 1.0):
        raise AsymptoticsError("fire map slope must exceed 1 for the characteristic construction")
    G = _cumulative_exposure(prev, c)
    k = np.clip(np.searchsorted(G, x, side="right") - 1, 0, x.size - 2)
    remaining = x - G[k]
    b = prev.slopes[k]
    base = np.exp(0.5 * c * (prev.t[k] - 1.0))
    scaled = remaining / ((b - 1.0) * base)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = 0.5 * c * b
        ds = np.where(np.abs(rate * scaled) < 1e-12, scaled * (1.0 - 0.5 * rate * scaled),
                      np.log1p(rate * scaled) / np.where(rate == 0.0, 1.0, rate))
    s_up = x[k] + ds
    bad = s_up > x + 1e-12
    if np.any(bad):
        where = float(x[np.argmax(bad)])
        raise AsymptoticsError(f"induction does not expire inside the disturbed region at x={where}")
    s_up = np.minimum(s_up, x)
    return prev(s_up) + x - s_up


def induction_integral(x: float, upper: float, fire_map, params: SimParams,
                       tol: float = 1e-10) -> float:
    """Perturbed induction integral from the first disturbance 1 + x to ``upper``.

    Adaptive Gauss-Kronrod quadrature, integrand exp(rho2) with rho2 from
    the previous fire map through :func:`solve_xref`.
    """
    half = 0.5 * params.zeta * params.Q
    lo = 1.0 + x
    if upper <= lo:
        return 0.0

    def integrand(t):
        return np.exp(half * (float(fire_map(solve_xref(x, t, fire_map))) - 1.0))

    points = None
    if isinstance(fire_map, FireMap):
        # kinks where the launch point crosses a node of the fire map
        s = fire_map.x[(fire_map.x > 0.0) & (fire_map.x < x)]
        kinks = fire_map.t[1:1 + s.size] + x - s
        kinks = kinks[(kinks > lo) & (kinks < upper)]
        points = kinks if kinks.size else None
    limit = 500 if points is None else 50 * (points.size + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, _ = quad(integrand, lo, upper, epsabs=tol, epsrel=tol, limit=limit, points=points)
    return value


def _iterate_quadrature(prev: FireMap, params: SimParams, tol: float) -> np.ndarray:
    out = np.empty_like(prev.x)
    for i, x in enumerate(prev.x):
        if x == 0.0:
            out[i] = 1.0
            continue
        hi = float(prev(x))

        def residual(upper):
            return induction_integral(x, upper, prev, params, tol) - x

        if residual(hi) < -tol:
            raise AsymptoticsError(f"induction does not expire inside the disturbed region at x={x}")
        out[i] = hi if abs(residual(hi)) < tol else brentq(residual, 1.0 + x, hi, xtol=tol, rtol=1e-14)
    return out


@dataclass
class AsymptoticFire:
    """Successive fire-trajectory iterates, starting from the inert delay."""

    params: SimParams
    iterates: list
    method: str = "segments"
    a0: float = field(init=False)

    def __post_init__(self):
        self.a0 = origin_acceleration(self.params)

    @property
    def x(self) -> np.ndarray:
        return self.iterates[0].x

    @property
    def t1_star(self) -> FireMap:
        return self.iterates[0]

    @property
    def last(self) -> FireMap:
        return self.iterates[-1]

    def cauchy_gaps(self) -> list:
        """max |t_k - t_{k-1}| over the nodes for k = 1, 2, ..."""
        return [float(np.max(np.abs(b.t - a.t))) for a, b in zip(self.iterates, self.iterates[1:])]


def iterate_fire(params: SimParams, x_max: float = 0.9, n_iter: int = 4, n_nodes: int = 1024,
                 method: str = "segments", tol: float = 1e-10) -> AsymptoticFire:
    """Refine the fire trajectory by repeated substitution.

    Iterate 0 is 1 + 2x.  Iterate k evaluates the perturbed density from
    iterate k-1 and solves the induction condition for the new fire time at
    every node.  ``method="segments"`` integrates exactly over the linear
    pieces of the previous map; ``method="quadrature"`` uses adaptive
    quadrature and bisection (slow, kept as an independent route).
    """
    if not 0.0 < x_max <= X_MAX_LIMIT:
        raise ValueError(f"x_max must lie in (0, {X_MAX_LIMIT}], got {x_max}")
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if method not in ("segments", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    c = params.Q * params.zeta
    maps = [FireMap.sample(inert_fire, x_max, n_nodes)]
    for _ in range(n_iter):
        prev = maps[-1]
        if method == "segments":
            t_new = _iterate_segments(prev, c)
        else:
            t_new = _iterate_quadrature(prev, params, tol)
        t_new[0] = 1.0
        maps.append(FireMap(prev.x, t_new))
    return AsymptoticFire(params, maps, method)


@dataclass(frozen=True)
class DeviationReport:
    x: np.ndarray
    t_numeric: np.ndarray
    t_closed_form: np.ndarray
    rel_closed_form: np.ndarray
    t_iterate: np.ndarray | None
    rel_iterate: np.ndarray | None

    @property
    def max_rel_closed_form(self) -> float:
        return float(np.max(self.rel_closed_form))

    @property
    def max_rel_iterate(self) -> float | None:
        return None if self.rel_iterate is None else float(np.max(self.rel_iterate))

    @property
    def max_abs_closed_form(self) -> float:
        return float(np.max(np.abs(self.t_numeric - self.t_closed_form)))


def compare_to_numerics(fire_numeric, params: SimParams, x_range=(0.0, 0.5),
                        asymptotic: AsymptoticFire | None = None,
                        x_limit: float | None = None) -> DeviationReport:
    """Pointwise deviation of a measured fire trajectory from the asymptotic ones.

    ``x_limit`` cuts the comparison at e.g. the internal-shock formation
    point, beyond which the asymptotic solution does not apply.
    """
    lo, hi = x_range
    if x_limit is not None:
        hi = min(hi, x_limit)
    x = np.asarray(fire_numeric.x)
    keep = (x >= lo) & (x <= hi)
    if asymptotic is not None:
        keep &= x <= asymptotic.last.x_max
    if not np.any(keep):
        raise ValueError("numeric and asymptotic fire trajectories do not overlap")
    x = x[keep]
    tn = np.asarray(fire_numeric.t)[keep]
    tc = closed_form_fire(x, params.Q, params.zeta)
    ti = ri = None
    if asymptotic is not None:
        ti = asymptotic.last(x)
        ri = np.abs(tn - ti) / ti
    return DeviationReport(x, tn, tc, np.abs(tn - tc) / tc, ti, ri)
