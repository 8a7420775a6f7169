"""Model algebra: equation of state, two-step kinetics and parameter bookkeeping.

Everything here is a pure function of its arguments and accepts scalars or
numpy arrays.  All quantities are nondimensionalised by the post-shock state
of the inert piston problem (density 1, induction delay 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class SimParams:
    """Nondimensional model constants.

    ``chi`` (and its alias ``zeta``) is derived from ``K / epsilon`` and is
    never stored separately.
    """

    K: float
    epsilon: float
    Q: float = 1.0
    nu: float = 1.0

    def __post_init__(self):
        for name in ("K", "epsilon", "Q", "nu"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.K <= 0.0:
            raise ValueError(f"K must be > 0, got {self.K}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.Q < 0.0:
            raise ValueError(f"Q must be >= 0, got {self.Q}")
        if self.nu < 0.0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")

    @property
    def chi(self) -> float:
        return self.K / self.epsilon

    @property
    def zeta(self) -> float:
        return self.chi


@dataclass(frozen=True)
class CellState:
    rho: float
    lambda_i: float = 1.0
    lambda_r: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.lambda_r <= 1.0:
            raise ValueError(f"lambda_r must lie in [0, 1], got {self.lambda_r}")
        if not 0.0 <= self.lambda_i <= 1.0:
            raise ValueError(f"lambda_i must lie in [0, 1], got {self.lambda_i}")
        if self.lambda_r > 0.0 and self.lambda_i > 0.0:
            raise ValueError("reaction progress requires an expired induction (lambda_i == 0)")

    def pressure(self, Q: float) -> float:
        return float(pressure(self.rho, self.lambda_r, Q))


def pressure(rho, lambda_r, Q):
    """p = (rho**2 + lambda_r * Q) / 2."""
    return 0.5 * (np.multiply(rho, rho) + np.multiply(lambda_r, Q))


def induction_rate(rho, lambda_i, epsilon):
    """Rate of change of the induction variable.

    H(0) = 0: once ``lambda_i`` reaches zero the induction stage is over.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be > 0")
    rate = -np.exp((np.asarray(rho, dtype=float) - 1.0) / epsilon)
    out = np.where(np.asarray(lambda_i) > 0.0, rate, 0.0)
    return out[()] if out.ndim == 0 else out


def reaction_rate(lambda_i, lambda_r, K, nu):
    """Exothermic rate ``K (1 - H(lambda_i)) (1 - lambda_r)**nu``."""
    lambda_r = np.asarray(lambda_r, dtype=float)
    remaining = np.clip(1.0 - lambda_r, 0.0, 1.0)
    rate = np.where(remaining > 0.0, K * remaining**nu, 0.0)
    out = np.where(np.asarray(lambda_i) > 0.0, 0.0, rate)
    return out[()] if out.ndim == 0 else out


def _jump_speed(rho0, rho1, Q):
    """Shock speed [p]/[rho] from (rho0, lambda_r=0) to (rho1, lambda_r=1)."""
    return (rho1 * rho1 + Q - rho0 * rho0) / (2.0 * (rho1 - rho0))


def cj_speed(rho0: float, Q: float) -> float:
    """Chapman-Jouguet speed of a fully reacting wave into (rho0, lambda_r=0).

    Found by root-finding the sonic condition ``s(rho1) == rho1`` on the
    Rankine-Hugoniot speed ``s = [p]/[rho]``.  Compare with
    :func:`cj_speed_closed_form`.
    """
    if rho0 < 0.0:
        raise ValueError(f"upstream density must be >= 0, got {rho0}")
    if Q < 0.0:
        raise ValueError(f"Q must be >= 0, got {Q}")
    if Q == 0.0:
        # sonic limit of a vanishing-strength wave
        return float(rho0)

    def sonic_mismatch(rho1):
        return _jump_speed(rho0, rho1, Q) - rho1

    # mismatch > 0 for overdriven-side weak jumps, < 0 for strong ones
    lo = rho0 + 0.5 * min(Q, np.sqrt(Q))
    hi = rho0 + 1.0 + Q
    rho_cj = brentq(sonic_mismatch, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(_jump_speed(rho0, rho_cj, Q))


def cj_speed_closed_form(rho0: float, Q: float) -> float:
    return float(rho0 + np.sqrt(Q))
