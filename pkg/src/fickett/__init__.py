"""Piston-driven reactive Burgers model with two-step kinetics."""
from .model import SimParams, CellState, pressure, induction_rate, reaction_rate, cj_speed
from .solver import SolverConfig, Grid, FieldState, RunRecord, run, step
from .fronts import (Trajectory, shock_trajectory, fire_trajectory, reaction_end_trajectory,
                     internal_shock_events, front_speed, merge_speed)
from .characteristics import trace_cplus, trace_czero, cplus_fan, characteristic_residual
from .asymptotics import (closed_form_fire, origin_acceleration, rho2_field, solve_xref,
                          iterate_fire, compare_to_numerics, FireMap, AsymptoticFire)
from .regimes import RegimeReport, classify, acceleration_fit, chi_invariance_suite, sweep

__version__ = "0.1.0"
