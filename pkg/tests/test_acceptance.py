"""End-to-end acceptance criteria.

Each test prints one PASS/FAIL line and records it for the terminal summary.
Tolerances are fixed here and are not tuned to make a run pass.
"""
import numpy as np
import pytest

from conftest import CHI20_CFG, SLOW, record_criterion
from fickett.asymptotics import closed_form_fire, compare_to_numerics, iterate_fire
from fickett.characteristics import (characteristic_residual, cplus_fan, induction_zone_mask,
                                     reaction_zone_mask)
from fickett.fronts import (fire_trajectory, internal_shock_events, mean_speed, merge_speed,
                            reaction_end_trajectory, shock_trajectory, Trajectory)
from fickett.model import SimParams, cj_speed
from fickett.regimes import chi_invariance_suite, fit_origin_acceleration, acceleration_fit
from fickett.solver import run, with_resolution

pytestmark = pytest.mark.acceptance

SHOCK_SPEED_TOL = 1e-3
POST_SHOCK_TOL = 1e-3
FIRE_LAG_STEPS = 2.0
ASYMPTOTIC_REL_TOL = 0.05
ACCEL_REL_TOL = 0.20
ACCEL_SYNTH_REL_TOL = 0.01
ITERATE_MATCH_TOL = 1e-8
CAUCHY_TOL = 1e-4
MERGE_SPEED_TARGET, MERGE_SPEED_TOL = 1.5, 0.1
CHI_FORMATION_TOL = 0.15
MASS_REL_TOL = 1e-10
REACTION_RESIDUAL_FRACTION = 0.10      # of K Q / 2
INDUCTION_RESIDUAL_TOL = 2e-3
RESIDUAL_SEEDS = [(0.0, t) for t in (1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0, 3.5)]


def verdict(number, checks, detail):
    ok = all(checks)
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    record_criterion(number, ok, detail)
    assert ok, line


def test_criterion_1_inert_shock(inert_record):
    shock = shock_trajectory(inert_record)
    window = shock.restrict(t_max=5.0)
    window = Trajectory(window.x[window.t >= 1.0], window.t[window.t >= 1.0], "shock")
    speed = mean_speed(window)
    k = int(np.argmin(np.abs(inert_record.frame_times - 5.0)))
    behind = inert_record.x < shock.position_at(5.0) - 0.05
    post = inert_record.rho[k, behind]
    err = float(np.max(np.abs(post - 1.0)))
    verdict(1, [abs(speed - 0.5) <= SHOCK_SPEED_TOL, err <= POST_SHOCK_TOL],
            f"shock speed {speed:.6f} (0.5 +/- {SHOCK_SPEED_TOL}), post-shock |rho-1| max {err:.2e}")


def test_criterion_2_inert_fire(inert_record):
    fire = fire_trajectory(inert_record)
    dt = inert_record.config.cfl * inert_record.dx       # steady step: max rho = 1
    lag = np.abs(fire.t - (1.0 + 2.0 * fire.x)) / dt
    verdict(2, [len(fire) > 100, float(lag.max()) <= FIRE_LAG_STEPS],
            f"max |t* - (1+2x)| = {lag.max():.3f} steps over {len(fire)} cells (<= {FIRE_LAG_STEPS})")


def _deviation(record):
    rep = compare_to_numerics(fire_trajectory(record), record.params, (0.0, 0.5))
    return rep.max_rel_closed_form


def test_criterion_3_asymptotics_vs_numerics(slow_record):
    dev = _deviation(slow_record)
    verdict(3, [dev < ASYMPTOTIC_REL_TOL],
            f"max relative deviation from closed form on [0, 0.5]: {dev:.4%} (< {ASYMPTOTIC_REL_TOL:.0%})")


def test_criterion_4_acceleration_law(slow_record):
    params = slow_record.params
    target = params.Q * params.zeta / 8.0
    fit = acceleration_fit(slow_record)
    x = np.linspace(0.0, 0.95, 1024)
    synth = Trajectory(x, closed_form_fire(x, 1.0, 1.0), "analytic")
    fit_synth = fit_origin_acceleration(synth)
    rel = abs(fit - target) / target
    rel_synth = abs(fit_synth - 0.125) / 0.125
    verdict(4, [rel <= ACCEL_REL_TOL, rel_synth <= ACCEL_SYNTH_REL_TOL],
            f"numeric fit {fit:.5f} ({rel:.2%} off {target}), synthetic fit {fit_synth:.6f} ({rel_synth:.3%} off)")


def test_criterion_5_iteration_consistency():
    params = SimParams(K=0.2, epsilon=0.2)     # Q = 1, zeta = 1
    fire = iterate_fire(params, x_max=0.9, n_iter=4)
    first = float(np.max(np.abs(fire.iterates[1].t - closed_form_fire(fire.x, 1.0, 1.0))))
    stack = np.array([m.t for m in fire.iterates])
    nonincreasing = bool(np.all(np.diff(stack, axis=0) <= 0.0))
    gap = fire.cauchy_gaps()[3]
    verdict(5, [first < ITERATE_MATCH_TOL, nonincreasing, gap < CAUCHY_TOL],
            f"iterate 1 vs closed form {first:.2e} (< {ITERATE_MATCH_TOL}), nonincreasing={nonincreasing}, "
            f"gap(3,4) {gap:.3e} (< {CAUCHY_TOL})")


def test_criterion_6_regimes(k2_record, k5_record):
    ev2 = internal_shock_events(k2_record)
    ev5 = internal_shock_events(k5_record)
    speed = merge_speed(ev5) if ev5.found else float("nan")
    cj = cj_speed(1.0, 1.0)
    verdict(6, [ev2.found, ev2.merge is not None, ev5.merge is not None,
                abs(speed - MERGE_SPEED_TARGET) <= MERGE_SPEED_TOL, speed < cj],
            f"K=2 formation {ev2.formation} merge {ev2.merge}; K=5 merge speed {speed:.4f} "
            f"({MERGE_SPEED_TARGET} +/- {MERGE_SPEED_TOL}), CJ {cj:.6f}")


def test_criterion_7_chi_invariance():
    pairs = [(2.0, 0.1), (4.0, 0.2), (8.0, 0.4)]
    rep = chi_invariance_suite(20.0, pairs, config=CHI20_CFG)
    forms = ", ".join(f"K={K:g}: ({f[0]:.3f}, {f[1]:.3f})" if f else f"K={K:g}: none"
                      for (K, _), f in zip(pairs, rep.formations))
    verdict(7, [rep.mode == "internal_shock", rep.within(CHI_FORMATION_TOL)],
            f"formations {forms}; max pairwise relative gap {rep.max_deviation:.3f} (<= {CHI_FORMATION_TOL})")


def _lambda_ok(record):
    li, lr = record.lambda_i, record.lambda_r
    bounds = li.min() >= 0.0 and li.max() <= 1.0 and lr.min() >= 0.0 and lr.max() <= 1.0
    mono = np.all(np.diff(li, axis=0) <= 0.0) and np.all(np.diff(lr, axis=0) >= 0.0)
    return bool(bounds and mono)


def _ordering_ok(record):
    ts, tf = record.shock_time, record.fire_time
    te = reaction_end_trajectory(record).t
    has_end = np.isfinite(record.reaction_end_time)
    fired = np.isfinite(tf)
    return bool(np.all(ts[fired] < tf[fired]) and np.all(tf[has_end] < record.reaction_end_time[has_end])
                and te.size == has_end.sum())


def test_criterion_8_properties(inert_record, slow_record, k2_record, k5_record):
    records = [inert_record, slow_record, k2_record, k5_record]
    mass_err = max(abs(r.final.mass - (r.final.inflow - r.final.outflow)) / r.final.mass for r in records)
    lam_ok = all(_lambda_ok(r) for r in records)
    order_ok = all(_ordering_ok(r) for r in records)

    params = slow_record.params
    fan = cplus_fan(slow_record, seeds=RESIDUAL_SEEDS)
    reaction_rms = max(characteristic_residual(p, params, reaction_zone_mask(p)).rms for p in fan.paths)
    induction_rms = max(characteristic_residual(p, params, induction_zone_mask(p)).rms for p in fan.paths)
    reaction_tol = REACTION_RESIDUAL_FRACTION * 0.5 * params.K * params.Q
    ahead = cplus_fan(slow_record, seeds=[(2.3, 0.5), (2.2, 1.0)])
    ahead_res = max(characteristic_residual(p, params).max_abs for p in ahead.paths)

    again = run(*SLOW)
    deterministic = all(np.array_equal(getattr(again, n), getattr(slow_record, n), equal_nan=True)
                        for n in ("rho", "lambda_i", "lambda_r", "shock_time", "fire_time",
                                  "reaction_end_time"))
    verdict(8, [mass_err <= MASS_REL_TOL, lam_ok, order_ok, not fan.failures,
                reaction_rms < reaction_tol, induction_rms < INDUCTION_RESIDUAL_TOL,
                ahead_res == 0.0, deterministic],
            f"mass {mass_err:.1e}, lambda ok={lam_ok}, ordering ok={order_ok}, residual rms reaction "
            f"{reaction_rms:.1e} (< {reaction_tol:.2g}) induction {induction_rms:.1e} (< {INDUCTION_RESIDUAL_TOL}), "
            f"ahead {ahead_res}, deterministic={deterministic}")


def test_criterion_9_grid_convergence(slow_record):
    coarse = _deviation(slow_record)
    params, config = SLOW
    fine = _deviation(run(params, with_resolution(config, 3200)))
    verdict(9, [fine <= coarse],
            f"deviation at 1600 pts/unit {coarse:.5%}, at 3200 pts/unit {fine:.5%} (must not increase)")
