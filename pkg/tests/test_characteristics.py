import numpy as np
import pytest

from conftest import synthetic_record
from fickett.characteristics import (CPLUS, FieldInterpolator, characteristic_residual, cplus_fan,
                                     default_piston_seeds, induction_zone_mask, reaction_zone_mask,
                                     trace_cplus, trace_czero)
from fickett.fronts import shock_trajectory


def test_uniform_region_gives_unit_slope():
    rec = synthetic_record(lambda x, t: np.ones_like(x), t_end=1.0, length=2.0)
    path = trace_cplus(rec, (0.2, 0.1))
    assert np.allclose(path.x, 0.2 + (path.t - 0.1), atol=1e-12)
    assert path.stop_reason == "t_end"


def test_quiescent_region_is_stationary():
    rec = synthetic_record(lambda x, t: np.zeros_like(x))
    path = trace_cplus(rec, (0.5, 0.0))
    assert np.all(path.x == 0.5)


def test_czero_paths_are_vertical(slow_record):
    path = trace_czero(slow_record, (0.7, 1.234))
    assert np.all(path.x == 0.7)
    assert np.all(np.diff(path.t) > 0.0)


def test_seed_outside_domain_rejected(small_record):
    with pytest.raises(ValueError):
        trace_cplus(small_record, (5.0, 1.0))
    with pytest.raises(ValueError):
        trace_cplus(small_record, (0.1, 9.0))
    fan = cplus_fan(small_record, seeds=[(0.0, 0.5), (5.0, 1.0)])
    assert len(fan.paths) == 1 and len(fan.failures) == 1


def test_interpolator_piston_node(small_record):
    interp = FieldInterpolator(small_record)
    assert interp.rho(0.0, 1.0) == pytest.approx(1.0)
    j, k = 5, 40
    assert interp.rho(small_record.x[j], small_record.frame_times[k]) == pytest.approx(small_record.rho[k, j])


def test_pressure_wave_from_fire_onset_reaches_shock(slow_record):
    path = trace_cplus(slow_record, (0.0, 1.0))
    assert path.family == CPLUS
    assert path.stop_reason == "lead_shock"
    shock = shock_trajectory(slow_record)
    assert np.all(path.x <= shock.position_at(path.t) + 1e-12)
    assert path.t[-1] < slow_record.t_end
    assert np.all(np.diff(path.t) > 0.0) and np.all(np.diff(path.x) >= 0.0)


def test_inert_fan_is_parallel(inert_record):
    fan = cplus_fan(inert_record, seeds=[(0.0, t) for t in (0.5, 1.0, 1.5)])
    for p in fan.paths:
        keep = p.t < p.t[-1] - 0.05
        assert np.allclose(p.x[keep], p.t[keep] - p.seed[1], atol=1e-9)


def test_paths_accelerate_in_reaction_zone(slow_record):
    path = trace_cplus(slow_record, (0.0, 2.0))
    assert np.all(path.rho[reaction_zone_mask(path)] > 1.0)


def test_neighbouring_paths_converge_for_k2(k2_record):
    a = trace_cplus(k2_record, (0.0, 1.0))
    b = trace_cplus(k2_record, (0.0, 1.05))
    t = np.linspace(1.1, min(a.t[-1], b.t[-1]), 50)
    gap = np.interp(t, a.t, a.x) - np.interp(t, b.t, b.x)
    assert gap[-1] < gap[0]


def test_default_seeds(slow_record):
    seeds = default_piston_seeds(slow_record, 0.5)
    assert seeds[0] == (0.0, 0.5) and all(s[0] == 0.0 for s in seeds)
    assert seeds[-1][1] < slow_record.t_end


def test_residual_zero_ahead_of_shock(slow_record):
    path = trace_cplus(slow_record, (2.3, 0.2))
    stats = characteristic_residual(path, slow_record.params)
    assert stats.max_abs == 0.0 and stats.rms == 0.0


def test_residual_small_inside_reaction_zone(slow_record):
    params = slow_record.params
    path = trace_cplus(slow_record, (0.0, 2.0))
    stats = characteristic_residual(path, params, reaction_zone_mask(path))
    assert stats.n > 50
    assert stats.rms < 0.1 * 0.5 * params.K * params.Q
    assert induction_zone_mask(path).sum() > 0


def test_residual_preconditions(slow_record):
    path = trace_cplus(slow_record, (0.0, 2.0))
    with pytest.raises(ValueError):
        characteristic_residual(path.subset(np.arange(len(path)) < 5), slow_record.params)
    with pytest.raises(ValueError):
        characteristic_residual(trace_czero(slow_record, (0.5, 1.0)), slow_record.params)
