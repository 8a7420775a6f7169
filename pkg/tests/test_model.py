import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fickett.model import (CellState, SimParams, cj_speed, cj_speed_closed_form, induction_rate,
                           pressure, reaction_rate)


def test_params_chi_is_k_over_epsilon():
    p = SimParams(K=5.0, epsilon=0.2)
    assert p.chi == pytest.approx(25.0)
    assert p.zeta == p.chi
    assert p.Q == 1.0 and p.nu == 1.0


@pytest.mark.parametrize("kwargs", [dict(K=0.0, epsilon=0.2), dict(K=1.0, epsilon=0.0),
                                    dict(K=1.0, epsilon=-1.0), dict(K=1.0, epsilon=0.2, Q=-1.0),
                                    dict(K=1.0, epsilon=0.2, nu=-0.5), dict(K=math.nan, epsilon=0.2)])
def test_params_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        SimParams(**kwargs)


def test_cell_state_requires_expired_induction_before_reaction():
    with pytest.raises(ValueError):
        CellState(rho=1.0, lambda_i=0.5, lambda_r=0.1)
    with pytest.raises(ValueError):
        CellState(rho=1.0, lambda_i=0.0, lambda_r=1.5)
    assert CellState(1.0, 0.0, 0.5).pressure(1.0) == pytest.approx(0.75)


def test_pressure_values():
    assert pressure(1.0, 0.0, 1.0) == 0.5
    assert pressure(0.0, 1.0, 2.0) == 1.0
    assert pressure(2.0, 0.5, 1.0) == pytest.approx(2.25)


def test_induction_rate():
    assert induction_rate(1.0, 1.0, 0.2) == pytest.approx(-1.0)
    assert induction_rate(0.8, 0.5, 0.2) == pytest.approx(-math.exp(-1.0))
    assert induction_rate(1.3, 0.0, 0.2) == 0.0
    with pytest.raises(ValueError):
        induction_rate(1.0, 1.0, 0.0)


def test_reaction_rate():
    assert reaction_rate(0.5, 0.0, 2.0, 1.0) == 0.0
    assert reaction_rate(0.0, 0.0, 2.0, 1.0) == pytest.approx(2.0)
    assert reaction_rate(0.0, 0.75, 2.0, 1.0) == pytest.approx(0.5)
    assert reaction_rate(0.0, 0.75, 2.0, 0.5) == pytest.approx(1.0)
    assert reaction_rate(0.0, 0.75, 2.0, 0.0) == pytest.approx(2.0)
    assert reaction_rate(0.0, 1.0, 2.0, 0.0) == 0.0


def test_cj_speed_reference_values():
    assert cj_speed(1.0, 1.0) == pytest.approx(2.0, abs=1e-12)
    assert cj_speed(0.0, 4.0) == pytest.approx(2.0, abs=1e-12)
    assert cj_speed(1.0, 0.0) == 1.0
    with pytest.raises(ValueError):
        cj_speed(-0.1, 1.0)


@given(st.floats(0.0, 10.0), st.floats(1e-4, 50.0))
def test_cj_speed_matches_closed_form(rho0, Q):
    assert cj_speed(rho0, Q) == pytest.approx(cj_speed_closed_form(rho0, Q), rel=1e-10, abs=1e-12)


@given(st.floats(0.0, 5.0), st.floats(0.01, 5.0))
def test_cj_state_is_sonic(rho0, Q):
    # at the CJ point the jump speed equals the downstream sound speed rho1 = rho0 + sqrt(Q)
    s = cj_speed(rho0, Q)
    rho1 = rho0 + math.sqrt(Q)
    jump = (rho1**2 + Q - rho0**2) / (2 * (rho1 - rho0))
    assert jump == pytest.approx(s, rel=1e-10)
    assert rho1 == pytest.approx(s, rel=1e-10)


@given(st.floats(0.0, 3.0), st.floats(0.0, 1.0), st.floats(0.01, 10.0), st.floats(0.0, 2.0))
def test_rates_have_correct_sign(rho, lam, K, nu):
    assert induction_rate(rho, 1.0, 0.2) < 0.0
    assert reaction_rate(0.0, lam, K, nu) >= 0.0
    assert np.isfinite(reaction_rate(0.0, lam, K, nu))
