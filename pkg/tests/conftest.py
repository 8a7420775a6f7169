import numpy as np
import pytest

from fickett.model import SimParams
from fickett.solver import FieldState, Grid, RunRecord, SolverConfig, run

# reference cases, shared by unit and acceptance tests
INERT = (SimParams(K=0.2, epsilon=0.2, Q=0.0), SolverConfig(t_end=5.5, domain_length=3.0))
SLOW = (SimParams(K=0.2, epsilon=0.2), SolverConfig(t_end=4.0, domain_length=2.4))
SHOCK_CFG = SolverConfig(t_end=2.2, domain_length=2.0, snapshot_interval=0.0025)
CHI20_CFG = SolverConfig(t_end=1.9, domain_length=1.2, snapshot_interval=0.0025)


@pytest.fixture(scope="session")
def inert_record():
    return run(*INERT)


@pytest.fixture(scope="session")
def slow_record():
    return run(*SLOW)


@pytest.fixture(scope="session")
def k2_record():
    return run(SimParams(K=2.0, epsilon=0.2), SHOCK_CFG)


@pytest.fixture(scope="session")
def k5_record():
    return run(SimParams(K=5.0, epsilon=0.2), SHOCK_CFG)


@pytest.fixture(scope="session")
def small_record():
    """Cheap reacting run for structural tests."""
    return run(SimParams(K=0.2, epsilon=0.2), SolverConfig(t_end=2.0, domain_length=1.2,
                                                          points_per_unit=200))


def synthetic_record(rho_fn, t_end=1.0, length=1.0, ppu=100, interval=0.05, lam_i=1.0, lam_r=0.0,
                     params=None):
    """RunRecord whose frames sample ``rho_fn(x, t)``; reaction variables constant."""
    params = params or SimParams(K=1.0, epsilon=1.0, Q=0.0)
    config = SolverConfig(t_end=t_end, domain_length=length, snapshot_interval=interval,
                          points_per_unit=ppu)
    grid = config.grid()
    times = interval * np.arange(config.n_frames)
    x = grid.centers
    rho = np.array([rho_fn(x, t) for t in times], dtype=float)
    li = np.full_like(rho, lam_i)
    lr = np.full_like(rho, lam_r)
    nan = np.full(grid.n_cells, np.nan)
    shock = np.where(rho.max(axis=0) >= 0.5, 0.0, np.nan)
    final = FieldState(grid, times[-1], rho[-1], li[-1], lr[-1])
    return RunRecord(params, config, grid, times, rho, li, lr, shock, nan.copy(), nan.copy(), final)


_ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    _ACCEPTANCE[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
