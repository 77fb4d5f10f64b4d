import numpy as np
import pytest

from lohesim import integrate


def test_rk4_fourth_order_on_linear_problem():
    # y' = i*omega*y has exact solution; halving dt must cut the error ~16x.
    omega = 2.0
    f = lambda t, y: 1j * omega * y
    y0 = np.array([1.0 + 0j])
    exact = np.exp(1j * omega * 1.0)
    errs = []
    for dt in (0.1, 0.05, 0.025):
        run = integrate.integrate(f, y0, dt, 1.0, observers={})
        errs.append(abs(run.final_state[0] - exact))
    r1 = errs[0] / errs[1]
    r2 = errs[1] / errs[2]
    assert 13.0 < r1 < 19.0
    assert 13.0 < r2 < 19.0


def test_integrate_sampling_includes_endpoints():
    f = lambda t, y: np.zeros_like(y)
    run = integrate.integrate(
        f, np.zeros(1), dt=0.1, t_end=1.0, observers={"zero": lambda t, y: 0.0}, sample_every=3
    )
    assert run.t[0] == 0.0
    assert np.isclose(run.t[-1], 1.0)
    # steps 3, 6, 9 plus both endpoints
    assert np.allclose(run.t, [0.0, 0.3, 0.6, 0.9, 1.0])
    assert run.observed["zero"].shape == run.t.shape


def test_integrate_rejects_non_integer_step_count():
    f = lambda t, y: y
    with pytest.raises(ValueError):
        integrate.integrate(f, np.ones(1), dt=0.3, t_end=1.0, observers={})


def test_integrate_raises_on_blowup():
    f = lambda t, y: y * y  # finite-time blowup from y0 = 2
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(integrate.IntegrationDiverged):
            integrate.integrate(f, np.array([2.0]), dt=0.1, t_end=100.0, observers={})


def test_project_hook_runs_every_step():
    f = lambda t, y: y  # norm grows without the projection
    project = lambda y: y / np.linalg.norm(y)
    run = integrate.integrate(f, np.array([1.0, 0.0]), 0.01, 2.0, observers={}, project=project)
    assert np.isclose(np.linalg.norm(run.final_state), 1.0)
