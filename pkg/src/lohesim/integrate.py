"""Fixed-step integrators and the sampling loop used by every experiment.

Everything here works on bare ndarrays: the rhs is ``f(t, y) -> dy`` with y
of any shape/dtype.  ``integrate`` drives the steps, applies an optional
per-step projection (e.g. renormalization), and evaluates a dict of
observer callables on a fixed sampling stride, always including t=0 and
the final time.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["IntegrationDiverged", "rk4_step", "euler_step", "integrate", "SampledRun"]


class IntegrationDiverged(RuntimeError):
    """Raised when the state picks up a NaN/Inf entry mid-run."""


def rk4_step(f, t, y, dt):
    """One classical Runge-Kutta step of size dt.

    Fourth order for smooth f; the workhorse for all ODE runs here.
    """
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(f, t, y, dt):
    return y + dt * f(t, y)


@dataclass
class SampledRun:
    """Output of :func:`integrate`: sample times, observer traces, final state."""

    t: np.ndarray
    observed: dict
    final_state: np.ndarray


def integrate(f, y0, dt, t_end, observers, sample_every=1, project=None, step=rk4_step):
    """March y' = f(t, y) from 0 to t_end and record observer values.

    observers : dict name -> callable(t, y) returning a float (or small
        array for vector channels).
    sample_every : record every k-th step; t=0 and the last step are always
        recorded.
    project : optional callable(y) -> y applied after every step (norm
        reprojection and the like).

    Raises IntegrationDiverged as soon as the state stops being finite.
    """
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end} is not an integer number of dt={dt} steps")

    y = np.array(y0, copy=True)
    times = []
    records = {name: [] for name in observers}

    def record(t, y):
        times.append(t)
        for name, fn in observers.items():
            records[name].append(fn(t, y))

    record(0.0, y)
    for k in range(1, n_steps + 1):
        t = (k - 1) * dt
        y = step(f, t, y, dt)
        if project is not None:
            y = project(y)
        if not np.all(np.isfinite(y.view(float) if np.iscomplexobj(y) else y)):
            raise IntegrationDiverged(f"non-finite state at t={k * dt:.6g}")
        if k % sample_every == 0 or k == n_steps:
            record(k * dt, y)

    observed = {name: np.array(vals) for name, vals in records.items()}
    return SampledRun(t=np.array(times), observed=observed, final_state=y)
