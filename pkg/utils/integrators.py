from typing import Callable

import numpy as np

Derivative = Callable[[float, np.ndarray], np.ndarray]
Observer = Callable[[float, np.ndarray], None]


def rk4_step(rhs: Derivative, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """ Advance `y` by one classical fourth-order Runge-Kutta step of size `h`. """
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def fixed_step_count(duration: float, max_step: float) -> int:
    """ Smallest number of equal steps covering `duration` with steps no longer than `max_step`. """
    if duration <= 0:
        return 0
    return max(1, int(np.ceil(duration / max_step * (1 - 1e-12))))


def integrate_fixed_step(
    rhs: Derivative,
    y0: np.ndarray,
    t_start: float,
    t_stop: float,
    max_step: float,
    observer: Observer | None = None,
    record: bool = False,
):
    """ Integrate dy/dt = rhs(t, y) with a fixed-step RK4 scheme.

    The interval is split into equal steps, each no longer than `max_step`, so repeated calls
    with the same arguments are reproducible bit for bit.

    Parameters
    ----------
    rhs
        Right-hand side f(t, y).
    y0
        Initial value, copied before integration.
    t_start, t_stop
        Integration interval.
    max_step
        Upper bound on the step size.
    observer
        Optional callable invoked as observer(t, y) after every step (and once at t_start).
    record
        If True, return the sampled times and values instead of the final value only.

    Returns
    -------
        The final value, or a tuple (times, values) when `record` is set.
    """
    if max_step <= 0:
        raise ValueError(f"max_step must be positive, got {max_step}")

    n_steps = fixed_step_count(t_stop - t_start, max_step)
    h = (t_stop - t_start) / n_steps if n_steps else 0.0
    y = np.array(y0, copy=True)

    times = [t_start]
    values = [y.copy()] if record else None
    if observer is not None:
        observer(t_start, y)

    for i in range(n_steps):
        t = t_start + i * h
        y = rk4_step(rhs, t, y, h)
        t_next = t_start + (i + 1) * h
        if observer is not None:
            observer(t_next, y)
        if record:
            times.append(t_next)
            values.append(y.copy())

    if record:
        return np.asarray(times), np.asarray(values)
    return y
