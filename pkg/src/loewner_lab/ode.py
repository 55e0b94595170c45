"""
Adaptive integration of holomorphic vector fields in the unit disk.

Uses the Dormand-Prince 5(4) pair of ``scipy.integrate.RK45``, driven one step
at a time so that the step budget and the boundary guard band can be enforced.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from loewner_lab.config import SolverConfig
from loewner_lab.errors import GuardBandStall, MaxStepsExceeded

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray], np.ndarray]


@dataclass
class Trajectory:
    """Accepted solver nodes (and requested samples) of one integration."""

    times: list[float] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)
    samples: dict[float, np.ndarray] = field(default_factory=dict)
    derivative: np.ndarray | None = None
    steps: int = 0
    halvings: int = 0
    status: str = "ok"

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def append(self, t: float, state: np.ndarray) -> None:
        self.times.append(float(t))
        self.states.append(np.array(state, dtype=complex))

    def extend(self, other: Trajectory) -> None:
        """Append a following leg, skipping its duplicated start node."""
        start = 1 if self.times and other.times and other.times[0] == self.times[-1] else 0
        self.times.extend(other.times[start:])
        self.states.extend(other.states[start:])
        self.samples.update(other.samples)
        self.steps += other.steps
        self.halvings += other.halvings


def integrate(
    field_fn: Field,
    z0: complex | np.ndarray,
    t0: float,
    t1: float,
    config: SolverConfig,
    *,
    derivative_fn: Field | None = None,
    v0: complex | np.ndarray | None = None,
    t_eval: Sequence[float] = (),
    record: bool = False,
) -> Trajectory:
    """
    Integrate dw/dt = field(w) from t0 to t1.

    Args:
        field_fn: Autonomous field, evaluated on arrays of points
        z0: Initial point or array of points
        t0: Start time
        t1: End time (t1 >= t0)
        config: Solver tolerances, guard band and step budget
        derivative_fn: dG/dw; when given, dv/dt = G'(w) v is integrated alongside
        v0: Initial value of v (default 1)
        t_eval: Times in [t0, t1] to sample from the dense output
        record: Keep every accepted node in the trajectory

    Returns:
        Trajectory whose final state holds w(t1) (and ``derivative`` holds v(t1))

    Raises:
        GuardBandStall: the step size underflowed while keeping |w| <= 1 - guard_band
        MaxStepsExceeded: more than ``config.max_steps`` accepted steps
    """
    points = np.atleast_1d(np.asarray(z0, dtype=complex)).copy()
    n = points.size
    variational = derivative_fn is not None
    if variational:
        v_start = np.ones(n, dtype=complex) if v0 is None else np.atleast_1d(v0).astype(complex)
        y0 = np.concatenate([points, v_start])
    else:
        y0 = points

    trajectory = Trajectory()
    trajectory.append(t0, y0[:n])
    pending = sorted(float(t) for t in t_eval)
    while pending and pending[0] <= t0:
        trajectory.samples[pending.pop(0)] = y0[:n].copy()

    if t1 <= t0:
        if variational:
            trajectory.derivative = y0[n:].copy()
        return trajectory

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        w = y[:n]
        dw = np.asarray(field_fn(w), dtype=complex)
        if not variational:
            return dw
        v = y[n:]
        return np.concatenate([dw, np.asarray(derivative_fn(w), dtype=complex) * v])

    # the RMS error norm of a vector solve bounds each component only after scaling
    scale = math.sqrt(y0.size)
    rtol = max(config.rel_tol / scale, 1e-13)
    atol = config.abs_tol / scale
    limit = 1.0 - config.guard_band

    def start(t: float, y: np.ndarray, max_step: float = np.inf) -> RK45:
        first = None if math.isinf(max_step) else max_step
        return RK45(rhs, t, y, t1, rtol=rtol, atol=atol, max_step=max_step, first_step=first)

    solver = start(t0, y0)
    while solver.status == "running":
        if trajectory.steps >= config.max_steps:
            trajectory.status = "max_steps"
            raise MaxStepsExceeded(
                f"step budget {config.max_steps} exhausted at t={solver.t}", trajectory
            )
        t_prev, y_prev = solver.t, solver.y.copy()
        message = solver.step()
        if solver.status == "failed":
            trajectory.status = "stall"
            raise GuardBandStall(f"solver failed at t={t_prev}: {message}", trajectory)

        if np.max(np.abs(solver.y[:n])) > limit:
            step = solver.t - t_prev
            trajectory.halvings += 1
            if step / 2.0 <= 10.0 * np.spacing(max(abs(t_prev), 1.0)):
                trajectory.status = "stall"
                raise GuardBandStall(
                    f"step underflow inside the guard band at t={t_prev}", trajectory
                )
            logger.debug(f"Guard band hit at t={solver.t}; retrying with step {step / 2.0}")
            solver = start(t_prev, y_prev, step / 2.0)
            continue

        trajectory.steps += 1
        if pending and pending[0] <= solver.t:
            dense = solver.dense_output()
            while pending and pending[0] <= solver.t:
                t_s = pending.pop(0)
                trajectory.samples[t_s] = np.asarray(dense(t_s), dtype=complex)[:n]
        if record or solver.status != "running":
            trajectory.append(solver.t, solver.y[:n])

    if variational:
        trajectory.derivative = solver.y[n:].copy()
    if trajectory.halvings:
        logger.warning(f"Guard band forced {trajectory.halvings} step halvings")
    logger.debug(f"Integrated [{t0}, {t1}] in {trajectory.steps} steps")
    return trajectory
