"""
Infinitesimal generators of semigroups of holomorphic self-maps.

Disk generators are stored in Berkson-Porta form G(z) = (tau - z)(1 - conj(tau) z) p(z)
with p a HerglotzFunction; half-plane generators with Denjoy-Wolff point at
infinity are Pick functions. This module computes angular rates at boundary
fixed points, conjugates half-plane generators into the disk, synthesizes
generators with prescribed boundary fixed points and integrates their flows.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel

from loewner_lab.config import SolverConfig, default_solver_config
from loewner_lab.disk import BOUNDARY_TOL, BoundaryPoint, DiskLike, DiskPoint, cayley_inverse_value
from loewner_lab.errors import (
    ArityMismatch,
    DegenerateConfiguration,
    InfeasibleSynthesis,
    InfiniteDerivative,
    InvalidPoint,
    NotAFixedPoint,
)
from loewner_lab.herglotz import ClarkMeasure, HerglotzFunction, PickFunction
from loewner_lab.ode import integrate

logger = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-10
# |tau| >= 1 - DW_BOUNDARY_TOL counts as a boundary Denjoy-Wolff point
DW_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class Generator:
    """Berkson-Porta generator with Denjoy-Wolff point tau in the closed disk."""

    tau: complex
    p: HerglotzFunction

    def __post_init__(self) -> None:
        tau = complex(self.tau)
        if abs(tau) > 1.0 + BOUNDARY_TOL:
            raise InvalidPoint(f"Denjoy-Wolff point {tau} lies outside the closed disk")
        if abs(abs(tau) - 1.0) <= DW_BOUNDARY_TOL:
            tau = tau / abs(tau)
        object.__setattr__(self, "tau", tau)

    @property
    def boundary_dw(self) -> bool:
        return abs(abs(self.tau) - 1.0) <= DW_BOUNDARY_TOL

    def __call__(self, z: complex | np.ndarray) -> complex | np.ndarray:
        tau = self.tau
        return (tau - z) * (1 - tau.conjugate() * z) * self.p(z)

    def derivative(self, z: complex | np.ndarray) -> complex | np.ndarray:
        tau = self.tau
        front = (tau - z) * (1 - tau.conjugate() * z)
        front_prime = -1.0 - abs(tau) ** 2 + 2.0 * tau.conjugate() * z
        return front_prime * self.p(z) + front * self.p.derivative(z)

    def scaled(self, factor: float) -> Generator:
        return Generator(self.tau, self.p.scaled(factor))

    def rotated(self, rotation: complex) -> Generator:
        """Push-forward under z -> rotation * z (|rotation| = 1)."""
        return Generator(rotation * self.tau, self.p.rotated(rotation))


@dataclass(frozen=True)
class PickGenerator:
    """Half-plane generator with Denjoy-Wolff point at infinity."""

    pick: PickFunction
    fixed_points: tuple[float, ...] = ()

    def __call__(self, zeta: complex | np.ndarray) -> complex | np.ndarray:
        return self.pick(zeta)

    def derivative(self, zeta: complex | np.ndarray) -> complex | np.ndarray:
        return self.pick.derivative(zeta)


class AngularRate(BaseModel):
    """Angular derivative lambda(sigma) = lim G(z)/(z - sigma) at a boundary fixed point."""

    point: list[float]
    value: float


def generator_eval(generator: Generator, z: DiskPoint | complex) -> complex:
    """Evaluate G at an interior point."""
    return complex(generator(DiskPoint(complex(z)).value))


def _rate(point: complex, value: float) -> AngularRate:
    return AngularRate(point=[point.real, point.imag], value=value)


def _disk_angular_rate(generator: Generator, sigma: DiskLike) -> AngularRate:
    point = BoundaryPoint(complex(sigma)).value
    tau = generator.tau
    p = generator.p
    if generator.boundary_dw and abs(point - tau) <= DW_BOUNDARY_TOL:
        # (1 - conj(tau) z) p(z) -> 2 w_tau along the radius
        return _rate(point, -2.0 * p.measure.weight_at(tau))
    if p.measure.has_atom_at(point):
        raise InfiniteDerivative(f"{point} is an atom of the Herglotz measure")
    front = (tau - point) * (1 - tau.conjugate() * point)
    boundary_p = p.boundary_value(point)
    if abs(front * boundary_p) > FIXED_POINT_TOL:
        raise NotAFixedPoint(f"G({point}) = {front * boundary_p} does not vanish")
    rate = complex(front * p.derivative(point))
    if abs(rate.imag) > 1e-8 * max(1.0, abs(rate.real)):
        logger.warning(f"Angular rate at {point} has imaginary residue {rate.imag}")
    return _rate(point, rate.real)


def _pick_angular_rate(generator: PickGenerator, x0: float) -> AngularRate:
    pick = generator.pick
    if pick.has_atom_at(x0):
        raise InfiniteDerivative(f"{x0} is an atom of the Pick measure")
    value = complex(pick(complex(x0, 0.0)))
    if abs(value) > FIXED_POINT_TOL * max(1.0, abs(x0)):
        raise NotAFixedPoint(f"G({x0}) = {value} does not vanish")
    rate = complex(pick.derivative(complex(x0, 0.0))).real
    return AngularRate(point=[float(x0), 0.0], value=rate)


def angular_rate(generator: Generator | PickGenerator, sigma: DiskLike | float) -> AngularRate:
    """
    Angular rate of a generator at a boundary fixed point.

    For disk generators, sigma is a boundary point; for Pick generators, a real number.

    Raises:
        NotAFixedPoint: G does not vanish at sigma
        InfiniteDerivative: sigma is an atom of the measure
    """
    if isinstance(generator, PickGenerator):
        return _pick_angular_rate(generator, float(sigma))  # type: ignore[arg-type]
    return _disk_angular_rate(generator, sigma)  # type: ignore[arg-type]


def conjugate_generator(generator: PickGenerator) -> Generator:
    """
    Disk generator G_D(z) = G_H(H(z)) / H'(z) of a half-plane generator.

    Since H'(z) = 2i/(1 - z)^2 the result has Denjoy-Wolff point 1 and
    p = -(i/2) Psi(H(z)): the atom at 1 carries beta/2, an atom at t moves to
    H^{-1}(t) with weight w/2, gamma/2 becomes uniform mass and C = -alpha/2.
    """
    pick = generator.pick
    atoms: list[tuple[complex, float]] = [
        (complex(cayley_inverse_value(complex(t, 0.0))), w / 2.0) for t, w in pick.atoms
    ]
    if pick.beta > 0.0:
        atoms.append((1.0 + 0j, pick.beta / 2.0))
    measure = ClarkMeasure(tuple(atoms), pick.gamma / 2.0)
    return Generator(1.0 + 0j, HerglotzFunction(measure, -pick.alpha / 2.0))


def synthesize_generator(
    fixed: Sequence[float], atoms: Sequence[float], beta: float
) -> PickGenerator:
    """
    Pick generator alpha + beta zeta + sum w_k (1 + t_k zeta)/(t_k - zeta) vanishing on ``fixed``.

    One atom must sit in each gap between consecutive fixed points; the weights
    and alpha solve the linear interpolation system.

    Raises:
        ArityMismatch: the atom count differs from |fixed| - 1
        InfeasibleSynthesis: atoms do not interlace, the system is singular, or a weight is not positive
    """
    if beta <= 0.0:
        raise InfeasibleSynthesis(f"beta must be positive, got {beta}")
    xs = sorted(float(x) for x in fixed)
    ts = sorted(float(t) for t in atoms)
    if not xs or len(ts) != len(xs) - 1:
        raise ArityMismatch(f"{len(xs)} fixed points need {max(len(xs) - 1, 0)} atoms, got {len(ts)}")
    if any(b - a <= 0.0 for a, b in zip(xs, xs[1:])):
        raise DegenerateConfiguration("fixed points must be distinct")
    for k, t in enumerate(ts):
        if not xs[k] < t < xs[k + 1]:
            raise InfeasibleSynthesis(f"atom {t} is not inside gap ({xs[k]}, {xs[k + 1]})")

    x = np.array(xs)
    system = np.ones((len(xs), len(xs)))
    for k, t in enumerate(ts):
        system[:, k + 1] = (1 + t * x) / (t - x)
    try:
        solution = np.linalg.solve(system, -beta * x)
    except np.linalg.LinAlgError as e:
        raise InfeasibleSynthesis(f"singular synthesis system: {e}") from e
    alpha, weights = float(solution[0]), solution[1:]
    if np.any(weights <= 0.0):
        raise InfeasibleSynthesis(f"non-positive weights {weights.tolist()}")
    pick = PickFunction(alpha=alpha, beta=beta, atoms=tuple(zip(ts, weights.tolist())))
    logger.debug(f"Synthesized generator alpha={alpha}, weights={weights.tolist()}")
    return PickGenerator(pick, tuple(xs))


def semigroup_flow(
    generator: Generator,
    z: DiskPoint | complex | np.ndarray,
    t: float,
    config: SolverConfig | None = None,
) -> complex | np.ndarray:
    """
    phi_t(z): solution at time t of dw/dt = G(w), w(0) = z.

    Arrays of points are integrated together; scalars return a complex.
    """
    if t < 0.0:
        raise ValueError("semigroup time must be non-negative")
    config = config or default_solver_config()
    if isinstance(z, np.ndarray):
        return integrate(generator, z, 0.0, t, config).final
    start = DiskPoint(complex(z)).value
    return complex(integrate(generator, start, 0.0, t, config).final[0])


class ConsistencyReport(BaseModel):
    """Residuals |(phi_h(z) - z)/h - G(z)| over decreasing h."""

    steps: list[float]
    residuals: list[float]
    order: float
    extrapolated_residual: float


def bp_consistency(
    generator: Generator,
    z: DiskPoint | complex,
    steps: Sequence[float] = (1e-2, 1e-3, 1e-4),
    config: SolverConfig | None = None,
) -> ConsistencyReport:
    """
    Compare the difference quotient of the flow with the generator.

    The observed order is the log-log slope between the first and last step;
    the extrapolated residual removes the first-order term from the last two quotients.
    """
    config = (config or default_solver_config()).tightened(1e-12)
    point = DiskPoint(complex(z)).value
    target = complex(generator(point))
    quotients = [(complex(semigroup_flow(generator, point, h, config)) - point) / h for h in steps]
    residuals = [abs(q - target) for q in quotients]

    if len(steps) >= 2 and residuals[0] > 0.0 and residuals[-1] > 0.0:
        order = math.log(residuals[0] / residuals[-1]) / math.log(steps[0] / steps[-1])
    else:
        order = math.inf
    if len(steps) >= 2:
        h1, h2 = steps[-2], steps[-1]
        limit = quotients[-1] + (quotients[-1] - quotients[-2]) * h2 / (h1 - h2)
        extrapolated = abs(limit - target)
    else:
        extrapolated = residuals[-1]
    return ConsistencyReport(
        steps=list(steps), residuals=residuals, order=order, extrapolated_residual=extrapolated
    )
