"""
Evolution families generated by piecewise-constant Herglotz vector fields.

A Schedule is an ordered list of (duration, Generator) segments; the
Loewner-Kufarev equation dw/dt = G(w, t), w(s) = z, is integrated leg by leg.
"""

from __future__ import annotations

import logging
import math
import threading
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel

from loewner_lab.config import SolverConfig, default_solver_config, worker_count
from loewner_lab.diagnostics import UnivalenceVerdict, pair, univalence_heuristic
from loewner_lab.disk import BOUNDARY_TOL, BoundaryPoint, DiskPoint, PolarGrid
from loewner_lab.errors import (
    DegenerateConfiguration,
    GeneratorError,
    MixedDenjoyWolff,
    NotNormalized,
    SolverError,
)
from loewner_lab.generators import AngularRate, Generator, angular_rate
from loewner_lab.herglotz import HerglotzFunction, is_normalized_at_one
from loewner_lab.ode import Trajectory, integrate

logger = logging.getLogger(__name__)

DW_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class Segment:
    duration: float
    generator: Generator

    def __post_init__(self) -> None:
        if not self.duration > 0.0 or math.isinf(self.duration):
            raise DegenerateConfiguration(f"segment duration {self.duration} must be positive and finite")


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant Herglotz vector field G(z, t)."""

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def of(cls, *pieces: tuple[float, Generator]) -> Schedule:
        return cls(tuple(Segment(d, g) for d, g in pieces))

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def breakpoints(self) -> list[float]:
        return [0.0] + np.cumsum([s.duration for s in self.segments]).tolist()

    def pieces(self, s: float, t: float) -> Iterator[tuple[Generator, float, float]]:
        """(generator, start, end) for every segment overlapping [s, t]."""
        marks = self.breakpoints
        for segment, a, b in zip(self.segments, marks, marks[1:]):
            lo, hi = max(s, a), min(t, b)
            if hi > lo:
                yield segment.generator, lo, hi

    def local_bound(self, radius: float, samples: int = 1024) -> float:
        """
        sup |G(w, t)| over |w| <= radius, from samples on the circle |w| = radius.

        Includes a 1% margin over the sampled maximum.
        """
        circle = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
        peak = max(float(np.max(np.abs(seg.generator(circle)))) for seg in self.segments)
        return 1.01 * peak

    def reparametrized(self, s: float, t: float) -> Schedule:
        """Schedule on [0, 1] whose evolution phi_{0,1} equals phi_{s,t} of this one."""
        if not 0.0 <= s < t <= self.total_duration + 1e-12:
            raise DegenerateConfiguration(f"invalid window [{s}, {t}]")
        span = t - s
        return Schedule(
            tuple(Segment((b - a) / span, g.scaled(span)) for g, a, b in self.pieces(s, t))
        )


def _check_window(schedule: Schedule, s: float, t: float) -> None:
    if not 0.0 <= s <= t <= schedule.total_duration + 1e-12:
        raise DegenerateConfiguration(
            f"need 0 <= s <= t <= {schedule.total_duration}, got s={s}, t={t}"
        )


def _solve(
    schedule: Schedule,
    z: complex | np.ndarray,
    s: float,
    t: float,
    config: SolverConfig,
    *,
    variational: bool = False,
    t_eval: Sequence[float] = (),
    record: bool = False,
) -> Trajectory:
    state = np.atleast_1d(np.asarray(z, dtype=complex))
    trajectory = Trajectory()
    trajectory.append(s, state)
    v = np.ones(state.size, dtype=complex) if variational else None
    for generator, a, b in schedule.pieces(s, t):
        leg_eval = [x for x in t_eval if a <= x <= b]
        try:
            leg = integrate(
                generator,
                state,
                a,
                b,
                config,
                derivative_fn=generator.derivative if variational else None,
                v0=v,
                t_eval=leg_eval,
                record=record,
            )
        except SolverError as e:
            if e.trajectory is not None:
                trajectory.extend(e.trajectory)
                trajectory.status = e.trajectory.status
            e.trajectory = trajectory
            raise
        trajectory.extend(leg)
        state = leg.final
        v = leg.derivative
    for x in t_eval:
        if x <= s:
            trajectory.samples[x] = np.atleast_1d(np.asarray(z, dtype=complex))
    trajectory.derivative = v
    return trajectory


class EvolutionMap:
    """
    The map phi_{s,t} of a schedule, evaluated on demand.

    Features:
    - Scalar evaluations are cached per starting point
    - Array evaluations are integrated as one vector ODE
    - Derivatives from the variational equation
    """

    def __init__(
        self, schedule: Schedule, s: float, t: float, config: SolverConfig | None = None
    ):
        _check_window(schedule, s, t)
        self.schedule = schedule
        self.s = s
        self.t = t
        self.config = config or default_solver_config()
        self._cache: dict[complex, complex] = {}
        self._lock = threading.Lock()
        self.stats = {"hits": 0, "misses": 0}

    def __call__(self, z: complex | np.ndarray) -> complex | np.ndarray:
        if isinstance(z, np.ndarray):
            return _solve(self.schedule, z, self.s, self.t, self.config).final
        key = complex(z)
        with self._lock:
            if key in self._cache:
                self.stats["hits"] += 1
                return self._cache[key]
        value = complex(_solve(self.schedule, key, self.s, self.t, self.config).final[0])
        with self._lock:
            self.stats["misses"] += 1
            self._cache[key] = value
        return value

    def derivative(self, z: complex) -> complex:
        """phi_{s,t}'(z) through dv/dt = G'(w) v."""
        trajectory = _solve(self.schedule, complex(z), self.s, self.t, self.config, variational=True)
        assert trajectory.derivative is not None
        return complex(trajectory.derivative[0])

    def trajectory(self, z: complex) -> Trajectory:
        """Every accepted solver node of the path from z."""
        return _solve(self.schedule, complex(z), self.s, self.t, self.config, record=True)


def evolve_point(
    schedule: Schedule,
    z: DiskPoint | complex,
    s: float,
    t: float,
    config: SolverConfig | None = None,
) -> DiskPoint:
    """
    phi_{s,t}(z) for a single interior point.

    Raises:
        GuardBandStall, MaxStepsExceeded: solver failures, with the partial trajectory
    """
    start = DiskPoint(complex(z)).value
    return DiskPoint(complex(EvolutionMap(schedule, s, t, config)(start)))


class CompositionReport(BaseModel):
    """Residual of phi_{s,t} against phi_{u,t} o phi_{s,u} on a grid."""

    s: float
    u: float
    t: float
    max_residual: float
    bound: float
    passed: bool


def ef_composition_check(
    schedule: Schedule,
    points: Sequence[complex] | np.ndarray,
    s: float,
    u: float,
    t: float,
    config: SolverConfig | None = None,
) -> CompositionReport:
    """Compare phi_{s,t} with phi_{u,t} o phi_{s,u}; passes below 10 (rel_tol + abs_tol)."""
    if not s <= u <= t:
        raise DegenerateConfiguration(f"need s <= u <= t, got {s}, {u}, {t}")
    config = config or default_solver_config()
    zs = [complex(z) for z in points]
    residual = 0.0
    for z in zs:
        direct = complex(_solve(schedule, z, s, t, config).final[0])
        middle = complex(_solve(schedule, z, s, u, config).final[0])
        composed = complex(_solve(schedule, middle, u, t, config).final[0])
        residual = max(residual, abs(direct - composed))
    bound = 10.0 * (config.rel_tol + config.abs_tol)
    return CompositionReport(
        s=s, u=u, t=t, max_residual=residual, bound=bound, passed=residual <= bound
    )


class AbsoluteContinuityReport(BaseModel):
    """|phi_{s,u}(z) - phi_{s,t}(z)| <= k (t - u) over random triples."""

    point: list[float]
    bound_constant: float
    triples: int
    escaped: int
    violations: int
    max_excess: float
    passed: bool


def ef_absolute_continuity_check(
    schedule: Schedule,
    z: DiskPoint | complex,
    horizon: float,
    config: SolverConfig | None = None,
    samples: int = 100,
    seed: int = 0,
) -> AbsoluteContinuityReport:
    """
    Check the absolute-continuity bound of the evolution family at z.

    k is the sup of |G| over the disk of radius (1 + |z|)/2. Triples whose
    path leaves that disk are counted as escaped and not judged.
    """
    config = config or default_solver_config()
    start = DiskPoint(complex(z)).value
    horizon = min(horizon, schedule.total_duration)
    radius = (1.0 + abs(start)) / 2.0
    k = schedule.local_bound(radius)
    slack = 10.0 * (config.rel_tol + config.abs_tol)
    rng = np.random.default_rng(seed)

    escaped = violations = 0
    max_excess = -math.inf
    for _ in range(samples):
        s, u, t = np.sort(rng.uniform(0.0, horizon, size=3)).tolist()
        path = _solve(schedule, start, s, t, config, t_eval=(u, t), record=True)
        if max(float(np.max(np.abs(state))) for state in path.states) > radius:
            escaped += 1
            continue
        gap = abs(complex(path.samples[u][0]) - complex(path.samples[t][0]))
        excess = gap - k * (t - u)
        max_excess = max(max_excess, excess)
        if excess > slack:
            violations += 1
    return AbsoluteContinuityReport(
        point=pair(start),
        bound_constant=k,
        triples=samples,
        escaped=escaped,
        violations=violations,
        max_excess=max_excess if math.isfinite(max_excess) else 0.0,
        passed=violations == 0,
    )


@dataclass(frozen=True)
class ConeSpec:
    """Prescribed boundary fixed points F and an optional Denjoy-Wolff point tau."""

    fixed: tuple[complex, ...]
    tau: complex | None = None

    def __post_init__(self) -> None:
        fixed = tuple(BoundaryPoint(complex(f)).value for f in self.fixed)
        for i, f in enumerate(fixed):
            if any(abs(f - g) <= BOUNDARY_TOL for g in fixed[:i]):
                raise DegenerateConfiguration(f"fixed point {f} is repeated")
        tau = self.tau
        if tau is not None:
            tau = complex(tau)
            if abs(tau) > 1.0 + BOUNDARY_TOL:
                raise DegenerateConfiguration(f"tau {tau} is outside the closed disk")
            if any(abs(tau - f) <= BOUNDARY_TOL for f in fixed):
                raise DegenerateConfiguration("tau must not belong to F")
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "tau", tau)


class PointCheck(BaseModel):
    point: list[float]
    fixed: bool
    rate: float | None
    reason: str | None = None


class SegmentCheck(BaseModel):
    index: int
    duration: float
    tau: list[float]
    dw_matches: bool
    points: list[PointCheck]
    member: bool


class ConeReport(BaseModel):
    """Membership of every segment of a schedule in the cone of a ConeSpec."""

    member: bool
    segments: list[SegmentCheck]
    multipliers: dict[str, float]


def _dw_matches(generator: Generator, tau: complex | None) -> bool:
    if tau is None or generator.p.is_zero:
        return True
    return abs(generator.tau - tau) <= DW_MATCH_TOL


def cone_membership(schedule: Schedule, spec: ConeSpec) -> ConeReport:
    """
    Check that G(., t) fixes every point of F with a finite angular rate, and
    that its Denjoy-Wolff point is tau when tau is prescribed.

    The rates are step functions of t, hence locally integrable; for members the
    report carries the multipliers exp(sum d_i lambda_i(sigma)).
    """
    checks: list[SegmentCheck] = []
    exponents = [0.0] * len(spec.fixed)
    for index, segment in enumerate(schedule.segments):
        generator = segment.generator
        points: list[PointCheck] = []
        for j, sigma in enumerate(spec.fixed):
            try:
                rate = angular_rate(generator, sigma).value
                points.append(PointCheck(point=pair(sigma), fixed=True, rate=rate))
                exponents[j] += segment.duration * rate
            except GeneratorError as e:
                points.append(
                    PointCheck(point=pair(sigma), fixed=False, rate=None, reason=type(e).__name__)
                )
        dw = _dw_matches(generator, spec.tau)
        checks.append(
            SegmentCheck(
                index=index,
                duration=segment.duration,
                tau=pair(generator.tau),
                dw_matches=dw,
                points=points,
                member=dw and all(p.fixed for p in points),
            )
        )
    member = all(c.member for c in checks)
    multipliers = (
        {f"{sigma.real:.17g},{sigma.imag:.17g}": math.exp(e) for sigma, e in zip(spec.fixed, exponents)}
        if member
        else {}
    )
    if not member:
        logger.info("Schedule is not a member of the cone")
    return ConeReport(member=member, segments=checks, multipliers=multipliers)


def conic_combine(a: float, first: Generator, b: float, second: Generator) -> Generator:
    """
    a G1 + b G2 for generators sharing their Denjoy-Wolff point.

    Raises:
        MixedDenjoyWolff: the Denjoy-Wolff points differ
    """
    if a < 0.0 or b < 0.0 or a + b == 0.0:
        raise DegenerateConfiguration(f"coefficients must be non-negative and not both zero: {a}, {b}")
    if abs(first.tau - second.tau) > BOUNDARY_TOL:
        raise MixedDenjoyWolff(f"Denjoy-Wolff points {first.tau} and {second.tau} differ")
    return Generator(first.tau, first.p.scaled(a).plus(second.p.scaled(b)))


def combined_rates(
    a: float, first: Generator, b: float, second: Generator, fixed: Sequence[complex]
) -> list[AngularRate]:
    """
    Angular rates of a G1 + b G2 at F for fields with any Denjoy-Wolff points.

    Raises:
        NotAFixedPoint, InfiniteDerivative: one of the fields fails at a point of F
    """
    rates = []
    for sigma in fixed:
        lam = a * angular_rate(first, sigma).value + b * angular_rate(second, sigma).value
        rates.append(AngularRate(point=pair(sigma), value=lam))
    return rates


class RadialReport(BaseModel):
    """Normalized radial evolution phi_{0,T}."""

    horizon: float
    phi_at_zero: list[float]
    derivative: list[float]
    closed_form_derivative: list[float]
    modulus: float
    argument: float
    real_subfamily: bool
    positive: bool | None
    univalence: UnivalenceVerdict


def radial_classical(
    segments: Sequence[tuple[float, HerglotzFunction]],
    horizon: float,
    config: SolverConfig | None = None,
    grid: PolarGrid | None = None,
) -> RadialReport:
    """
    Evolve dw/dt = -w p(w, t) with p normalized by p(1, t) = 1.

    phi(0) = 0 always; phi'(0) = exp(-integral of p(0, t)). Positivity of phi'(0)
    is judged only when Im p(0, t) vanishes identically.

    Raises:
        NotNormalized: some p does not satisfy p(1) = 1
    """
    config = config or default_solver_config()
    for _, p in segments:
        if not is_normalized_at_one(p):
            raise NotNormalized("radial schedules need p(1, t) = 1")
    if segments:
        schedule = Schedule.of(*((d, Generator(0j, p)) for d, p in segments))
    else:
        schedule = Schedule(())
    _check_window(schedule, 0.0, horizon)
    mapping = EvolutionMap(schedule, 0.0, horizon, config)
    phi0 = complex(mapping(0j))
    derivative = mapping.derivative(0j)

    exponent = 0j
    for generator, a, b in schedule.pieces(0.0, horizon):
        exponent += (b - a) * complex(generator.p(0j))
    closed = complex(np.exp(-exponent))
    real = all(abs(complex(p(0j)).imag) <= 1e-12 for _, p in segments)
    positive = None
    if real:
        positive = 0.0 < derivative.real <= 1.0 + 1e-12 and abs(derivative.imag) <= 1e-12
    verdict = univalence_heuristic(mapping, grid or PolarGrid.with_size(200))
    return RadialReport(
        horizon=horizon,
        phi_at_zero=pair(phi0),
        derivative=pair(derivative),
        closed_form_derivative=pair(closed),
        modulus=abs(derivative),
        argument=math.atan2(derivative.imag, derivative.real),
        real_subfamily=real,
        positive=positive,
        univalence=verdict,
    )


class GridImagePoint(BaseModel):
    source: list[float]
    image: list[float] | None
    error: str | None = None


def grid_image(
    schedule: Schedule,
    s: float,
    t: float,
    grid: PolarGrid,
    config: SolverConfig | None = None,
) -> list[GridImagePoint]:
    """
    Images of a polar grid under phi_{s,t}.

    The grid is integrated as one vector; if that fails, points are solved one
    by one (in LOEWNER_LAB_THREADS workers) and per-point failures are recorded.
    """
    config = config or default_solver_config()
    mapping = EvolutionMap(schedule, s, t, config)
    points = grid.points()
    try:
        images = np.asarray(mapping(points))
        return [GridImagePoint(source=pair(z), image=pair(w)) for z, w in zip(points, images)]
    except SolverError as e:
        logger.warning(f"Vector grid solve failed ({e}); solving points individually")

    def solve_one(z: complex) -> GridImagePoint:
        try:
            return GridImagePoint(source=pair(z), image=pair(complex(mapping(complex(z)))))
        except SolverError as err:
            return GridImagePoint(source=pair(z), image=None, error=type(err).__name__)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(solve_one, points.tolist()))
