"""
Experiment suites tying the library together.

Every suite is deterministic given its seed; samples are drawn from child
seeds of a numpy SeedSequence so that they can run in worker threads and
still be merged in sample order. Failures carry the seed and configuration
needed to reproduce them.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Any, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from loewner_lab.config import SolverConfig, default_solver_config, worker_count
from loewner_lab.diagnostics import (
    DenjoyWolffReport,
    FixedPointReport,
    RadialSchedule,
    UnivalenceVerdict,
    denjoy_wolff_locate,
    fixed_point_report,
    pair,
    univalence_heuristic,
)
from loewner_lab.disk import BoundaryPoint, PolarGrid, cayley_inverse_value, cayley_value, relative_angle
from loewner_lab.errors import DiagnosticsError
from loewner_lab.evolution import (
    ConeSpec,
    EvolutionMap,
    Schedule,
    Segment,
    cone_membership,
    conic_combine,
    ef_absolute_continuity_check,
    ef_composition_check,
    radial_classical,
)
from loewner_lab.generators import (
    Generator,
    angular_rate,
    bp_consistency,
    conjugate_generator,
    semigroup_flow,
    synthesize_generator,
)
from loewner_lab.herglotz import (
    ClarkMeasure,
    ContactConfiguration,
    HerglotzFunction,
    PickFunction,
    loewner_lemma_check,
    normalize_at_one,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

MIN_CHART_GAP = 0.2
BETA_RANGE = (0.5, 2.0)
# atoms stay in the middle 40% of each gap; the angular rates grow like 1/distance
ATOM_INSET = 0.3
SUITE_RADII = RadialSchedule(k_min=8, k_max=20)
DIAGNOSTIC_TOL = 1e-12


class ConeSpecModel(BaseModel):
    """JSON form of a ConeSpec: boundary points as angles in radians."""

    model_config = ConfigDict(extra="forbid")

    fixed: list[float] = Field(..., min_length=1)
    tau: float | None = None

    def to_spec(self) -> ConeSpec:
        tau = None if self.tau is None else BoundaryPoint.from_angle(self.tau).value
        return ConeSpec(tuple(BoundaryPoint.from_angle(a).value for a in self.fixed), tau)


class ExperimentConfig(BaseModel):
    """Inputs of one cone experiment."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    spec: ConeSpecModel
    segment_count: int = Field(3, ge=1, le=16)
    duration_total: float = Field(1.0, gt=0.0)
    grid_size: int = Field(200, ge=200)
    solver: SolverConfig = Field(default_factory=SolverConfig)


def _parallel_map(func: Callable[[int], T], count: int) -> list[T]:
    workers = worker_count()
    if workers == 1:
        return [func(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(count)))


def _log_uniform(rng: np.random.Generator, low: float, high: float) -> float:
    return float(math.exp(rng.uniform(math.log(low), math.log(high))))


def chart_points(fixed: Sequence[complex], tau: complex) -> list[float]:
    """Real coordinates H(sigma / tau) of boundary points in the chart sending tau to infinity."""
    return sorted(float(complex(cayley_value(complex(f) / tau)).real) for f in fixed)


def synthesize_on_circle(
    rng: np.random.Generator, fixed: Sequence[complex], tau: complex
) -> Generator:
    """
    Random disk generator with boundary fixed points ``fixed`` and Denjoy-Wolff point tau.

    Synthesized in the half-plane chart where tau sits at infinity, conjugated
    to the disk and rotated so that 1 moves to tau.
    """
    xs = chart_points(fixed, tau)
    atoms = [rng.uniform(a + ATOM_INSET * (b - a), b - ATOM_INSET * (b - a)) for a, b in zip(xs, xs[1:])]
    beta = _log_uniform(rng, *BETA_RANGE)
    pick = synthesize_generator(xs, atoms, beta)
    return conjugate_generator(pick).rotated(tau)


def random_cone_spec(rng: np.random.Generator, card: int, boundary_tau: bool = True) -> ConeSpecModel:
    """Random cone specification with ``card`` fixed points at chart gaps of at least 0.2."""
    tau = float(rng.uniform(0.0, 2.0 * math.pi))
    xs = [float(rng.uniform(-1.5, -0.5))]
    for _ in range(card - 1):
        xs.append(xs[-1] + MIN_CHART_GAP + float(rng.exponential(0.3)))
    rotation = BoundaryPoint.from_angle(tau).value
    angles = [
        BoundaryPoint(rotation * complex(cayley_inverse_value(complex(x, 0.0)))).angle for x in xs
    ]
    return ConeSpecModel(fixed=angles, tau=tau if boundary_tau else None)


def _random_free_tau(rng: np.random.Generator, fixed: Sequence[complex]) -> complex:
    """Boundary point in the widest arc between points of F, away from its ends."""
    anchor = fixed[0]
    angles = sorted(relative_angle(f, anchor) for f in fixed) + [2.0 * math.pi]
    widths = [b - a for a, b in zip(angles, angles[1:])]
    k = int(np.argmax(widths))
    offset = rng.uniform(angles[k] + 0.25 * widths[k], angles[k + 1] - 0.25 * widths[k])
    return complex(anchor) * complex(math.cos(offset), math.sin(offset))


class FixedPointCheck(BaseModel):
    report: FixedPointReport
    expected_derivative: float
    relative_error: float
    passed: bool


class ConeRunReport(BaseModel):
    """Cone membership and boundary behaviour of phi_{0,T} for one experiment."""

    seed: int
    config: dict[str, Any]
    member: bool
    fixed_points: list[FixedPointCheck]
    denjoy_wolff: DenjoyWolffReport | None
    denjoy_wolff_status: str
    univalence: UnivalenceVerdict | None
    failures: list[str]
    passed: bool


def build_cone_schedule(cfg: ExperimentConfig) -> tuple[Schedule, ConeSpec]:
    """Random schedule in the cone of cfg.spec, segment by segment."""
    spec = cfg.spec.to_spec()
    rng = np.random.default_rng(cfg.seed)
    durations = rng.dirichlet(np.ones(cfg.segment_count)) * cfg.duration_total
    segments = []
    for duration in durations:
        tau = spec.tau if spec.tau is not None else _random_free_tau(rng, spec.fixed)
        segments.append(Segment(float(duration), synthesize_on_circle(rng, spec.fixed, tau)))
    return Schedule(tuple(segments)), spec


def run_theorem1_suite(cfg: ExperimentConfig) -> ConeRunReport:
    """
    Synthesize a cone schedule and check the boundary behaviour of phi_{0,T}.

    Checks: cone membership, radial fixed-point reports at every point of F with
    derivatives matching the multipliers exp(sum d_i lambda_i(sigma)), the
    Denjoy-Wolff point (when tau is prescribed) and the univalence screen.

    Raises:
        DegenerateConfiguration: tau belongs to F
        InfeasibleSynthesis: from segment synthesis
    """
    schedule, spec = build_cone_schedule(cfg)
    failures: list[str] = []
    cone = cone_membership(schedule, spec)
    if not cone.member:
        failures.append("cone membership")

    horizon = schedule.total_duration
    precise = EvolutionMap(schedule, 0.0, horizon, cfg.solver.tightened(DIAGNOSTIC_TOL))
    checks: list[FixedPointCheck] = []
    for sigma in spec.fixed:
        exponent = sum(
            seg.duration * angular_rate(seg.generator, sigma).value for seg in schedule.segments
        )
        expected = math.exp(exponent)
        report = fixed_point_report(precise, sigma, SUITE_RADII)
        error = abs(report.derivative_estimate - expected) / expected
        ok = report.regular and report.limit_residual <= 1e-6 and error <= 1e-3
        if not ok:
            failures.append(f"fixed point {pair(sigma)}")
        checks.append(
            FixedPointCheck(report=report, expected_derivative=expected, relative_error=error, passed=ok)
        )

    dw: DenjoyWolffReport | None = None
    if spec.tau is None:
        status = "not prescribed"
    else:
        try:
            dw = denjoy_wolff_locate(precise, sched=SUITE_RADII)
            hit = (
                dw.classification == "boundary"
                and dw.point is not None
                and abs(complex(*dw.point) - spec.tau) <= 1e-4
                and dw.consistent
            )
            status = "located" if hit else "mismatch"
        except DiagnosticsError as e:
            status = f"failed: {type(e).__name__}"
        if status != "located":
            failures.append(f"Denjoy-Wolff point {status}")

    verdict = univalence_heuristic(
        EvolutionMap(schedule, 0.0, horizon, cfg.solver), PolarGrid.with_size(cfg.grid_size)
    )
    if not verdict.passed:
        failures.append("univalence")

    if failures:
        logger.warning(f"Cone experiment seed={cfg.seed} failed: {failures}")
    return ConeRunReport(
        seed=cfg.seed,
        config=cfg.model_dump(),
        member=cone.member,
        fixed_points=checks,
        denjoy_wolff=dw,
        denjoy_wolff_status=status,
        univalence=verdict,
        failures=failures,
        passed=not failures,
    )


class CombinationCheck(BaseModel):
    index: int
    member: bool
    additivity_residual: float
    passed: bool


class ConeSuiteReport(BaseModel):
    """Cone experiments on random specs plus closure under conic combination."""

    seed: int
    runs: list[ConeRunReport]
    combinations: list[CombinationCheck]
    passed: bool


def run_cone_suite(seed: int, count: int = 10, solver: SolverConfig | None = None) -> ConeSuiteReport:
    """Random (F, tau) specs with Card(F) in 1..4, each run through run_theorem1_suite."""
    solver = solver or default_solver_config()
    children = np.random.SeedSequence(seed).spawn(count)

    def one(i: int) -> tuple[ConeRunReport, CombinationCheck]:
        rng = np.random.default_rng(children[i])
        card = int(rng.integers(1, 5))
        cfg = ExperimentConfig(
            seed=int(rng.integers(0, 2**31 - 1)),
            spec=random_cone_spec(rng, card),
            segment_count=int(rng.integers(1, 4)),
            solver=solver,
        )
        run = run_theorem1_suite(cfg)
        spec = cfg.spec.to_spec()
        assert spec.tau is not None
        first = synthesize_on_circle(rng, spec.fixed, spec.tau)
        second = synthesize_on_circle(rng, spec.fixed, spec.tau)
        a, b = float(rng.uniform(0.1, 2.0)), float(rng.uniform(0.1, 2.0))
        combined = conic_combine(a, first, b, second)
        member = cone_membership(Schedule.of((1.0, combined)), spec).member
        residual = 0.0
        if member:
            for sigma in spec.fixed:
                lam = angular_rate(combined, sigma).value
                parts = a * angular_rate(first, sigma).value + b * angular_rate(second, sigma).value
                residual = max(residual, abs(lam - parts))
        check = CombinationCheck(
            index=i, member=member, additivity_residual=residual, passed=member and residual <= 1e-12
        )
        return run, check

    results = _parallel_map(one, count)
    runs = [r for r, _ in results]
    combinations = [c for _, c in results]
    return ConeSuiteReport(
        seed=seed,
        runs=runs,
        combinations=combinations,
        passed=all(r.passed for r in runs) and all(c.passed for c in combinations),
    )


class ReachabilityCase(BaseModel):
    index: int
    real_subfamily: bool
    phi_at_zero: list[float]
    derivative: list[float]
    closed_form_derivative: list[float]
    univalent: bool
    failures: list[str]


class ReachabilityReport(BaseModel):
    """Normalized radial evolutions: phi(0) = 0, univalence, phi'(0) in (0, 1]."""

    seed: int
    horizon: float
    samples: int
    passed_count: int
    cases: list[ReachabilityCase]
    passed: bool


def random_normalized_herglotz(rng: np.random.Generator, real: bool) -> HerglotzFunction:
    """normalize_at_one of random atoms avoiding 1; conjugate-symmetric atoms when ``real``."""
    atoms: list[tuple[complex, float]] = []
    if real:
        for _ in range(int(rng.integers(1, 3))):
            theta = float(rng.uniform(0.1, math.pi - 0.1))
            w = float(rng.uniform(0.1, 1.0))
            atoms += [(complex(math.cos(theta), math.sin(theta)), w), (complex(math.cos(theta), -math.sin(theta)), w)]
        if rng.uniform() < 0.5:
            atoms.append((-1.0 + 0j, float(rng.uniform(0.1, 1.0))))
    else:
        for _ in range(int(rng.integers(1, 4))):
            theta = float(rng.uniform(0.1, 2.0 * math.pi - 0.1))
            atoms.append((complex(math.cos(theta), math.sin(theta)), float(rng.uniform(0.1, 1.0))))
    return normalize_at_one(atoms)


def run_theoremA_reachability(
    samples: int, seed: int, horizon: float = 1.0, config: SolverConfig | None = None
) -> ReachabilityReport:
    """
    Random normalized radial schedules; even samples use the real sub-family.

    Every map must fix 0 and pass the univalence screen; in the real
    sub-family phi'(0) must lie in (0, 1] and match exp(-integral Re p(0, t)).
    """
    config = config or default_solver_config()
    children = np.random.SeedSequence(seed).spawn(samples)
    grid = PolarGrid.with_size(200)

    def one(i: int) -> ReachabilityCase:
        rng = np.random.default_rng(children[i])
        real = i % 2 == 0
        count = int(rng.integers(1, 5))
        durations = rng.dirichlet(np.ones(count)) * max(horizon, 1.0)
        segments = [(float(d), random_normalized_herglotz(rng, real)) for d in durations]
        report = radial_classical(segments, horizon, config, grid)
        failures = []
        if abs(complex(*report.phi_at_zero)) > 1e-10:
            failures.append("phi(0) != 0")
        if not report.univalence.passed:
            failures.append("univalence")
        if real:
            closed = complex(*report.closed_form_derivative)
            if not report.positive:
                failures.append("phi'(0) not in (0, 1]")
            if abs(complex(*report.derivative) - closed) > 1e-9 * max(1.0, abs(closed)):
                failures.append("phi'(0) differs from exp(-integral p(0, t))")
        return ReachabilityCase(
            index=i,
            real_subfamily=real,
            phi_at_zero=report.phi_at_zero,
            derivative=report.derivative,
            closed_form_derivative=report.closed_form_derivative,
            univalent=report.univalence.passed,
            failures=failures,
        )

    cases = _parallel_map(one, samples)
    passed_count = sum(1 for c in cases if not c.failures)
    return ReachabilityReport(
        seed=seed,
        horizon=horizon,
        samples=samples,
        passed_count=passed_count,
        cases=cases,
        passed=passed_count == samples,
    )


def endpoint_normalized_pick(points: Sequence[float], atoms: Sequence[tuple[float, float]]) -> PickFunction:
    """
    Pick function with the given atoms fixing the first and last point.

    Solves alpha + beta x + S(x) = x at both ends, S being the atom sum.
    """
    first, last = points[0], points[-1]

    def atom_sum(x: float) -> float:
        return sum(w * (1 + t * x) / (t - x) for t, w in atoms)

    beta = 1.0 - (atom_sum(last) - atom_sum(first)) / (last - first)
    alpha = first - beta * first - atom_sum(first)
    return PickFunction(alpha=alpha, beta=beta, atoms=tuple(atoms))


class DisplacementCase(BaseModel):
    index: int
    points: list[float]
    gap_index: int
    atoms: list[list[float]]
    beta: float
    vacuous: bool
    cross_validation_residual: float
    telescoping_residual: float
    passed: bool


class DisplacementSweepReport(BaseModel):
    """Strict displacement inequalities over random contact configurations."""

    seed: int
    count: int
    strict_count: int
    cases: list[DisplacementCase]
    passed: bool


def random_contact_configuration(
    rng: np.random.Generator, n_range: tuple[int, int] = (3, 6)
) -> tuple[ContactConfiguration, PickFunction]:
    """Random points with gaps >= 0.2 and atoms inside gap k, endpoints fixed."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    points = [float(rng.uniform(-3.0, -1.0))]
    for _ in range(n - 1):
        points.append(points[-1] + MIN_CHART_GAP + float(rng.exponential(0.8)))
    k = int(rng.integers(1, n))
    left, right = points[k - 1], points[k]
    span = right - left
    locations = sorted(
        {float(t) for t in rng.uniform(left + 0.1 * span, right - 0.1 * span, size=int(rng.integers(1, 4)))}
    )
    atoms = [(t, float(rng.uniform(0.05, 1.0))) for t in locations]
    return ContactConfiguration(tuple(points), k), endpoint_normalized_pick(points, atoms)


def run_lemma53_sweep(count: int, seed: int, n_range: tuple[int, int] = (3, 6)) -> DisplacementSweepReport:
    """Check the strict inequalities and the displacement identity on random configurations."""
    children = np.random.SeedSequence(seed).spawn(count)

    def one(i: int) -> DisplacementCase:
        rng = np.random.default_rng(children[i])
        cfg, psi = random_contact_configuration(rng, n_range)
        report = loewner_lemma_check(psi, cfg)
        scale = max(1.0, max(abs(x) for x in cfg.points))
        ok = (
            report.all_hold
            and psi.beta >= 1.0
            and report.cross_validation_residual <= 1e-10 * scale
            and report.telescoping_residual <= 1e-10 * scale
        )
        return DisplacementCase(
            index=i,
            points=list(cfg.points),
            gap_index=cfg.gap_index,
            atoms=[[t, w] for t, w in psi.atoms],
            beta=psi.beta,
            vacuous=report.vacuous,
            cross_validation_residual=report.cross_validation_residual,
            telescoping_residual=report.telescoping_residual,
            passed=ok,
        )

    cases = _parallel_map(one, count)
    strict = sum(1 for c in cases if c.passed)
    return DisplacementSweepReport(seed=seed, count=count, strict_count=strict, cases=cases, passed=strict == count)


class EvolutionSuiteReport(BaseModel):
    """Semigroup law, Berkson-Porta consistency and the evolution-family axioms."""

    seed: int
    semigroup_max_residual: float
    synthesized_semigroup_max_residual: float
    consistency_max_residual: float
    consistency_min_order: float
    identity_exact: bool
    composition_max_residual: float
    continuity_violations: int
    failures: list[str]
    passed: bool


def random_generator(rng: np.random.Generator) -> Generator:
    """Disk generator with random Denjoy-Wolff point (interior or boundary) and Herglotz data."""
    if rng.uniform() < 0.5:
        tau = complex(*rng.uniform(-0.5, 0.5, size=2))
    else:
        tau = BoundaryPoint.from_angle(float(rng.uniform(0.0, 2.0 * math.pi))).value
    atoms = tuple(
        (BoundaryPoint.from_angle(float(rng.uniform(0.0, 2.0 * math.pi))).value, float(rng.uniform(0.05, 0.5)))
        for _ in range(int(rng.integers(0, 3)))
    )
    measure = ClarkMeasure(atoms, float(rng.uniform(0.2, 1.0)))
    return Generator(tau, HerglotzFunction(measure, float(rng.uniform(-1.0, 1.0))))


def run_evolution_suite(seed: int, count: int = 10, config: SolverConfig | None = None) -> EvolutionSuiteReport:
    """
    Property checks on random generators and schedules.

    Semigroup law on a 50-point grid for (s, t) in {0.25, 0.5}^2, for random
    and for synthesized cone generators; Berkson-Porta consistency on random
    (G, z) pairs; the evolution-family axioms on random schedules of at most
    five segments.
    """
    config = config or default_solver_config()
    rng = np.random.default_rng(seed)
    grid = PolarGrid(n_radii=7, n_angles=7, r_max=0.8).points()
    failures: list[str] = []

    def law_residual(generator: Generator) -> float:
        worst = 0.0
        for s in (0.25, 0.5):
            for t in (0.25, 0.5):
                direct = semigroup_flow(generator, grid, s + t, config)
                composed = semigroup_flow(generator, semigroup_flow(generator, grid, s, config), t, config)
                worst = max(worst, float(np.max(np.abs(direct - composed))))
        return worst

    semigroup = 0.0
    synthesized = 0.0
    for _ in range(count):
        semigroup = max(semigroup, law_residual(random_generator(rng)))
        spec = random_cone_spec(rng, int(rng.integers(1, 4))).to_spec()
        assert spec.tau is not None
        synthesized = max(synthesized, law_residual(synthesize_on_circle(rng, spec.fixed, spec.tau)))
    if max(semigroup, synthesized) > 1e-7:
        failures.append("semigroup law")

    consistency = 0.0
    min_order = math.inf
    for _ in range(2 * count):
        generator = random_generator(rng)
        z = complex(*rng.uniform(-0.5, 0.5, size=2))
        report = bp_consistency(generator, z, config=config)
        consistency = max(consistency, report.residuals[0])
        min_order = min(min_order, report.order)
    if consistency > 1e-2 or min_order < 0.8:
        failures.append("Berkson-Porta consistency")

    identity = True
    composition = 0.0
    violations = 0
    points = PolarGrid(n_radii=2, n_angles=6, r_max=0.7).points()
    for i in range(count):
        schedule = Schedule.of(
            *((float(rng.uniform(0.1, 0.5)), random_generator(rng)) for _ in range(int(rng.integers(1, 6))))
        )
        total = schedule.total_duration
        s, u, t = np.sort(rng.uniform(0.0, total, size=3)).tolist()
        z = complex(points[int(rng.integers(0, points.size))])
        identity = identity and complex(EvolutionMap(schedule, s, s, config)(z)) == z
        composition = max(
            composition, ef_composition_check(schedule, points, s, u, t, config).max_residual
        )
        continuity = ef_absolute_continuity_check(schedule, z, total, config, samples=100, seed=seed + i)
        violations += continuity.violations
    if not identity:
        failures.append("identity")
    if composition > 1e-7:
        failures.append("composition")
    if violations:
        failures.append("absolute continuity")

    return EvolutionSuiteReport(
        seed=seed,
        semigroup_max_residual=semigroup,
        synthesized_semigroup_max_residual=synthesized,
        consistency_max_residual=consistency,
        consistency_min_order=min_order,
        identity_exact=identity,
        composition_max_residual=composition,
        continuity_violations=violations,
        failures=failures,
        passed=not failures,
    )


__all__ = [
    "ExperimentConfig",
    "ConeSpecModel",
    "run_theorem1_suite",
    "run_cone_suite",
    "run_theoremA_reachability",
    "run_lemma53_sweep",
    "run_evolution_suite",
]
