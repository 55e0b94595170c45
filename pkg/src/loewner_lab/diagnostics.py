"""
Boundary diagnostics for holomorphic self-maps of the disk.

Maps are plain evaluators: callables accepting a complex numpy array and
returning the images. Angular limits and derivatives are estimated along
radii r_k = 1 - 2^-k with Richardson extrapolation on the geometric ladder.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel
from scipy.spatial import cKDTree

from loewner_lab.disk import (
    BoundaryPoint,
    DiskLike,
    MoebiusMap,
    PolarGrid,
    hyperbolic_distance,
)
from loewner_lab.errors import (
    DegenerateConfiguration,
    DiagnosticsError,
    Inconclusive,
    InfiniteAngularDerivative,
    NoAngularLimit,
)

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]

NOISE_FLOOR = 1e-6
NON_CONVERGENCE = 1e-3
GROWTH_RATIO = 1.1

DEFAULT_SEEDS = (0.3 + 0.0j, -0.25 + 0.4j, -0.45 - 0.1j, 0.1 - 0.6j, 0.55 + 0.35j)


def pair(value: complex) -> list[float]:
    """JSON form [re, im] of a complex number."""
    value = complex(value)
    return [value.real, value.imag]


def memoized(evaluator: Evaluator) -> Evaluator:
    """Remember the last array evaluation (limits and derivatives share the radial samples)."""
    last: dict[bytes, np.ndarray] = {}

    def wrapped(z: np.ndarray) -> np.ndarray:
        key = np.asarray(z, dtype=complex).tobytes()
        if key not in last:
            last.clear()
            last[key] = np.asarray(evaluator(z), dtype=complex)
        return last[key]

    return wrapped


@dataclass(frozen=True)
class RadialSchedule:
    """Radii r_k = 1 - 2^-k for k = k_min..k_max."""

    k_min: int = 8
    k_max: int = 24

    def __post_init__(self) -> None:
        if self.k_max - self.k_min < 4:
            raise DegenerateConfiguration("radial schedule needs at least five radii")
        if self.k_min < 1:
            raise DegenerateConfiguration("k_min must be positive")

    def radii(self) -> np.ndarray:
        return 1.0 - 2.0 ** -np.arange(self.k_min, self.k_max + 1, dtype=float)


@dataclass(frozen=True)
class Extrapolation:
    value: complex
    residual: float
    order: int
    tails: tuple[float, ...]


def richardson_table(values: Sequence[complex], step_ratio: float = 2.0, depth: int = 2) -> list[list[complex]]:
    """Richardson levels; level m removes the h^m term of the previous level."""
    levels = [list(values)]
    for m in range(1, depth + 1):
        last_level = levels[-1]
        if len(last_level) < 2:
            break
        mult = step_ratio**m
        factor = 1.0 / (mult - 1.0)
        levels.append(
            [factor * (mult * last_level[i + 1] - last_level[i]) for i in range(len(last_level) - 1)]
        )
    return levels


def _column_estimate(column: list[complex], order: int) -> Extrapolation:
    tails = tuple(abs(column[i] - column[i - 1]) for i in range(1, len(column)))
    best = int(np.argmin(tails))
    return Extrapolation(value=complex(column[best + 1]), residual=tails[best], order=order, tails=tails)


def _diverges(estimate: Extrapolation) -> bool:
    scale = max(1.0, abs(estimate.value))
    tails = estimate.tails
    rising = len(tails) >= 4 and tails[-3] < tails[-2] < tails[-1] and tails[-4] < tails[-3]
    if rising and estimate.residual > NOISE_FLOOR * scale:
        return True
    return estimate.residual > NON_CONVERGENCE * scale


def extrapolate(values: Sequence[complex], step_ratio: float = 2.0) -> Extrapolation:
    """
    Extrapolate a sequence sampled at h, h/r, h/r^2, ... to h = 0.

    The first-order column is used unless the second-order column has a smaller
    Cauchy-tail residual.

    Raises:
        NoAngularLimit: the tails keep growing or never fall below the convergence floor
    """
    levels = richardson_table(values, step_ratio)
    estimate = _column_estimate(levels[1], 1)
    if len(levels) > 2 and len(levels[2]) >= 2:
        second = _column_estimate(levels[2], 2)
        if second.residual < estimate.residual:
            estimate = second
    logger.debug(f"Richardson order {estimate.order}: residual {estimate.residual:.3e}")
    if _diverges(estimate):
        raise NoAngularLimit(f"extrapolation table diverges (residual {estimate.residual:.3e})")
    return estimate


@dataclass(frozen=True)
class RadialLimit:
    value: complex
    residual: float


@dataclass(frozen=True)
class AngularDerivative:
    value: float
    residual: float
    imag_residue: float

    def __float__(self) -> float:
        return self.value


def _radial_samples(evaluator: Evaluator, sigma: complex, sched: RadialSchedule) -> tuple[np.ndarray, np.ndarray]:
    radial = sched.radii() * sigma
    return radial, np.asarray(evaluator(radial), dtype=complex)


def radial_limit(
    evaluator: Evaluator, sigma: DiskLike, sched: RadialSchedule | None = None
) -> RadialLimit:
    """
    Limit of phi(r sigma) as r -> 1 along the radius.

    Raises:
        NoAngularLimit: the extrapolation table diverges
    """
    sched = sched or RadialSchedule()
    point = BoundaryPoint(complex(sigma)).value
    _, images = _radial_samples(evaluator, point, sched)
    estimate = extrapolate(images)
    return RadialLimit(value=estimate.value, residual=estimate.residual)


def radial_derivative(
    evaluator: Evaluator,
    sigma: DiskLike,
    omega: complex,
    sched: RadialSchedule | None = None,
) -> AngularDerivative:
    """
    Angular derivative at a contact point, normalized to sigma phi'(sigma)/omega.

    At a fixed point this is phi'(sigma) itself; at any contact point it is
    positive, and it is multiplicative under composition.

    Raises:
        NoAngularLimit: omega is not unimodular
        InfiniteAngularDerivative: difference quotients grow along the radius
        Inconclusive: the estimate is not positive, so phi is not a self-map near sigma
    """
    sched = sched or RadialSchedule()
    point = BoundaryPoint(complex(sigma)).value
    if abs(abs(omega) - 1.0) > 1e-6:
        raise NoAngularLimit(f"limit {omega} is not on the unit circle")
    radial, images = _radial_samples(evaluator, point, sched)
    quotients = (images - omega) / (radial - point)

    sizes = np.abs(quotients)
    ratios = sizes[-4:] / sizes[-5:-1]
    if np.all(ratios >= GROWTH_RATIO):
        raise InfiniteAngularDerivative(f"difference quotients grow at {point}")
    try:
        estimate = extrapolate(quotients)
    except NoAngularLimit as e:
        raise InfiniteAngularDerivative(f"difference quotients do not settle at {point}") from e

    normalized = point * estimate.value / omega
    if normalized.real <= 0.0:
        raise Inconclusive(f"non-positive angular derivative {normalized} at {point}")
    return AngularDerivative(
        value=normalized.real, residual=estimate.residual, imag_residue=abs(normalized.imag)
    )


class FixedPointReport(BaseModel):
    """Radial diagnosis of a boundary point expected to be fixed."""

    point: list[float]
    limit: list[float] | None
    limit_residual: float
    extrapolation_residual: float
    derivative_estimate: float
    regular: bool


def fixed_point_report(
    evaluator: Evaluator, sigma: DiskLike, sched: RadialSchedule | None = None
) -> FixedPointReport:
    """Radial limit and angular derivative at sigma; failures yield regular=False."""
    evaluator = memoized(evaluator)
    point = BoundaryPoint(complex(sigma)).value
    try:
        limit = radial_limit(evaluator, point, sched)
    except NoAngularLimit as e:
        logger.info(f"No radial limit at {point}: {e}")
        return FixedPointReport(
            point=pair(point),
            limit=None,
            limit_residual=math.inf,
            extrapolation_residual=math.inf,
            derivative_estimate=math.inf,
            regular=False,
        )
    try:
        derivative = radial_derivative(evaluator, point, limit.value, sched)
        estimate = derivative.value
    except DiagnosticsError as e:
        logger.info(f"No finite angular derivative at {point}: {e}")
        estimate = math.inf
    return FixedPointReport(
        point=pair(point),
        limit=pair(limit.value),
        limit_residual=abs(limit.value - point),
        extrapolation_residual=limit.residual,
        derivative_estimate=estimate,
        regular=math.isfinite(estimate) and estimate > 0.0,
    )


class DenjoyWolffReport(BaseModel):
    """Location and type of the Denjoy-Wolff point of a self-map."""

    classification: str
    point: list[float] | None
    derivative: float | None
    iterations: int
    consistent: bool


def _fit_moebius(z: np.ndarray, w: np.ndarray) -> MoebiusMap:
    """Moebius map sending z[0:3] to w[0:3]."""

    def normalizer(a: complex, b: complex, c: complex) -> MoebiusMap:
        return MoebiusMap(b - c, -a * (b - c), b - a, -c * (b - a))

    return normalizer(*w[:3]).inverse().compose(normalizer(*z[:3]))


def _interior_fixed_point(fit: MoebiusMap) -> complex | None:
    a, b, c, d = fit.coefficients
    if abs(c) < 1e-14:
        roots = [b / (1 - a / d)] if abs(a - d) > 1e-14 else []
    else:
        roots = list(np.roots([c, d - a, -b]))
    inside = [complex(r) for r in roots if abs(r) < 1.0 - 1e-9]
    return inside[0] if inside else None


def _is_isometry(z: np.ndarray, w: np.ndarray) -> bool:
    for i in range(len(z)):
        for j in range(i):
            before = hyperbolic_distance(z[i], z[j])
            after = hyperbolic_distance(w[i], w[j])
            if abs(before - after) > 1e-9 * max(1.0, before):
                return False
    return True


def denjoy_wolff_locate(
    evaluator: Evaluator,
    seeds: Sequence[complex] = DEFAULT_SEEDS,
    budget: int = 10_000,
    tol: float = 1e-9,
    boundary_threshold: float = 1.0 - 1e-6,
    sched: RadialSchedule | None = None,
) -> DenjoyWolffReport:
    """
    Iterate the map from interior seeds until the orbits settle.

    Orbits converging inside give an interior Denjoy-Wolff point with
    |phi'(tau)| <= 1; orbits reaching |z| > boundary_threshold give the boundary
    cluster point, cross-validated by its radial limit and angular derivative.
    Distance-preserving maps with an interior fixed point are reported as
    elliptic automorphisms.

    Raises:
        Inconclusive: the iteration budget is exhausted
    """
    z = np.array(seeds, dtype=complex)
    for n in range(1, budget + 1):
        w = np.asarray(evaluator(z), dtype=complex)
        if n == 1 and len(z) >= 3 and _is_isometry(z, w):
            center = _interior_fixed_point(_fit_moebius(z, w))
            if center is not None:
                return DenjoyWolffReport(
                    classification="elliptic_automorphism",
                    point=pair(center),
                    derivative=1.0,
                    iterations=n,
                    consistent=True,
                )
        if np.max(np.abs(w - z)) < tol:
            tau = complex(np.mean(w))
            h = 1e-5
            ends = np.asarray(evaluator(np.array([tau + h, tau - h])), dtype=complex)
            derivative = abs(ends[0] - ends[1]) / (2 * h)
            return DenjoyWolffReport(
                classification="interior",
                point=pair(tau),
                derivative=derivative,
                iterations=n,
                consistent=derivative <= 1.0 + 1e-6,
            )
        if np.min(np.abs(w)) > boundary_threshold:
            lead = w[int(np.argmax(np.abs(w)))]
            tau = lead / abs(lead)
            return _boundary_report(evaluator, complex(tau), n, sched)
        z = w
    raise Inconclusive(f"no convergence within {budget} iterations")


def _boundary_report(
    evaluator: Evaluator, tau: complex, iterations: int, sched: RadialSchedule | None
) -> DenjoyWolffReport:
    derivative: float | None = None
    consistent = False
    try:
        limit = radial_limit(evaluator, tau, sched)
        derivative = radial_derivative(evaluator, tau, limit.value, sched).value
        consistent = abs(limit.value - tau) <= 1e-4 and derivative <= 1.0 + 1e-3
    except DiagnosticsError as e:
        logger.warning(f"Boundary Denjoy-Wolff cross-check failed at {tau}: {e}")
    return DenjoyWolffReport(
        classification="boundary",
        point=pair(tau),
        derivative=derivative,
        iterations=iterations,
        consistent=consistent,
    )


class ChainRuleReport(BaseModel):
    """Angular derivative of a composition against the product of the factors."""

    point: list[float]
    inner_limit: list[float]
    composite: float
    outer: float
    inner: float
    residual: float


def chain_rule_check(
    phi: Evaluator, psi: Evaluator, sigma: DiskLike, sched: RadialSchedule | None = None
) -> ChainRuleReport:
    """
    Compare (psi o phi)'(sigma) with psi'(omega) phi'(sigma), omega = phi(sigma).

    Raises:
        NoAngularLimit, InfiniteAngularDerivative: from the three extrapolations
    """
    point = BoundaryPoint(complex(sigma)).value
    omega = radial_limit(phi, point, sched).value
    inner = radial_derivative(phi, point, omega, sched).value
    omega = BoundaryPoint(omega / abs(omega)).value
    outer_limit = radial_limit(psi, omega, sched).value
    outer = radial_derivative(psi, omega, outer_limit, sched).value

    def composite_map(z: np.ndarray) -> np.ndarray:
        return psi(phi(z))

    composite_limit = radial_limit(composite_map, point, sched).value
    composite = radial_derivative(composite_map, point, composite_limit, sched).value
    product = outer * inner
    return ChainRuleReport(
        point=pair(point),
        inner_limit=pair(omega),
        composite=composite,
        outer=outer,
        inner=inner,
        residual=abs(composite - product) / abs(product),
    )


class UnivalenceVerdict(BaseModel):
    """Outcome of the injectivity screen; a heuristic, not a proof."""

    passed: bool
    witness: list[list[float]] | None
    min_distance_ratio: float
    winding_numbers: list[int]


def univalence_heuristic(
    evaluator: Evaluator, grid: PolarGrid, circle_points: int = 512
) -> UnivalenceVerdict:
    """
    Screen a map for injectivity on a grid.

    Each image point is compared with its nearest image neighbour: the pair fails
    when the image distance is at most 1e-10 times the preimage distance. In
    addition the winding number of phi - phi(0) along three concentric circles
    must be 1.
    """
    if grid.size < 200:
        raise DegenerateConfiguration(f"univalence screen needs >= 200 points, got {grid.size}")
    points = grid.points()
    radii = grid.r_max * np.array([1.0 / 3.0, 2.0 / 3.0, 1.0])
    angles = 2.0 * np.pi * np.arange(circle_points) / circle_points
    circles = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    images = np.asarray(evaluator(np.concatenate([points, circles])), dtype=complex)
    grid_images = images[: points.size]
    circle_images = images[points.size :].reshape(3, circle_points)

    tree = cKDTree(np.column_stack([grid_images.real, grid_images.imag]))
    distances, indices = tree.query(np.column_stack([grid_images.real, grid_images.imag]), k=2)
    own = np.arange(points.size)
    # duplicated images may be returned before the point itself
    neighbours = np.where(indices[:, 0] == own, indices[:, 1], indices[:, 0])
    ratios = distances[:, 1] / np.abs(points - points[neighbours])
    worst = int(np.argmin(ratios))
    min_ratio = float(ratios[worst])

    center = grid_images[0]
    windings = []
    for row in circle_images:
        shifted = row - center
        if np.min(np.abs(shifted)) == 0.0:
            windings.append(0)
            continue
        phase = np.unwrap(np.angle(np.append(shifted, shifted[0])))
        windings.append(int(round((phase[-1] - phase[0]) / (2.0 * np.pi))))

    collision = min_ratio <= 1e-10
    passed = not collision and all(n == 1 for n in windings)
    witness = None if passed else [pair(points[worst]), pair(points[neighbours[worst]])]
    return UnivalenceVerdict(
        passed=passed, witness=witness, min_distance_ratio=min_ratio, winding_numbers=windings
    )
