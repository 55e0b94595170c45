"""
Herglotz and Pick representations.

A Herglotz function on the disk is stored through its Clark measure
(finitely many boundary atoms plus a multiple of normalized arc length) and an
imaginary constant:

    p(z) = iC + m + sum_k w_k (sigma_k + z)/(sigma_k - z)

A Pick function on the upper half-plane is stored through its Nevanlinna data:

    Psi(zeta) = alpha + beta zeta + i gamma + sum_k w_k (1 + t_k zeta)/(t_k - zeta)

This module also holds the boundary contact calculus on the real line
(contact values, displacements across gaps, the strict displacement
inequalities) and the conversions between the two charts.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel

from loewner_lab.disk import (
    BOUNDARY_TOL,
    BoundaryPoint,
    DiskLike,
    DiskPoint,
    HalfPlanePoint,
    cayley_inverse_value,
    cayley_value,
)
from loewner_lab.errors import (
    DegenerateConfiguration,
    DegenerateMeasure,
    IdentityExcluded,
    NotNormalized,
    NotRegularContact,
    PoleAtAtom,
    PoleAtOne,
    SupportOutsideGap,
    UnsupportedMeasureClass,
)

logger = logging.getLogger(__name__)

ATOM_TOL = 1e-12
NORMALIZATION_TOL = 1e-10


def _merge_atoms(pairs: Iterable[tuple[complex, float]], tol: float) -> list[tuple[complex, float]]:
    merged: list[tuple[complex, float]] = []
    for loc, weight in pairs:
        for i, (other, w) in enumerate(merged):
            if abs(loc - other) <= tol:
                merged[i] = (other, w + weight)
                break
        else:
            merged.append((loc, weight))
    return [(loc, w) for loc, w in merged if w > 0.0]


@dataclass(frozen=True)
class ClarkMeasure:
    """
    Finite positive measure on the unit circle: atoms plus uniform mass.

    Atoms closer than 1e-12 to each other are rejected.
    """

    atoms: tuple[tuple[complex, float], ...] = ()
    uniform_mass: float = 0.0

    def __post_init__(self) -> None:
        atoms = tuple((BoundaryPoint(complex(loc)).value, float(w)) for loc, w in self.atoms)
        for i, (loc, w) in enumerate(atoms):
            if not w > 0.0:
                raise DegenerateConfiguration(f"atom weight {w} must be positive")
            for other, _ in atoms[:i]:
                if abs(loc - other) <= ATOM_TOL:
                    raise DegenerateConfiguration(f"atoms at {other} and {loc} coincide")
        if self.uniform_mass < 0.0:
            raise DegenerateConfiguration("uniform mass must be non-negative")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "uniform_mass", float(self.uniform_mass))

    @property
    def locations(self) -> np.ndarray:
        return np.array([loc for loc, _ in self.atoms], dtype=complex)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)

    @property
    def total_mass(self) -> float:
        return self.uniform_mass + sum(w for _, w in self.atoms)

    def weight_at(self, point: DiskLike) -> float:
        """Mass of the atom at ``point`` (0 when there is none)."""
        value = complex(point)
        for loc, w in self.atoms:
            if abs(loc - value) <= ATOM_TOL:
                return w
        return 0.0

    def has_atom_at(self, point: DiskLike) -> bool:
        return self.weight_at(point) > 0.0

    def scaled(self, factor: float) -> ClarkMeasure:
        if factor <= 0.0:
            return ClarkMeasure()
        return ClarkMeasure(
            tuple((loc, factor * w) for loc, w in self.atoms), factor * self.uniform_mass
        )

    def rotated(self, rotation: complex) -> ClarkMeasure:
        return ClarkMeasure(tuple((rotation * loc, w) for loc, w in self.atoms), self.uniform_mass)

    def plus(self, other: ClarkMeasure) -> ClarkMeasure:
        atoms = _merge_atoms(list(self.atoms) + list(other.atoms), ATOM_TOL)
        return ClarkMeasure(tuple(atoms), self.uniform_mass + other.uniform_mass)


@dataclass(frozen=True)
class HerglotzFunction:
    """Holomorphic p on the disk with Re p >= 0, given by (measure, C)."""

    measure: ClarkMeasure = field(default_factory=ClarkMeasure)
    imag_const: float = 0.0

    def __call__(self, z: complex | np.ndarray) -> complex | np.ndarray:
        value = 1j * self.imag_const + self.measure.uniform_mass + 0 * z
        for loc, w in self.measure.atoms:
            value = value + w * (loc + z) / (loc - z)
        return value

    def derivative(self, z: complex | np.ndarray) -> complex | np.ndarray:
        value = 0j * z
        for loc, w in self.measure.atoms:
            value = value + 2.0 * w * loc / (loc - z) ** 2
        return value

    def boundary_value(self, sigma: DiskLike) -> complex:
        """
        Angular limit at a boundary point that carries no atom.

        The real part is the uniform mass; atom terms are purely imaginary on the circle.

        Raises:
            PoleAtAtom: if sigma is an atom of the measure
        """
        point = BoundaryPoint(complex(sigma)).value
        if self.measure.has_atom_at(point):
            raise PoleAtAtom(f"{point} is an atom of the Clark measure")
        imag = self.imag_const
        for loc, w in self.measure.atoms:
            imag += w * ((loc + point) / (loc - point)).imag
        return complex(self.measure.uniform_mass, imag)

    def scaled(self, factor: float) -> HerglotzFunction:
        if factor <= 0.0:
            return HerglotzFunction()
        return HerglotzFunction(self.measure.scaled(factor), factor * self.imag_const)

    def rotated(self, rotation: complex) -> HerglotzFunction:
        """p(z / rotation) as a Herglotz function (atoms rotated)."""
        return HerglotzFunction(self.measure.rotated(rotation), self.imag_const)

    def plus(self, other: HerglotzFunction) -> HerglotzFunction:
        return HerglotzFunction(
            self.measure.plus(other.measure), self.imag_const + other.imag_const
        )

    @property
    def is_zero(self) -> bool:
        return self.measure.total_mass == 0.0 and self.imag_const == 0.0


@dataclass(frozen=True)
class PickFunction:
    """Holomorphic Psi on the upper half-plane with Im Psi >= 0, in Nevanlinna form."""

    alpha: float = 0.0
    beta: float = 0.0
    atoms: tuple[tuple[float, float], ...] = ()
    gamma: float = 0.0

    def __post_init__(self) -> None:
        atoms = tuple((float(t), float(w)) for t, w in self.atoms)
        if self.beta < 0.0 or self.gamma < 0.0:
            raise DegenerateConfiguration("beta and gamma must be non-negative")
        for i, (t, w) in enumerate(atoms):
            if not w > 0.0:
                raise DegenerateConfiguration(f"atom weight {w} must be positive")
            if any(abs(t - other) <= ATOM_TOL for other, _ in atoms[:i]):
                raise DegenerateConfiguration(f"duplicate atom at {t}")
        object.__setattr__(self, "atoms", atoms)

    def __call__(self, zeta: complex | np.ndarray) -> complex | np.ndarray:
        value = self.alpha + self.beta * zeta + 1j * self.gamma
        for t, w in self.atoms:
            value = value + w * (1 + t * zeta) / (t - zeta)
        return value

    def derivative(self, zeta: complex | np.ndarray) -> complex | np.ndarray:
        value = self.beta + 0j * zeta
        for t, w in self.atoms:
            value = value + w * (1 + t * t) / (t - zeta) ** 2
        return value

    def has_atom_at(self, x: float) -> bool:
        return any(abs(t - x) <= ATOM_TOL for t, _ in self.atoms)

    @property
    def is_identity(self) -> bool:
        return (
            not self.atoms
            and self.gamma == 0.0
            and abs(self.beta - 1.0) <= ATOM_TOL
            and abs(self.alpha) <= ATOM_TOL
        )


def herglotz_eval(p: HerglotzFunction, z: DiskPoint | complex) -> complex:
    """Evaluate p at an interior point."""
    return complex(p(DiskPoint(complex(z)).value))


def pick_eval(psi: PickFunction, zeta: HalfPlanePoint | complex) -> complex:
    """
    Evaluate Psi on the closed upper half-plane.

    Raises:
        PoleAtAtom: if zeta is real and carries an atom
    """
    point = HalfPlanePoint(complex(zeta))
    if point.is_real and psi.has_atom_at(point.value.real):
        raise PoleAtAtom(f"{point.value.real} is an atom of the Pick measure")
    return complex(psi(point.value))


class ClarkSelfMap:
    """
    Self-map psi = (q - 1)/(q + 1) of the disk built from a Clark measure.

    q(z) = iC + m + sum w_k (sigma_k + z)/(sigma_k - z); q(0) has imaginary part C.
    """

    def __init__(self, measure: ClarkMeasure, imag_const: float):
        if measure.total_mass <= 0.0:
            raise DegenerateMeasure("Clark measure has zero total mass")
        self.measure = measure
        self.imag_const = imag_const
        self.herglotz = HerglotzFunction(measure, imag_const)

    def __call__(self, z: complex | np.ndarray) -> complex | np.ndarray:
        q = self.herglotz(z)
        return (q - 1) / (q + 1)

    @property
    def value_at_zero(self) -> complex:
        return complex(self(0j))

    @property
    def clark_constant(self) -> float:
        """Im (1 + psi(0))/(1 - psi(0))."""
        w = self.value_at_zero
        return float(((1 + w) / (1 - w)).imag)


def selfmap_from_clark(measure: ClarkMeasure, imag_const: float) -> ClarkSelfMap:
    """Disk self-map whose Herglotz transform has Clark data (measure, C)."""
    psi = ClarkSelfMap(measure, imag_const)
    logger.debug(f"Clark self-map with {len(measure.atoms)} atoms, psi(0)={psi.value_at_zero}")
    return psi


def contact_regular(measure: ClarkMeasure, sigma0: BoundaryPoint | complex) -> bool:
    """True when sigma0 is a regular contact point: no atom there and no uniform part."""
    return measure.uniform_mass == 0.0 and not measure.has_atom_at(complex(sigma0))


def contact_value(psi: PickFunction, x0: float) -> float:
    """
    Real boundary value of Psi at a point away from the atoms.

    Raises:
        NotRegularContact: x0 is an atom, or Psi has an absolutely continuous part
    """
    if psi.has_atom_at(x0):
        raise NotRegularContact(f"{x0} is an atom of the Pick measure")
    if psi.gamma > 0.0:
        raise NotRegularContact("Psi has an absolutely continuous part; boundary values are not real")
    return float(complex(psi(complex(x0, 0.0))).real)


def displacement(psi: PickFunction, x_j: float, x_j1: float) -> float:
    """
    Psi(x_{j+1}) - Psi(x_j) through the representation:

        (x_{j+1} - x_j) [beta + sum w (1 + t^2)/((t - x_j)(t - x_{j+1}))]
    """
    if not x_j < x_j1:
        raise DegenerateConfiguration(f"displacement needs x_j < x_j1, got {x_j}, {x_j1}")
    for x in (x_j, x_j1):
        if psi.has_atom_at(x):
            raise NotRegularContact(f"{x} is an atom of the Pick measure")
    if psi.gamma > 0.0:
        raise NotRegularContact("Psi has an absolutely continuous part")
    bracket = psi.beta
    for t, w in psi.atoms:
        bracket += w * (1 + t * t) / ((t - x_j) * (t - x_j1))
    return (x_j1 - x_j) * bracket


@dataclass(frozen=True)
class ContactConfiguration:
    """Increasing real contact points x_1 < ... < x_n with a designated gap k (1-based)."""

    points: tuple[float, ...]
    gap_index: int

    def __post_init__(self) -> None:
        points = tuple(float(x) for x in self.points)
        if len(points) < 2:
            raise DegenerateConfiguration("a contact configuration needs at least two points")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise DegenerateConfiguration("contact points must be strictly increasing")
        if not 1 <= self.gap_index <= len(points) - 1:
            raise DegenerateConfiguration(f"gap index {self.gap_index} out of range")
        object.__setattr__(self, "points", points)

    @property
    def gap(self) -> tuple[float, float]:
        return self.points[self.gap_index - 1], self.points[self.gap_index]


class GapRecord(BaseModel):
    """Displacement across one gap and the inequality it must satisfy."""

    index: int
    left: float
    right: float
    chord: float
    formula: float
    direct: float
    relation: str
    holds: bool


class DisplacementReport(BaseModel):
    """Outcome of the strict displacement inequalities for one configuration."""

    gap_index: int
    gaps: list[GapRecord]
    vacuous: bool
    cross_validation_residual: float
    telescoping_residual: float
    all_hold: bool


def loewner_lemma_check(psi: PickFunction, cfg: ContactConfiguration) -> DisplacementReport:
    """
    Check the displacement inequalities across the gaps of a contact configuration.

    With the endpoints fixed and the measure supported inside gap k, the image of
    gap k is strictly shorter than the gap and every other gap is strictly stretched.
    For two points the statement reduces to the telescoping identity.

    Raises:
        IdentityExcluded: Psi is the identity
        NotNormalized: Psi does not fix x_1 and x_n
        SupportOutsideGap: an atom lies outside the open gap k
    """
    if psi.is_identity:
        raise IdentityExcluded("the identity satisfies no strict inequality")
    points = cfg.points
    first, last = points[0], points[-1]
    for x in (first, last):
        if abs(contact_value(psi, x) - x) > NORMALIZATION_TOL * max(1.0, abs(x)):
            raise NotNormalized(f"Psi({x}) != {x}")
    left, right = cfg.gap
    for t, _ in psi.atoms:
        if not left < t < right:
            raise SupportOutsideGap(f"atom {t} is outside gap ({left}, {right})")

    vacuous = len(points) == 2
    values = [contact_value(psi, x) for x in points]
    gaps: list[GapRecord] = []
    for j in range(len(points) - 1):
        a, b = points[j], points[j + 1]
        chord = b - a
        formula = displacement(psi, a, b)
        direct = values[j + 1] - values[j]
        if vacuous:
            relation = "="
            holds = abs(direct - chord) <= NORMALIZATION_TOL * max(1.0, abs(chord))
        elif j + 1 == cfg.gap_index:
            relation = "<"
            holds = formula < chord
        else:
            relation = ">"
            holds = formula > chord
        gaps.append(
            GapRecord(
                index=j + 1,
                left=a,
                right=b,
                chord=chord,
                formula=formula,
                direct=direct,
                relation=relation,
                holds=holds,
            )
        )

    cross = max(abs(g.formula - g.direct) for g in gaps)
    telescoping = abs(sum(g.formula for g in gaps) - (last - first))
    return DisplacementReport(
        gap_index=cfg.gap_index,
        gaps=gaps,
        vacuous=vacuous,
        cross_validation_residual=cross,
        telescoping_residual=telescoping,
        all_hold=all(g.holds for g in gaps),
    )


def clark_to_nevanlinna(measure: ClarkMeasure, imag_const: float) -> PickFunction:
    """
    Pick function Psi = H o psi o H^{-1} of the Clark self-map.

    An atom at 1 becomes the linear coefficient beta; an atom at sigma != 1
    becomes an atom at H(sigma) with the same weight; alpha = -C.

    Raises:
        UnsupportedMeasureClass: uniform mass is present
    """
    if measure.uniform_mass != 0.0:
        raise UnsupportedMeasureClass("uniform mass has no atomic Nevanlinna counterpart")
    beta = 0.0
    atoms: list[tuple[float, float]] = []
    for loc, w in measure.atoms:
        if abs(loc - 1.0) <= ATOM_TOL:
            beta += w
        else:
            atoms.append((float(complex(cayley_value(loc)).real), w))
    return PickFunction(alpha=-imag_const, beta=beta, atoms=tuple(sorted(atoms)))


def nevanlinna_to_clark(psi: PickFunction) -> tuple[ClarkMeasure, float]:
    """Inverse of clark_to_nevanlinna; gamma becomes uniform mass."""
    atoms: list[tuple[complex, float]] = [
        (complex(cayley_inverse_value(complex(t, 0.0))), w) for t, w in psi.atoms
    ]
    if psi.beta > 0.0:
        atoms.append((1.0 + 0j, psi.beta))
    return ClarkMeasure(tuple(atoms), psi.gamma), -psi.alpha


def normalize_at_one(atoms: Sequence[tuple[BoundaryPoint | complex, float]]) -> HerglotzFunction:
    """
    Herglotz function with unit uniform mass, the given atoms and p(1) = 1.

    The imaginary constant c' = -sum w Im[(sigma + 1)/(sigma - 1)] cancels the
    imaginary part of the atoms at the boundary point 1.

    Raises:
        PoleAtOne: an atom sits at 1
    """
    pairs: list[tuple[complex, float]] = []
    for loc, w in atoms:
        value = BoundaryPoint(complex(loc)).value
        if abs(value - 1.0) <= BOUNDARY_TOL:
            raise PoleAtOne("normalize_at_one needs atoms away from 1")
        pairs.append((value, float(w)))
    shift = -sum(w * ((loc + 1) / (loc - 1)).imag for loc, w in pairs)
    return HerglotzFunction(ClarkMeasure(tuple(pairs), 1.0), shift)


def is_normalized_at_one(p: HerglotzFunction, tol: float = NORMALIZATION_TOL) -> bool:
    try:
        return abs(p.boundary_value(1.0 + 0j) - 1.0) <= tol
    except PoleAtAtom:
        return False


def dw_derivative_at_one(measure: ClarkMeasure) -> float:
    """
    Angular derivative at 1 of the Clark self-map built from ``measure``.

    Equals 1/beta where beta is the mass at 1; infinite when there is no atom at 1.
    """
    beta = measure.weight_at(1.0 + 0j)
    if beta <= 0.0:
        return math.inf
    return 1.0 / beta
