"""
Disk and half-plane geometry.

Point types for the unit disk, its boundary circle and the upper half-plane,
Moebius maps, the Cayley transform H(z) = i(1+z)/(1-z), the hyperbolic
distance (curvature -1) and counter-clockwise ordering of boundary points.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from loewner_lab.errors import DegenerateConfiguration, InvalidPoint, PoleAtOne

BOUNDARY_TOL = 1e-12
POLE_TOL = 1e-12


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk."""

    value: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", complex(self.value))
        if not abs(self.value) < 1.0:
            raise InvalidPoint(f"{self.value} is not inside the unit disk")

    def __complex__(self) -> complex:
        return self.value


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the unit circle, renormalized to unit modulus."""

    value: complex

    def __post_init__(self) -> None:
        value = complex(self.value)
        if abs(abs(value) - 1.0) > BOUNDARY_TOL:
            raise InvalidPoint(f"{value} is not on the unit circle")
        object.__setattr__(self, "value", value / abs(value))

    def __complex__(self) -> complex:
        return self.value

    @classmethod
    def from_angle(cls, angle: float) -> BoundaryPoint:
        return cls(cmath.exp(1j * angle))

    @property
    def angle(self) -> float:
        """Argument in [0, 2*pi)."""
        return math.atan2(self.value.imag, self.value.real) % (2.0 * math.pi)


@dataclass(frozen=True)
class HalfPlanePoint:
    """A point of the closed upper half-plane (real points are boundary chart points)."""

    value: complex

    def __post_init__(self) -> None:
        value = complex(self.value)
        if value.imag < -BOUNDARY_TOL:
            raise InvalidPoint(f"{value} is below the real axis")
        if value.imag < 0.0:
            value = complex(value.real, 0.0)
        object.__setattr__(self, "value", value)

    def __complex__(self) -> complex:
        return self.value

    @property
    def is_real(self) -> bool:
        return self.value.imag == 0.0


DiskLike = DiskPoint | BoundaryPoint | complex


class MoebiusMap:
    """
    Linear fractional map z -> (az + b)/(cz + d).

    Coefficients are stored as a 2x2 matrix scaled so that ad - bc = 1
    (up to the sign of the square root). Composition is matrix product.
    """

    def __init__(self, a: complex, b: complex, c: complex, d: complex):
        det = a * d - b * c
        if det == 0:
            raise DegenerateConfiguration("Moebius coefficients have ad - bc = 0")
        self.matrix = np.array([[a, b], [c, d]], dtype=complex) / cmath.sqrt(det)

    @classmethod
    def _from_matrix(cls, matrix: np.ndarray) -> MoebiusMap:
        return cls(matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1])

    @property
    def coefficients(self) -> tuple[complex, complex, complex, complex]:
        m = self.matrix
        return complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1])

    def __call__(self, z: complex | np.ndarray) -> complex | np.ndarray:
        a, b, c, d = self.coefficients
        return (a * z + b) / (c * z + d)

    def compose(self, other: MoebiusMap) -> MoebiusMap:
        """Return self o other."""
        return MoebiusMap._from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> MoebiusMap:
        a, b, c, d = self.coefficients
        return MoebiusMap(d, -b, -c, a)

    @classmethod
    def disk_automorphism(cls, a: complex, theta: float = 0.0) -> MoebiusMap:
        """z -> e^{i theta} (z - a)/(1 - conj(a) z), |a| < 1."""
        if not abs(a) < 1.0:
            raise InvalidPoint(f"automorphism parameter {a} is not inside the disk")
        rot = cmath.exp(1j * theta)
        return cls(rot, -rot * a, -complex(a).conjugate(), 1.0)

    @classmethod
    def hyperbolic(cls, displacement: float) -> MoebiusMap:
        """Time-``displacement`` map of the flow of (1 - z^2)/2, fixing -1 and 1."""
        return cls.disk_automorphism(-math.tanh(displacement / 2.0))

    @classmethod
    def cayley(cls) -> MoebiusMap:
        return cls(1j, 1j, -1.0, 1.0)

    @classmethod
    def cayley_inverse(cls) -> MoebiusMap:
        return cls(1.0, -1j, 1.0, 1j)


def _as_complex(z: DiskLike | HalfPlanePoint) -> complex:
    return complex(z)


def cayley_value(z: complex | np.ndarray) -> complex | np.ndarray:
    """Unchecked H(z) = i(1+z)/(1-z); works on arrays."""
    return 1j * (1 + z) / (1 - z)


def cayley_inverse_value(zeta: complex | np.ndarray) -> complex | np.ndarray:
    """Unchecked H^{-1}(zeta) = (zeta - i)/(zeta + i); works on arrays."""
    return (zeta - 1j) / (zeta + 1j)


def cayley(z: DiskLike) -> HalfPlanePoint:
    """
    Cayley transform of the disk onto the upper half-plane.

    Raises:
        PoleAtOne: if z equals 1 within tolerance
    """
    value = _as_complex(z)
    if abs(value - 1.0) <= POLE_TOL:
        raise PoleAtOne("the point 1 is mapped to infinity")
    zeta = complex(cayley_value(value))
    if isinstance(z, BoundaryPoint):
        zeta = complex(zeta.real, 0.0)
    return HalfPlanePoint(zeta)


def cayley_inverse(zeta: HalfPlanePoint | complex) -> DiskPoint | BoundaryPoint:
    """Inverse Cayley transform; real inputs land on the unit circle."""
    value = HalfPlanePoint(_as_complex(zeta)).value
    image = complex(cayley_inverse_value(value))
    if value.imag == 0.0:
        return BoundaryPoint(image)
    return DiskPoint(image)


def hyperbolic_distance(z1: DiskLike, z2: DiskLike) -> float:
    """Poincare distance 2 artanh(|z1 - z2| / |1 - conj(z1) z2|)."""
    a = DiskPoint(_as_complex(z1)).value
    b = DiskPoint(_as_complex(z2)).value
    ratio = abs(a - b) / abs(1 - a.conjugate() * b)
    return 2.0 * math.atanh(min(ratio, 1.0 - 1e-16))


def relative_angle(point: complex, anchor: complex) -> float:
    """Counter-clockwise angle from anchor to point, in [0, 2*pi)."""
    ratio = complex(point) / complex(anchor)
    return math.atan2(ratio.imag, ratio.real) % (2.0 * math.pi)


def arc_order(points: Sequence[BoundaryPoint], anchor: BoundaryPoint) -> list[int]:
    """
    Counter-clockwise ordering of boundary points starting just after the anchor.

    Args:
        points: Pairwise distinct boundary points
        anchor: Boundary point distinct from all points

    Returns:
        Permutation of indices into ``points``

    Raises:
        DegenerateConfiguration: duplicate points or anchor among the points
    """
    anchor_value = complex(anchor)
    values = [complex(p) for p in points]
    for i, v in enumerate(values):
        if abs(v - anchor_value) <= BOUNDARY_TOL:
            raise DegenerateConfiguration(f"point {i} coincides with the anchor")
        for j in range(i):
            if abs(v - values[j]) <= BOUNDARY_TOL:
                raise DegenerateConfiguration(f"points {j} and {i} coincide")
    angles = [relative_angle(v, anchor_value) for v in values]
    return sorted(range(len(values)), key=lambda i: angles[i])


@dataclass(frozen=True)
class PolarGrid:
    """Interior sample grid: ``n_radii`` circles up to ``r_max``, ``n_angles`` points each, plus 0."""

    n_radii: int = 10
    n_angles: int = 24
    r_max: float = 0.9

    def __post_init__(self) -> None:
        if self.n_radii < 1 or self.n_angles < 1:
            raise DegenerateConfiguration("grid needs at least one radius and one angle")
        if not 0.0 < self.r_max < 1.0:
            raise InvalidPoint(f"grid radius {self.r_max} must lie in (0, 1)")

    @property
    def size(self) -> int:
        return 1 + self.n_radii * self.n_angles

    def points(self) -> np.ndarray:
        radii = self.r_max * np.arange(1, self.n_radii + 1) / self.n_radii
        angles = 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles
        ring = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
        return np.concatenate([np.zeros(1, dtype=complex), ring])

    @classmethod
    def with_size(cls, size: int, r_max: float = 0.9) -> PolarGrid:
        """Smallest square-ish grid with at least ``size`` points."""
        n_angles = max(8, 2 * math.ceil(math.sqrt(max(size, 1)) / 2))
        n_radii = max(1, math.ceil((size - 1) / n_angles))
        return cls(n_radii=n_radii, n_angles=n_angles, r_max=r_max)
