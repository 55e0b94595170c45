"""
Error hierarchy for Loewner Lab.

Every failure raised by the library derives from LoewnerLabError. The groups
mirror the layers of the package so that callers (the CLI in particular) can
map whole families of failures onto exit codes.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from loewner_lab.ode import Trajectory


class LoewnerLabError(Exception):
    """Base class for all Loewner Lab errors."""


# Geometry


class GeometryError(LoewnerLabError):
    """Invalid points or point configurations."""


class InvalidPoint(GeometryError):
    """A value violates the invariant of its point type."""


class PoleAtOne(GeometryError):
    """The point 1 was passed to an operation with a pole at 1."""


class DegenerateConfiguration(GeometryError):
    """Coincident points, or an anchor/DW point that collides with a configuration."""


# Herglotz and Pick representations


class RepresentationError(LoewnerLabError):
    """Invalid use of a Herglotz or Pick representation."""


class PoleAtAtom(RepresentationError):
    """Evaluation at a real point carrying an atom."""


class DegenerateMeasure(RepresentationError):
    """A measure with zero total mass where a self-map is required."""


class NotRegularContact(RepresentationError):
    """The boundary value is not real (atom or absolutely continuous part present)."""


class NotNormalized(RepresentationError):
    """A normalization (endpoint fix, p(1)=1) does not hold."""


class IdentityExcluded(RepresentationError):
    """The identity map was supplied where a non-identity map is required."""


class UnsupportedMeasureClass(RepresentationError):
    """The measure has a part that this conversion does not represent."""


class SupportOutsideGap(RepresentationError):
    """An atom of the measure lies outside the designated gap."""


# Generators


class GeneratorError(LoewnerLabError):
    """Failures in building or analysing infinitesimal generators."""


class NotAFixedPoint(GeneratorError):
    """The generator does not vanish at the requested boundary point."""


class InfiniteDerivative(GeneratorError):
    """The angular rate is infinite (the point is an atom of the Herglotz measure)."""


class InfeasibleSynthesis(GeneratorError):
    """No generator with positive weights interpolates the requested data."""


class ArityMismatch(GeneratorError):
    """Atom count does not match the number of gaps between fixed points."""


class MixedDenjoyWolff(GeneratorError):
    """Conic combination of generators with different Denjoy-Wolff points."""


# Solver


class SolverError(LoewnerLabError):
    """ODE integration failed; the partial trajectory is attached."""

    def __init__(self, message: str, trajectory: Trajectory | None = None):
        super().__init__(message)
        self.trajectory = trajectory


class GuardBandStall(SolverError):
    """Step size underflow while keeping the solution inside the guard band."""


class MaxStepsExceeded(SolverError):
    """The step budget of the solver configuration was exhausted."""


# Boundary diagnostics


class DiagnosticsError(LoewnerLabError):
    """Numerical boundary analysis could not produce a value."""


class NoAngularLimit(DiagnosticsError):
    """The radial extrapolation table does not converge."""


class InfiniteAngularDerivative(DiagnosticsError):
    """Difference quotients grow along the radius."""


class Inconclusive(DiagnosticsError):
    """Iteration budget exhausted, or an estimate contradicts the self-map property."""
