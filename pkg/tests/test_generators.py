"""Tests for generators, synthesis and semigroup flows."""

import math

import numpy as np
import pytest

from loewner_lab.diagnostics import RadialSchedule, denjoy_wolff_locate, fixed_point_report
from loewner_lab.disk import PolarGrid, hyperbolic_distance
from loewner_lab.errors import (
    ArityMismatch,
    InfeasibleSynthesis,
    InfiniteDerivative,
    InvalidPoint,
    NotAFixedPoint,
)
from loewner_lab.experiments import random_generator
from loewner_lab.generators import (
    DW_BOUNDARY_TOL,
    Generator,
    PickGenerator,
    angular_rate,
    bp_consistency,
    conjugate_generator,
    generator_eval,
    semigroup_flow,
    synthesize_generator,
)
from loewner_lab.herglotz import ClarkMeasure, HerglotzFunction, PickFunction


def test_generator_eval(hyperbolic, contraction):
    z = 0.3 + 0.2j
    assert generator_eval(hyperbolic, z) == pytest.approx((1 - z * z) / 2)
    assert generator_eval(contraction, z) == pytest.approx(-z)
    with pytest.raises(InvalidPoint):
        generator_eval(hyperbolic, 1.5)


def test_generator_derivative(hyperbolic):
    z = -0.4 + 0.1j
    assert complex(hyperbolic.derivative(z)) == pytest.approx(-z)


def test_angular_rates_hyperbolic(hyperbolic):
    assert angular_rate(hyperbolic, -1.0).value == pytest.approx(1.0)
    assert angular_rate(hyperbolic, 1.0).value == pytest.approx(-1.0)
    assert angular_rate(hyperbolic.scaled(2.0), -1.0).value == pytest.approx(2.0)


def test_angular_rate_errors(hyperbolic):
    with pytest.raises(NotAFixedPoint):
        angular_rate(hyperbolic, 1j)
    constant = Generator(1.0 + 0j, HerglotzFunction(ClarkMeasure(((1j, 1.0), (1.0 + 0j, 0.5)))))
    with pytest.raises(InfiniteDerivative):
        angular_rate(constant, 1j)


def test_conjugate_linear_field():
    """Test c zeta on the half-plane becomes c (1 - z^2)/2 on the disk"""
    c = 1.7
    disk = conjugate_generator(PickGenerator(PickFunction(beta=c)))
    z = 0.1 - 0.5j
    assert complex(disk(z)) == pytest.approx(c * (1 - z * z) / 2)
    assert disk.tau == 1.0


def test_conjugate_constant_field():
    disk = conjugate_generator(PickGenerator(PickFunction(gamma=2.0)))
    z = 0.35 + 0.25j
    assert complex(disk(z)) == pytest.approx((1 - z) ** 2)


def test_conjugate_matches_pushforward():
    pick = PickFunction(alpha=0.3, beta=0.8, atoms=((0.5, 0.4), (-1.2, 0.7)))
    disk = conjugate_generator(PickGenerator(pick))
    z = -0.2 + 0.45j
    zeta = 1j * (1 + z) / (1 - z)
    h_prime = 2j / (1 - z) ** 2
    assert complex(disk(z)) == pytest.approx(complex(pick(zeta)) / h_prime, rel=1e-12)


@pytest.mark.parametrize(
    "fixed, alpha, weight",
    [((-1.0, 1.0), 0.0, 1.0), ((-2.0, 1.0), 1.0, 2.0)],
)
def test_synthesize_examples(fixed, alpha, weight):
    generator = synthesize_generator(fixed, [0.0], 1.0)
    assert generator.pick.alpha == pytest.approx(alpha, abs=1e-14)
    assert generator.pick.atoms[0][1] == pytest.approx(weight)
    for x in fixed:
        assert abs(complex(generator(complex(x, 0.0)))) <= 1e-12


def test_synthesize_errors():
    with pytest.raises(ArityMismatch):
        synthesize_generator([-1.0, 0.0, 1.0], [2.0], 1.0)
    with pytest.raises(InfeasibleSynthesis):
        synthesize_generator([-1.0, 1.0], [5.0], 1.0)
    with pytest.raises(InfeasibleSynthesis):
        synthesize_generator([-1.0, 1.0], [0.0], -1.0)


def test_synthesized_rates_positive_weights():
    rng = np.random.default_rng(8)
    for _ in range(20):
        xs = np.cumsum(rng.uniform(0.2, 1.5, size=4)) - 2.0
        atoms = [rng.uniform(a + 0.05, b - 0.05) for a, b in zip(xs, xs[1:])]
        generator = synthesize_generator(xs.tolist(), atoms, 1.0)
        assert all(w > 0 for _, w in generator.pick.atoms)
        for x in xs:
            assert math.isfinite(angular_rate(generator, float(x)).value)


def test_rotated_generator(hyperbolic):
    rotation = 1j
    moved = hyperbolic.rotated(rotation)
    z = 0.2 + 0.1j
    assert moved.tau == pytest.approx(1j)
    assert complex(moved(rotation * z)) == pytest.approx(rotation * complex(hyperbolic(z)))


def test_semigroup_flow_closed_forms(hyperbolic, contraction, solver):
    assert semigroup_flow(hyperbolic, 0j, 1.0, solver) == pytest.approx(0.4621171573, abs=1e-9)
    assert semigroup_flow(contraction, 0.5, math.log(2.0), solver) == pytest.approx(0.25, abs=1e-9)
    assert semigroup_flow(hyperbolic, 0.3j, 0.0, solver) == 0.3j


def test_semigroup_flow_arrays(hyperbolic, solver):
    grid = PolarGrid(n_radii=3, n_angles=8, r_max=0.8).points()
    images = semigroup_flow(hyperbolic, grid, 0.7, solver)
    assert isinstance(images, np.ndarray)
    for z, w in zip(grid, images):
        expected = (z + math.tanh(0.35)) / (1 + z * math.tanh(0.35))
        assert w == pytest.approx(expected, abs=1e-8)


def test_semigroup_law(solver):
    rng = np.random.default_rng(21)
    grid = PolarGrid(n_radii=7, n_angles=7, r_max=0.8).points()
    for _ in range(3):
        xs = [-1.0, float(rng.uniform(0.2, 1.0))]
        pick = synthesize_generator(xs, [float(np.mean(xs))], float(rng.uniform(0.5, 2.0)))
        generator = conjugate_generator(pick)
        for s in (0.25, 0.5):
            for t in (0.25, 0.5):
                direct = semigroup_flow(generator, grid, s + t, solver)
                composed = semigroup_flow(generator, semigroup_flow(generator, grid, s, solver), t, solver)
                assert np.max(np.abs(direct - composed)) <= 1e-7


def test_bp_consistency(contraction, solver):
    report = bp_consistency(contraction, 0.5, config=solver)
    assert report.residuals[0] <= 5e-3
    assert report.residuals[0] > report.residuals[1] > report.residuals[2]
    assert report.order == pytest.approx(1.0, abs=0.1)
    assert report.extrapolated_residual < report.residuals[-1]


def test_semigroup_shares_boundary_points(hyperbolic, precise_solver):
    """Test every phi_t shares the Denjoy-Wolff point and boundary fixed points of G"""
    sched = RadialSchedule(8, 20)

    def phi(z):
        return semigroup_flow(hyperbolic, z, 0.8, precise_solver)

    report = fixed_point_report(phi, -1.0, sched)
    assert report.regular
    assert report.derivative_estimate == pytest.approx(math.exp(0.8), rel=1e-3)
    dw = denjoy_wolff_locate(phi, sched=sched)
    assert dw.classification == "boundary"
    assert complex(*dw.point) == pytest.approx(1.0, abs=1e-4)


def test_near_boundary_tau_is_snapped():
    p = HerglotzFunction(ClarkMeasure(((1.0 + 0j, 0.5),)))
    generator = Generator(1.0 - 1e-10, p)
    assert generator.boundary_dw
    assert generator.tau == 1.0
    assert angular_rate(generator, 1.0).value == pytest.approx(-1.0)
    inside = Generator(1.0 - 10 * DW_BOUNDARY_TOL, p)
    assert not inside.boundary_dw
    assert abs(inside.tau) < 1.0


def test_flows_contract_hyperbolic_distance(hyperbolic, solver):
    rng = np.random.default_rng(13)
    generators = [hyperbolic, *(random_generator(rng) for _ in range(4))]
    for generator in generators:
        for _ in range(10):
            z1, z2 = (complex(*rng.uniform(-0.6, 0.6, size=2)) for _ in range(2))
            w1, w2 = (semigroup_flow(generator, z, 0.7, solver) for z in (z1, z2))
            assert hyperbolic_distance(w1, w2) <= hyperbolic_distance(z1, z2) + 1e-7
