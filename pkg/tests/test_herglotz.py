"""Tests for Herglotz, Clark and Pick representations."""

import math

import numpy as np
import pytest

from loewner_lab.diagnostics import extrapolate
from loewner_lab.disk import BoundaryPoint
from loewner_lab.errors import (
    DegenerateMeasure,
    IdentityExcluded,
    NotNormalized,
    NotRegularContact,
    PoleAtAtom,
    PoleAtOne,
    SupportOutsideGap,
    UnsupportedMeasureClass,
)
from loewner_lab.herglotz import (
    ClarkMeasure,
    ContactConfiguration,
    HerglotzFunction,
    PickFunction,
    clark_to_nevanlinna,
    contact_regular,
    contact_value,
    displacement,
    dw_derivative_at_one,
    herglotz_eval,
    is_normalized_at_one,
    loewner_lemma_check,
    nevanlinna_to_clark,
    normalize_at_one,
    pick_eval,
    selfmap_from_clark,
)

LEMMA_PSI = PickFunction(alpha=0.0, beta=1.1, atoms=((0.0, 0.1),))


def test_herglotz_eval_positive_real_part():
    p = HerglotzFunction(ClarkMeasure(((1j, 0.5), (-1.0, 0.25)), 0.3), 0.7)
    rng = np.random.default_rng(0)
    for _ in range(50):
        z = complex(*rng.uniform(-0.7, 0.7, size=2))
        assert herglotz_eval(p, z).real >= 0.0
    assert herglotz_eval(p, 0j) == pytest.approx(complex(1.05, 0.7))


def test_herglotz_boundary_value():
    p = HerglotzFunction(ClarkMeasure(((-1.0 + 0j, 1.0),), 0.5))
    assert p.boundary_value(1j).real == pytest.approx(0.5)
    with pytest.raises(PoleAtAtom):
        p.boundary_value(-1.0)


def test_pick_eval_and_atoms():
    assert pick_eval(LEMMA_PSI, 1j) == pytest.approx(complex(0.0, 1.2))
    with pytest.raises(PoleAtAtom):
        pick_eval(LEMMA_PSI, 0.0)


def test_selfmap_examples():
    identity = selfmap_from_clark(ClarkMeasure(((1.0 + 0j, 1.0),)), 0.0)
    zero = selfmap_from_clark(ClarkMeasure((), 1.0), 0.0)
    negation = selfmap_from_clark(ClarkMeasure(((-1.0 + 0j, 1.0),)), 0.0)
    z = 0.3 - 0.4j
    assert complex(identity(z)) == pytest.approx(z)
    assert complex(zero(z)) == pytest.approx(0j, abs=1e-15)
    assert complex(negation(z)) == pytest.approx(-z)
    with pytest.raises(DegenerateMeasure):
        selfmap_from_clark(ClarkMeasure(), 0.0)


def test_selfmap_clark_constant():
    psi = selfmap_from_clark(ClarkMeasure(((1j, 0.5),), 0.5), 0.3)
    assert psi.clark_constant == pytest.approx(0.3)


def test_contact_regular():
    atom = ClarkMeasure(((-1.0 + 0j, 1.0),))
    assert contact_regular(atom, 1j)
    assert not contact_regular(atom, -1.0)
    assert not contact_regular(ClarkMeasure((), 1.0), 1j)


def test_contact_value_examples():
    assert contact_value(PickFunction(0.0, 2.0, ((0.0, 1.0),)), 1.0) == pytest.approx(1.0)
    assert contact_value(PickFunction(0.0, 1.0), 0.37) == pytest.approx(0.37)
    assert contact_value(LEMMA_PSI, -1.0) == pytest.approx(-1.0)
    with pytest.raises(NotRegularContact):
        contact_value(LEMMA_PSI, 0.0)


def test_contact_value_matches_epsilon_limit():
    """Test the boundary value agrees with lim Psi(x0 + i eps)"""
    rng = np.random.default_rng(11)
    for _ in range(50):
        atoms = tuple((float(t), float(rng.uniform(0.1, 1.0))) for t in rng.uniform(-3, 3, size=3))
        psi = PickFunction(float(rng.normal()), float(rng.uniform(0.0, 2.0)), atoms)
        x0 = float(rng.uniform(-3, 3))
        if min(abs(x0 - t) for t, _ in atoms) < 0.3:
            continue
        eps = 1e-2 * 2.0 ** -np.arange(8)
        samples = [complex(psi(complex(x0, e))) for e in eps]
        limit = extrapolate(samples).value
        assert abs(limit - contact_value(psi, x0)) <= 1e-6


def test_displacement_examples():
    assert displacement(LEMMA_PSI, -1.0, 0.5) == pytest.approx(1.35)
    assert displacement(LEMMA_PSI, 0.5, 1.0) == pytest.approx(0.65)
    assert displacement(PickFunction(0.0, 1.0), 0.2, 1.7) == pytest.approx(1.5)
    with pytest.raises(NotRegularContact):
        displacement(LEMMA_PSI, 0.0, 1.0)


def test_displacement_matches_direct_difference():
    rng = np.random.default_rng(5)
    for _ in range(100):
        atoms = tuple((float(t), float(rng.uniform(0.05, 1.0))) for t in rng.uniform(-2, 2, size=2))
        psi = PickFunction(float(rng.normal()), float(rng.uniform(0.0, 2.0)), atoms)
        a, b = sorted(rng.uniform(-3, 3, size=2))
        if min(abs(x - t) for x in (a, b) for t, _ in atoms) < 0.05:
            continue
        direct = contact_value(psi, b) - contact_value(psi, a)
        assert displacement(psi, a, b) == pytest.approx(direct, abs=1e-10 * max(1.0, abs(direct)))


def test_lemma_worked_example():
    report = loewner_lemma_check(LEMMA_PSI, ContactConfiguration((-1.0, 0.5, 1.0), 1))
    assert report.all_hold
    first, second = report.gaps
    assert (first.formula, first.relation, first.chord) == (pytest.approx(1.35), "<", 1.5)
    assert (second.formula, second.relation, second.chord) == (pytest.approx(0.65), ">", 0.5)
    assert report.telescoping_residual <= 1e-12


def test_lemma_second_example():
    w = 0.5
    psi = PickFunction(0.0, 1.0 + w, ((0.0, w),))
    report = loewner_lemma_check(psi, ContactConfiguration((-1.0, 0.25, 1.0), 1))
    assert report.all_hold
    assert not report.vacuous


def test_lemma_errors_and_vacuous_case():
    with pytest.raises(IdentityExcluded):
        loewner_lemma_check(PickFunction(0.0, 1.0), ContactConfiguration((-1.0, 1.0), 1))
    with pytest.raises(NotNormalized):
        loewner_lemma_check(PickFunction(0.5, 1.1, ((0.0, 0.1),)), ContactConfiguration((-1.0, 1.0), 1))
    with pytest.raises(SupportOutsideGap):
        loewner_lemma_check(LEMMA_PSI, ContactConfiguration((-1.0, -0.5, 1.0), 1))
    report = loewner_lemma_check(LEMMA_PSI, ContactConfiguration((-1.0, 1.0), 1))
    assert report.vacuous
    assert report.gaps[0].relation == "="
    assert report.all_hold


def test_clark_to_nevanlinna_examples():
    psi = clark_to_nevanlinna(ClarkMeasure(((-1.0 + 0j, 1.0),)), 0.0)
    assert psi.alpha == 0.0
    assert psi.beta == 0.0
    assert psi.atoms[0][0] == pytest.approx(0.0, abs=1e-15)
    assert psi.atoms[0][1] == 1.0
    identity = clark_to_nevanlinna(ClarkMeasure(((1.0 + 0j, 1.0),)), 0.0)
    assert identity.is_identity
    with pytest.raises(UnsupportedMeasureClass):
        clark_to_nevanlinna(ClarkMeasure((), 1.0), 0.0)


def test_nevanlinna_round_trip():
    measure = ClarkMeasure(((1j, 0.4), (1.0 + 0j, 0.3), (BoundaryPoint.from_angle(2.0).value, 0.2)))
    measure_back, c = nevanlinna_to_clark(clark_to_nevanlinna(measure, 0.6))
    assert c == pytest.approx(0.6)
    for loc, w in measure.atoms:
        assert measure_back.weight_at(loc) == pytest.approx(w)


def test_conjugation_identity():
    """Test Psi = H o psi o H^-1 on interior points"""
    measure = ClarkMeasure(((1j, 0.4), (-1.0 + 0j, 0.6)))
    psi_disk = selfmap_from_clark(measure, 0.2)
    psi_half = clark_to_nevanlinna(measure, 0.2)
    zeta = 0.4 + 1.3j
    z = (zeta - 1j) / (zeta + 1j)
    w = complex(psi_disk(z))
    assert complex(psi_half(zeta)) == pytest.approx(1j * (1 + w) / (1 - w), rel=1e-10)


def test_normalize_at_one():
    p = normalize_at_one([])
    assert p(0.3j) == pytest.approx(1.0)
    p = normalize_at_one([(1j, 0.5)])
    assert p.imag_const == pytest.approx(0.5)
    assert is_normalized_at_one(p)
    assert complex(p(0j)) == pytest.approx(complex(1.5, 0.5))
    with pytest.raises(PoleAtOne):
        normalize_at_one([(1.0 + 0j, 0.5)])


def test_dw_derivative_at_one():
    assert dw_derivative_at_one(ClarkMeasure(((1.0 + 0j, 0.5), (1j, 0.5)))) == pytest.approx(2.0)
    assert math.isinf(dw_derivative_at_one(ClarkMeasure(((1j, 1.0),))))


def test_contact_regular_truth_table():
    rng = np.random.default_rng(17)
    for _ in range(50):
        locations = [BoundaryPoint.from_angle(float(a)).value for a in rng.uniform(0, 2 * math.pi, size=3)]
        uniform = float(rng.uniform(0.1, 1.0)) if rng.uniform() < 0.5 else 0.0
        measure = ClarkMeasure(tuple((loc, float(rng.uniform(0.1, 1.0))) for loc in locations), uniform)
        on_atom = rng.uniform() < 0.3
        sigma0 = locations[int(rng.integers(0, 3))] if on_atom else BoundaryPoint.from_angle(
            float(rng.uniform(0, 2 * math.pi))
        ).value
        expected = uniform == 0.0 and not on_atom
        assert contact_regular(measure, sigma0) == expected


def test_epsilon_limit_converges_monotonically():
    rng = np.random.default_rng(23)
    for _ in range(20):
        atoms = tuple((float(t), float(rng.uniform(0.1, 1.0))) for t in rng.uniform(-3, 3, size=3))
        psi = PickFunction(float(rng.normal()), float(rng.uniform(0.0, 2.0)), atoms)
        x0 = float(rng.uniform(-3, 3))
        if min(abs(x0 - t) for t, _ in atoms) < 0.3:
            continue
        target = contact_value(psi, x0)
        errors = [abs(complex(psi(complex(x0, eps))) - target) for eps in (1e-2, 1e-4, 1e-6)]
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] <= 1e-3 * errors[0]


def test_pick_eval_maps_into_upper_half_plane():
    psi = PickFunction(0.4, 0.7, ((-1.0, 0.3), (0.5, 0.8)), gamma=0.2)
    for x in np.linspace(-4.0, 4.0, 17):
        for y in (1e-3, 0.1, 1.0, 10.0):
            assert pick_eval(psi, complex(x, y)).imag >= 0.0


def test_conjugation_identity_on_grid():
    """Test Psi = H o psi o H^-1 for random two-atom measures"""
    rng = np.random.default_rng(29)
    grid = [complex(x, y) for x in np.linspace(-2.0, 2.0, 10) for y in np.geomspace(0.05, 5.0, 10)]
    for _ in range(5):
        angles = rng.uniform(0.2, 2 * math.pi - 0.2, size=2)
        measure = ClarkMeasure(
            tuple((BoundaryPoint.from_angle(float(a)).value, float(rng.uniform(0.1, 1.0))) for a in angles)
        )
        c = float(rng.normal())
        psi_disk = selfmap_from_clark(measure, c)
        psi_half = clark_to_nevanlinna(measure, c)
        for zeta in grid:
            w = complex(psi_disk((zeta - 1j) / (zeta + 1j)))
            assert complex(psi_half(zeta)) == pytest.approx(1j * (1 + w) / (1 - w), rel=1e-9)


def test_displacements_telescope():
    rng = np.random.default_rng(31)
    for _ in range(50):
        atoms = tuple((float(t), float(rng.uniform(0.05, 1.0))) for t in rng.uniform(-2, 2, size=2))
        psi = PickFunction(float(rng.normal()), float(rng.uniform(0.0, 2.0)), atoms)
        points = sorted(float(x) for x in rng.uniform(-3, 3, size=int(rng.integers(3, 7))))
        if min(abs(x - t) for x in points for t, _ in atoms) < 0.05:
            continue
        total = sum(displacement(psi, a, b) for a, b in zip(points, points[1:]))
        direct = contact_value(psi, points[-1]) - contact_value(psi, points[0])
        assert total == pytest.approx(direct, abs=1e-10 * max(1.0, abs(direct)))
