"""Tests for the experiment suites."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from loewner_lab.errors import DegenerateConfiguration
from loewner_lab.evolution import cone_membership
from loewner_lab.experiments import (
    ConeSpecModel,
    ExperimentConfig,
    build_cone_schedule,
    chart_points,
    endpoint_normalized_pick,
    random_cone_spec,
    run_cone_suite,
    run_evolution_suite,
    run_lemma53_sweep,
    run_theorem1_suite,
    run_theoremA_reachability,
    synthesize_on_circle,
)
from loewner_lab.generators import angular_rate


def test_experiment_config_validation():
    spec = ConeSpecModel(fixed=[1.0])
    with pytest.raises(ValidationError):
        ExperimentConfig(spec=spec, segment_count=17)
    with pytest.raises(ValidationError):
        ExperimentConfig(spec=spec, grid_size=100)
    with pytest.raises(ValidationError):
        ConeSpecModel(fixed=[])


def test_tau_in_fixed_rejected():
    cfg = ExperimentConfig(spec=ConeSpecModel(fixed=[0.0, 2.0], tau=2.0))
    with pytest.raises(DegenerateConfiguration):
        run_theorem1_suite(cfg)


def test_synthesize_on_circle_places_points():
    rng = np.random.default_rng(2)
    spec = random_cone_spec(rng, 3).to_spec()
    generator = synthesize_on_circle(rng, spec.fixed, spec.tau)
    assert generator.tau == pytest.approx(spec.tau)
    xs = chart_points(spec.fixed, spec.tau)
    assert min(b - a for a, b in zip(xs, xs[1:])) >= 0.2 - 1e-9
    for sigma in spec.fixed:
        assert math.isfinite(angular_rate(generator, sigma).value)


def test_build_cone_schedule_is_member():
    model = random_cone_spec(np.random.default_rng(4), 2)
    schedule, spec = build_cone_schedule(ExperimentConfig(seed=4, spec=model, segment_count=4))
    assert len(schedule.segments) == 4
    assert schedule.total_duration == pytest.approx(1.0)
    assert cone_membership(schedule, spec).member


def test_cone_run_single_point():
    cfg = ExperimentConfig(seed=0, spec=ConeSpecModel(fixed=[math.pi / 2], tau=0.0), segment_count=1)
    report = run_theorem1_suite(cfg)
    assert report.passed, report.failures
    assert report.denjoy_wolff_status == "located"


@pytest.mark.parametrize("seed", [42, *range(1, 10)])
def test_cone_run_three_points(seed):
    fixed = [2.0, 3.5, 5.0]
    cfg = ExperimentConfig(seed=seed, spec=ConeSpecModel(fixed=fixed, tau=0.0), segment_count=3)
    report = run_theorem1_suite(cfg)
    assert report.member
    assert report.passed, report.failures
    for check in report.fixed_points:
        assert check.relative_error <= 1e-3
        assert check.report.limit_residual <= 1e-6


def test_cone_run_without_prescribed_tau():
    cfg = ExperimentConfig(seed=3, spec=ConeSpecModel(fixed=[1.0, 4.0]), segment_count=2)
    report = run_theorem1_suite(cfg)
    assert report.member
    assert report.denjoy_wolff_status == "not prescribed"
    assert report.passed, report.failures


def test_endpoint_normalized_pick():
    psi = endpoint_normalized_pick((-1.0, 0.5, 1.0), [(0.0, 0.1)])
    assert psi.beta == pytest.approx(1.1)
    assert psi.alpha == pytest.approx(0.0, abs=1e-15)


def test_lemma_sweep():
    report = run_lemma53_sweep(100, 1)
    assert report.strict_count == 100
    assert report.passed
    assert all(case.beta >= 1.0 for case in report.cases)


def test_lemma_sweep_is_deterministic():
    assert run_lemma53_sweep(20, 9).model_dump() == run_lemma53_sweep(20, 9).model_dump()


def test_reachability():
    report = run_theoremA_reachability(4, 7, 1.0)
    assert report.passed, [c.failures for c in report.cases]
    real_cases = [c for c in report.cases if c.real_subfamily]
    assert real_cases
    for case in real_cases:
        assert 0.0 < case.derivative[0] <= 1.0


def test_reachability_zero_horizon():
    report = run_theoremA_reachability(2, 7, 0.0)
    assert report.passed
    assert all(c.derivative == [1.0, 0.0] for c in report.cases)


def test_evolution_suite():
    report = run_evolution_suite(5, count=2)
    assert report.identity_exact
    assert report.synthesized_semigroup_max_residual <= 1e-7
    assert report.passed, report.failures


def test_cone_suite():
    report = run_cone_suite(11, count=2)
    assert report.passed
    assert all(c.member for c in report.combinations)
