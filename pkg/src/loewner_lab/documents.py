"""
JSON configuration documents.

Complex numbers are two-element arrays [re, im]; boundary points may instead be
given as {"angle": radians}. Every model rejects unknown fields.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from loewner_lab.disk import BoundaryPoint
from loewner_lab.emitters import to_json
from loewner_lab.evolution import Schedule, Segment
from loewner_lab.experiments import ExperimentConfig
from loewner_lab.generators import AngularRate, Generator, PickGenerator
from loewner_lab.herglotz import ClarkMeasure, HerglotzFunction, PickFunction

logger = logging.getLogger(__name__)

DOCUMENT_VERSION = "1"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AngleDoc(_Strict):
    angle: float


PointDoc = Union[tuple[float, float], AngleDoc]


def point_value(point: PointDoc) -> complex:
    if isinstance(point, AngleDoc):
        return BoundaryPoint.from_angle(point.angle).value
    return complex(point[0], point[1])


def point_doc(value: complex) -> tuple[float, float]:
    return (value.real, value.imag)


class AtomDoc(_Strict):
    angle: float
    weight: float = Field(..., gt=0.0)


class HerglotzDoc(_Strict):
    uniform: float = Field(0.0, ge=0.0)
    imag: float = 0.0
    atoms: list[AtomDoc] = Field(default_factory=list)


class GeneratorDoc(_Strict):
    tau: PointDoc
    herglotz: HerglotzDoc


class SegmentDoc(_Strict):
    duration: float = Field(..., gt=0.0)
    generator: GeneratorDoc


class ScheduleDoc(_Strict):
    segments: list[SegmentDoc] = Field(..., min_length=1)
    fixed: list[PointDoc] | None = None
    tau: PointDoc | None = None


class PickAtomDoc(_Strict):
    t: float
    weight: float = Field(..., gt=0.0)


class PickGeneratorDoc(_Strict):
    alpha: float
    beta: float = Field(..., ge=0.0)
    gamma: float = Field(0.0, ge=0.0)
    atoms: list[PickAtomDoc] = Field(default_factory=list)
    fixed: list[float] = Field(default_factory=list)


class RateDoc(_Strict):
    point: tuple[float, float]
    value: float


class SynthesisDoc(_Strict):
    """Request and result of one synthesis run."""

    fixed: list[float]
    atoms: list[float]
    beta: float
    dw: Literal["inf"] | float
    pick: PickGeneratorDoc
    rates: list[RateDoc]
    disk: GeneratorDoc | None = None


class ConfigDocument(_Strict):
    """Top-level document: a version tag and exactly one payload."""

    version: str = DOCUMENT_VERSION
    schedule: ScheduleDoc | None = None
    experiment: ExperimentConfig | None = None
    synthesis: SynthesisDoc | None = None
    generator: GeneratorDoc | None = None

    @model_validator(mode="after")
    def _one_payload(self) -> ConfigDocument:
        present = [
            name
            for name in ("schedule", "experiment", "synthesis", "generator")
            if getattr(self, name) is not None
        ]
        if len(present) != 1:
            raise ValueError(f"exactly one payload is required, got {present or 'none'}")
        return self


def herglotz_from_doc(doc: HerglotzDoc) -> HerglotzFunction:
    atoms = tuple((BoundaryPoint.from_angle(a.angle).value, a.weight) for a in doc.atoms)
    return HerglotzFunction(ClarkMeasure(atoms, doc.uniform), doc.imag)


def herglotz_to_doc(p: HerglotzFunction) -> HerglotzDoc:
    return HerglotzDoc(
        uniform=p.measure.uniform_mass,
        imag=p.imag_const,
        atoms=[AtomDoc(angle=BoundaryPoint(loc).angle, weight=w) for loc, w in p.measure.atoms],
    )


def generator_from_doc(doc: GeneratorDoc) -> Generator:
    return Generator(point_value(doc.tau), herglotz_from_doc(doc.herglotz))


def generator_to_doc(generator: Generator) -> GeneratorDoc:
    return GeneratorDoc(tau=point_doc(generator.tau), herglotz=herglotz_to_doc(generator.p))


def schedule_from_doc(doc: ScheduleDoc) -> Schedule:
    return Schedule(tuple(Segment(s.duration, generator_from_doc(s.generator)) for s in doc.segments))


def schedule_to_doc(
    schedule: Schedule, fixed: list[complex] | None = None, tau: complex | None = None
) -> ScheduleDoc:
    return ScheduleDoc(
        segments=[
            SegmentDoc(duration=s.duration, generator=generator_to_doc(s.generator))
            for s in schedule.segments
        ],
        fixed=None if fixed is None else [point_doc(f) for f in fixed],
        tau=None if tau is None else point_doc(tau),
    )


def pick_to_doc(generator: PickGenerator) -> PickGeneratorDoc:
    pick = generator.pick
    return PickGeneratorDoc(
        alpha=pick.alpha,
        beta=pick.beta,
        gamma=pick.gamma,
        atoms=[PickAtomDoc(t=t, weight=w) for t, w in pick.atoms],
        fixed=list(generator.fixed_points),
    )


def pick_from_doc(doc: PickGeneratorDoc) -> PickGenerator:
    pick = PickFunction(
        alpha=doc.alpha,
        beta=doc.beta,
        atoms=tuple((a.t, a.weight) for a in doc.atoms),
        gamma=doc.gamma,
    )
    return PickGenerator(pick, tuple(doc.fixed))


def rate_doc(rate: AngularRate) -> RateDoc:
    return RateDoc(point=(rate.point[0], rate.point[1]), value=rate.value)


def parse_document(text: str) -> ConfigDocument:
    """
    Parse and validate a document.

    Raises:
        ValueError: malformed JSON or a schema violation (pydantic.ValidationError)
    """
    return ConfigDocument.model_validate(json.loads(text))


def load_document(path: str | Path) -> ConfigDocument:
    logger.info(f"Loading document {path}")
    return parse_document(Path(path).read_text(encoding="utf-8"))


def dump_document(document: ConfigDocument) -> str:
    return to_json(document.model_dump(mode="json", exclude_none=True))


def save_document(document: ConfigDocument, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_document(document))
    logger.info(f"Wrote document {path}")
