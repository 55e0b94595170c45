"""
Command-line interface for Loewner Lab.

Subcommands:
    synthesize  Solve for a generator with prescribed boundary fixed points
    flow        Trajectory of a semigroup flow
    evolve      Trajectory of an evolution family
    verify      Run a property suite and print its JSON report

Exit codes: 0 success, 1 usage error or failed assertion, 2 infeasible input,
3 numerical stall (the partial trajectory is still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from typing import Any, NoReturn

from pydantic import ValidationError

from loewner_lab import __version__
from loewner_lab.config import SolverConfig, default_solver_config, get_config
from loewner_lab.disk import BoundaryPoint, DiskPoint, PolarGrid, cayley_inverse_value
from loewner_lab.documents import (
    ConfigDocument,
    SynthesisDoc,
    dump_document,
    generator_from_doc,
    generator_to_doc,
    load_document,
    pick_to_doc,
    point_value,
    rate_doc,
    save_document,
    schedule_from_doc,
)
from loewner_lab.emitters import plot_grid_svg, write_json, write_trajectory_csv
from loewner_lab.errors import GeneratorError, GeometryError, RepresentationError, SolverError
from loewner_lab.evolution import EvolutionMap, Schedule, grid_image
from loewner_lab.experiments import (
    run_cone_suite,
    run_evolution_suite,
    run_lemma53_sweep,
    run_theoremA_reachability,
)
from loewner_lab.generators import Generator, angular_rate, conjugate_generator, synthesize_generator
from loewner_lab.ode import Trajectory, integrate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_STALL = 3

LIST_FLAGS = ("--fixed", "--atoms", "--z0")
SUITES = ("ef", "cone", "lemma53", "theoremA", "all")
PLOT_GRID = PolarGrid(n_radii=8, n_angles=32, r_max=0.95)


class ArgumentParser(argparse.ArgumentParser):
    """Parser whose errors exit with status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _join_list_flags(argv: Sequence[str]) -> list[str]:
    """Turn ``--fixed -1,1`` into ``--fixed=-1,1`` so negative lists are not read as options."""
    joined: list[str] = []
    i = 0
    while i < len(argv):
        if argv[i] in LIST_FLAGS and i + 1 < len(argv):
            joined.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            joined.append(argv[i])
            i += 1
    return joined


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def complex_arg(text: str) -> complex:
    values = float_list(text)
    if len(values) == 1:
        return complex(values[0], 0.0)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected re,im, got {text!r}")
    return complex(values[0], values[1])


def dw_arg(text: str) -> float | None:
    if text.strip().lower() == "inf":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'inf' or an angle, got {text!r}")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="loewner-lab",
        description="Numerics for Loewner chains with prescribed boundary fixed points",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    synth = sub.add_parser("synthesize", help="Synthesize a generator")
    synth.add_argument("--fixed", type=float_list, required=True, help="Real fixed points x_1,...,x_n")
    synth.add_argument("--atoms", type=float_list, default=[], help="One atom per gap")
    synth.add_argument("--beta", type=float, default=1.0, help="Linear coefficient (> 0)")
    synth.add_argument(
        "--dw", type=dw_arg, default=None, help="'inf' for the half-plane, or the angle of tau"
    )
    synth.add_argument("--out", help="Output JSON (default: standard output)")

    flow = sub.add_parser("flow", help="Trajectory of phi_{t-s}(z0) for one generator")
    flow.add_argument("--config", required=True, help="Generator or synthesis document")
    flow.add_argument("--z0", type=complex_arg, default=0j, help="Start point re,im")
    flow.add_argument("--s", type=float, default=0.0, help="Start time")
    flow.add_argument("--t", type=float, default=1.0, help="End time")
    flow.add_argument("--out", help="Output CSV (default: standard output)")
    flow.add_argument("--svg", help="Plot of the grid image")

    evolve = sub.add_parser("evolve", help="Trajectory of phi_{s,t}(z0) for a schedule")
    evolve.add_argument("--config", required=True, help="Schedule document")
    evolve.add_argument("--z0", type=complex_arg, default=0j, help="Start point re,im")
    evolve.add_argument("--s", type=float, default=0.0, help="Start time")
    evolve.add_argument("--t", type=float, default=None, help="End time (default: schedule end)")
    evolve.add_argument("--out", help="Output CSV (default: standard output)")
    evolve.add_argument("--svg", help="Plot of the grid image")

    verify = sub.add_parser("verify", help="Run a property suite")
    verify.add_argument("--suite", choices=SUITES, required=True)
    verify.add_argument("--seed", type=int, default=42)
    verify.add_argument("--tol", type=float, default=None, help="Solver tolerance override")
    verify.add_argument("--samples", type=int, default=None, help="Sample count override")
    return parser


def _solver(tol: float | None = None) -> SolverConfig:
    config = default_solver_config()
    return config if tol is None else SolverConfig(rel_tol=tol, abs_tol=tol)


def cmd_synthesize(args: argparse.Namespace) -> int:
    pick = synthesize_generator(args.fixed, args.atoms, args.beta)
    rates = [angular_rate(pick, x) for x in pick.fixed_points]
    disk_doc = None
    if args.dw is not None:
        rotation = BoundaryPoint.from_angle(args.dw).value
        disk = conjugate_generator(pick).rotated(rotation)
        disk_doc = generator_to_doc(disk)
        # lambda is invariant under conjugation; report it at the disk points
        for rate, x in zip(rates, pick.fixed_points):
            sigma = rotation * complex(cayley_inverse_value(complex(x, 0.0)))
            rate.point = [sigma.real, sigma.imag]
    document = ConfigDocument(
        synthesis=SynthesisDoc(
            fixed=list(args.fixed),
            atoms=list(args.atoms),
            beta=args.beta,
            dw="inf" if args.dw is None else args.dw,
            pick=pick_to_doc(pick),
            rates=[rate_doc(r) for r in rates],
            disk=disk_doc,
        )
    )
    if args.out:
        save_document(document, args.out)
        table = sys.stdout
    else:
        sys.stdout.write(dump_document(document))
        table = sys.stderr
    table.write("x\tlambda\n")
    for x, rate in zip(pick.fixed_points, rates):
        table.write(f"{x:.17g}\t{rate.value:.17g}\n")
    return EXIT_OK


def _flow_generator(document: ConfigDocument) -> tuple[Generator, list[complex]]:
    if document.generator is not None:
        return generator_from_doc(document.generator), []
    synthesis = document.synthesis
    if synthesis is not None and synthesis.disk is not None:
        fixed = [complex(r.point[0], r.point[1]) for r in synthesis.rates]
        return generator_from_doc(synthesis.disk), fixed
    raise ValueError("flow needs a generator document or a synthesis with a disk generator")


def _write_trajectory(path: str | None, trajectory: Trajectory) -> None:
    points = [complex(state[0]) for state in trajectory.states]
    write_trajectory_csv(path, trajectory.times, points, trajectory.status)


def _run_trajectory(args: argparse.Namespace, solve: Callable[[], Trajectory]) -> int:
    try:
        trajectory = solve()
    except SolverError as e:
        logger.error(f"Solver stalled: {e}")
        if e.trajectory is not None:
            _write_trajectory(args.out, e.trajectory)
        return EXIT_STALL
    _write_trajectory(args.out, trajectory)
    return EXIT_OK


def _plot(
    path: str, schedule: Schedule, s: float, t: float, fixed: list[complex], tau: complex | None
) -> None:
    if t > s:
        images = [
            None if p.image is None else complex(p.image[0], p.image[1])
            for p in grid_image(schedule, s, t, PLOT_GRID)
        ]
    else:
        images = [complex(z) for z in PLOT_GRID.points()]
    plot_grid_svg(path, PLOT_GRID, images, fixed, tau)


def cmd_flow(args: argparse.Namespace) -> int:
    generator, fixed = _flow_generator(load_document(args.config))
    if args.s < 0.0 or args.t < args.s:
        raise ValueError("need 0 <= --s <= --t")
    config = default_solver_config()
    start = DiskPoint(args.z0).value
    code = _run_trajectory(
        args, lambda: integrate(generator, start, args.s, args.t, config, record=True)
    )
    if args.svg and code == EXIT_OK:
        # autonomous: phi_{s,t} = phi_{t-s}
        span = args.t - args.s
        schedule = Schedule.of((span, generator)) if span > 0.0 else Schedule(())
        _plot(args.svg, schedule, 0.0, span, fixed, generator.tau)
    return code


def cmd_evolve(args: argparse.Namespace) -> int:
    document = load_document(args.config)
    if document.schedule is None:
        raise ValueError("evolve needs a schedule document")
    schedule = schedule_from_doc(document.schedule)
    t = schedule.total_duration if args.t is None else args.t
    mapping = EvolutionMap(schedule, args.s, t, default_solver_config())
    code = _run_trajectory(args, lambda: mapping.trajectory(DiskPoint(args.z0).value))
    if args.svg and code == EXIT_OK:
        doc = document.schedule
        fixed = [point_value(f) for f in doc.fixed or []]
        tau = None if doc.tau is None else point_value(doc.tau)
        _plot(args.svg, schedule, args.s, t, fixed, tau)
    return code


def run_suite(name: str, seed: int, tol: float | None, samples: int | None) -> dict[str, Any]:
    """Run one suite (or all of them) and return the JSON-ready report."""
    solver = _solver(tol)
    names = ["ef", "cone", "lemma53", "theoremA"] if name == "all" else [name]
    reports: dict[str, Any] = {}
    for suite in names:
        logger.info(f"Running suite {suite} with seed {seed}")
        if suite == "ef":
            report = run_evolution_suite(seed, samples or 10, solver)
        elif suite == "cone":
            report = run_cone_suite(seed, samples or 10, solver)
        elif suite == "lemma53":
            report = run_lemma53_sweep(samples or 100, seed)
        else:
            report = run_theoremA_reachability(samples or 100, seed, 1.0, solver)
        reports[suite] = report.model_dump(mode="json")
    passed = all(r["passed"] for r in reports.values())
    return {"suite": name, "seed": seed, "passed": passed, "reports": reports}


def cmd_verify(args: argparse.Namespace) -> int:
    if args.samples is not None and args.samples < 1:
        raise ValueError("--samples must be >= 1")
    report = run_suite(args.suite, args.seed, args.tol, args.samples)
    write_json(report)
    return EXIT_OK if report["passed"] else EXIT_USAGE


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "synthesize": cmd_synthesize,
    "flow": cmd_flow,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
}


def _setup_logging() -> None:
    level = getattr(logging, str(get_config()["log_level"]), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point."""
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(_join_list_flags(sys.argv[1:] if argv is None else argv))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except KeyboardInterrupt:
        print("\nCancelled by user", file=sys.stderr)
        return 130
    except (GeneratorError, RepresentationError, GeometryError) as e:
        logger.error(f"Infeasible input: {type(e).__name__}: {e}")
        return EXIT_INFEASIBLE
    except SolverError as e:
        logger.error(f"Solver stalled: {e}")
        return EXIT_STALL
    except (ValidationError, ValueError, OSError) as e:
        logger.error(f"{e}")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE


def run() -> None:
    """Console-script wrapper."""
    sys.exit(main())


if __name__ == "__main__":
    run()
