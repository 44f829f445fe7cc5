"""Command-line front end.

Exit codes: 0 on success, 1 on usage, scenario or output errors, 2 when a
structure check fails.
"""

import argparse
import sys
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import NoReturn

import structlog

from . import __version__
from .backward import backward_induction
from .checks import run_all_checks
from .config import DEFAULT_SCENARIO, parse_config
from .error import ConfigError, GridSpecError, TaggedError
from .log import configure_logging
from .mdp import AccessMDP, ScenarioConfig
from .monotone import monotone_backward_induction, representative_states
from .policies import COMPARED_POLICIES, POLICY_NAMES
from .result import Err, Ok, Result
from .serialize import (
    RunManifest,
    bit_string,
    config_hash,
    write_checks_json,
    write_manifest,
    write_policy_csv,
    write_surface_csv,
    write_sweep,
    write_thresholds_csv,
    write_values_csv,
)
from .sim import SweepResult, dump_action_surface, evaluate_point, sweep_data_size, sweep_deadline

log = structlog.get_logger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_CHECK_FAILED = 0, 1, 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class CommandOutput:
    paths: list[Path] = field(default_factory=list[Path])
    exit_code: int = EXIT_OK


type CommandResult = Result[CommandOutput, TaggedError]


def parse_grid(spec: str) -> Result[tuple[int, ...], GridSpecError]:
    """Parses ``a:b:step`` (inclusive of b), ``a:b`` or a comma list.

    Example:
        >>> parse_grid("10:50:10")
        Ok((10, 20, 30, 40, 50))
    """
    try:
        if ":" in spec:
            parts = [int(p) for p in spec.split(":")]
            if len(parts) not in (2, 3):
                return Err(GridSpecError(spec, "expected a:b or a:b:step"))
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1:
                return Err(GridSpecError(spec, "step must be >= 1"))
            if stop < start:
                return Err(GridSpecError(spec, "end lies below start"))
            points = tuple(range(start, stop + 1, step))
        else:
            points = tuple(int(p) for p in spec.split(","))
    except ValueError:
        return Err(GridSpecError(spec, "entries must be integers"))
    if any(p < 0 for p in points):
        return Err(GridSpecError(spec, "entries must be >= 0"))
    if any(b <= a for a, b in zip(points, points[1:])):
        return Err(GridSpecError(spec, "entries must be ascending"))
    return Ok(points)


def _selected_policies(args: argparse.Namespace) -> tuple[str, ...]:
    return (args.policy,) if args.policy else COMPARED_POLICIES


def _collect(results: Sequence[Result[Path, TaggedError]]) -> Result[list[Path], TaggedError]:
    return Result.collect(results).map_err(lambda errors: errors[0])


def _solve(args: argparse.Namespace, config: ScenarioConfig) -> CommandResult:
    values, policy = backward_induction(config)
    written = _collect(
        [
            write_values_csv(args.out / "values.csv", values),
            write_policy_csv(args.out / "policy.csv", policy),
        ]
    )
    return written.map(lambda paths: CommandOutput(paths))


def _solve_monotone(args: argparse.Namespace, config: ScenarioConfig) -> CommandResult:
    values, policy, thresholds = monotone_backward_induction(config)
    written = _collect(
        [
            write_values_csv(args.out / "values.csv", values),
            write_policy_csv(args.out / "policy.csv", policy),
            write_thresholds_csv(args.out / "thresholds.csv", thresholds),
        ]
    )
    return written.map(lambda paths: CommandOutput(paths))


def _thresholds(args: argparse.Namespace, config: ScenarioConfig) -> CommandResult:
    _, _, thresholds = monotone_backward_induction(config)
    return write_thresholds_csv(args.out / "thresholds.csv", thresholds).map(
        lambda path: CommandOutput([path])
    )


def _check(args: argparse.Namespace, config: ScenarioConfig) -> CommandResult:
    mdp = AccessMDP(config)
    values, policy = backward_induction(mdp)
    reports = run_all_checks(mdp, values, policy)
    for report in reports:
        level = log.info if report.passed else log.warning
        level(
            "check",
            name=report.name,
            passed=report.passed,
            counterexamples=len(report.counterexamples),
        )
    exit_code = EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED
    return write_checks_json(args.out / "checks.json", reports).map(
        lambda path: CommandOutput([path], exit_code)
    )


def _write_sweep(args: argparse.Namespace, stem: str, sweep: SweepResult) -> CommandResult:
    return write_sweep(args.out / f"{stem}.csv", args.out / f"{stem}.json", sweep).map(
        lambda paths: CommandOutput(list(paths))
    )


def _simulate(args: argparse.Namespace, config: ScenarioConfig) -> CommandResult:
    rows = evaluate_point(
        AccessMDP(config), _selected_policies(args), args.rollouts, args.seed, "V", config.data_size
    )
    return rows.and_then(
        lambda r: _write_sweep(args, "simulate", SweepResult("V", (config.data_size,), tuple(r)))
    )


def _sweep(args: argparse.Namespace, config: ScenarioConfig) -> CommandResult:
    if args.grid is None:
        return Err(GridSpecError("", "sweep needs --grid"))
    grid = parse_grid(args.grid)
    if grid.is_err():
        return Err(grid.unwrap_err())
    run = sweep_data_size if args.var == "V" else sweep_deadline
    result = run(config, grid.unwrap(), _selected_policies(args), args.rollouts, args.seed)
    return result.and_then(lambda sweep: _write_sweep(args, f"sweep_{args.var}", sweep))


def _action_surface(args: argparse.Namespace, config: ScenarioConfig) -> CommandResult:
    _, policy = backward_induction(config)
    q, c = config.initial_state.q, config.initial_state.c
    results: list[Result[Path, TaggedError]] = []
    for tag, o in representative_states(q, c, config.channel_count).items():
        surface = dump_action_surface(policy, o, q, c)
        name = f"surface_{tag.value}_o{bit_string(o)}_q{bit_string(q)}_c{c}.csv"
        results.append(write_surface_csv(args.out / name, surface))
    return _collect(results).map(lambda paths: CommandOutput(paths))


COMMANDS: dict[str, Callable[[argparse.Namespace, ScenarioConfig], CommandResult]] = {
    "solve": _solve,
    "solve-monotone": _solve_monotone,
    "thresholds": _thresholds,
    "check": _check,
    "simulate": _simulate,
    "sweep": _sweep,
    "action-surface": _action_surface,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="handoffdp",
        description="Deadline-constrained spectrum-access MDP: solvers, checks and sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    for name in COMMANDS:
        sub = commands.add_parser(name)
        sub.add_argument("scenario", nargs="?", help="scenario file or bundled scenario name")
        sub.add_argument("--config", default=DEFAULT_SCENARIO, help="scenario file or bundled name")
        sub.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sub.add_argument("--seed", type=int, default=0)
        sub.add_argument(
            "--zeta", type=int, default=None, help="override the scenario's sampling interval"
        )
        sub.add_argument("--verbose", action="store_true")
        if name in ("simulate", "sweep"):
            sub.add_argument("--policy", choices=POLICY_NAMES, default=None)
            sub.add_argument("--rollouts", type=int, default=10000)
        if name == "sweep":
            sub.add_argument("--var", choices=("V", "D"), default="V")
            sub.add_argument("--grid", default=None, help="a:b:step, a:b or a comma list")
    return parser


def _load(args: argparse.Namespace) -> Result[ScenarioConfig, ConfigError]:
    loaded = parse_config(args.scenario or args.config)
    if args.zeta is None or loaded.is_err():
        return loaded
    return loaded.unwrap().with_zeta(args.zeta).validate()


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    if getattr(args, "rollouts", 0) < 0:
        print("handoffdp: error: --rollouts must be >= 0", file=sys.stderr)
        return EXIT_USAGE

    started = time.perf_counter()
    loaded = _load(args)
    if loaded.is_err():
        print(f"handoffdp: {loaded.unwrap_err()}", file=sys.stderr)
        return EXIT_USAGE
    config = loaded.unwrap()
    log.info("command started", command=args.command, scenario=config.name, out=str(args.out))

    outcome = COMMANDS[args.command](args, config)
    if outcome.is_err():
        print(f"handoffdp: {outcome.unwrap_err()}", file=sys.stderr)
        return EXIT_USAGE
    output = outcome.unwrap()

    runtime = time.perf_counter() - started
    manifest = RunManifest(
        config_hash=config_hash(config),
        subcommand=args.command,
        seed=args.seed,
        version=__version__,
        runtime_seconds=runtime,
        outputs=tuple(p.name for p in output.paths),
    )
    written = write_manifest(args.out / "manifest.json", manifest)
    if written.is_err():
        print(f"handoffdp: {written.unwrap_err()}", file=sys.stderr)
        return EXIT_USAGE
    log.info(
        "command finished",
        command=args.command,
        runtime=round(runtime, 3),
        exit_code=output.exit_code,
    )
    return output.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
