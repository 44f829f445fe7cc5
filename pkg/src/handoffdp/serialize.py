"""CSV and JSON emission of solver tables, sweeps and run manifests.

Every writer returns ``Result[Path, OutputError]``. Floats are written with
``repr`` so tables re-load bit for bit. Occupancy and quality vectors appear as
bit strings such as ``011`` (channel 1 first).
"""

import csv
import hashlib
import json
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backward import PolicyTable, ValueTable
from .channel import decode, encode
from .checks import CheckReport
from .error import OutputError
from .mdp import ScenarioConfig, StateSpace
from .monotone import UNSET, CaseTag, ThresholdTable, best_switch_target
from .result import Result
from .safe import safe
from .sim import SurfaceRow, SweepResult, SweepRow

VALUE_COLUMNS = ("t", "v", "o", "q", "c", "value")
POLICY_COLUMNS = ("t", "v", "o", "q", "c", "b", "n")
THRESHOLD_COLUMNS = ("t", "o", "q", "c", "case", "th1", "th2", "th3", "th4")
SWEEP_COLUMNS = ("sweep_var", "sweep_value", "policy", "mean", "stderr", "exact_value", "n")
SURFACE_COLUMNS = ("t", "v", "action_code", "target")


def bit_string(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def parse_bits(text: str) -> tuple[int, ...]:
    return tuple(int(ch) for ch in text)


def _write(path: Path, produce: Callable[[Path], None]) -> Result[Path, OutputError]:
    def run() -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        produce(path)
        return path

    return safe({"try_": run, "catch": lambda e: OutputError(f"cannot write {path}", e)})


def _write_rows(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]
) -> Result[Path, OutputError]:
    def produce(target: Path) -> None:
        with target.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)

    return _write(path, produce)


def write_json(path: Path, data: object) -> Result[Path, OutputError]:
    return _write(
        path, lambda target: target.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    )


def _read_rows(path: Path) -> Result[list[dict[str, str]], OutputError]:
    def run() -> list[dict[str, str]]:
        with path.open(newline="", encoding="utf-8") as handle:
            return list(csv.DictReader(handle))

    return safe({"try_": run, "catch": lambda e: OutputError(f"cannot read {path}", e)})


def _state_rows(space: StateSpace) -> Iterable[tuple[int, str, str, int, int, int]]:
    """(v, o, q, c, k, c0) in flat index order."""
    labels = [
        tuple(bit_string(part) for part in decode(k, space.channels))
        for k in range(space.joint_states)
    ]
    for v in range(space.data_size + 1):
        for k in range(space.joint_states):
            o, q = labels[k]
            for c0 in range(space.channels):
                yield v, o, q, c0 + 1, k, c0


def write_values_csv(path: Path, values: ValueTable) -> Result[Path, OutputError]:
    def rows() -> Iterable[list[object]]:
        for t in range(1, values.horizon + 2):
            layer = values.layer(t)
            for v, o, q, c, k, c0 in _state_rows(values.space):
                yield [t, v, o, q, c, repr(float(layer[v, k, c0]))]

    return _write_rows(path, VALUE_COLUMNS, rows())


def write_policy_csv(path: Path, policy: PolicyTable) -> Result[Path, OutputError]:
    def rows() -> Iterable[list[object]]:
        for t in range(1, policy.horizon + 1):
            b, n = policy.stage(t)
            for v, o, q, c, k, c0 in _state_rows(policy.space):
                yield [t, v, o, q, c, int(b[v, k, c0]), int(n[v, k, c0])]

    return _write_rows(path, POLICY_COLUMNS, rows())


def write_thresholds_csv(path: Path, thresholds: ThresholdTable) -> Result[Path, OutputError]:
    space = thresholds.space

    def rows() -> Iterable[list[object]]:
        for t in range(1, thresholds.horizon + 1):
            for k in range(space.joint_states):
                o, q = decode(k, space.channels)
                for c in range(1, space.channels + 1):
                    row = thresholds.row(t, o, q, c)
                    cells = ["" if th == UNSET else th for th in row]
                    tag = thresholds.case(o, q, c).value
                    yield [t, bit_string(o), bit_string(q), c, tag, *cells]

    return _write_rows(path, THRESHOLD_COLUMNS, rows())


def write_sweep(
    csv_path: Path, json_path: Path, sweep: SweepResult
) -> Result[tuple[Path, Path], OutputError]:
    """Writes the sweep as CSV plus a JSON mirror carrying the grid."""
    rows = (
        [
            r.sweep_var,
            r.sweep_value,
            r.policy,
            repr(r.mean),
            repr(r.stderr),
            repr(r.exact_value),
            r.n,
        ]
        for r in sweep.rows
    )
    return _write_rows(csv_path, SWEEP_COLUMNS, rows).and_then(
        lambda written: write_json(json_path, sweep.to_mapping()).map(lambda j: (written, j))
    )


def write_surface_csv(path: Path, surface: Sequence[SurfaceRow]) -> Result[Path, OutputError]:
    return _write_rows(
        path, SURFACE_COLUMNS, ([r.t, r.v, r.action_code, r.target] for r in surface)
    )


def write_checks_json(path: Path, reports: Sequence[CheckReport]) -> Result[Path, OutputError]:
    return write_json(
        path,
        {
            "passed": all(r.passed for r in reports),
            "checks": [r.to_mapping() for r in reports],
        },
    )


def read_values_csv(path: Path, space: StateSpace) -> Result[ValueTable, OutputError]:
    def build(rows: list[dict[str, str]]) -> ValueTable:
        horizon = max(int(r["t"]) for r in rows) - 1
        values = np.zeros((horizon + 1, space.data_size + 1, space.joint_states, space.channels))
        for r in rows:
            k = encode(parse_bits(r["o"]), parse_bits(r["q"]))
            values[int(r["t"]) - 1, int(r["v"]), k, int(r["c"]) - 1] = float(r["value"])
        return ValueTable(space, values)

    return _read_rows(path).and_then(lambda rows: _convert(path, lambda: build(rows)))


def read_policy_csv(path: Path, space: StateSpace) -> Result[PolicyTable, OutputError]:
    def build(rows: list[dict[str, str]]) -> PolicyTable:
        horizon = max(int(r["t"]) for r in rows)
        shape = (horizon, space.data_size + 1, space.joint_states, space.channels)
        b = np.zeros(shape, dtype=np.int8)
        n = np.zeros(shape, dtype=np.int64)
        for r in rows:
            k = encode(parse_bits(r["o"]), parse_bits(r["q"]))
            index = (int(r["t"]) - 1, int(r["v"]), k, int(r["c"]) - 1)
            b[index] = int(r["b"])
            n[index] = int(r["n"])
        return PolicyTable(space, b, n)

    return _read_rows(path).and_then(lambda rows: _convert(path, lambda: build(rows)))


def read_thresholds_csv(path: Path, space: StateSpace) -> Result[ThresholdTable, OutputError]:
    """Re-loads thresholds; switch targets are recomputed from (o, q, c)."""

    def build(rows: list[dict[str, str]]) -> ThresholdTable:
        horizon = max(int(r["t"]) for r in rows)
        table = np.full((horizon, space.joint_states, space.channels, 4), UNSET, dtype=np.int64)
        cases = [[CaseTag.OTHER] * space.channels for _ in range(space.joint_states)]
        targets = np.zeros((space.joint_states, space.channels), dtype=np.int64)
        for r in rows:
            o, q, c = parse_bits(r["o"]), parse_bits(r["q"]), int(r["c"])
            k = encode(o, q)
            tag = CaseTag(r["case"])
            cases[k][c - 1] = tag
            if tag is not CaseTag.CASE4:
                targets[k, c - 1] = best_switch_target(o, q, c)
            cells = [r[f"th{i}"] for i in range(1, 5)]
            table[int(r["t"]) - 1, k, c - 1] = [UNSET if x == "" else int(x) for x in cells]
        return ThresholdTable(space, table, tuple(tuple(row) for row in cases), targets)

    return _read_rows(path).and_then(lambda rows: _convert(path, lambda: build(rows)))


def read_sweep_csv(path: Path) -> Result[list[SweepRow], OutputError]:
    def build(rows: list[dict[str, str]]) -> list[SweepRow]:
        return [
            SweepRow(
                r["sweep_var"],
                int(r["sweep_value"]),
                r["policy"],
                float(r["mean"]),
                float(r["stderr"]),
                float(r["exact_value"]),
                int(r["n"]),
            )
            for r in rows
        ]

    return _read_rows(path).and_then(lambda rows: _convert(path, lambda: build(rows)))


def _convert[T](path: Path, build: Callable[[], T]) -> Result[T, OutputError]:
    return safe({"try_": build, "catch": lambda e: OutputError(f"malformed table {path}", e)})


def config_hash(config: ScenarioConfig) -> str:
    """sha256 of the canonical scenario mapping; independent of key order in the source file."""
    canonical = json.dumps(config.to_mapping(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True, slots=True)
class RunManifest:
    config_hash: str
    subcommand: str
    seed: int
    version: str
    runtime_seconds: float
    outputs: tuple[str, ...] = field(default=())

    def to_mapping(self) -> dict[str, object]:
        return {
            "config_hash": self.config_hash,
            "subcommand": self.subcommand,
            "seed": self.seed,
            "version": self.version,
            "runtime_seconds": self.runtime_seconds,
            "outputs": list(self.outputs),
        }


def write_manifest(path: Path, manifest: RunManifest) -> Result[Path, OutputError]:
    return write_json(path, manifest.to_mapping())
