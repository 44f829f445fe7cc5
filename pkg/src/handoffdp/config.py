"""Scenario files: YAML (or JSON) mappings turned into validated ScenarioConfig values."""

from importlib.resources import files
from pathlib import Path
from typing import cast

import structlog
import yaml

from .channel import ChannelModel, ChannelParams, RateParams
from .error import ConfigError, Issue
from .mdp import CostParams, PenaltySpec, ScenarioConfig, State
from .result import Err, Ok, Result
from .safe import safe

log = structlog.get_logger(__name__)

DEFAULT_SCENARIO = "three_channel"

_MISSING = object()


def bundled_scenarios() -> tuple[str, ...]:
    root = files("handoffdp") / "scenarios"
    return tuple(
        sorted(p.name.removesuffix(".yaml") for p in root.iterdir() if p.name.endswith(".yaml"))
    )


def _read_source(source: str | Path) -> Result[tuple[str, str], ConfigError]:
    path = Path(source)
    if path.is_file():
        origin = str(path)
        read = safe(
            {
                "try_": lambda: path.read_text(encoding="utf-8"),
                "catch": lambda e: ConfigError(f"cannot read {origin}", cause=e),
            }
        )
        return read.map(lambda text: (text, path.stem))

    resource = files("handoffdp") / "scenarios" / f"{source}.yaml"
    if resource.is_file():
        return Ok((resource.read_text(encoding="utf-8"), str(source)))

    known = ", ".join(bundled_scenarios())
    return Err(
        ConfigError(
            f"scenario {str(source)!r} not found",
            [Issue("config", f"not a file and not a bundled scenario ({known})")],
        )
    )


def _yaml_error(error: Exception, origin: str) -> ConfigError:
    mark = getattr(error, "problem_mark", None)
    where = f"line {mark.line + 1}, column {mark.column + 1}" if mark is not None else "document"
    problem = getattr(error, "problem", None) or str(error)
    return ConfigError(f"cannot parse {origin}", [Issue(where, str(problem))], cause=error)


class _Fields:
    """Typed field access that records an Issue instead of raising."""

    def __init__(self) -> None:
        self.issues: list[Issue] = []

    def fail(self, path: str, message: str) -> None:
        self.issues.append(Issue(path, message))

    def mapping(self, data: object, path: str) -> dict[str, object] | None:
        if not isinstance(data, dict):
            self.fail(path, "must be a mapping")
            return None
        return {str(k): v for k, v in data.items()}  # type: ignore[misc]

    def section(self, data: dict[str, object], key: str) -> dict[str, object] | None:
        if key not in data:
            self.fail(key, "is required")
            return None
        return self.mapping(data[key], key)

    def get(
        self, data: dict[str, object], key: str, path: str, default: object = _MISSING
    ) -> object:
        if key in data:
            return data[key]
        if default is _MISSING:
            self.fail(path, "is required")
            return None
        return default

    def integer(
        self, data: dict[str, object], key: str, path: str, default: object = _MISSING
    ) -> int | None:
        value = self.get(data, key, path, default)
        if value is None and key not in data:
            return None
        if not isinstance(value, int) or isinstance(value, bool):
            self.fail(path, f"must be an integer, got {value!r}")
            return None
        return value

    def number(self, data: dict[str, object], key: str, path: str) -> float | None:
        value = self.get(data, key, path)
        if value is None and key not in data:
            return None
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            self.fail(path, f"must be a number, got {value!r}")
            return None
        return float(value)

    def numbers(self, value: object, path: str, length: int | None = None) -> list[float] | None:
        if not isinstance(value, list):
            self.fail(path, "must be a list of numbers")
            return None
        entries = cast(list[object], value)
        if any(not isinstance(x, (int, float)) or isinstance(x, bool) for x in entries):
            self.fail(path, "must be a list of numbers")
            return None
        items = [float(cast(float, x)) for x in entries]
        if length is not None and len(items) != length:
            self.fail(path, f"needs {length} entries, got {len(items)}")
            return None
        return items

    def matrix(self, data: dict[str, object], key: str, path: str) -> list[list[float]] | None:
        value = self.get(data, key, path)
        if value is None and key not in data:
            return None
        if not isinstance(value, list) or len(value) != 2:  # type: ignore[arg-type]
            self.fail(path, "must be a 2x2 matrix given as two rows")
            return None
        entries = cast(list[object], value)
        rows = [self.numbers(row, f"{path}[{i}]", 2) for i, row in enumerate(entries)]
        if any(row is None for row in rows):
            return None
        return [row for row in rows if row is not None]

    def bits(self, value: object, path: str, length: int) -> tuple[int, ...] | None:
        entries = cast(list[object], value) if isinstance(value, list) else None
        if (
            entries is None
            or len(entries) != length
            or any(x not in (0, 1) or isinstance(x, bool) for x in entries)
        ):
            self.fail(path, f"must be a list of {length} entries, each 0 or 1")
            return None
        return tuple(int(cast(int, x)) for x in entries)


def _penalty(fields: _Fields, value: object) -> PenaltySpec | None:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return PenaltySpec.quadratic(float(value))
    section = fields.mapping(value, "penalty")
    if section is None:
        return None
    if "quadratic" in section:
        coefficient = fields.number(section, "quadratic", "penalty.quadratic")
        return PenaltySpec.quadratic(coefficient) if coefficient is not None else None
    if "table" in section:
        table = fields.numbers(section["table"], "penalty.table")
        return PenaltySpec.from_table(table) if table is not None else None
    fields.fail("penalty", "needs a 'quadratic' or a 'table' entry")
    return None


def _channels(fields: _Fields, value: object) -> list[ChannelParams] | None:
    if not isinstance(value, list) or not value:
        fields.fail("channels", "must be a non-empty list")
        return None
    channels: list[ChannelParams] = []
    for i, item in enumerate(value):  # type: ignore[arg-type]
        path = f"channels[{i}]"
        section = fields.mapping(item, path)
        if section is None:
            continue
        occupancy = fields.matrix(section, "occupancy", f"{path}.occupancy")
        quality = fields.matrix(section, "quality", f"{path}.quality")
        if occupancy is not None and quality is not None:
            channels.append(ChannelParams.of(occupancy, quality))
    return channels if len(channels) == len(value) else None  # type: ignore[arg-type]


def config_from_mapping(
    data: object, name: str = "scenario"
) -> Result[ScenarioConfig, ConfigError]:
    """Builds and validates a scenario from an already parsed mapping.

    Missing ``zeta`` defaults to 1. In ``initial_state`` occupancy defaults to
    all idle, quality to all bad, channel to ``min(3, M)`` and remaining to V.
    """
    fields = _Fields()
    root = fields.mapping(data, "scenario")
    if root is None:
        return Err(ConfigError(f"invalid scenario {name!r}", fields.issues))

    horizon = fields.integer(root, "horizon", "horizon")
    data_size = fields.integer(root, "data_size", "data_size")
    zeta = fields.integer(root, "zeta", "zeta", default=1)
    scenario_name = root.get("name", name)

    rates_section = fields.section(root, "rates")
    rates = None
    if rates_section is not None:
        good = fields.integer(rates_section, "good", "rates.good")
        bad = fields.integer(rates_section, "bad", "rates.bad")
        if good is not None and bad is not None:
            rates = RateParams(good, bad)

    costs_section = fields.section(root, "costs")
    costs = None
    if costs_section is not None:
        silent = fields.number(costs_section, "silent", "costs.silent")
        transmit = fields.number(costs_section, "transmit", "costs.transmit")
        switch = fields.number(costs_section, "switch", "costs.switch")
        if silent is not None and transmit is not None and switch is not None:
            costs = CostParams(silent, transmit, switch)

    penalty = _penalty(fields, root["penalty"]) if "penalty" in root else None
    channels = _channels(fields, root["channels"]) if "channels" in root else None
    for key in ("penalty", "channels"):
        if key not in root:
            fields.fail(key, "is required")

    initial = None
    if channels is not None and data_size is not None:
        count = len(channels)
        section = fields.mapping(root.get("initial_state", {}), "initial_state")
        if section is not None:
            o = fields.bits(section.get("occupancy", [1] * count), "initial_state.occupancy", count)
            q = fields.bits(section.get("quality", [0] * count), "initial_state.quality", count)
            c = fields.integer(section, "channel", "initial_state.channel", default=min(3, count))
            v = fields.integer(section, "remaining", "initial_state.remaining", default=data_size)
            if o is not None and q is not None and c is not None and v is not None:
                initial = State(v, o, q, c)

    if (
        fields.issues
        or horizon is None
        or data_size is None
        or zeta is None
        or rates is None
        or costs is None
        or penalty is None
        or channels is None
        or initial is None
    ):
        return Err(ConfigError(f"invalid scenario {name!r}", fields.issues))

    config = ScenarioConfig(
        channels=tuple(channels),
        rates=rates,
        costs=costs,
        penalty=penalty,
        horizon=horizon,
        data_size=data_size,
        initial_state=initial,
        zeta=zeta,
        name=str(scenario_name),
    )
    return config.validate()


def parse_config(source: str | Path) -> Result[ScenarioConfig, ConfigError]:
    """Loads a scenario from a file path or by bundled scenario name.

    Example:
        >>> parse_config("three_channel").map(lambda c: (c.channel_count, c.data_size, c.horizon))
        Ok((3, 30, 15))
        >>> parse_config("missing.yaml").is_err()
        True
    """
    read = _read_source(source)
    if read.is_err():
        return Err(read.unwrap_err())
    text, origin = read.unwrap()

    loaded = safe({"try_": lambda: yaml.safe_load(text), "catch": lambda e: _yaml_error(e, origin)})
    if loaded.is_err():
        return Err(loaded.unwrap_err())

    result = config_from_mapping(loaded.unwrap(), origin)
    if result.is_ok():
        config = result.unwrap()
        model = ChannelModel(config.channels)
        channels = range(1, config.channel_count + 1)
        log.debug(
            "scenario loaded",
            source=str(source),
            name=config.name,
            stationary_idle=[model.stationary_idle_probability(m) for m in channels],
            stationary_good=[model.stationary_good_probability(m) for m in channels],
        )
    return result
