"""States, actions, costs and one-step dynamics of the spectrum-access MDP.

A state ``(v, o, q, c)`` holds the remaining data ``v``, the sensed occupancy and
quality vectors and the 1-based current channel ``c``. An action ``(b, n)``
transmits (``b=1``) or stays silent (``b=0``) on the target channel ``n``; the
radio always ends the slot on ``n``.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Literal

import numpy as np
import numpy.typing as npt

from .channel import (
    ChannelModel,
    ChannelParams,
    ChannelStateVector,
    RateParams,
    decode,
    encode,
    validate_channel_params,
)
from .error import (
    ConfigError,
    DisallowedActionError,
    InvalidStateError,
    Issue,
    PenaltyRangeError,
    StateIndexError,
)
from .result import Err, Ok, Result


@dataclass(frozen=True, slots=True)
class Action:
    b: int
    n: int

    def __str__(self) -> str:
        return f"({self.b},{self.n})"


@dataclass(frozen=True, slots=True)
class State:
    """MDP state: remaining data v, occupancy o, quality q, current channel c."""

    v: int
    o: tuple[int, ...]
    q: tuple[int, ...]
    c: int

    @classmethod
    def of(cls, v: int, o: Sequence[int], q: Sequence[int], c: int) -> "State":
        return cls(int(v), tuple(int(x) for x in o), tuple(int(x) for x in q), int(c))

    @property
    def channel_state(self) -> ChannelStateVector:
        return ChannelStateVector(self.o, self.q)

    @property
    def code(self) -> int:
        return encode(self.o, self.q)

    def with_remaining(self, v: int) -> "State":
        return replace(self, v=v)

    def __str__(self) -> str:
        return f"(v={self.v}, o={list(self.o)}, q={list(self.q)}, c={self.c})"


@dataclass(frozen=True, slots=True)
class CostParams:
    silent: float
    transmit: float
    switch: float

    def validate(self) -> Result["CostParams", list[Issue]]:
        issues = [
            Issue(f"costs.{name}", f"must be >= 0, got {value}")
            for name, value in (
                ("silent", self.silent),
                ("transmit", self.transmit),
                ("switch", self.switch),
            )
            if not value >= 0.0
        ]
        return Err(issues) if issues else Ok(self)


def stage_cost_of(costs: CostParams, active: bool, b: int, switch: bool) -> float:
    """Per-slot cost table; ``active`` means v > 0 and ``switch`` means n != c."""
    if active:
        base = costs.transmit if b == 1 else costs.silent
        return base + costs.switch if switch else base
    if b == 0 and switch:
        return costs.switch
    return 0.0


@dataclass(frozen=True, slots=True)
class PenaltySpec:
    """Overtime penalty w(v) on data left at the deadline.

    Either quadratic, ``w(v) = coefficient * v**2``, or an explicit table
    indexed by v. Tables must start at 0 and be nondecreasing and discretely
    convex over 0..V.
    """

    kind: Literal["quadratic", "table"]
    coefficient: float = 0.0
    table: tuple[float, ...] = ()

    @classmethod
    def quadratic(cls, coefficient: float) -> "PenaltySpec":
        return cls("quadratic", coefficient=float(coefficient))

    @classmethod
    def from_table(cls, values: Sequence[float]) -> "PenaltySpec":
        return cls("table", table=tuple(float(x) for x in values))

    @classmethod
    def quadratic_from_bits(cls, coefficient_per_bit2: float, unit_bits: float) -> "PenaltySpec":
        """Rescales a per-bit quadratic coefficient to data units of ``unit_bits`` bits."""
        return cls.quadratic(coefficient_per_bit2 * unit_bits * unit_bits)

    def values(self, data_size: int) -> npt.NDArray[np.float64]:
        """w(0..data_size) as a float array."""
        if self.kind == "quadratic":
            v = np.arange(data_size + 1, dtype=float)
            return self.coefficient * v * v
        return np.array(self.table[: data_size + 1], dtype=float)

    def validate(self, data_size: int) -> Result["PenaltySpec", list[Issue]]:
        if self.kind == "quadratic":
            if not self.coefficient >= 0.0:
                return Err([Issue("penalty.quadratic", "coefficient must be >= 0")])
            return Ok(self)

        issues: list[Issue] = []
        if len(self.table) < data_size + 1:
            issues.append(
                Issue("penalty.table", f"needs {data_size + 1} entries, got {len(self.table)}")
            )
            return Err(issues)
        w = self.values(data_size)
        if w[0] != 0.0:
            issues.append(Issue("penalty.table[0]", "w(0) must be 0"))
        first = np.diff(w)
        second = np.diff(w, n=2)
        for v in np.flatnonzero(first < 0.0):
            issues.append(Issue(f"penalty.table[{v + 1}]", "table must be nondecreasing"))
        for v in np.flatnonzero(second < 0.0):
            issues.append(Issue(f"penalty.table[{v + 2}]", "table must be convex"))
        return Err(issues) if issues else Ok(self)

    def to_mapping(self) -> dict[str, object]:
        if self.kind == "quadratic":
            return {"quadratic": self.coefficient}
        return {"table": list(self.table)}


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    """A complete problem instance.

    ``horizon`` is the deadline D in slots and ``data_size`` the largest
    remaining-data value V. ``zeta`` is the v sampling interval used by the
    monotone solver.
    """

    channels: tuple[ChannelParams, ...]
    rates: RateParams
    costs: CostParams
    penalty: PenaltySpec
    horizon: int
    data_size: int
    initial_state: State
    zeta: int = 1
    name: str = "scenario"

    @property
    def channel_count(self) -> int:
        return len(self.channels)

    def validate(self) -> Result["ScenarioConfig", ConfigError]:
        issues: list[Issue] = []
        if not _is_int(self.horizon) or self.horizon < 1:
            issues.append(Issue("horizon", f"must be an integer >= 1, got {self.horizon!r}"))
        if not _is_int(self.data_size) or self.data_size < 0:
            issues.append(Issue("data_size", f"must be an integer >= 0, got {self.data_size!r}"))
        if not _is_int(self.zeta) or self.zeta < 1:
            issues.append(Issue("zeta", f"must be an integer >= 1, got {self.zeta!r}"))

        issues.extend(validate_channel_params(self.channels).match({"ok": _none, "err": _same}))
        issues.extend(self.rates.validate().match({"ok": _none, "err": _same}))
        issues.extend(self.costs.validate().match({"ok": _none, "err": _same}))
        if _is_int(self.data_size) and self.data_size >= 0:
            issues.extend(
                self.penalty.validate(self.data_size).match({"ok": _none, "err": _same})
            )
            issues.extend(self._initial_state_issues())

        if issues:
            return Err(ConfigError(f"invalid scenario {self.name!r}", issues))
        return Ok(self)

    def _initial_state_issues(self) -> list[Issue]:
        s = self.initial_state
        issues: list[Issue] = []
        count = self.channel_count
        for name, bits in (("occupancy", s.o), ("quality", s.q)):
            if len(bits) != count:
                issues.append(
                    Issue(f"initial_state.{name}", f"needs {count} entries, got {len(bits)}")
                )
            elif any(b not in (0, 1) for b in bits):
                issues.append(Issue(f"initial_state.{name}", "entries must be 0 or 1"))
        if not 1 <= s.c <= count:
            issues.append(Issue("initial_state.channel", f"must lie in 1..{count}, got {s.c}"))
        if not 0 <= s.v <= self.data_size:
            issues.append(
                Issue("initial_state.remaining", f"must lie in 0..{self.data_size}, got {s.v}")
            )
        return issues

    def with_data_size(self, data_size: int) -> "ScenarioConfig":
        """Same scenario with V replaced; the initial state starts full."""
        return replace(
            self,
            data_size=data_size,
            initial_state=self.initial_state.with_remaining(data_size),
        )

    def with_horizon(self, horizon: int) -> "ScenarioConfig":
        return replace(self, horizon=horizon)

    def with_zeta(self, zeta: int) -> "ScenarioConfig":
        return replace(self, zeta=zeta)

    def to_mapping(self) -> dict[str, object]:
        """Canonical JSON-compatible form, readable back by ``parse_config``."""
        s = self.initial_state
        return {
            "name": self.name,
            "horizon": self.horizon,
            "data_size": self.data_size,
            "zeta": self.zeta,
            "rates": {"good": self.rates.good, "bad": self.rates.bad},
            "costs": {
                "silent": self.costs.silent,
                "transmit": self.costs.transmit,
                "switch": self.costs.switch,
            },
            "penalty": self.penalty.to_mapping(),
            "channels": [
                {
                    "occupancy": [list(row) for row in ch.occupancy],
                    "quality": [list(row) for row in ch.quality],
                }
                for ch in self.channels
            ],
            "initial_state": {
                "occupancy": list(s.o),
                "quality": list(s.q),
                "channel": s.c,
                "remaining": s.v,
            },
        }


def _is_int(value: object) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _none(_: object) -> list[Issue]:
    return []


def _same(issues: list[Issue]) -> list[Issue]:
    return issues


class StateSpace:
    """Bijection between states and ``0..(V+1)*4**M*M - 1``.

    The flat index is ``((v * 4**M) + k) * M + (c - 1)`` with ``k`` the joint
    channel code, so index order is lexicographic in (v, o, q, c).
    """

    def __init__(self, channels: int, data_size: int) -> None:
        self.channels = channels
        self.data_size = data_size
        self.joint_states = 1 << (2 * channels)
        self.size = (data_size + 1) * self.joint_states * channels

    def __len__(self) -> int:
        return self.size

    def check(self, s: State) -> None:
        if len(s.o) != self.channels or len(s.q) != self.channels:
            raise InvalidStateError(s, f"expected {self.channels} channels")
        if any(b not in (0, 1) for b in s.o + s.q):
            raise InvalidStateError(s, "occupancy and quality entries must be 0 or 1")
        if not 1 <= s.c <= self.channels:
            raise InvalidStateError(s, f"channel must lie in 1..{self.channels}")
        if not 0 <= s.v <= self.data_size:
            raise InvalidStateError(s, f"remaining data must lie in 0..{self.data_size}")

    def index(self, s: State) -> int:
        self.check(s)
        return ((s.v * self.joint_states) + s.code) * self.channels + (s.c - 1)

    def state(self, index: int) -> State:
        if not 0 <= index < self.size:
            raise StateIndexError(index, self.size)
        rest, c0 = divmod(index, self.channels)
        v, k = divmod(rest, self.joint_states)
        o, q = decode(k, self.channels)
        return State(v, o, q, c0 + 1)

    def __iter__(self) -> Iterator[State]:
        for index in range(self.size):
            yield self.state(index)


def canonical_actions(
    o: Sequence[int], q: Sequence[int], c: int, active: bool
) -> list[Action]:
    """Allowed actions in tie-break order.

    Silent stay, silent switches by distance from c, transmit on c if idle,
    then transmit-switches to idle channels by descending quality, distance
    and index. The order is not ascending in n: with o=(1,1,1), q=(1,0,1)
    and c=3 the transmit-switches come out as (1,1) then (1,2). In case 2 and
    case 3 states the first transmit-switch goes to ``best_switch_target``,
    and the exact solver keeps the first minimiser in this order.
    """
    channels = len(o)
    others = sorted((n for n in range(1, channels + 1) if n != c), key=lambda n: (abs(n - c), n))
    actions = [Action(0, c)] + [Action(0, n) for n in others]
    if not active:
        return actions
    if o[c - 1] == 1:
        actions.append(Action(1, c))
    targets = sorted(
        (n for n in others if o[n - 1] == 1),
        key=lambda n: (-q[n - 1], abs(n - c), n),
    )
    actions.extend(Action(1, n) for n in targets)
    return actions


@dataclass(frozen=True, slots=True)
class ActionCatalog:
    """Dense per-(k, c) action slots for vectorised solvers.

    Arrays have shape ``(4**M, M, 2M)``: joint code, current channel (0-based)
    and slot in canonical order. Slots beyond the allowed set hold ``inf``
    cost. The first M slots are the silent actions, allowed for every v.
    """

    b: npt.NDArray[np.int8]
    n: npt.NDArray[np.int64]
    rate: npt.NDArray[np.int64]
    cost_active: npt.NDArray[np.float64]
    cost_idle: npt.NDArray[np.float64]
    count: npt.NDArray[np.int64]

    @property
    def slots(self) -> int:
        return self.b.shape[2]

    def action(self, k: int, c: int, slot: int) -> Action:
        return Action(int(self.b[k, c - 1, slot]), int(self.n[k, c - 1, slot]))

    def cost(self, v: int) -> npt.NDArray[np.float64]:
        return self.cost_active if v > 0 else self.cost_idle


class AccessMDP:
    """The spectrum-access MDP of one validated scenario.

    Raises:
        ConfigError: If the scenario fails validation.
    """

    def __init__(self, config: ScenarioConfig) -> None:
        checked = config.validate()
        if checked.is_err():
            raise checked.unwrap_err()
        self.config = config
        self.model = ChannelModel(config.channels)
        self.space = StateSpace(config.channel_count, config.data_size)
        self._penalty = config.penalty.values(config.data_size)
        self._penalty.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.config.horizon

    @property
    def data_size(self) -> int:
        return self.config.data_size

    @property
    def channels(self) -> int:
        return self.config.channel_count

    @property
    def penalty_vector(self) -> npt.NDArray[np.float64]:
        return self._penalty

    def idle_set(self, s: State) -> tuple[int, ...]:
        return tuple(m + 1 for m, bit in enumerate(s.o) if bit == 1)

    def allowed_actions(self, s: State) -> list[Action]:
        """Allowed actions of s in canonical tie-break order (see ``canonical_actions``)."""
        self.space.check(s)
        return canonical_actions(s.o, s.q, s.c, s.v > 0)

    def is_allowed(self, s: State, a: Action) -> bool:
        if not 1 <= a.n <= self.channels or a.b not in (0, 1):
            return False
        if a.b == 0:
            return True
        return s.v > 0 and s.o[a.n - 1] == 1

    def _require_allowed(self, s: State, a: Action, t: int | None = None) -> None:
        self.space.check(s)
        if not self.is_allowed(s, a):
            raise DisallowedActionError(s, a, t)

    def rate(self, o: Sequence[int], q: Sequence[int], b: int, n: int) -> int:
        if b == 1 and o[n - 1] == 1:
            return self.config.rates.good if q[n - 1] == 1 else self.config.rates.bad
        return 0

    def stage_cost(self, s: State, a: Action) -> float:
        """Raises DisallowedActionError if ``a`` is not allowed in ``s``."""
        self._require_allowed(s, a)
        return stage_cost_of(self.config.costs, s.v > 0, a.b, a.n != s.c)

    def penalty(self, v: int) -> float:
        if not 0 <= v <= self.data_size:
            raise PenaltyRangeError(v, self.data_size)
        return float(self._penalty[v])

    def next_remaining(self, v: int, o: Sequence[int], q: Sequence[int], b: int, n: int) -> int:
        return max(0, v - self.rate(o, q, b, n))

    def successor_distribution(self, s: State, a: Action) -> list[tuple[State, float]]:
        """Reachable next states with their probabilities (zero-probability ones omitted)."""
        self._require_allowed(s, a)
        v_next = self.next_remaining(s.v, s.o, s.q, a.b, a.n)
        row = self.model.transition_matrix[s.code]
        return [
            (State(v_next, *decode(int(k), self.channels), a.n), float(row[k]))
            for k in np.flatnonzero(row)
        ]

    @cached_property
    def catalog(self) -> ActionCatalog:
        channels = self.channels
        joint = self.space.joint_states
        slots = 2 * channels
        shape = (joint, channels, slots)
        b = np.zeros(shape, dtype=np.int8)
        n = np.ones(shape, dtype=np.int64)
        rate = np.zeros(shape, dtype=np.int64)
        cost_active = np.full(shape, np.inf)
        cost_idle = np.full(shape, np.inf)
        count = np.zeros((joint, channels), dtype=np.int64)

        costs = self.config.costs
        for k in range(joint):
            o, q = decode(k, channels)
            for c in range(1, channels + 1):
                actions = canonical_actions(o, q, c, active=True)
                count[k, c - 1] = len(actions)
                for j, a in enumerate(actions):
                    b[k, c - 1, j] = a.b
                    n[k, c - 1, j] = a.n
                    rate[k, c - 1, j] = self.rate(o, q, a.b, a.n)
                    cost_active[k, c - 1, j] = stage_cost_of(costs, True, a.b, a.n != c)
                    if a.b == 0:
                        cost_idle[k, c - 1, j] = stage_cost_of(costs, False, 0, a.n != c)

        for array in (b, n, rate, cost_active, cost_idle, count):
            array.setflags(write=False)
        return ActionCatalog(b, n, rate, cost_active, cost_idle, count)


def as_mdp(problem: "ScenarioConfig | AccessMDP") -> AccessMDP:
    return problem if isinstance(problem, AccessMDP) else AccessMDP(problem)
