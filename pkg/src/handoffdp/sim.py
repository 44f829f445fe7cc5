"""Monte Carlo rollouts, experiment sweeps and action-surface dumps.

Rollout ``i`` of a run seeded with ``seed`` draws every uniform it needs from
``default_rng(SeedSequence(seed, spawn_key=(i,)))`` as one ``(D, M, 2)`` block,
so a single rollout and the batched estimator see the same channel path.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt
import structlog

from .backward import (
    Policy,
    PolicyTable,
    as_policy_table,
    evaluate_policy,
    expected_total_cost,
)
from .error import DisallowedActionError, GridSpecError, SampleSizeError, TaggedError
from .mdp import AccessMDP, Action, ScenarioConfig, State, as_mdp, stage_cost_of
from .policies import policy_by_name
from .result import Err, Ok, Result

log = structlog.get_logger(__name__)

SweepVariable = Literal["V", "D"]


@dataclass(frozen=True, slots=True)
class Step:
    t: int
    state: State
    action: Action
    cost: float


@dataclass(frozen=True, slots=True)
class Trajectory:
    """One simulated episode; ``total`` is the stage costs plus the terminal penalty."""

    steps: tuple[Step, ...]
    final_state: State
    terminal_penalty: float
    total: float


@dataclass(frozen=True, slots=True)
class Estimate:
    mean: float
    stderr: float
    n: int


def rollout_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _uniforms(mdp: AccessMDP, seed: int, index: int) -> npt.NDArray[np.float64]:
    return rollout_stream(seed, index).random((mdp.horizon, mdp.channels, 2))


def rollout(
    problem: ScenarioConfig | AccessMDP,
    policy: Callable[[int, State], Action],
    s1: State,
    rng: np.random.Generator,
) -> Trajectory:
    """Simulates slots 1..D from ``s1``.

    Raises:
        DisallowedActionError: If the policy picks an action not allowed in the
            current state.
    """
    mdp = as_mdp(problem)
    uniforms = rng.random((mdp.horizon, mdp.channels, 2))
    state = s1
    steps: list[Step] = []
    total = 0.0
    for t in range(1, mdp.horizon + 1):
        action = policy(t, state)
        if not mdp.is_allowed(state, action):
            raise DisallowedActionError(state, action, t)
        cost = mdp.stage_cost(state, action)
        steps.append(Step(t, state, action, cost))
        total += cost
        v_next = mdp.next_remaining(state.v, state.o, state.q, action.b, action.n)
        channels = mdp.model.advance(state.channel_state, uniforms[t - 1])
        state = State(v_next, channels.occupancy, channels.quality, action.n)
    penalty = mdp.penalty(state.v)
    return Trajectory(tuple(steps), state, penalty, total + penalty)


def _stage_cost_lookup(mdp: AccessMDP) -> npt.NDArray[np.float64]:
    table = np.zeros((2, 2, 2))
    for active in (0, 1):
        for b in (0, 1):
            for switch in (0, 1):
                table[active, b, switch] = stage_cost_of(
                    mdp.config.costs, bool(active), b, bool(switch)
                )
    return table


def rollout_totals(
    problem: ScenarioConfig | AccessMDP,
    policy: Policy,
    s1: State,
    n_rollouts: int,
    seed: int,
) -> npt.NDArray[np.float64]:
    """Total cost of rollouts ``0..n_rollouts-1``, simulated side by side."""
    mdp = as_mdp(problem)
    mdp.space.check(s1)
    table = as_policy_table(mdp, policy)
    channels = mdp.channels
    rates = mdp.config.rates
    costs = _stage_cost_lookup(mdp)
    uniforms = np.stack([_uniforms(mdp, seed, i) for i in range(n_rollouts)])
    rows = np.arange(n_rollouts)
    weights = 1 << np.arange(channels - 1, -1, -1)

    v = np.full(n_rollouts, s1.v, dtype=np.int64)
    occupancy = np.tile(np.asarray(s1.o, dtype=np.int8), (n_rollouts, 1))
    quality = np.tile(np.asarray(s1.q, dtype=np.int8), (n_rollouts, 1))
    current = np.full(n_rollouts, s1.c, dtype=np.int64)
    total = np.zeros(n_rollouts)

    for t in range(1, mdp.horizon + 1):
        k = ((occupancy @ weights) << channels) | (quality @ weights)
        b_all, n_all = table.stage(t)
        b = b_all[v, k, current - 1].astype(np.int64)
        target = n_all[v, k, current - 1]
        requested = target
        out_of_range = (target < 1) | (target > channels) | (b < 0) | (b > 1)
        target = np.clip(target, 1, channels)
        target_idle = occupancy[rows, target - 1] == 1
        bad = out_of_range | ((b == 1) & ((v == 0) | ~target_idle))
        if bad.any():
            i = int(np.argmax(bad))
            state = _row_state(v, occupancy, quality, current, i)
            raise DisallowedActionError(state, Action(int(b[i]), int(requested[i])), t)

        total += costs[(v > 0).astype(np.int64), b, (target != current).astype(np.int64)]
        good = quality[rows, target - 1] == 1
        rate = np.where((b == 1) & target_idle, np.where(good, rates.good, rates.bad), 0)
        v = np.maximum(v - rate, 0)
        occupancy, quality = mdp.model.advance_bits(occupancy, quality, uniforms[:, t - 1])
        current = target

    return total + mdp.penalty_vector[v]


def _row_state(
    v: npt.NDArray[np.int64],
    occupancy: npt.NDArray[np.int8],
    quality: npt.NDArray[np.int8],
    current: npt.NDArray[np.int64],
    i: int,
) -> State:
    return State.of(int(v[i]), occupancy[i], quality[i], int(current[i]))


def monte_carlo(
    problem: ScenarioConfig | AccessMDP,
    policy: Policy,
    s1: State,
    n_rollouts: int,
    seed: int,
) -> Estimate:
    """Sample mean and standard error of the total cost over independent rollouts.

    Raises:
        SampleSizeError: If ``n_rollouts`` is below 1.

    Example:
        >>> est = monte_carlo(config, ALWAYS_STAYING, config.initial_state, 1000, seed=7)
        >>> est.mean, est.stderr
    """
    if n_rollouts < 1:
        raise SampleSizeError(n_rollouts)
    totals = rollout_totals(problem, policy, s1, n_rollouts, seed)
    stderr = float(totals.std(ddof=1) / np.sqrt(n_rollouts)) if n_rollouts > 1 else 0.0
    return Estimate(float(totals.mean()), stderr, n_rollouts)


@dataclass(frozen=True, slots=True)
class SweepRow:
    sweep_var: str
    sweep_value: int
    policy: str
    mean: float
    stderr: float
    exact_value: float
    n: int

    def to_mapping(self) -> dict[str, object]:
        return {
            "sweep_var": self.sweep_var,
            "sweep_value": self.sweep_value,
            "policy": self.policy,
            "mean": self.mean,
            "stderr": self.stderr,
            "exact_value": self.exact_value,
            "n": self.n,
        }


@dataclass(frozen=True, slots=True)
class SweepResult:
    """Per grid point and policy: Monte Carlo mean, standard error and exact value.

    With ``n == 0`` no rollouts were run and ``mean`` repeats the exact value.
    """

    variable: str
    grid: tuple[int, ...]
    rows: tuple[SweepRow, ...]

    def policies(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(row.policy for row in self.rows))

    def exact(self, policy: str) -> list[float]:
        return [row.exact_value for row in self.rows if row.policy == policy]

    def to_mapping(self) -> dict[str, object]:
        return {
            "variable": self.variable,
            "grid": list(self.grid),
            "rows": [row.to_mapping() for row in self.rows],
        }


def evaluate_point(
    mdp: AccessMDP,
    policies: Sequence[str],
    n_rollouts: int,
    seed: int,
    variable: str,
    value: int,
) -> Result[list[SweepRow], TaggedError]:
    """Exact and Monte Carlo cost of each named policy from the scenario's initial state."""
    s1 = mdp.config.initial_state
    rows: list[SweepRow] = []
    for name in policies:
        resolved = policy_by_name(name, mdp)
        if resolved.is_err():
            return Err(resolved.unwrap_err())
        handle = resolved.unwrap()
        table = handle.tabulate(mdp)
        exact = expected_total_cost(evaluate_policy(mdp, table), s1)
        if n_rollouts > 0:
            estimate = monte_carlo(mdp, table, s1, n_rollouts, seed)
        else:
            estimate = Estimate(exact, 0.0, 0)
        rows.append(
            SweepRow(variable, value, name, estimate.mean, estimate.stderr, exact, estimate.n)
        )
        log.info(
            "policy evaluated",
            sweep_var=variable,
            sweep_value=value,
            policy=name,
            exact=exact,
            mean=estimate.mean,
        )
    return Ok(rows)


def _sweep(
    config: ScenarioConfig,
    variable: SweepVariable,
    grid: Sequence[int],
    rebuild: Callable[[ScenarioConfig, int], ScenarioConfig],
    policies: Sequence[str],
    n_rollouts: int,
    seed: int,
) -> Result[SweepResult, TaggedError]:
    points = tuple(int(x) for x in grid)
    if not points or any(b <= a for a, b in zip(points, points[1:])):
        spec = ",".join(map(str, points))
        return Err(GridSpecError(spec, "grid must be non-empty and ascending"))

    rows: list[SweepRow] = []
    for value in points:
        checked = rebuild(config, value).validate()
        if checked.is_err():
            return Err(checked.unwrap_err())
        mdp = AccessMDP(checked.unwrap())
        point = evaluate_point(mdp, policies, n_rollouts, seed, variable, value)
        if point.is_err():
            return Err(point.unwrap_err())
        rows.extend(point.unwrap())
    return Ok(SweepResult(variable, points, tuple(rows)))


def sweep_data_size(
    config: ScenarioConfig,
    grid: Sequence[int],
    policies: Sequence[str],
    n_rollouts: int,
    seed: int = 0,
) -> Result[SweepResult, TaggedError]:
    """Re-solves and evaluates every policy for each data size V in ``grid``."""
    return _sweep(
        config, "V", grid, lambda c, v: c.with_data_size(v), policies, n_rollouts, seed
    )


def sweep_deadline(
    config: ScenarioConfig,
    grid: Sequence[int],
    policies: Sequence[str],
    n_rollouts: int,
    seed: int = 0,
) -> Result[SweepResult, TaggedError]:
    """Re-solves and evaluates every policy for each deadline D in ``grid``."""
    return _sweep(config, "D", grid, lambda c, d: c.with_horizon(d), policies, n_rollouts, seed)


SILENT_STAY, TRANSMIT_STAY, TRANSMIT_SWITCH, SILENT_SWITCH = 0, 1, 2, 3


def action_code(action: Action, c: int) -> int:
    if action.n == c:
        return TRANSMIT_STAY if action.b == 1 else SILENT_STAY
    return TRANSMIT_SWITCH if action.b == 1 else SILENT_SWITCH


@dataclass(frozen=True, slots=True)
class SurfaceRow:
    t: int
    v: int
    action_code: int
    target: int


def dump_action_surface(
    table: PolicyTable, o: Sequence[int], q: Sequence[int], c: int
) -> list[SurfaceRow]:
    """Decision over the (t, v) grid for a fixed (o, q, c)."""
    rows: list[SurfaceRow] = []
    for t in range(1, table.horizon + 1):
        for v in range(table.space.data_size + 1):
            action = table.action(t, State.of(v, o, q, c))
            rows.append(SurfaceRow(t, v, action_code(action, c), action.n))
    return rows

