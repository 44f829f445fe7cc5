"""Exact finite-horizon backward induction and policy evaluation.

Value layers are dense arrays of shape ``(V+1, 4**M, M)`` indexed by
``[v, k, c-1]``. The expected continuation value is computed once per stage
with the joint transition matrix; the Q-values of every state and every
action slot then follow from a single gather.
"""

from collections.abc import Callable
from typing import Protocol

import numpy as np
import numpy.typing as npt
import structlog

from .error import DisallowedActionError, PolicyMismatchError, StageIndexError
from .mdp import AccessMDP, Action, ScenarioConfig, State, StateSpace, as_mdp

log = structlog.get_logger(__name__)

TIE_TOLERANCE = 1e-12

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


class ValueTable:
    """Values U_t(s) for t = 1..D+1; layer t = D+1 is the terminal penalty."""

    def __init__(self, space: StateSpace, values: FloatArray) -> None:
        expected = (space.data_size + 1, space.joint_states, space.channels)
        if values.ndim != 4 or values.shape[1:] != expected:
            raise PolicyMismatchError(f"value array shape {values.shape} does not fit {expected}")
        self.space = space
        self.values = values
        self.values.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 1

    def layer(self, t: int) -> FloatArray:
        if not 1 <= t <= self.horizon + 1:
            raise StageIndexError(t, self.horizon + 1)
        return self.values[t - 1]

    def value(self, t: int, s: State) -> float:
        self.space.check(s)
        return float(self.layer(t)[s.v, s.code, s.c - 1])

    def flat(self, t: int) -> FloatArray:
        """Layer t in flat state-index order."""
        return self.layer(t).reshape(-1)

    def __repr__(self) -> str:
        return f"ValueTable(horizon={self.horizon}, states={self.space.size})"


class PolicyTable:
    """Decisions pi_t(s) for t = 1..D, stored as transmit flags and 1-based targets."""

    def __init__(self, space: StateSpace, b: npt.NDArray[np.int8], n: IntArray) -> None:
        expected = (space.data_size + 1, space.joint_states, space.channels)
        if b.shape != n.shape or b.ndim != 4 or b.shape[1:] != expected:
            raise PolicyMismatchError(f"policy array shape {b.shape} does not fit {expected}")
        self.space = space
        self.b = b
        self.n = n
        self.b.setflags(write=False)
        self.n.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.b.shape[0]

    def _stage(self, t: int) -> int:
        if not 1 <= t <= self.horizon:
            raise StageIndexError(t, self.horizon)
        return t - 1

    def action(self, t: int, s: State) -> Action:
        self.space.check(s)
        i = self._stage(t)
        return Action(int(self.b[i, s.v, s.code, s.c - 1]), int(self.n[i, s.v, s.code, s.c - 1]))

    def __call__(self, t: int, s: State) -> Action:
        return self.action(t, s)

    def stage(self, t: int) -> tuple[npt.NDArray[np.int8], IntArray]:
        i = self._stage(t)
        return self.b[i], self.n[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolicyTable):
            return NotImplemented
        return bool(np.array_equal(self.b, other.b) and np.array_equal(self.n, other.n))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"PolicyTable(horizon={self.horizon}, states={self.space.size})"


class TabulatedPolicy(Protocol):
    def tabulate(self, mdp: AccessMDP) -> PolicyTable: ...


type Policy = PolicyTable | TabulatedPolicy | Callable[[int, State], Action]


def terminal_layer(mdp: AccessMDP) -> FloatArray:
    space = mdp.space
    return np.broadcast_to(
        mdp.penalty_vector[:, None, None],
        (space.data_size + 1, space.joint_states, space.channels),
    ).copy()


def continuation(mdp: AccessMDP, next_layer: FloatArray) -> FloatArray:
    """W[v', k, n-1]: expected next-stage value from joint code k, landing on n with v'."""
    return np.einsum("kj,vjn->vkn", mdp.model.transition_matrix, next_layer)


def q_value_layer(mdp: AccessMDP, next_layer: FloatArray) -> FloatArray:
    """Q-values of one stage, shape ``(V+1, 4**M, M, 2M)`` in canonical slot order.

    Slots not allowed in a state hold ``inf``.
    """
    catalog = mdp.catalog
    w = continuation(mdp, next_layer)
    v = np.arange(mdp.data_size + 1)[:, None, None, None]
    v_next = np.maximum(v - catalog.rate[None], 0)
    cost = np.where(v > 0, catalog.cost_active[None], catalog.cost_idle[None])
    k = np.arange(mdp.space.joint_states)[None, :, None, None]
    return cost + w[v_next, k, catalog.n[None] - 1]


def select_actions(q: FloatArray) -> tuple[FloatArray, IntArray]:
    """Tie-aware argmin over the last axis.

    The first slot whose Q-value lies within ``max(1e-12, 1e-12*|min|)`` of the
    minimum wins. Returns the chosen Q-values and slot indices.
    """
    best = q.min(axis=-1)
    tolerance = np.maximum(TIE_TOLERANCE, TIE_TOLERANCE * np.abs(best))
    slot = np.argmax(q <= (best + tolerance)[..., None], axis=-1)
    value = np.take_along_axis(q, slot[..., None], axis=-1)[..., 0]
    return value, slot


def q_value(mdp: AccessMDP, t: int, s: State, a: Action, next_layer: FloatArray) -> float:
    """Stage cost plus expected next-stage value, summed over the successor list.

    Raises:
        DisallowedActionError: If ``a`` is not allowed in ``s``.
    """
    if not mdp.is_allowed(s, a):
        raise DisallowedActionError(s, a, t)
    expected = sum(
        p * float(next_layer[s_next.v, s_next.code, s_next.c - 1])
        for s_next, p in mdp.successor_distribution(s, a)
    )
    return mdp.stage_cost(s, a) + expected


def _policy_from_slots(mdp: AccessMDP, slots: IntArray) -> tuple[npt.NDArray[np.int8], IntArray]:
    catalog = mdp.catalog
    k = np.arange(mdp.space.joint_states)[:, None]
    c = np.arange(mdp.channels)[None, :]
    return catalog.b[k, c, slots], catalog.n[k, c, slots]


def backward_induction(problem: ScenarioConfig | AccessMDP) -> tuple[ValueTable, PolicyTable]:
    """Optimal values and policy for every stage and state.

    Example:
        >>> values, policy = backward_induction(config)
        >>> expected_total_cost(values, config.initial_state)
    """
    mdp = as_mdp(problem)
    space = mdp.space
    horizon = mdp.horizon
    shape = (space.data_size + 1, space.joint_states, space.channels)
    values = np.empty((horizon + 1, *shape))
    b = np.empty((horizon, *shape), dtype=np.int8)
    n = np.empty((horizon, *shape), dtype=np.int64)

    values[horizon] = terminal_layer(mdp)
    for t in range(horizon, 0, -1):
        value, slots = select_actions(q_value_layer(mdp, values[t]))
        values[t - 1] = value
        b[t - 1], n[t - 1] = _policy_from_slots(mdp, slots)
        log.debug("stage solved", t=t, states=space.size)

    return ValueTable(space, values), PolicyTable(space, b, n)


def tabulate(mdp: AccessMDP, decide: Callable[[int, State], Action]) -> PolicyTable:
    """Records ``decide(t, s)`` for every stage and state."""
    space = mdp.space
    shape = (mdp.horizon, space.data_size + 1, space.joint_states, space.channels)
    b = np.empty(shape, dtype=np.int8)
    n = np.empty(shape, dtype=np.int64)
    for t in range(1, mdp.horizon + 1):
        for s in space:
            a = decide(t, s)
            b[t - 1, s.v, s.code, s.c - 1] = a.b
            n[t - 1, s.v, s.code, s.c - 1] = a.n
    return PolicyTable(space, b, n)


def as_policy_table(mdp: AccessMDP, policy: Policy) -> PolicyTable:
    if isinstance(policy, PolicyTable):
        return policy
    if hasattr(policy, "tabulate"):
        return policy.tabulate(mdp)  # type: ignore[union-attr]
    return tabulate(mdp, policy)  # type: ignore[arg-type]


def slot_lookup(mdp: AccessMDP) -> IntArray:
    """Slot of action (b, n) per (k, c): array ``[k, c-1, b, n-1]``, -1 where not allowed."""
    catalog = mdp.catalog
    channels = mdp.channels
    lookup = np.full((mdp.space.joint_states, channels, 2, channels), -1, dtype=np.int64)
    for k in range(mdp.space.joint_states):
        for c0 in range(channels):
            for j in range(int(catalog.count[k, c0])):
                lookup[k, c0, catalog.b[k, c0, j], catalog.n[k, c0, j] - 1] = j
    return lookup


def _disallowed(
    mdp: AccessMDP,
    t: int,
    b: npt.NDArray[np.int8],
    n: IntArray,
    bad: npt.NDArray[np.bool_],
) -> DisallowedActionError:
    v, k, c0 = (int(x) for x in np.argwhere(bad)[0])
    s = mdp.space.state(((v * mdp.space.joint_states) + k) * mdp.channels + c0)
    return DisallowedActionError(s, Action(int(b[v, k, c0]), int(n[v, k, c0])), t)


def evaluate_policy(problem: ScenarioConfig | AccessMDP, policy: Policy) -> ValueTable:
    """Values of a fixed policy by the same recursion with its action in place of the min.

    Raises:
        DisallowedActionError: If the policy picks an action outside the allowed
            set, reporting the first offending stage and state.
        PolicyMismatchError: If a policy table belongs to another state space.
    """
    mdp = as_mdp(problem)
    table = as_policy_table(mdp, policy)
    space = mdp.space
    if table.horizon != mdp.horizon or table.b.shape[1:] != (
        space.data_size + 1,
        space.joint_states,
        space.channels,
    ):
        raise PolicyMismatchError(
            f"policy covers {table.horizon} stages of shape {table.b.shape[1:]}, "
            f"scenario needs {mdp.horizon} stages over {space.size} states"
        )

    lookup = slot_lookup(mdp)
    k = np.arange(space.joint_states)[None, :, None]
    c = np.arange(space.channels)[None, None, :]
    values = np.empty((mdp.horizon + 1, space.data_size + 1, space.joint_states, space.channels))
    values[mdp.horizon] = terminal_layer(mdp)

    for t in range(mdp.horizon, 0, -1):
        b, n = table.stage(t)
        in_range = (b >= 0) & (b <= 1) & (n >= 1) & (n <= space.channels)
        candidate = lookup[k, c, np.clip(b, 0, 1), np.clip(n, 1, space.channels) - 1]
        slots = np.where(in_range, candidate, -1).astype(np.int64)
        q = q_value_layer(mdp, values[t])
        bad = slots < 0
        if not bad.any():
            bad = ~np.isfinite(np.take_along_axis(q, slots[..., None], axis=-1)[..., 0])
        if bad.any():
            raise _disallowed(mdp, t, b, n, bad)
        values[t - 1] = np.take_along_axis(q, slots[..., None], axis=-1)[..., 0]
        log.debug("stage evaluated", t=t)

    return ValueTable(space, values)


def expected_total_cost(values: ValueTable, s1: State) -> float:
    """Expected total cost from slot 1 in state ``s1``."""
    return values.value(1, s1)
