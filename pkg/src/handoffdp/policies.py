"""Policy handles: the two baselines and adapters over solved tables."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .backward import PolicyTable, backward_induction, tabulate
from .channel import decode
from .error import PolicyMismatchError, UnknownPolicyError
from .mdp import AccessMDP, Action, ScenarioConfig, State, StateSpace, as_mdp
from .monotone import (
    ThresholdTable,
    best_switch_target,
    monotone_backward_induction,
    policy_from_thresholds,
)
from .result import Err, Ok, Result


@dataclass(frozen=True, slots=True)
class PolicyHandle:
    """A named decision rule ``(t, s) -> Action``.

    ``tabulator`` builds the full policy table directly; without it the rule
    is queried once per stage and state.
    """

    name: str
    decide: Callable[[int, State], Action]
    tabulator: Callable[[AccessMDP], PolicyTable] | None = None

    def __call__(self, t: int, s: State) -> Action:
        return self.decide(t, s)

    def tabulate(self, mdp: AccessMDP) -> PolicyTable:
        if self.tabulator is not None:
            return self.tabulator(mdp)
        return tabulate(mdp, self.decide)


def always_staying(t: int, s: State) -> Action:
    """Transmit on the current channel whenever it is idle and data remains."""
    if s.v > 0 and s.o[s.c - 1] == 1:
        return Action(1, s.c)
    return Action(0, s.c)


def quality_based_switching(t: int, s: State) -> Action:
    """Transmit on the nearest idle channel of best quality; stay silent otherwise."""
    if s.v > 0 and 1 in s.o:
        return Action(1, best_switch_target(s.o, s.q, s.c))
    return Action(0, s.c)


def _time_invariant_table(
    mdp: AccessMDP, rule: Callable[[int, State], Action]
) -> PolicyTable:
    # Valid for rules that read v only through v > 0.
    space = mdp.space
    shape = (mdp.horizon, space.data_size + 1, space.joint_states, space.channels)
    b = np.zeros(shape, dtype=np.int8)
    n = np.zeros(shape, dtype=np.int64)
    for k in range(space.joint_states):
        o, q = decode(k, space.channels)
        for c in range(1, space.channels + 1):
            idle = rule(1, State(0, o, q, c))
            b[:, 0, k, c - 1], n[:, 0, k, c - 1] = idle.b, idle.n
            if space.data_size > 0:
                active = rule(1, State(1, o, q, c))
                b[:, 1:, k, c - 1], n[:, 1:, k, c - 1] = active.b, active.n
    return PolicyTable(space, b, n)


ALWAYS_STAYING = PolicyHandle(
    "always-staying",
    always_staying,
    lambda mdp: _time_invariant_table(mdp, always_staying),
)

QUALITY_BASED_SWITCHING = PolicyHandle(
    "quality-based-switching",
    quality_based_switching,
    lambda mdp: _time_invariant_table(mdp, quality_based_switching),
)


def _require_same_space(mdp: AccessMDP, space: StateSpace, horizon: int) -> None:
    if (
        space.channels != mdp.space.channels
        or space.data_size != mdp.space.data_size
        or horizon != mdp.horizon
    ):
        raise PolicyMismatchError(
            f"table solved for M={space.channels}, V={space.data_size}, D={horizon}; "
            f"scenario has M={mdp.channels}, V={mdp.data_size}, D={mdp.horizon}"
        )


def optimal_from_table(policy: PolicyTable) -> PolicyHandle:
    def tabulator(mdp: AccessMDP) -> PolicyTable:
        _require_same_space(mdp, policy.space, policy.horizon)
        return policy

    return PolicyHandle("optimal", policy.action, tabulator)


def optimal_from_thresholds(thresholds: ThresholdTable) -> PolicyHandle:
    def decide(t: int, s: State) -> Action:
        return policy_from_thresholds(thresholds, t, s)

    def tabulator(mdp: AccessMDP) -> PolicyTable:
        _require_same_space(mdp, thresholds.space, thresholds.horizon)
        return thresholds.to_policy_table()

    return PolicyHandle("optimal-thresholds", decide, tabulator)


def _optimal(mdp: AccessMDP) -> PolicyHandle:
    _, policy = backward_induction(mdp)
    return optimal_from_table(policy)


def _optimal_thresholds(mdp: AccessMDP) -> PolicyHandle:
    _, _, thresholds = monotone_backward_induction(mdp)
    return optimal_from_thresholds(thresholds)


POLICY_FACTORIES: dict[str, Callable[[AccessMDP], PolicyHandle]] = {
    "optimal": _optimal,
    "optimal-thresholds": _optimal_thresholds,
    "always-staying": lambda _: ALWAYS_STAYING,
    "quality-based-switching": lambda _: QUALITY_BASED_SWITCHING,
}

POLICY_NAMES = tuple(POLICY_FACTORIES)

COMPARED_POLICIES = ("optimal", "quality-based-switching", "always-staying")


def policy_by_name(
    name: str, problem: ScenarioConfig | AccessMDP
) -> Result[PolicyHandle, UnknownPolicyError]:
    """Builds the named policy for a scenario, solving it when the policy is optimal.

    Example:
        >>> policy_by_name("always-staying", config).map(lambda p: p.name)
        Ok('always-staying')
        >>> policy_by_name("greedy", config).is_err()
        True
    """
    factory = POLICY_FACTORIES.get(name)
    if factory is None:
        return Err(UnknownPolicyError(name, POLICY_NAMES))
    return Ok(factory(as_mdp(problem)))
