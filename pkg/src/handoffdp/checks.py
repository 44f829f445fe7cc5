"""Numerical verifiers for the structural properties of solved instances."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import structlog

from .backward import PolicyTable, ValueTable, q_value_layer
from .channel import decode
from .mdp import AccessMDP, Action, ScenarioConfig, State, as_mdp
from .monotone import CaseTag, best_switch_target, classify_case, ladder

log = structlog.get_logger(__name__)

CHECK_TOLERANCE = 1e-9


@dataclass(frozen=True, slots=True)
class Counterexample:
    t: int
    state: State
    actions: tuple[Action, ...]
    lhs: float
    rhs: float
    detail: str = ""

    def to_mapping(self) -> dict[str, object]:
        return {
            "t": self.t,
            "state": {
                "v": self.state.v,
                "o": list(self.state.o),
                "q": list(self.state.q),
                "c": self.state.c,
            },
            "actions": [[a.b, a.n] for a in self.actions],
            "lhs": self.lhs,
            "rhs": self.rhs,
            "detail": self.detail,
        }


@dataclass(frozen=True, slots=True)
class CheckReport:
    """Outcome of one check; it passes iff no counterexample was found."""

    name: str
    counterexamples: tuple[Counterexample, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_mapping(self) -> dict[str, object]:
        return {
            "name": self.name,
            "passed": self.passed,
            "counterexamples": [c.to_mapping() for c in self.counterexamples],
        }


def _finish(name: str, found: list[Counterexample]) -> CheckReport:
    report = CheckReport(name, tuple(found))
    log.debug("check finished", check=name, passed=report.passed, counterexamples=len(found))
    return report


def check_value_monotone(values: ValueTable) -> CheckReport:
    """U_t(v+1, o, q, c) >= U_t(v, o, q, c) - 1e-9 on every stage including the terminal one."""
    diff = np.diff(values.values, axis=1)
    found: list[Counterexample] = []
    space = values.space
    for t0, v, k, c0 in np.argwhere(diff < -CHECK_TOLERANCE):
        o, q = decode(int(k), space.channels)
        upper = float(values.values[t0, v + 1, k, c0])
        lower = float(values.values[t0, v, k, c0])
        found.append(
            Counterexample(
                t=int(t0) + 1,
                state=State(int(v) + 1, o, q, int(c0) + 1),
                actions=(),
                lhs=upper,
                rhs=lower,
                detail=f"value drops from v={int(v)} to v={int(v) + 1}",
            )
        )
    return _finish("value_monotone", found)


class RateOrder(Enum):
    FIRST = "first>=second"
    SECOND = "second>=first"
    EQUAL = "both"
    INCOMPARABLE = "incomparable"


def action_rate_order(
    mdp: AccessMDP, o: Sequence[int], q: Sequence[int], a1: Action, a2: Action
) -> RateOrder:
    """Partial order on actions by the rate they deliver in (o, q).

    Transmitting on a busy channel is never allowed, so such an action is
    incomparable with everything.
    """
    for a in (a1, a2):
        if a.b == 1 and o[a.n - 1] == 0:
            return RateOrder.INCOMPARABLE
    r1 = mdp.rate(o, q, a1.b, a1.n)
    r2 = mdp.rate(o, q, a2.b, a2.n)
    if r1 == r2:
        return RateOrder.EQUAL
    return RateOrder.FIRST if r1 > r2 else RateOrder.SECOND


def check_subadditivity(
    problem: ScenarioConfig | AccessMDP, values: ValueTable, t: int
) -> CheckReport:
    """Q_t(v_hi, a_hi) + Q_t(v_lo, a_lo) <= Q_t(v_hi, a_lo) + Q_t(v_lo, a_hi) + 1e-9.

    Checked for every (o, q, c), every ordered pair of distinct allowed actions
    with ``rate(a_hi) >= rate(a_lo)`` and every ``v_hi >= v_lo >= 1``. Pairs of
    equal rate are compared in both orders. Equivalently,
    ``Q(v, a_hi) - Q(v, a_lo)`` must be nonincreasing in v.
    """
    mdp = as_mdp(problem)
    catalog = mdp.catalog
    q = q_value_layer(mdp, values.layer(t + 1))[1:]
    slots = catalog.slots
    found: list[Counterexample] = []

    for hi in range(slots):
        for lo in range(slots):
            if hi == lo:
                continue
            comparable = (catalog.rate[:, :, hi] >= catalog.rate[:, :, lo]) & (
                hi < catalog.count
            ) & (lo < catalog.count)
            if not comparable.any():
                continue
            with np.errstate(invalid="ignore"):
                diff = q[..., hi] - q[..., lo]
                running_min = np.minimum.accumulate(diff, axis=0)
                suspect = (diff - running_min > CHECK_TOLERANCE) & comparable[None]
            for i_hi, k, c0 in np.argwhere(suspect):
                i_lo = int(np.argmin(diff[: i_hi + 1, k, c0]))
                lhs = float(q[i_hi, k, c0, hi] + q[i_lo, k, c0, lo])
                rhs = float(q[i_hi, k, c0, lo] + q[i_lo, k, c0, hi])
                if lhs <= rhs + CHECK_TOLERANCE:
                    continue
                o, qual = decode(int(k), mdp.channels)
                found.append(
                    Counterexample(
                        t=t,
                        state=State(int(i_hi) + 1, o, qual, int(c0) + 1),
                        actions=(
                            catalog.action(int(k), int(c0) + 1, hi),
                            catalog.action(int(k), int(c0) + 1, lo),
                        ),
                        lhs=lhs,
                        rhs=rhs,
                        detail=f"v_lo={i_lo + 1}",
                    )
                )
    return _finish(f"subadditivity[t={t}]", found)


def check_policy_monotone(policy: PolicyTable, problem: ScenarioConfig | AccessMDP) -> CheckReport:
    """Along v, each (t, o, q, c) climbs its case ladder and never steps back.

    Case 4 states must stay silent on the current channel for every v. States
    outside cases 1 to 4 are not checked.
    """
    mdp = as_mdp(problem)
    space = mdp.space
    found: list[Counterexample] = []

    for k in range(space.joint_states):
        o, q = decode(k, space.channels)
        for c in range(1, space.channels + 1):
            tag = classify_case(o, q, c)
            if tag is CaseTag.OTHER:
                continue
            target = best_switch_target(o, q, c) if tag is not CaseTag.CASE4 else 0
            rungs = ladder(tag, c, target)
            for t in range(1, policy.horizon + 1):
                b, n = policy.stage(t)
                previous: tuple[int, Action] | None = None
                for v in range(space.data_size + 1):
                    a = Action(int(b[v, k, c - 1]), int(n[v, k, c - 1]))
                    state = State(v, o, q, c)
                    if a not in rungs:
                        detail = f"{a} is off the {tag.value} ladder"
                        found.append(Counterexample(t, state, (a,), -1.0, -1.0, detail))
                        break
                    rung = rungs.index(a)
                    if previous is not None and rung < previous[0]:
                        found.append(
                            Counterexample(
                                t,
                                state,
                                (previous[1], a),
                                float(mdp.rate(o, q, previous[1].b, previous[1].n)),
                                float(mdp.rate(o, q, a.b, a.n)),
                                "action steps back down the ladder",
                            )
                        )
                        break
                    previous = (rung, a)
    return _finish("policy_monotone", found)


def run_all_checks(
    problem: ScenarioConfig | AccessMDP, values: ValueTable, policy: PolicyTable
) -> list[CheckReport]:
    """Every check on one solved instance, subadditivity once per stage."""
    mdp = as_mdp(problem)
    reports = [check_value_monotone(values), check_policy_monotone(policy, mdp)]
    reports.extend(check_subadditivity(mdp, values, t) for t in range(1, mdp.horizon + 1))
    return reports
