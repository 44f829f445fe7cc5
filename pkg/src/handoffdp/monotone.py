"""Monotone backward induction over threshold decision rules.

For a fixed (o, q, c) the optimal action climbs a short ladder as the
remaining data v grows:

* case 1, current channel idle with the best idle quality: (0,c) then (1,c)
* case 2, current channel busy with some idle channel: (0,c) then (1,n)
* case 3, current channel idle-bad with an idle-good channel: (0,c), (1,c), (1,n)
* case 4, every channel busy: (0,c) for all v

where n is the nearest idle channel of best quality. The solver scans v
upward, stops evaluating Q-values once the top rung is optimal and records the
v at which each rung is first reached.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import product
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
import structlog

from .backward import (
    TIE_TOLERANCE,
    PolicyTable,
    ValueTable,
    continuation,
    terminal_layer,
)
from .channel import decode, encode
from .error import InvalidStateError, PolicyMismatchError, StageIndexError
from .mdp import AccessMDP, Action, ScenarioConfig, State, StateSpace, as_mdp

log = structlog.get_logger(__name__)

UNSET = -1


class CaseTag(Enum):
    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"
    CASE4 = "case4"
    OTHER = "other"


def _idle(o: Sequence[int]) -> tuple[int, ...]:
    return tuple(m + 1 for m, bit in enumerate(o) if bit == 1)


def classify_case(
    o: Sequence[int], q: Sequence[int], c: int, idle_set: Sequence[int] | None = None
) -> CaseTag:
    """Which threshold rule applies to (o, q, c); v and t play no part.

    Example:
        >>> classify_case([1, 1, 1], [0, 1, 0], 3)
        <CaseTag.CASE3: 'case3'>
    """
    idle = tuple(idle_set) if idle_set is not None else _idle(o)
    if not idle:
        return CaseTag.CASE4
    best = max(q[n - 1] for n in idle)
    current_idle = o[c - 1] == 1
    if current_idle and q[c - 1] == best:
        return CaseTag.CASE1
    if current_idle and q[c - 1] == 0 and best == 1:
        return CaseTag.CASE3
    if not current_idle:
        return CaseTag.CASE2
    return CaseTag.OTHER


def best_switch_target(
    o: Sequence[int], q: Sequence[int], c: int, idle_set: Sequence[int] | None = None
) -> int:
    """Nearest idle channel of best quality, lower index on distance ties.

    Raises:
        InvalidStateError: If no channel is idle.
    """
    idle = tuple(idle_set) if idle_set is not None else _idle(o)
    if not idle:
        raise InvalidStateError(f"(o={list(o)}, c={c})", "no idle channel to switch to")
    best = max(q[n - 1] for n in idle)
    return min((n for n in idle if q[n - 1] == best), key=lambda n: (abs(n - c), n))


def ladder(tag: CaseTag, c: int, target: int) -> tuple[Action, ...]:
    match tag:
        case CaseTag.CASE1:
            return (Action(0, c), Action(1, c))
        case CaseTag.CASE2:
            return (Action(0, c), Action(1, target))
        case CaseTag.CASE3:
            return (Action(0, c), Action(1, c), Action(1, target))
        case CaseTag.CASE4:
            return (Action(0, c),)
        case CaseTag.OTHER:
            return ()


class ThresholdTable:
    """Thresholds th1..th4 per (t, o, q, c).

    ``thresholds[t-1, k, c-1]`` holds four integers. Only the entries of the
    state's case are populated; the rest are -1. ``V+1`` means the rung is
    never reached within 0..V.
    """

    def __init__(
        self,
        space: StateSpace,
        thresholds: npt.NDArray[np.int64],
        cases: tuple[tuple[CaseTag, ...], ...],
        targets: npt.NDArray[np.int64],
    ) -> None:
        self.space = space
        self.thresholds = thresholds
        self.cases = cases
        self.targets = targets
        self.thresholds.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.thresholds.shape[0]

    @property
    def never(self) -> int:
        return self.space.data_size + 1

    def case(self, o: Sequence[int], q: Sequence[int], c: int) -> CaseTag:
        return self.cases[encode(o, q)][c - 1]

    def target(self, o: Sequence[int], q: Sequence[int], c: int) -> int:
        return int(self.targets[encode(o, q), c - 1])

    def row(self, t: int, o: Sequence[int], q: Sequence[int], c: int) -> tuple[int, int, int, int]:
        if not 1 <= t <= self.horizon:
            raise StageIndexError(t, self.horizon)
        th1, th2, th3, th4 = (int(x) for x in self.thresholds[t - 1, encode(o, q), c - 1])
        return th1, th2, th3, th4

    def to_policy_table(self) -> PolicyTable:
        """Expands the threshold rules over every (t, v, o, q, c)."""
        space = self.space
        shape = (self.horizon, space.data_size + 1, space.joint_states, space.channels)
        b = np.zeros(shape, dtype=np.int8)
        n = np.empty(shape, dtype=np.int64)
        v = np.arange(space.data_size + 1)
        for k in range(space.joint_states):
            for c in range(1, space.channels + 1):
                tag = self.cases[k][c - 1]
                n[:, :, k, c - 1] = c
                if tag is CaseTag.CASE4:
                    continue
                if tag is CaseTag.OTHER:
                    raise PolicyMismatchError(f"no threshold rule for code {k}, channel {c}")
                target = int(self.targets[k, c - 1])
                for t in range(self.horizon):
                    th1, th2, th3, th4 = self.thresholds[t, k, c - 1]
                    match tag:
                        case CaseTag.CASE1:
                            b[t, :, k, c - 1] = v >= th1
                        case CaseTag.CASE2:
                            b[t, :, k, c - 1] = v >= th2
                            n[t, v >= th2, k, c - 1] = target
                        case _:
                            b[t, :, k, c - 1] = v >= th3
                            n[t, v >= th4, k, c - 1] = target
        return PolicyTable(space, b, n)


def policy_from_thresholds(thresholds: ThresholdTable, t: int, s: State) -> Action:
    """Applies the threshold rule of the state's case.

    Raises:
        PolicyMismatchError: If the case has no rule or its thresholds are unset.
    """
    thresholds.space.check(s)
    tag = thresholds.case(s.o, s.q, s.c)
    if tag is CaseTag.CASE4:
        return Action(0, s.c)
    th1, th2, th3, th4 = thresholds.row(t, s.o, s.q, s.c)
    target = thresholds.target(s.o, s.q, s.c)
    match tag:
        case CaseTag.CASE1 if th1 != UNSET:
            return Action(0, s.c) if s.v < th1 else Action(1, s.c)
        case CaseTag.CASE2 if th2 != UNSET:
            return Action(0, s.c) if s.v < th2 else Action(1, target)
        case CaseTag.CASE3 if th3 != UNSET and th4 != UNSET:
            if s.v < th3:
                return Action(0, s.c)
            return Action(1, s.c) if s.v < th4 else Action(1, target)
        case _:
            raise PolicyMismatchError(f"no populated threshold for {tag.value} state {s} at t={t}")


def representative_states(
    q: Sequence[int], c: int, channels: int | None = None
) -> dict[CaseTag, tuple[int, ...]]:
    """First occupancy vector, in lexicographic order, realising each case.

    Example:
        >>> representative_states([0, 1, 0], 3)[CaseTag.CASE2]
        (0, 1, 0)
    """
    count = channels if channels is not None else len(q)
    found: dict[CaseTag, tuple[int, ...]] = {}
    for o in product((0, 1), repeat=count):
        found.setdefault(classify_case(o, q, c), o)
    return found


@dataclass(frozen=True, slots=True)
class _Block:
    k: int
    c: int
    tag: CaseTag
    target: int
    rungs: tuple[Action, ...]


def _blocks(mdp: AccessMDP) -> list[_Block]:
    blocks: list[_Block] = []
    for k in range(mdp.space.joint_states):
        o, q = decode(k, mdp.channels)
        for c in range(1, mdp.channels + 1):
            tag = classify_case(o, q, c)
            target = best_switch_target(o, q, c) if tag is not CaseTag.CASE4 else 0
            blocks.append(_Block(k, c, tag, target, ladder(tag, c, target)))
    return blocks


def _select_row(row: npt.NDArray[np.float64]) -> int:
    best = row.min()
    tolerance = max(TIE_TOLERANCE, TIE_TOLERANCE * abs(best))
    return int(np.argmax(row <= best + tolerance))


def monotone_backward_induction(
    problem: ScenarioConfig | AccessMDP,
) -> tuple[ValueTable, PolicyTable, ThresholdTable]:
    """Backward induction restricted to the threshold structure.

    The scan visits v = 0, zeta, 2*zeta, ...; unscanned v inherit the action of
    the last scanned v below them. Returned values are those of the returned
    policy, so with zeta > 1 they bound the optimum from above.
    """
    mdp = as_mdp(problem)
    space = mdp.space
    catalog = mdp.catalog
    horizon, data_size, zeta = mdp.horizon, mdp.data_size, mdp.config.zeta
    never = data_size + 1
    shape = (data_size + 1, space.joint_states, space.channels)

    values = np.empty((horizon + 1, *shape))
    b = np.empty((horizon, *shape), dtype=np.int8)
    n = np.empty((horizon, *shape), dtype=np.int64)
    thresholds = np.full((horizon, space.joint_states, space.channels, 4), UNSET, dtype=np.int64)
    blocks = _blocks(mdp)
    v_all = np.arange(data_size + 1)
    values[horizon] = terminal_layer(mdp)

    for t in range(horizon, 0, -1):
        w = continuation(mdp, values[t])
        evaluations = 0
        for block in blocks:
            k, c0 = block.k, block.c - 1
            rate = catalog.rate[k, c0]
            target_index = catalog.n[k, c0] - 1
            slots = np.zeros(data_size + 1, dtype=np.int64)

            if block.tag is not CaseTag.CASE4:
                th = [never] * 4
                v = 0
                while v <= data_size:
                    row = catalog.cost(v)[k, c0] + w[np.maximum(v - rate, 0), k, target_index]
                    evaluations += 1
                    slot = _select_row(row)
                    slots[v:] = slot
                    chosen = catalog.action(k, block.c, slot)
                    rung = block.rungs.index(chosen) if chosen in block.rungs else -1
                    _record(th, block.tag, rung, v)
                    if block.rungs and rung == len(block.rungs) - 1:
                        break
                    v += zeta
                thresholds[t - 1, k, c0] = _populated(th, block.tag)

            cost = np.where(
                v_all > 0, catalog.cost_active[k, c0, slots], catalog.cost_idle[k, c0, slots]
            )
            v_next = np.maximum(v_all - rate[slots], 0)
            values[t - 1, :, k, c0] = cost + w[v_next, k, target_index[slots]]
            b[t - 1, :, k, c0] = catalog.b[k, c0, slots]
            n[t - 1, :, k, c0] = catalog.n[k, c0, slots]

        log.debug(
            "stage solved",
            t=t,
            q_rows=evaluations,
            full_rows=(data_size + 1) * len(blocks),
        )

    width = space.channels
    grid = [blocks[k * width : (k + 1) * width] for k in range(space.joint_states)]
    cases = tuple(tuple(blk.tag for blk in row) for row in grid)
    targets = np.array([[blk.target for blk in row] for row in grid], dtype=np.int64)
    return (
        ValueTable(space, values),
        PolicyTable(space, b, n),
        ThresholdTable(space, thresholds, cases, targets),
    )


def _record(th: list[int], tag: CaseTag, rung: int, v: int) -> None:
    match tag:
        case CaseTag.CASE1:
            if rung >= 1:
                th[0] = min(th[0], v)
        case CaseTag.CASE2:
            if rung >= 1:
                th[1] = min(th[1], v)
        case CaseTag.CASE3:
            if rung >= 1:
                th[2] = min(th[2], v)
            if rung >= 2:
                th[3] = min(th[3], v)
        case _:
            pass


def _populated(th: list[int], tag: CaseTag) -> list[int]:
    keep = {
        CaseTag.CASE1: (0,),
        CaseTag.CASE2: (1,),
        CaseTag.CASE3: (2, 3),
    }.get(tag, ())
    return [th[i] if i in keep else UNSET for i in range(4)]
