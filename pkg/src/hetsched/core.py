"""Domain types shared by the analysis, scheduling and simulation modules.

All times are integer nanoseconds. Sub-deadlines and slacks are kept as
``fractions.Fraction`` so rank ordering never depends on float rounding.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Mapping

NS = 1
US = 1_000
MS = 1_000_000
S = 1_000_000_000

TIME_MAX = 2**63 - 1


class HetSchedError(Exception):
    """Base class for all errors raised by this package."""


class TimeOverflow(HetSchedError):
    pass


class CycleDetected(HetSchedError):
    def __init__(self, nodes):
        self.nodes = list(nodes)
        super().__init__(f"cycle through nodes {self.nodes}")


class DanglingEdge(HetSchedError):
    def __init__(self, edge):
        self.edge = tuple(edge)
        super().__init__(f"edge {self.edge} references an unknown node")


class DuplicateNode(HetSchedError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"duplicate node id {node_id}")


class InvalidState(HetSchedError):
    pass


class UnknownTaskKind(HetSchedError):
    pass


def check_time(value: int) -> int:
    """Validate a timestamp / duration: a non-negative int below 2**63."""
    if not isinstance(value, int) or isinstance(value, bool):
        raise TypeError(f"time values are integer nanoseconds, got {value!r}")
    if value < 0 or value > TIME_MAX:
        raise TimeOverflow(f"time value {value} outside [0, 2**63)")
    return value


_UNITS = {"ns": NS, "us": US, "ms": MS, "s": S}


def parse_duration(text: str | int) -> int:
    """Parse ``"583us"``, ``"0.1ms"`` or a bare int (ns) into exact nanoseconds."""
    if isinstance(text, int):
        return check_time(text)
    text = text.strip()
    for suffix in ("ns", "us", "ms", "s"):
        if text.endswith(suffix):
            number = Decimal(text[: -len(suffix)])
            value = number * _UNITS[suffix]
            if value != value.to_integral_value():
                raise ValueError(f"{text!r} is not a whole number of nanoseconds")
            return check_time(int(value))
    raise ValueError(f"duration {text!r} has no unit (ns/us/ms/s)")


def round_ns(value: Fraction | int) -> int:
    """Round a rational time to the nearest ns, halves away from zero."""
    if isinstance(value, int):
        return value
    n, d = value.numerator, value.denominator
    q, r = divmod(n, d)
    if 2 * r >= d:
        q += 1
    return q


@dataclass(frozen=True)
class PeClass:
    name: str
    peak_perf: float = 1.0
    static_power: float = 0.0  # mW while idle
    dvfs_table: tuple[tuple[float, int], ...] = ((1.0, 1_000_000_000),)
    dvfs_enabled: bool = False

    def __post_init__(self):
        freqs = [f for _, f in self.dvfs_table]
        if not freqs or freqs != sorted(freqs):
            raise ValueError(f"{self.name}: dvfs_table must be non-empty and ascending")

    @property
    def nominal_frequency(self) -> int:
        return self.dvfs_table[-1][1]

    @property
    def nominal_voltage(self) -> float:
        return self.dvfs_table[-1][0]

    def voltage_at(self, frequency: int) -> float:
        for volt, freq in self.dvfs_table:
            if freq == frequency:
                return volt
        raise ValueError(f"{self.name}: {frequency} Hz is not a DVFS point")


@dataclass(frozen=True)
class KindProfile:
    exec_time: int  # ns at nominal frequency
    power: float  # mW while executing


@dataclass(frozen=True, eq=False)
class TaskKind:
    name: str
    profile: Mapping[str, KindProfile]
    input_bytes: int = 1 << 20
    output_bytes: int = 1 << 20

    def __post_init__(self):
        if not self.profile:
            raise ValueError(f"task kind {self.name} has an empty profile")

    def supports(self, pe_class: str) -> bool:
        return pe_class in self.profile

    @property
    def wcet(self) -> int:
        return max(p.exec_time for p in self.profile.values())

    @property
    def bcet(self) -> int:
        return min(p.exec_time for p in self.profile.values())

    @property
    def acet(self) -> Fraction:
        times = [p.exec_time for p in self.profile.values()]
        return Fraction(sum(times), len(times))

    def fastest_class(self, available=None) -> str:
        """Class with the smallest exec time (ties by name), optionally restricted."""
        names = [c for c in self.profile if available is None or c in available]
        return min(names, key=lambda c: (self.profile[c].exec_time, c))


@dataclass(frozen=True, eq=False)
class DagTemplate:
    id: str
    nodes: tuple[tuple[int, TaskKind], ...]
    edges: tuple[tuple[int, int], ...] = ()
    order: tuple[int, ...] = ()

    def kind(self, node_id: int) -> TaskKind:
        return self._kinds[node_id]

    @property
    def node_ids(self) -> list[int]:
        return [n for n, _ in self.nodes]

    def __post_init__(self):
        kinds = {}
        for n, k in self.nodes:
            kinds.setdefault(n, k)
        parents: dict[int, list[int]] = {n: [] for n in kinds}
        children: dict[int, list[int]] = {n: [] for n in kinds}
        for p, c in self.edges:
            if p in children and c in parents:
                children[p].append(c)
                parents[c].append(p)
        for d in (parents, children):
            for v in d.values():
                v.sort()
        object.__setattr__(self, "_kinds", kinds)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "children", children)

    def __repr__(self):
        return f"DagTemplate({self.id!r}, {len(self.nodes)} nodes, {len(self.edges)} edges)"


def validate_dag(template: DagTemplate) -> DagTemplate:
    """Check the template is a well-formed DAG and attach a topological order.

    Ties in the order are broken by ascending node id.
    """
    seen = set()
    for n, _ in template.nodes:
        if n in seen:
            raise DuplicateNode(n)
        seen.add(n)
    for edge in template.edges:
        if edge[0] not in seen or edge[1] not in seen:
            raise DanglingEdge(edge)

    indeg = {n: len(template.parents[n]) for n in seen}
    heap = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for c in template.children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(seen):
        raise CycleDetected(_find_cycle(template, seen - set(order)))
    return replace(template, order=tuple(order))


def _find_cycle(template: DagTemplate, remaining: set[int]) -> list[int]:
    # every node left after Kahn's algorithm has a parent in `remaining`, so
    # walking parents backwards must revisit a node
    start = min(remaining)
    path, index = [], {}
    node = start
    while node not in index:
        index[node] = len(path)
        path.append(node)
        node = min(p for p in template.parents[node] if p in remaining)
    cycle = path[index[node]:][::-1]
    k = cycle.index(min(cycle))
    return cycle[k:] + cycle[:k]


class DagState(str, Enum):
    ACTIVE = "active"
    COMPLETED_MET = "completed_met"
    COMPLETED_MISSED = "completed_missed"
    PRUNED = "pruned"


class TaskState(str, Enum):
    BLOCKED = "blocked"
    READY = "ready"
    ASSIGNED = "assigned"
    RUNNING = "running"
    DONE = "done"
    PRUNED = "pruned"


_TRANSITIONS = {
    TaskState.BLOCKED: {TaskState.READY, TaskState.PRUNED},
    TaskState.READY: {TaskState.ASSIGNED, TaskState.PRUNED},
    TaskState.ASSIGNED: {TaskState.RUNNING},
    TaskState.RUNNING: {TaskState.DONE},
    TaskState.DONE: set(),
    TaskState.PRUNED: set(),
}


@dataclass(eq=False)
class DagInstance:
    instance_id: int
    template: DagTemplate
    arrival: int
    deadline: int  # relative to arrival
    criticality: int
    analysis: object = None
    promoted: bool = False
    state: DagState = DagState.ACTIVE
    original_criticality: int = 0
    tasks: dict = field(default_factory=dict)
    n_done: int = 0
    finish_time: int | None = None

    def __post_init__(self):
        if self.criticality not in (1, 2):
            raise ValueError(f"criticality must be 1 or 2, got {self.criticality}")
        if not self.original_criticality:
            self.original_criticality = self.criticality

    @property
    def abs_deadline(self) -> int:
        return self.arrival + self.deadline

    def slack(self, now: int) -> int:
        """Deadline remaining for the DAG at ``now`` (may be negative)."""
        return self.arrival + self.deadline - now

    @property
    def terminal(self) -> bool:
        return self.state is not DagState.ACTIVE

    def set_terminal(self, state: DagState) -> None:
        if self.state is not DagState.ACTIVE:
            raise InvalidState(f"DAG {self.instance_id} already {self.state.value}")
        if state is DagState.PRUNED and self.criticality != 1:
            raise InvalidState(f"crit={self.criticality} DAG {self.instance_id} cannot be pruned")
        self.state = state


@dataclass(eq=False, slots=True)
class TaskInstance:
    dag: DagInstance
    node_id: int
    kind: TaskKind
    unresolved_parents: int
    state: TaskState = TaskState.BLOCKED
    sd: Fraction | None = None
    sdr: Fraction | None = None
    eet: int | None = None
    rank: object = None
    ready_time: int | None = None
    last_update: int | None = None
    elapsed: int = 0
    pe: int | None = None
    start: int | None = None
    end: int | None = None
    abs_sd: Fraction | None = None  # sub-deadline shifted so slack = abs_sd - now - exec
    thr: tuple = ()  # floor(abs_sd - t) per eligible class, fastest first
    xfast: Fraction | None = None  # abs_sd - fastest class time
    qkey: tuple | None = None  # key in a statically ordered ready queue

    @property
    def task_id(self) -> tuple[int, int]:
        return (self.dag.instance_id, self.node_id)

    @property
    def criticality(self) -> int:
        return self.dag.criticality

    def transition(self, new: TaskState) -> None:
        if new not in _TRANSITIONS[self.state]:
            raise InvalidState(
                f"task {self.task_id}: illegal transition {self.state.value} -> {new.value}"
            )
        self.state = new

    def __repr__(self):
        return f"Task{self.task_id}[{self.kind.name},{self.state.value}]"
