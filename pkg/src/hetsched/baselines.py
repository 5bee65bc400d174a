"""Reference schedulers behind the common interface: CPATH-style, 2lvl-EDF, ADS-style.

These follow the one-paragraph characterisations of the originals, not their
source code. None of them prunes and none offers slack to DVFS.
"""

from __future__ import annotations

from fractions import Fraction

from .interface import Assignment
from .meta_sched import DagTracker
from .task_sched import list_assign


def upward_ranks(template, platform_classes) -> dict[int, Fraction]:
    """HEFT upward rank with mean execution cost over eligible PE classes."""
    ranks: dict[int, Fraction] = {}
    for n in reversed(template.order):
        kind = template.kind(n)
        times = [kind.profile[c].exec_time for c in platform_classes if kind.supports(c)]
        mean = Fraction(sum(times), len(times))
        ranks[n] = mean + max((ranks[c] for c in template.children[n]), default=0)
    return ranks


class _ListBaseline(DagTracker):
    def priority(self, task):
        raise NotImplementedError

    def queue_key(self, task):
        return self.priority(task)

    def candidates(self, task, avail):
        return self.platform.eligible_pes(task.kind)

    def schedule(self, now):
        queue = self.static_order()
        out = list_assign(self, queue, self.platform, now, window=None,
                          candidates_for=self.candidates)
        for a in out:
            self.dispatch(a.task)
        return out


class TwoLevelEDF(_ListBaseline):
    """Earliest absolute DAG deadline first, each task on its earliest-finish PE."""

    name = "2lvl-edf"

    def priority(self, task):
        dag = task.dag
        return (dag.abs_deadline, dag.arrival, dag.instance_id, task.node_id)


class ADS(_ListBaseline):
    """Static HEFT upward-rank order; critical DAGs jump the queue onto the fastest PE."""

    name = "ads"

    def __init__(self):
        super().__init__()
        self._ranks: dict = {}

    def on_admit(self, dag, now):
        tpl = dag.template
        if tpl not in self._ranks:
            self._ranks[tpl] = upward_ranks(tpl, list(self.platform.by_class))

    def priority(self, task):
        dag = task.dag
        return (-dag.criticality, -self._ranks[dag.template][task.node_id],
                dag.arrival, dag.instance_id, task.node_id)

    def candidates(self, task, avail):
        eligible = self.platform.eligible_pes(task.kind)
        if task.dag.criticality < 2:
            return eligible
        fastest = task.kind.fastest_class(self.platform.by_class)
        return [pe for pe in eligible if pe.class_name == fastest]


class CPath(DagTracker):
    """Longest bottom-cost path first. Critical-path tasks target the fastest PE
    class, the rest the slowest; idle faster PEs steal waiting work."""

    name = "cpath"

    def __init__(self, work_stealing: bool = True):
        super().__init__()
        self.work_stealing = work_stealing

    def priority(self, task):
        dag = task.dag
        return (-dag.analysis.bottom_level[task.node_id], dag.arrival, dag.instance_id,
                task.node_id)

    def queue_key(self, task):
        return self.priority(task)

    def target_class(self, task) -> str:
        classes = self.platform.by_class
        if task.dag.analysis.is_on_critical_path(task.node_id):
            return task.kind.fastest_class(classes)
        names = [c for c in classes if task.kind.supports(c)]
        return max(names, key=lambda c: (task.kind.profile[c].exec_time, c))

    def schedule(self, now):
        queue = self.static_order()
        targets = {t.task_id: self.target_class(t) for t in queue}
        taken = set()
        out = []
        pes = self.platform.pes
        n_busy = sum(1 for pe in pes if pe.running is not None)
        for pe in pes:
            if pe.running is not None or pe.busy_until > now:
                continue
            cls = pe.class_name
            pick = next((t for t in queue if t.task_id not in taken
                         and targets[t.task_id] == cls), None)
            if pick is None and self.work_stealing:
                pick = next((t for t in queue if t.task_id not in taken
                             and t.kind.supports(cls)
                             and t.kind.profile[cls].exec_time
                             < t.kind.profile[targets[t.task_id]].exec_time), None)
            if pick is None:
                continue
            taken.add(pick.task_id)
            move = self.platform.data_move_cost(self.parent_outputs(pick, pes), pe, pick.kind)
            finish = now + move + self.platform.exec_time_on(pick.kind, pe, n_busy)
            n_busy += 1
            out.append(Assignment(pick, pe, now, finish))
        for a in out:
            self.dispatch(a.task)
        return out
