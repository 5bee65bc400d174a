"""Meta-Sched: DAG admission, dependency tracking, task ranking, pruning and promotion.

``DagTracker`` is the dependency-tracking core shared with the baseline
schedulers; ``MetaSched`` adds sub-deadlines, ranks and the prune/promote sweeps.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .core import DagInstance, DagState, HetSchedError, InvalidState, TaskInstance, TaskState
from .dag_analysis import DagAnalysis, analyze, static_subdeadlines
from .interface import Scheduler

POLICIES = ("ms_stat", "ms_dyn")
RANKINGS = ("hom", "het", "hyb")


class NoEligiblePe(HetSchedError):
    pass


@dataclass
class SchedulerConfig:
    policy: str = "ms_dyn"
    ranking: str = "hyb"
    pruning_enabled: bool = True
    rank_update_enabled: bool = True
    t_crit: int | None = None  # None disables promotion
    promote_all: bool = False
    window_w: int = 4
    carve_out: bool = True

    def __post_init__(self):
        self.policy = self.policy.replace("-", "_")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.ranking not in RANKINGS:
            raise ValueError(f"unknown ranking {self.ranking!r}")
        if self.window_w < 1:
            raise ValueError("window_w must be >= 1")
        if self.t_crit is not None and self.t_crit <= 0:
            raise ValueError("t_crit must be positive")


@dataclass(slots=True)
class RankValue:
    """A task's rank. The ``key`` tuple sorts ascending into queue order."""

    rank_type: int
    rank_het: tuple
    rank_hom: Fraction | None  # None when the slack it divides by is <= 0
    criticality: int
    slack: Fraction
    key: tuple

    @property
    def infeasible(self) -> bool:
        return self.rank_hom is None

    def __lt__(self, other):
        return self.key < other.key


class DagTracker(Scheduler):
    """Instantiates DAG arrivals and resolves dependencies on completion."""

    def __init__(self):
        self.active: dict[int, DagInstance] = {}
        self.ready: dict[tuple, TaskInstance] = {}
        self._queue: list = []  # sorted (qkey, task_id) for statically keyed tasks
        self.dags: list[DagInstance] = []
        self._analyses: dict = {}
        self._critical_active = 0

    def analysis_for(self, template) -> DagAnalysis:
        an = self._analyses.get(template)
        if an is None:
            an = self._analyses[template] = analyze(template)
        return an

    def admit(self, template, arrival, deadline, criticality, analysis=None) -> DagInstance:
        analysis = analysis or self.analysis_for(template)
        template = analysis.template
        dag = DagInstance(len(self.dags), template, arrival, deadline, criticality, analysis)
        self.dags.append(dag)
        self.active[dag.instance_id] = dag
        if criticality == 2:
            self._critical_active += 1
        for n in template.order:
            dag.tasks[n] = TaskInstance(dag, n, template.kind(n), len(template.parents[n]))
        self.on_admit(dag, arrival)
        for n in template.order:
            if not template.parents[n]:
                self._make_ready(dag.tasks[n], arrival)
        return dag

    def on_admit(self, dag, now):
        pass

    def on_ready(self, task, now):
        pass

    def queue_key(self, task):
        """A time-invariant priority key (ascending), or None for per-pass ordering."""
        return None

    def _make_ready(self, task: TaskInstance, now: int) -> None:
        task.transition(TaskState.READY)
        task.ready_time = task.last_update = now
        self.ready[task.task_id] = task
        self.on_ready(task, now)
        self._enqueue(task)

    def _enqueue(self, task):
        key = self.queue_key(task)
        task.qkey = key
        if key is not None:
            bisect.insort(self._queue, (key, task.task_id))

    def _unready(self, task: TaskInstance) -> None:
        del self.ready[task.task_id]
        if task.qkey is not None:
            i = bisect.bisect_left(self._queue, (task.qkey, task.task_id))
            del self._queue[i]
            task.qkey = None

    def static_order(self) -> list[TaskInstance]:
        ready = self.ready
        return [ready[tid] for _, tid in self._queue]

    def parent_outputs(self, task: TaskInstance, pes) -> list:
        dag = task.dag
        return [(pes[dag.tasks[p].pe], dag.tasks[p].kind.output_bytes)
                for p in dag.template.parents[task.node_id]]

    def dispatch(self, task: TaskInstance) -> None:
        self._unready(task)
        task.transition(TaskState.ASSIGNED)

    def on_complete(self, task: TaskInstance, now: int) -> list[TaskInstance]:
        if task.state is not TaskState.RUNNING:
            raise InvalidState(f"task {task.task_id} completed while {task.state.value}")
        task.transition(TaskState.DONE)
        task.end = now
        dag = task.dag
        dag.n_done += 1
        if dag.state is not DagState.ACTIVE:
            return []
        newly = []
        for c in dag.template.children[task.node_id]:
            child = dag.tasks[c]
            child.unresolved_parents -= 1
            if child.unresolved_parents == 0:
                self._make_ready(child, now)
                newly.append(child)
        if dag.n_done == len(dag.tasks):
            met = now <= dag.abs_deadline
            dag.set_terminal(DagState.COMPLETED_MET if met else DagState.COMPLETED_MISSED)
            dag.finish_time = now
            self._retire(dag)
            self.on_dag_done(dag, now)
        return newly

    def on_dag_done(self, dag, now):
        pass

    def _retire(self, dag: DagInstance) -> None:
        del self.active[dag.instance_id]
        if dag.criticality == 2:
            self._critical_active -= 1

    def critical_present(self) -> bool:
        return self._critical_active > 0

    def has_ready(self) -> bool:
        return bool(self.ready)


def effective_slack(task: TaskInstance, now: int, eet) -> Fraction:
    """Remaining sub-deadline minus ``eet``; negative means infeasible at that EET.

    ``task.elapsed`` holds the waiting time already charged by rank updates.
    """
    return task.sd - eet - task.elapsed


def dynamic_subdeadline(task: TaskInstance, dag: DagInstance, now: int) -> tuple[Fraction, Fraction]:
    """(SR, SD) from the DAG's remaining slack at ``now``; lowest SR over the task's paths."""
    an = dag.analysis
    wcet = an.wcet[task.node_id]
    best = None
    for pi in an.paths_of[task.node_id]:
        remaining = sum(an.wcet[n] for n in an.paths[pi]
                        if dag.tasks[n].state is not TaskState.DONE)
        sr = Fraction(wcet, remaining)
        if best is None or sr < best:
            best = sr
    return best, best * dag.slack(now)


def hom_key(crit, slack) -> tuple:
    """Descending crit/slack. Zero slack is the +inf limit and comes first;
    negative slack gives a negative rank, so those tasks come last."""
    if slack == 0:
        return (-1, -crit)
    return (0 if slack > 0 else 1, Fraction(-crit) / slack)


def compute_rank(task: TaskInstance, now: int, class_times, ranking: str) -> RankValue:
    """Rank ``task`` given ``class_times``: ascending (exec_time, class) of eligible classes."""
    if not class_times:
        raise NoEligiblePe(f"{task.kind.name} has no eligible PE class on this platform")
    crit = task.dag.criticality
    base = task.sd - task.elapsed
    rank_type = 0
    for t, _ in class_times:
        if base - t >= 0:
            rank_type += 1
        else:
            break
    fast_slack = base - class_times[0][0]
    dag = task.dag
    tie = (dag.arrival, dag.instance_id, task.node_id)
    if ranking == "hom":
        slack = base - task.kind.wcet
        het = ()
        key = hom_key(crit, slack) + tie
    else:
        slack = fast_slack
        # critical: fewer feasible classes is more urgent; non-critical: more is better
        het = (-crit, rank_type if crit == 2 else -rank_type)
        key = het + ((slack,) if ranking == "hyb" else ()) + tie
    rank_hom = Fraction(crit) / slack if slack > 0 else None
    return RankValue(rank_type, het, rank_hom, crit, slack, key)


class MetaSched(DagTracker):
    def __init__(self, config: SchedulerConfig | None = None):
        super().__init__()
        self.config = config or SchedulerConfig()
        self.prune_list: set = set()
        self.class_times: dict[str, list] = {}
        self._last_crit1_met: int | None = None
        self._last_promotion: int | None = None
        self._first_arrival: int | None = None

    def bind(self, platform) -> None:
        super().bind(platform)
        self.class_times = {}

    def times_for(self, kind) -> list:
        ct = self.class_times.get(kind.name)
        if ct is None:
            ct = sorted((kind.profile[c].exec_time, c) for c in self.platform.by_class
                        if kind.supports(c))
            if not ct:
                raise NoEligiblePe(f"{kind.name} has no eligible PE class on {self.platform.name}")
            self.class_times[kind.name] = ct
        return ct

    def on_admit(self, dag, now):
        if self._first_arrival is None:
            self._first_arrival = now

    def on_ready(self, task, now):
        dag = task.dag
        if self.config.policy == "ms_stat":
            task.sdr, task.sd = static_subdeadlines(dag.analysis, dag.deadline)[task.node_id]
        else:
            task.sdr, task.sd = dynamic_subdeadline(task, dag, now)
        task.eet = task.kind.wcet
        times = self.times_for(task.kind)
        task.rank = compute_rank(task, now, times, self.config.ranking)
        # with rank update on, elapsed == now - ready_time at every pass
        task.abs_sd = task.sd + now if self.config.rank_update_enabled else task.sd
        task.thr = tuple(math.floor(task.abs_sd - t) for t, _ in times)
        task.xfast = task.abs_sd - times[0][0]

    def static_ranking(self) -> bool:
        """True when queue order cannot change between passes."""
        return self.config.ranking == "hom" or not self.config.rank_update_enabled

    def queue_key(self, task):
        return self.fast_key(task, 0) if self.static_ranking() else None

    def rank_ref(self, now: int) -> int:
        return now if self.config.rank_update_enabled else 0

    def fast_key(self, task, now: int) -> tuple:
        """Sort key ordering tasks exactly as ``compute_rank(...).key`` at ``now``.

        Slack on class c is abs_sd - ref - t_c with ref common to all tasks
        in a pass, so ref drops out except through rank_type, which only
        needs the integer floors in ``task.thr``.
        """
        dag = task.dag
        crit = dag.criticality
        tie = (dag.arrival, dag.instance_id, task.node_id)
        if self.config.ranking == "hom":
            # static per-tier part; iter_ready merges the tiers by crit/slack
            return (-crit, task.abs_sd - task.kind.wcet) + tie
        ref = self.rank_ref(now)
        rt = 0
        for f in task.thr:
            if f >= ref:
                rt += 1
            else:
                break
        head = (-crit, rt if crit == 2 else -rt)
        if self.config.ranking == "hyb":
            return head + (task.thr[0], task.xfast) + tie
        return head + tie

    def rank_type_at(self, task, now: int) -> int:
        ref = self.rank_ref(now)
        return sum(1 for f in task.thr if f >= ref)

    def refresh_rank(self, task, now: int) -> None:
        """Recompute ``task.rank`` with the waiting time charged up to ``now``."""
        if self.config.rank_update_enabled:
            task.elapsed = now - task.ready_time
            task.last_update = now
        task.rank = compute_rank(task, now, self.times_for(task.kind), self.config.ranking)

    def requeue(self, task) -> None:
        if task.qkey is not None:
            i = bisect.bisect_left(self._queue, (task.qkey, task.task_id))
            del self._queue[i]
        self._enqueue(task)

    def dispatch(self, task) -> None:
        super().dispatch(task)
        self.prune_list.discard(task)

    def on_dag_done(self, dag, now):
        if dag.criticality == 1 and dag.state is DagState.COMPLETED_MET:
            self._last_crit1_met = now

    def ordered_ready(self, now: int = 0) -> list[TaskInstance]:
        return list(self.iter_ready(now))

    def iter_ready(self, now: int = 0):
        """Ready tasks in rank order; lazy under hom ranking, where TS reads only the head."""
        if self.static_ranking():
            order = self.static_order()
            if self.config.ranking == "hom":
                return self._hom_merge(order, self.rank_ref(now))
            return iter(order)
        return iter(sorted(self.ready.values(), key=lambda t: self.fast_key(t, now)))

    @staticmethod
    def _hom_merge(order, ref):
        """Merge the criticality tiers of the static queue into crit/slack order.

        Each tier is sorted by x = abs_sd - wcet and slack = x - ref, so within
        a tier the zero, positive and negative slack runs are each already in
        rank order; only the merge across tiers needs the ratio.
        """
        q0 = lambda t: t.qkey[0]
        q1 = lambda t: t.qkey[1]
        zero, pos, neg = [], [], []
        i, n = 0, len(order)
        while i < n:
            j = bisect.bisect_right(order, order[i].qkey[0], lo=i, key=q0)
            k = bisect.bisect_left(order, ref, lo=i, hi=j, key=q1)
            m = bisect.bisect_right(order, ref, lo=k, hi=j, key=q1)
            neg.append(order[i:k])
            zero.append(order[k:m])
            pos.append(order[m:j])
            i = j

        def ratio(t):
            return (t.qkey[0] / (t.qkey[1] - ref),) + t.qkey[2:]

        return itertools.chain(heapq.merge(*zero, key=lambda t: (t.qkey[0],) + t.qkey[2:]),
                               heapq.merge(*pos, key=ratio), heapq.merge(*neg, key=ratio))

    # pruning

    def estimated_bcet_slack(self, dag: DagInstance, now: int) -> int:
        """Deadline left after the remaining work runs at BCET along its longest path."""
        an = dag.analysis
        finish = {}
        latest = now
        for n in dag.template.order:
            t = dag.tasks[n]
            if t.state is TaskState.DONE:
                finish[n] = now
                continue
            if t.state in (TaskState.RUNNING, TaskState.ASSIGNED):
                f = max(now, t.end if t.end is not None else now)
            else:
                start = max((finish[p] for p in dag.template.parents[n]), default=now)
                f = start + an.bcet[n]
            finish[n] = f
            if f > latest:
                latest = f
        return dag.abs_deadline - latest

    def prune(self, dag: DagInstance) -> None:
        dag.set_terminal(DagState.PRUNED)
        for t in dag.tasks.values():
            if t.state in (TaskState.BLOCKED, TaskState.READY):
                if t.state is TaskState.READY:
                    self._unready(t)
                t.transition(TaskState.PRUNED)
            self.prune_list.discard(t)
        self._retire(dag)

    def prune_sweep(self, now: int, critical_present: bool) -> list[DagInstance]:
        if not self.config.pruning_enabled:
            return []
        flagged = set()
        if critical_present:
            flagged = {t.dag.instance_id for t in self.prune_list if t.state is TaskState.READY}
        pruned = []
        for dag in list(self.active.values()):
            if dag.criticality != 1:
                continue
            if dag.instance_id in flagged or self.estimated_bcet_slack(dag, now) < 0:
                self.prune(dag)
                pruned.append(dag)
        return pruned

    # promotion

    def promote_sweep(self, now: int) -> list[DagInstance]:
        t_crit = self.config.t_crit
        if t_crit is None or self._first_arrival is None:
            return []
        ref = max(x for x in (self._first_arrival, self._last_crit1_met, self._last_promotion)
                  if x is not None)
        if now - ref < t_crit:
            return []
        candidates = [d for d in self.active.values() if d.criticality == 1]
        if not candidates:
            return []
        candidates.sort(key=lambda d: (d.arrival, d.instance_id))
        chosen = candidates if self.config.promote_all else candidates[:1]
        for dag in chosen:
            dag.criticality = 2
            dag.promoted = True
            self._critical_active += 1
            for t in dag.tasks.values():
                self.prune_list.discard(t)
        self._last_promotion = now
        return chosen
