"""Task-Sched: rank update, the TS windowed assignment policy, completion feedback."""

from __future__ import annotations

import math

from .core import TaskState
from .interface import Assignment
from .meta_sched import MetaSched, SchedulerConfig


def rank_update(meta: MetaSched, now: int):
    """Charge waiting time to every ready task and return them in rank order.

    Returns ``(queue, prune_candidates)``. Candidates are crit=1 tasks whose
    rank_type is at most 1 under heterogeneous ranking (feasible on the
    fastest class only, or nowhere) or 0 under homogeneous ranking; they are
    added to ``meta.prune_list``.
    """
    limit = 0 if meta.config.ranking == "hom" else 1
    candidates = []
    if meta.config.pruning_enabled:
        for task in meta.ready.values():
            if task.dag.criticality == 1 and meta.rank_type_at(task, now) <= limit:
                candidates.append(task)
        meta.prune_list.update(candidates)
    return meta.iter_ready(now), candidates


def list_assign(tracker, queue, platform, now, window=None, candidates_for=None):
    """Earliest-estimated-finish list assignment over ``queue``.

    Tasks whose best PE is idle start now. A task whose best PE is busy waits
    and virtually reserves that PE, so later tasks in the pass see the
    reservation. The pass stops once ``window`` tasks are waiting (``None``:
    never). ``candidates_for(task, avail)`` may narrow the PE set.
    """
    pes = platform.pes
    avail = [max(now, pe.busy_until) if pe.running is not None else now for pe in pes]
    busy = [pe.running is not None for pe in pes]
    n_busy = sum(busy)
    out = []
    waiting = 0
    for task in queue:
        cands = candidates_for(task, avail) if candidates_for else platform.eligible_pes(task.kind)
        best = None
        parents = tracker.parent_outputs(task, pes)
        for pe in cands:
            others = n_busy - (1 if busy[pe.id] else 0)
            move = platform.data_move_cost(parents, pe, task.kind)
            finish = avail[pe.id] + move + platform.exec_time_on(task.kind, pe, others)
            if best is None or finish < best[0]:
                best = (finish, pe)
        finish, pe = best
        if avail[pe.id] == now and not busy[pe.id]:
            out.append(Assignment(task, pe, now, finish))
            busy[pe.id] = True
            n_busy += 1
            avail[pe.id] = finish
        else:
            avail[pe.id] = finish
            waiting += 1
            if window is not None and waiting >= window:
                break
    return out


def assign_ts(meta: MetaSched, queue, platform, now: int, window_w: int, carve_out: bool = True):
    """TS: non-blocking earliest-finish assignment with a lookahead window.

    With critical DAGs in the system, a non-critical task is steered to an
    idle non-fastest PE on which it still meets its sub-deadline, if any.
    """
    critical = carve_out and meta.critical_present()

    def candidates(task, avail):
        eligible = platform.eligible_pes(task.kind)
        if not critical or task.dag.criticality != 1:
            return eligible
        fastest = meta.times_for(task.kind)[0][1]
        budget = task.abs_sd - meta.rank_ref(now)
        slow = [pe for pe in eligible
                if pe.class_name != fastest and avail[pe.id] == now and pe.running is None
                and budget - task.kind.profile[pe.class_name].exec_time >= 0]
        return slow or eligible

    return list_assign(meta, queue, platform, now, window=window_w, candidates_for=candidates)


def collect_completions(platform, now: int):
    """(task, PE id, time) for every running task finishing at or before ``now``, by PE id."""
    done = []
    for pe in platform.pes:
        if pe.running is not None and pe.busy_until <= now:
            done.append((pe.running, pe.id, pe.busy_until))
    return done


class HetSched(MetaSched):
    """The two-level scheduler: Meta-Sched ranking plus TS assignment."""

    def __init__(self, config: SchedulerConfig | None = None, name: str | None = None):
        super().__init__(config)
        c = self.config
        self.name = name or f"hetsched-{c.policy.replace('_', '')}-{c.ranking}"

    def sweep(self, now):
        promoted = self.promote_sweep(now)
        for dag in promoted:
            for t in dag.tasks.values():
                if t.state is TaskState.READY:
                    self.refresh_rank(t, now)
                    self.requeue(t)
        pruned = self.prune_sweep(now, self.critical_present())
        return pruned, promoted

    def schedule(self, now):
        if not self.ready:
            return []
        if self.config.rank_update_enabled:
            queue, _ = rank_update(self, now)
        else:
            queue = self.iter_ready(now)
        out = assign_ts(self, queue, self.platform, now, self.config.window_w, self.config.carve_out)
        for a in out:
            task = a.task
            self.refresh_rank(task, now)
            self.dispatch(task)
            waited = now - task.ready_time
            exec_t = a.est_finish - now
            a.slack = max(0, math.floor(task.sd - waited - exec_t))
        return out
