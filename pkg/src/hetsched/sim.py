"""Deterministic discrete-event engine driving a scheduler against a DAG trace."""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .core import DagState, HetSchedError, TaskState, check_time, round_ns
from .platform import Platform, dvfs_select, exec_time_on, task_energy_mj


class NonMonotoneTrace(HetSchedError):
    pass


class Deadlock(HetSchedError):
    pass


@dataclass
class SimConfig:
    decision_overhead: int = 0  # ns added before tasks dispatched in a pass start
    exec_jitter: float = 0.0  # actual duration = estimate * U(1 - j, 1)
    stop_on_crit2_miss: bool = False
    record_log: bool = True


@dataclass
class TaskRecord:
    dag: int
    node: int
    kind: str
    pe: int
    start: int
    end: int
    frequency: int
    energy_mj: float


@dataclass
class SimResult:
    scheduler: str
    platform: Platform
    dags: list
    tasks: list[TaskRecord]
    event_log: list
    horizon: int
    complete: bool
    busy: list[int]
    first_crit2_miss: int | None = None
    passes: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def idle(self) -> list[int]:
        return [self.horizon - b for b in self.busy]

    def events_jsonl(self) -> str:
        return "".join(json.dumps(e, separators=(",", ":"), sort_keys=True) + "\n"
                       for e in self.event_log)

    def events_csv(self) -> str:
        cols = ["t", "ev", "dag", "node", "pe", "start", "end", "freq", "state"]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for e in self.event_log:
            w.writerow(e)
        return buf.getvalue()


def run(trace, scheduler, platform: Platform, templates, config: SimConfig | None = None,
        seed: int = 0) -> SimResult:
    """Simulate ``trace`` (sorted TraceEntry list) to quiescence.

    ``templates`` maps template id to DagTemplate. The platform is copied, so
    the caller's instance is never mutated.
    """
    config = config or SimConfig()
    platform = platform.fresh()
    pes = platform.pes
    scheduler.bind(platform)
    rng = random.Random(seed)
    log = [] if config.record_log else None
    records: list[TaskRecord] = []
    completions: list[tuple[int, int]] = []
    crit2_deadlines: list[tuple[int, int]] = []
    first_miss = None
    ai = 0
    n = len(trace)
    last = -1
    for e in trace:
        check_time(e.arrival)
        if e.arrival < last:
            raise NonMonotoneTrace(f"arrival {e.arrival} after {last}")
        last = e.arrival

    now = 0
    passes = 0
    stopped = False
    while ai < n or completions:
        t_arr = trace[ai].arrival if ai < n else None
        t_cmp = completions[0][0] if completions else None
        now = t_cmp if t_arr is None or (t_cmp is not None and t_cmp <= t_arr) else t_arr

        # completions, ascending PE id
        done_pes = []
        while completions and completions[0][0] == now:
            done_pes.append(heapq.heappop(completions)[1])
        for pid in sorted(done_pes):
            pe = pes[pid]
            task = pe.running
            pe.running = None
            scheduler.on_complete(task, now)
            dag = task.dag
            if log is not None:
                log.append({"t": now, "ev": "finish", "dag": dag.instance_id, "node": task.node_id,
                            "pe": pid})
                if dag.state in (DagState.COMPLETED_MET, DagState.COMPLETED_MISSED):
                    log.append({"t": now, "ev": "dag", "dag": dag.instance_id,
                                "state": dag.state.value})
            if (dag.state is DagState.COMPLETED_MISSED and dag.original_criticality == 2
                    and first_miss is None):
                first_miss = now

        while ai < n and trace[ai].arrival == now:
            e = trace[ai]
            ai += 1
            dag = scheduler.admit(templates[e.dag_type], e.arrival, e.deadline, e.criticality)
            if e.criticality == 2:
                heapq.heappush(crit2_deadlines, (dag.abs_deadline, dag.instance_id))
            if log is not None:
                log.append({"t": now, "ev": "arrive", "dag": dag.instance_id,
                            "type": e.dag_type, "crit": e.criticality, "deadline": e.deadline})

        pruned, promoted = scheduler.sweep(now)
        if log is not None:
            for dag in pruned:
                log.append({"t": now, "ev": "prune", "dag": dag.instance_id})
            for dag in promoted:
                log.append({"t": now, "ev": "promote", "dag": dag.instance_id})

        if config.stop_on_crit2_miss:
            dags = scheduler.dags
            while crit2_deadlines and dags[crit2_deadlines[0][1]].terminal:
                d = dags[heapq.heappop(crit2_deadlines)[1]]
                if d.state is DagState.COMPLETED_MISSED:
                    break
            missed = first_miss is not None or (crit2_deadlines and crit2_deadlines[0][0] < now)
            if missed:
                if first_miss is None:
                    first_miss = now
                stopped = True
                break

        assignments = scheduler.schedule(now) if scheduler.has_ready() else []
        if assignments:
            passes += 1
        n_busy = sum(1 for pe in pes if pe.running is not None)
        for a in assignments:
            pe = a.pe
            task = a.task
            if pe.running is not None or pe.busy_until > now:
                raise HetSchedError(f"{scheduler.name} assigned {task.task_id} to busy {pe.name}")
            start = now + config.decision_overhead
            move = platform.data_move_cost(scheduler.parent_outputs(task, pes), pe, task.kind)
            base = exec_time_on(task.kind, pe, n_busy, None, platform)
            freq, volt = pe.pe_class.nominal_frequency, pe.pe_class.nominal_voltage
            if a.slack is not None and platform.f_slack and pe.pe_class.dvfs_enabled:
                freq, volt = dvfs_select(base, pe.pe_class, a.slack, platform.f_slack)
            exec_t = base if freq == pe.pe_class.nominal_frequency else \
                exec_time_on(task.kind, pe, n_busy, freq, platform)
            if config.exec_jitter:
                exec_t = round_ns(Fraction(exec_t) * Fraction(1 - rng.random() * config.exec_jitter))
            end = start + move + exec_t
            task.transition(TaskState.RUNNING)
            task.pe, task.start, task.end = pe.id, start, end
            pe.reserve(task.task_id, start, end, freq)
            pe.running = task
            n_busy += 1
            heapq.heappush(completions, (end, pe.id))
            power = task.kind.profile[pe.class_name].power
            # the PE is held while inputs arrive; that interval draws static power
            energy = (task_energy_mj(power, exec_t, volt, pe.pe_class.nominal_voltage)
                      + pe.pe_class.static_power * move * 1e-9)
            records.append(TaskRecord(task.dag.instance_id, task.node_id, task.kind.name, pe.id,
                                      start, end, freq, energy))
            if log is not None:
                log.append({"t": now, "ev": "start", "dag": task.dag.instance_id,
                            "node": task.node_id, "pe": pe.id, "start": start, "end": end,
                            "freq": freq})
        if not completions and ai >= n and scheduler.has_ready():
            raise Deadlock(f"{scheduler.name}: ready tasks remain with an idle platform")

    horizon = now
    busy = [pe.busy_time for pe in pes]
    if stopped:
        busy = [sum(min(end, horizon) - start for _, start, end, _ in pe.reservations
                    if start < horizon) for pe in pes]
    return SimResult(
        scheduler=scheduler.name,
        platform=platform,
        dags=list(scheduler.dags),
        tasks=records,
        event_log=log or [],
        horizon=horizon,
        complete=not stopped,
        busy=busy,
        first_crit2_miss=first_miss,
        passes=passes,
    )


def energy(result: SimResult) -> tuple[float, dict[int, float]]:
    """Total and per-PE energy in mJ: task energy plus static power while idle."""
    terms: dict[int, list[float]] = {pe.id: [] for pe in result.platform.pes}
    for r in result.tasks:
        terms[r.pe].append(r.energy_mj)
    for pe, idle in zip(result.platform.pes, result.idle):
        terms[pe.id].append(pe.pe_class.static_power * idle * 1e-9)
    per_pe = {pid: math.fsum(v) for pid, v in terms.items()}
    total = math.fsum(x for v in terms.values() for x in v)
    return total, per_pe
