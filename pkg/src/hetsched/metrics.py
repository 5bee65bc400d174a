"""Quality-of-mission metrics, maximum safe speed search and scheduler-in-the-loop DSE."""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .core import DagState, HetSchedError
from .sim import SimConfig, energy, run
from .tracegen import scale_trace


class IncompleteRun(HetSchedError):
    pass


class NoFeasibleSpeed(HetSchedError):
    pass


class EmptySpace(HetSchedError):
    pass


class NoSafeConfig(HetSchedError):
    pass


class MonotonicityWarning(UserWarning):
    pass


@dataclass
class QomReport:
    scheduler: str
    platform: str
    mission_time: int
    crit2_total: int
    crit2_met: int
    crit2_deadline_hit_rate: float
    pct_mission_completed: float
    energy_mj: float
    n_pruned: int
    n_promoted: int
    crit1_met: int
    crit1_total: int
    horizon: int
    utilization: list[float]
    idle: list[int]
    pe_names: list[str]

    def row(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "scheduler", "platform", "mission_time", "crit2_total", "crit2_met",
            "crit2_deadline_hit_rate", "pct_mission_completed", "energy_mj", "n_pruned",
            "n_promoted", "crit1_met", "crit1_total", "horizon")}
        out["mean_utilization"] = sum(self.utilization) / len(self.utilization)
        return out

    def summary(self) -> str:
        lines = [
            f"scheduler            {self.scheduler}",
            f"platform             {self.platform}",
            f"mission time (ms)    {self.mission_time / 1e6:.3f}",
            f"crit=2 met           {self.crit2_met}/{self.crit2_total}"
            f" ({100 * self.crit2_deadline_hit_rate:.1f}%)",
            f"mission completed    {self.pct_mission_completed:.1f}%",
            f"crit=1 met           {self.crit1_met}/{self.crit1_total}"
            f" (pruned {self.n_pruned}, promoted {self.n_promoted})",
            f"energy (mJ)          {self.energy_mj:.3f}",
        ]
        for name, u, idle in zip(self.pe_names, self.utilization, self.idle):
            lines.append(f"  {name:<16} util {u:6.3f}  idle {idle / 1e6:10.3f} ms")
        return "\n".join(lines) + "\n"


def qom_report(result, trace=None) -> QomReport:
    """Metrics of a completed run.

    Mission time is the finish of the last DAG that was not pruned. The
    mission-completed percentage counts crit=2 DAGs (by original criticality)
    that met their deadline no later than the first crit=2 deadline expiry
    that was missed.
    """
    if not result.complete or any(not d.terminal for d in result.dags):
        raise IncompleteRun(f"{result.scheduler}: run stopped before quiescence")
    if trace is not None and len(trace) != len(result.dags):
        raise IncompleteRun("trace and result disagree on the number of DAGs")
    c2 = [d for d in result.dags if d.original_criticality == 2]
    c1 = [d for d in result.dags if d.original_criticality == 1]
    met2 = [d for d in c2 if d.state is DagState.COMPLETED_MET]
    missed2 = [d for d in c2 if d.state is not DagState.COMPLETED_MET]
    if missed2:
        t_fail = min(d.abs_deadline for d in missed2)
        done_before = sum(1 for d in met2 if d.finish_time <= t_fail)
        pct = 100.0 * done_before / len(c2)
    else:
        pct = 100.0
    finished = [d.finish_time for d in result.dags if d.state is not DagState.PRUNED]
    horizon = result.horizon
    total, _ = energy(result)
    return QomReport(
        scheduler=result.scheduler,
        platform=result.platform.name,
        mission_time=max(finished, default=0),
        crit2_total=len(c2),
        crit2_met=len(met2),
        crit2_deadline_hit_rate=len(met2) / len(c2) if c2 else 1.0,
        pct_mission_completed=pct,
        energy_mj=total,
        n_pruned=sum(1 for d in result.dags if d.state is DagState.PRUNED),
        n_promoted=sum(1 for d in result.dags if d.promoted),
        crit1_met=sum(1 for d in c1 if d.state is DagState.COMPLETED_MET),
        crit1_total=len(c1),
        horizon=horizon,
        utilization=[b / horizon if horizon else 0.0 for b in result.busy],
        idle=result.idle,
        pe_names=[pe.name for pe in result.platform.pes],
    )


# maximum safe speed

@dataclass
class SpeedSearch:
    lo: float = 0.125
    hi: float = 64.0
    rel_tol: float = 0.01
    tighten_deadlines: bool = False
    extra_probes: tuple = ()  # speeds probed in addition to the bisection


@dataclass
class SafeSpeed:
    speed: float
    saturated: bool
    probes: dict = field(default_factory=dict)  # speed -> passed
    monotone: bool = True
    reports: dict = field(default_factory=dict)  # speed -> QomReport of passing probes

    @property
    def n_runs(self) -> int:
        return len(self.probes)

    @property
    def report(self):
        """QoM of the run at the returned speed."""
        return self.reports.get(self.speed)

    @property
    def mission_time(self):
        rep = self.report
        return rep.mission_time if rep is not None else None


def _safe_run(scheduler_factory, platform, trace, templates, sim_config=None):
    cfg = replace(sim_config or SimConfig(), stop_on_crit2_miss=True, record_log=False)
    res = run(trace, scheduler_factory(), platform, templates, cfg)
    ok = res.complete and all(d.state is DagState.COMPLETED_MET
                              for d in res.dags if d.original_criticality == 2)
    return ok, res


def crit2_safe(scheduler_factory, platform, trace, templates, sim_config=None) -> bool:
    """True when every crit=2 DAG of ``trace`` meets its deadline."""
    return _safe_run(scheduler_factory, platform, trace, templates, sim_config)[0]


def _lattice_scan(probes: dict) -> float | None:
    best = None
    for s in sorted(probes):
        if not probes[s]:
            break
        best = s
    return best


def max_safe_speed(scheduler_factory, platform, base_trace, templates,
                   search: SpeedSearch | None = None, sim_config=None) -> SafeSpeed:
    """Largest arrival-rate multiplier with all crit=2 deadlines met.

    Geometric bisection between ``search.lo`` and ``search.hi``, stopping
    when hi/lo <= 1 + rel_tol. ``scheduler_factory`` builds a fresh scheduler
    per probe.
    """
    s = search or SpeedSearch()
    if not 0 < s.lo < s.hi or s.rel_tol <= 0:
        raise ValueError("need 0 < lo < hi and rel_tol > 0")
    probes: dict[float, bool] = {}
    reports = {}

    def probe(speed):
        if speed not in probes:
            tr = scale_trace(base_trace, speed, s.tighten_deadlines)
            ok, res = _safe_run(scheduler_factory, platform, tr, templates, sim_config)
            probes[speed] = ok
            if ok and res is not None:
                reports[speed] = qom_report(res)
        return probes[speed]

    if not probe(s.lo):
        raise NoFeasibleSpeed(f"crit=2 deadlines missed even at speed {s.lo}")
    if probe(s.hi):
        return SafeSpeed(s.hi, True, probes, reports=reports)
    lo, hi = s.lo, s.hi
    while hi / lo > 1 + s.rel_tol:
        mid = math.sqrt(lo * hi)
        if probe(mid):
            lo = mid
        else:
            hi = mid
    for x in s.extra_probes:
        probe(x)
    passes = [x for x, ok in probes.items() if ok]
    fails = [x for x, ok in probes.items() if not ok]
    monotone = not (passes and fails and max(passes) > min(fails))
    if not monotone:
        warnings.warn(f"safe-speed outcome not monotone: pass at {max(passes):.4g} above fail "
                      f"at {min(fails):.4g}; using the lattice scan", MonotonicityWarning)
        lo = _lattice_scan(probes)
    return SafeSpeed(lo, False, probes, monotone, reports)


# design space exploration

DSE_CLASSES = ("accel-det", "accel-tra", "accel-loc", "gpu", "cpu")


@dataclass(frozen=True)
class DsePoint:
    config: tuple  # (n_det, n_tra, n_loc, n_gpu, n_cpu)
    safe: bool
    energy_mj: float
    mission_time: int
    feasible: bool = True  # every kind has an eligible PE

    @property
    def n_pes(self) -> int:
        return sum(self.config)

    @property
    def product(self) -> float:
        return self.energy_mj * self.mission_time

    def objective(self) -> tuple:
        return (self.product, self.n_pes, self.config)


@dataclass
class DseResult:
    best: DsePoint
    pareto: list[DsePoint]
    points: list[DsePoint]


def dominates(a: DsePoint, b: DsePoint) -> bool:
    xa = (a.energy_mj, a.mission_time, a.n_pes)
    xb = (b.energy_mj, b.mission_time, b.n_pes)
    return all(p <= q for p, q in zip(xa, xb)) and xa != xb


def pareto_front(points) -> list[DsePoint]:
    pts = list(points)
    return sorted((p for p in pts if not any(dominates(q, p) for q in pts)),
                  key=lambda p: p.config)


def grid(ranges) -> list[tuple]:
    """Cartesian product of per-class count ranges, sorted."""
    return sorted(itertools.product(*[list(r) for r in ranges]))


def select_best(points) -> DseResult:
    points = sorted(points, key=lambda p: p.config)
    safe = [p for p in points if p.feasible and p.safe]
    if not safe:
        raise NoSafeConfig("no configuration meets every crit=2 deadline")
    best = min(safe, key=DsePoint.objective)
    return DseResult(best, pareto_front(safe), points)


def dse_search(space, evaluate, jobs: int = 1) -> DseResult:
    """Evaluate every configuration of ``space`` and pick the best safe one.

    ``space`` is either a sequence of five count ranges (lists or ``range``
    objects) or an explicit list of five-entry configuration tuples.
    ``evaluate(config) -> DsePoint`` must be a picklable callable when ``jobs > 1``.
    """
    configs = list(space)
    if configs and not (isinstance(configs[0], tuple) and len(configs[0]) == len(DSE_CLASSES)):
        configs = grid(configs)
    configs = sorted(set(configs))
    if not configs:
        raise EmptySpace("empty design space")
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            points = list(ex.map(evaluate, configs))
    else:
        points = [evaluate(c) for c in configs]
    return select_best(points)


@dataclass
class SocEvaluator:
    """Run ``trace`` on the Sys_C-style platform of each configuration."""

    scheduler: str
    trace: list
    templates: dict
    sim_config: SimConfig = field(default_factory=lambda: SimConfig(record_log=False))

    def __call__(self, config) -> DsePoint:
        from .config import sys_c
        from .schedulers import make_scheduler
        plat = sys_c(*config)
        kinds = {t.kind(n).name: t.kind(n) for t in self.templates.values() for n in t.node_ids}
        if any(not plat.eligible_pes(k) for k in kinds.values()):
            return DsePoint(config, False, math.inf, 0, feasible=False)
        res = run(self.trace, make_scheduler(self.scheduler), plat, self.templates,
                  self.sim_config)
        rep = qom_report(res)
        return DsePoint(config, rep.crit2_deadline_hit_rate == 1.0, rep.energy_mj,
                        rep.mission_time)
