"""DAG arrival traces: synthetic and application-profile generators, JSON-lines I/O."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import MS, DagTemplate, HetSchedError, parse_duration, round_ns, validate_dag
from .dag_analysis import analyze

CRIT2_FRACTIONS = {"rural": 0.10, "semi_urban": 0.20, "urban": 0.50}
SCENARIO_ALIASES = {"semi": "semi_urban", "semi-urban": "semi_urban", "semiurban": "semi_urban"}
APPS = ("adsuite", "mapping3d", "delivery")
SYNTHETIC_KINDS = ("fft", "conv", "decoder")


class ParseError(HetSchedError):
    def __init__(self, line: int, msg: str):
        self.line = line
        super().__init__(f"line {line}: {msg}")


class UnknownApp(HetSchedError):
    pass


@dataclass(frozen=True)
class TraceEntry:
    arrival: int
    dag_type: str
    criticality: int
    deadline: int


def scenario_name(name: str) -> str:
    name = SCENARIO_ALIASES.get(name, name)
    if name not in CRIT2_FRACTIONS:
        raise ValueError(f"unknown scenario {name!r}")
    return name


SYNTHETIC_GAP = 2 * MS


@dataclass
class ScenarioSpec:
    name: str = "urban"
    crit2_fraction: float | None = None  # None: the scenario's default
    n_dags: int = 1000
    mean_interarrival: int | None = None  # None: 2 ms synthetic, else the catalog's value
    arrival: str = "exponential"  # or "periodic"
    speed: float = 1.0
    tighten_deadlines: bool = False  # also divide deadlines by the speed

    def __post_init__(self):
        self.name = scenario_name(self.name)
        if self.crit2_fraction is None:
            self.crit2_fraction = CRIT2_FRACTIONS[self.name]
        if not 0 < self.crit2_fraction < 1:
            raise ValueError("crit2_fraction must lie in (0, 1)")
        if self.arrival not in ("exponential", "periodic"):
            raise ValueError(f"unknown arrival process {self.arrival!r}")
        bad_gap = self.mean_interarrival is not None and self.mean_interarrival <= 0
        if self.n_dags < 0 or bad_gap or self.speed <= 0:
            raise ValueError("n_dags, mean_interarrival and speed must be positive")


def random_template(rng: np.random.Generator, tid: str, kinds, n_min=5, n_max=10) -> DagTemplate:
    """Random connected DAG: node i > 0 draws one or two parents among earlier nodes."""
    n = int(rng.integers(n_min, n_max + 1))
    names = sorted(kinds)
    nodes = tuple((i, kinds[names[int(rng.integers(len(names)))]]) for i in range(n))
    edges = set()
    for i in range(1, n):
        k = min(i, int(rng.integers(1, 3)))
        for p in rng.choice(i, size=k, replace=False):
            edges.add((int(p), i))
    return validate_dag(DagTemplate(tid, nodes, tuple(sorted(edges))))


def synthetic_pool(kinds, n_templates: int = 8, seed: int = 0) -> dict[str, DagTemplate]:
    """Seeded pool of 5 to 10 node templates over the fft/conv/decoder kinds."""
    sub = {k: kinds[k] for k in SYNTHETIC_KINDS}
    rng = np.random.default_rng(seed)
    return {f"syn{i}": random_template(rng, f"syn{i}", sub) for i in range(n_templates)}


def template_deadline(template: DagTemplate, rule: str = "cpt", per_task: int = 100 * MS) -> int:
    an = analyze(template)
    if rule == "cpt":
        return an.cpt
    if rule == "per_critical_task":
        return per_task * len(an.critical_nodes)
    raise ValueError(f"unknown deadline rule {rule!r}")


def _arrivals(spec: ScenarioSpec, rng: np.random.Generator, gap: int) -> list[int]:
    if spec.arrival == "periodic":
        gaps = np.full(spec.n_dags, gap, dtype=np.int64)
    else:
        gaps = np.rint(rng.exponential(gap, spec.n_dags)).astype(np.int64)
    gaps[0] = 0
    return np.cumsum(gaps).tolist()


def _generate(templates: dict[str, DagTemplate], deadlines: dict[str, int], spec: ScenarioSpec,
              seed: int, default_gap: int = SYNTHETIC_GAP) -> list[TraceEntry]:
    ok = []
    for tid, tpl in templates.items():
        if deadlines[tid] <= 0 or deadlines[tid] < analyze(tpl).critical_path_bcet():
            warnings.warn(f"template {tid} rejected: deadline below its critical-path BCET")
            continue
        ok.append(tid)
    if not ok:
        raise HetSchedError("no template has a feasible deadline")
    rng = np.random.default_rng(seed)
    gap = spec.mean_interarrival if spec.mean_interarrival is not None else default_gap
    arrivals = _arrivals(spec, rng, gap)
    types = rng.integers(len(ok), size=spec.n_dags)
    crit2 = rng.random(spec.n_dags) < spec.crit2_fraction
    trace = [TraceEntry(int(a), ok[int(t)], 2 if c else 1, deadlines[ok[int(t)]])
             for a, t, c in zip(arrivals, types, crit2)]
    if spec.speed != 1:
        trace = scale_trace(trace, spec.speed, spec.tighten_deadlines)
    return trace


def gen_synthetic(spec: ScenarioSpec, seed: int, kinds=None, pool=None) -> list[TraceEntry]:
    """Synthetic trace; deadlines equal each template's critical-path time."""
    if pool is None:
        from .config import load_kinds
        pool = synthetic_pool(kinds or load_kinds())
    deadlines = {tid: template_deadline(t, "cpt") for tid, t in pool.items()}
    return _generate(pool, deadlines, spec, seed)


def gen_app_trace(app: str, spec: ScenarioSpec, seed: int, templates=None, meta=None):
    """Application trace drawn from the bundled catalog of ``app``.

    Returns ``(trace, templates)``.
    """
    if app not in APPS:
        raise UnknownApp(app)
    if templates is None:
        from .config import load_catalog
        templates, meta = load_catalog(app)
    meta = meta or {}
    rule = meta.get("deadline", "cpt")
    per_task = parse_duration(meta.get("per_task_deadline", "100ms"))
    deadlines = {tid: template_deadline(t, rule, per_task) for tid, t in templates.items()}
    gap = parse_duration(meta.get("mean_interarrival", SYNTHETIC_GAP))
    return _generate(templates, deadlines, spec, seed, gap), templates


def scale_trace(trace, speed, tighten_deadlines: bool = False) -> list[TraceEntry]:
    """Arrival rate times ``speed``: every arrival instant is divided by it."""
    s = Fraction(speed)
    if s <= 0:
        raise ValueError("speed must be positive")
    if s == 1:
        return list(trace)
    return [TraceEntry(round_ns(e.arrival / s), e.dag_type, e.criticality,
                       max(1, round_ns(e.deadline / s)) if tighten_deadlines else e.deadline)
            for e in trace]


def dumps_trace(trace, meta: dict | None = None) -> str:
    """JSON lines; an optional ``{"_meta": ...}`` header records provenance."""
    head = json.dumps({"_meta": meta}, sort_keys=True, separators=(",", ":")) + "\n" if meta else ""
    return head + "".join(json.dumps(asdict(e), separators=(",", ":")) + "\n" for e in trace)


def save_trace(trace, path, meta: dict | None = None) -> None:
    Path(path).write_text(dumps_trace(trace, meta))


def loads_trace(text: str) -> list[TraceEntry]:
    out = []
    last = None
    for i, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            if "_meta" in d:
                continue
            e = TraceEntry(int(d["arrival"]), str(d["dag_type"]), int(d["criticality"]),
                           int(d["deadline"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(i, str(exc)) from None
        if any(isinstance(d[k], float) for k in ("arrival", "deadline")):
            raise ParseError(i, "times must be integer ns")
        if e.criticality not in (1, 2):
            raise ParseError(i, f"criticality {e.criticality}")
        if e.deadline <= 0:
            raise ParseError(i, "deadline must be positive")
        if last is not None and e.arrival < last:
            raise ParseError(i, "arrivals not sorted")
        last = e.arrival
        out.append(e)
    return out


def load_trace(path) -> list[TraceEntry]:
    return loads_trace(Path(path).read_text())
