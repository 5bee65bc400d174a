"""Experiment configuration: one JSON document resolves to platform, scheduler, trace and seed.

Layout::

    {
      "platform": "sys_a" | path | {...platform file...},
      "kinds": "profiled",                      # optional
      "platform_overrides": {"alpha": 0.1, "f_slack": 0.25},   # optional
      "scheduler": "hetsched-msdyn-hyb",
      "scheduler_config": {"pruning_enabled": true, ...},      # optional
      "trace": {"app": "synthetic" | "adsuite" | ..., "scenario": "urban",
                "n_dags": 1000, "mean_interarrival": "2ms", "speed": 1.0}
               | {"file": "trace.jsonl", "catalog": "adsuite" | "synthetic"},
      "seed": 0,
      "sim": {"decision_overhead": 0, "exec_jitter": 0.0},      # optional
      "search": {"lo": 0.125, "hi": 64, "rel_tol": 0.01},        # optional
      "dse": {"ranges": [[4, 8], [1, 2], [1, 2], [1, 2], [0, 1]]}  # optional
    }
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .config import ConfigError, _read, load_catalog, load_kinds, load_platform
from .core import parse_duration
from .meta_sched import SchedulerConfig
from .metrics import SpeedSearch
from .schedulers import make_scheduler
from .sim import SimConfig
from .tracegen import ScenarioSpec, gen_app_trace, gen_synthetic, load_trace, synthetic_pool

SCHED_FIELDS = {f.name for f in fields(SchedulerConfig)}


def config_hash(cfg: dict) -> str:
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class Experiment:
    raw: dict
    source: str
    platform: object
    templates: dict
    trace: list
    seed: int
    sim: SimConfig
    search: SpeedSearch

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    @property
    def provenance(self) -> dict:
        return {"config_hash": self.hash, "seed": self.seed, "version": __version__}

    @property
    def scheduler_name(self) -> str:
        return self.raw.get("scheduler", "hetsched")

    def scheduler(self, name=None):
        name = name or self.scheduler_name
        overrides = self.raw.get("scheduler_config", {})
        if name.lower().startswith("hetsched"):
            return make_scheduler(name, **overrides)
        return make_scheduler(name)

    def factory(self, name=None):
        name = name or self.scheduler_name
        return lambda: self.scheduler(name)


def _scenario_spec(spec: dict, where: str) -> ScenarioSpec:
    kw = {}
    for key in ("crit2_fraction", "n_dags", "arrival", "speed", "tighten_deadlines"):
        if key in spec:
            kw[key] = spec[key]
    if "mean_interarrival" in spec:
        kw["mean_interarrival"] = parse_duration(spec["mean_interarrival"])
    try:
        return ScenarioSpec(spec.get("scenario", "urban"), **kw)
    except (TypeError, ValueError) as e:
        raise ConfigError(where, "trace", str(e)) from None


def build_trace(spec: dict, seed: int, kinds, where: str = "<inline>"):
    """Return ``(trace, templates)`` for a trace section."""
    if "file" in spec:
        catalog = spec.get("catalog", "synthetic")
        if catalog == "synthetic":
            templates = synthetic_pool(kinds)
        else:
            templates, _ = load_catalog(catalog, kinds)
        return load_trace(spec["file"]), templates
    app = spec.get("app", "synthetic")
    scen = _scenario_spec(spec, where)
    if app == "synthetic":
        pool = synthetic_pool(kinds, spec.get("n_templates", 8), spec.get("pool_seed", 0))
        return gen_synthetic(scen, seed, pool=pool), pool
    templates, meta = load_catalog(app, kinds)
    return gen_app_trace(app, scen, seed, templates, meta)


def load_experiment(source, **overrides) -> Experiment:
    """Resolve a config (path, preset-free dict) with CLI-style overrides applied.

    Recognised overrides: scheduler, seed, fslack, ranking, policy, pruning,
    rank_update, scenario, n_dags, speed. ``None`` values are ignored.
    """
    raw, where = _read(source)
    raw = copy.deepcopy(raw)
    if "platform" not in raw:
        raise ConfigError(where, "platform", "missing")
    ov = {k: v for k, v in overrides.items() if v is not None}
    if "scheduler" in ov:
        raw["scheduler"] = ov["scheduler"]
    if "seed" in ov:
        raw["seed"] = ov["seed"]
    if "fslack" in ov:
        raw.setdefault("platform_overrides", {})["f_slack"] = ov["fslack"]
    sc = raw.setdefault("scheduler_config", {})
    if "ranking" in ov:
        sc["ranking"] = ov["ranking"]
    if "policy" in ov:
        sc["policy"] = ov["policy"].replace("-", "_")
    if "pruning" in ov:
        sc["pruning_enabled"] = ov["pruning"]
    if "rank_update" in ov:
        sc["rank_update_enabled"] = ov["rank_update"]
    if not sc:
        del raw["scheduler_config"]
    for key in ("scenario", "n_dags", "speed"):
        if key in ov:
            raw.setdefault("trace", {})[key] = ov[key]

    bad = set(raw.get("scheduler_config", {})) - SCHED_FIELDS
    if bad:
        raise ConfigError(where, "scheduler_config", f"unknown fields {sorted(bad)}")
    name = raw.get("scheduler", "hetsched")
    try:
        if name.lower().startswith("hetsched"):
            make_scheduler(name, **raw.get("scheduler_config", {}))
        else:
            make_scheduler(name)
    except ValueError as e:
        raise ConfigError(where, "scheduler", str(e)) from None

    kinds = load_kinds(raw.get("kinds", "profiled"))
    plat = load_platform(raw["platform"])
    po = raw.get("platform_overrides", {})
    if po:
        unknown = set(po) - {"alpha", "f_slack"}
        if unknown:
            raise ConfigError(where, "platform_overrides", f"unknown fields {sorted(unknown)}")
        if not 0 <= po.get("f_slack", 0) <= 1:
            raise ConfigError(where, "platform_overrides", "f_slack must lie in [0, 1]")
        plat = plat.with_params(**po)
    seed = int(raw.get("seed", 0))
    trace, templates = build_trace(raw.get("trace", {}), seed, kinds, where)
    try:
        sim = SimConfig(**raw.get("sim", {}))
        search = SpeedSearch(**raw.get("search", {}))
    except TypeError as e:
        raise ConfigError(where, "sim/search", str(e)) from None
    return Experiment(raw, where, plat, templates, trace, seed, sim, search)


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
