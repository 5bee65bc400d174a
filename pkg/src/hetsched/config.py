"""Loading kinds, platforms and DAG catalogs from JSON (bundled presets or files).

Schema summary (see README for the full layout):

* kinds file: ``{"kinds": {name: {"profile": {class: {"time": "583us", "power_mw": 634}},
  "input_bytes": int, "output_bytes": int}}}``
* classes file: ``{"classes": {name: {"peak_perf", "static_power_mw", "dvfs_enabled",
  "dvfs_table": [[volts, hz], ...]}}}``
* platform file: ``{"name", "counts": [[class, n], ...], "alpha", "data_move": {...}}``
* catalog file: ``{"app", "deadline": "cpt" | "per_critical_task", "templates":
  {id: {"nodes": [kind, ...], "edges": [[p, c], ...]}}}``
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .core import DagTemplate, HetSchedError, KindProfile, PeClass, TaskKind, parse_duration, validate_dag
from .platform import DataMoveModel, Platform


class ConfigError(HetSchedError):
    def __init__(self, path, field, msg=""):
        self.path = str(path)
        self.field = field
        super().__init__(f"{self.path}: {field}{': ' + msg if msg else ''}")


PRESET_NAMES = {
    "sys_a": "sys_a.json",
    "sys_b": "sys_b.json",
    "profiled": "kinds_profiled.json",
    "kinds_profiled": "kinds_profiled.json",
    "classes": "classes.json",
    "adsuite": "catalog_adsuite.json",
    "mapping3d": "catalog_mapping3d.json",
    "delivery": "catalog_delivery.json",
}


def _read(source) -> tuple[dict, str]:
    if isinstance(source, dict):
        return source, "<inline>"
    name = str(source)
    if name in PRESET_NAMES:
        text = resources.files("hetsched.presets").joinpath(PRESET_NAMES[name]).read_text()
        return json.loads(text), f"preset:{name}"
    path = Path(name)
    try:
        return json.loads(path.read_text()), name
    except FileNotFoundError:
        raise ConfigError(name, "<file>", "not found") from None
    except json.JSONDecodeError as e:
        raise ConfigError(name, "<json>", str(e)) from None


def load_kinds(source="profiled") -> dict[str, TaskKind]:
    data, where = _read(source)
    if "kinds" not in data:
        raise ConfigError(where, "kinds")
    kinds = {}
    for name, spec in data["kinds"].items():
        try:
            profile = {c: KindProfile(parse_duration(p["time"]), float(p["power_mw"]))
                       for c, p in spec["profile"].items()}
        except (KeyError, ValueError) as e:
            raise ConfigError(where, f"kinds.{name}.profile", str(e)) from None
        kinds[name] = TaskKind(name, profile,
                               int(spec.get("input_bytes", 1 << 20)),
                               int(spec.get("output_bytes", 1 << 20)))
    return kinds


def load_classes(source="classes") -> dict[str, PeClass]:
    data, where = _read(source)
    if "classes" not in data:
        raise ConfigError(where, "classes")
    out = {}
    for name, c in data["classes"].items():
        table = tuple((float(v), int(f)) for v, f in c.get("dvfs_table", [[1.0, 1_000_000_000]]))
        out[name] = PeClass(name, float(c.get("peak_perf", 1.0)), float(c.get("static_power_mw", 0)),
                            table, bool(c.get("dvfs_enabled", False)))
    return out


def _data_move(spec: dict, where) -> DataMoveModel:
    try:
        table = {}
        for key, (fixed, per_byte) in spec.get("table", {}).items():
            src, dst = key.split("->")
            table[(src.strip(), dst.strip())] = (parse_duration(fixed), Fraction(per_byte))
        return DataMoveModel(
            flush_latency=parse_duration(spec.get("flush_latency", "10us")),
            flush_ns_per_byte=Fraction(spec.get("flush_ns_per_byte", "1")),
            dma_bytes_per_ns=Fraction(spec.get("dma_bytes_per_ns", "8")),
            table=table,
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(where, "data_move", str(e)) from None


def load_platform(source="sys_a", classes=None, counts=None, name=None, f_slack=0) -> Platform:
    """Build a platform; ``counts`` (list of (class, n)) overrides the file's counts."""
    data, where = _read(source)
    classes = classes or load_classes(data.get("classes", "classes"))
    if counts is None:
        if "counts" not in data:
            raise ConfigError(where, "counts")
        counts = data["counts"]
    resolved = []
    for cname, n in counts:
        if cname not in classes:
            raise ConfigError(where, f"counts.{cname}", "unknown PE class")
        resolved.append((classes[cname], int(n)))
    return Platform.build(
        name or data.get("name", where), resolved,
        data_move=_data_move(data.get("data_move", {}), where),
        alpha=Fraction(data.get("alpha", "1/10")),
        f_slack=Fraction(f_slack),
    )


def sys_c(n_det, n_tra, n_loc, n_gpu, n_cpu, base="sys_b") -> Platform:
    """Sys_C-style platform from (detection, tracking, localization, GPU, CPU) counts."""
    counts = [("cpu", n_cpu), ("gpu", n_gpu), ("accel-tra", n_tra), ("accel-loc", n_loc),
              ("accel-det", n_det)]
    return load_platform(base, counts=[c for c in counts if c[1] > 0],
                         name=f"sys_c({n_det},{n_tra},{n_loc},{n_gpu},{n_cpu})")


def load_catalog(source, kinds=None) -> tuple[dict[str, DagTemplate], dict]:
    """Templates of an application catalog plus its metadata (deadline rule etc.)."""
    data, where = _read(source)
    kinds = kinds or load_kinds()
    templates = {}
    for tid, spec in data.get("templates", {}).items():
        try:
            nodes = tuple((i, kinds[k]) for i, k in enumerate(spec["nodes"]))
        except KeyError as e:
            raise ConfigError(where, f"templates.{tid}.nodes", f"unknown kind {e}") from None
        edges = tuple((int(p), int(c)) for p, c in spec.get("edges", []))
        templates[tid] = validate_dag(DagTemplate(tid, nodes, edges))
    meta = {k: v for k, v in data.items() if k != "templates"}
    return templates, meta


def catalog_to_dict(templates: dict[str, DagTemplate], **meta) -> dict:
    out = dict(meta)
    out["templates"] = {
        tid: {"nodes": [k.name for _, k in t.nodes], "edges": [list(e) for e in t.edges]}
        for tid, t in templates.items()
    }
    return out
