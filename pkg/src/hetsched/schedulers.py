"""Name-based scheduler factory used by the CLI and experiment scripts."""

from __future__ import annotations

from dataclasses import replace

from .baselines import ADS, CPath, TwoLevelEDF
from .meta_sched import SchedulerConfig
from .task_sched import HetSched

BASELINES = {"ads": ADS, "2lvl-edf": TwoLevelEDF, "cpath": CPath}
ABLATIONS = ("hom", "pruning", "het", "hyb")


def ablation_config(step: str, policy: str = "ms_dyn") -> SchedulerConfig:
    """Cumulative feature steps: Hom, then +pruning, then het ranking, then hybrid ranking."""
    if step not in ABLATIONS:
        raise ValueError(f"unknown ablation step {step!r}")
    return SchedulerConfig(policy=policy, ranking="hom" if step in ("hom", "pruning") else step,
                           pruning_enabled=step != "hom")


def make_scheduler(name: str, config: SchedulerConfig | None = None, **overrides):
    """Build a fresh scheduler.

    ``hetsched`` alone uses the default configuration; ``hetsched-<policy>-<ranking>``
    (e.g. ``hetsched-msdyn-hyb``) selects policy and ranking. ``overrides`` are
    SchedulerConfig fields and apply to HetSched variants only.
    """
    key = name.lower()
    if key in BASELINES:
        return BASELINES[key]()
    if not key.startswith("hetsched"):
        raise ValueError(f"unknown scheduler {name!r}")
    cfg = config or SchedulerConfig()
    parts = key.split("-")[1:]
    if parts:
        if len(parts) != 2:
            raise ValueError(f"scheduler name {name!r} must be hetsched-<policy>-<ranking>")
        policy = {"msdyn": "ms_dyn", "msstat": "ms_stat"}.get(parts[0], parts[0])
        cfg = replace(cfg, policy=policy, ranking=parts[1])
    if overrides:
        cfg = replace(cfg, **overrides)
    return HetSched(cfg)


def scheduler_names() -> list[str]:
    return ["hetsched-msdyn-hyb", "hetsched-msdyn-het", "hetsched-msdyn-hom",
            "hetsched-msstat-hyb", "hetsched-msstat-het", "hetsched-msstat-hom",
            *BASELINES]
