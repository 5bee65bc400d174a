"""The contract between the simulation engine and any scheduler."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Assignment:
    task: object
    pe: object
    start: int
    est_finish: int
    slack: int | None = None  # slack offered to DVFS; None disables it for this task


class Scheduler:
    """Base class. Subclasses own all ready-task state; the engine owns PEs and time.

    Lifecycle per simulated instant: completions (``on_complete``), arrivals
    (``admit``), ``sweep`` and finally ``schedule``.
    """

    name = "base"

    def bind(self, platform) -> None:
        self.platform = platform

    def admit(self, template, arrival, deadline, criticality, analysis=None):
        raise NotImplementedError

    def on_complete(self, task, now):
        raise NotImplementedError

    def sweep(self, now):
        """Return ``(pruned_dags, promoted_dags)``; baselines never prune."""
        return [], []

    def schedule(self, now) -> list[Assignment]:
        raise NotImplementedError

    def has_ready(self) -> bool:
        raise NotImplementedError
