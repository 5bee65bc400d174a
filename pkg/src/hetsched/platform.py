"""SoC platform model: PE instances, data movement, contention and DVFS."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import HetSchedError, PeClass, TaskKind, round_ns


class IneligiblePe(HetSchedError):
    pass


CATEGORIES = ("cpu", "gpu", "accel")


def category_of(pe_class: PeClass) -> str:
    name = pe_class.name
    if name.startswith("cpu"):
        return "cpu"
    if name.startswith("gpu"):
        return "gpu"
    return "accel"


@dataclass
class ProcessingElement:
    id: int
    name: str
    pe_class: PeClass
    busy_until: int = 0
    current_frequency: int = 0
    running: object = None
    busy_time: int = 0
    reservations: list = field(default_factory=list)  # (task_id, start, end, frequency)

    def __post_init__(self):
        if not self.current_frequency:
            self.current_frequency = self.pe_class.nominal_frequency

    @property
    def class_name(self) -> str:
        return self.pe_class.name

    def is_idle(self, now: int) -> bool:
        return self.running is None and self.busy_until <= now

    def reserve(self, task_id, start: int, end: int, frequency: int) -> None:
        if start < self.busy_until:
            raise HetSchedError(
                f"{self.name}: reservation [{start},{end}) overlaps busy_until={self.busy_until}"
            )
        self.reservations.append((task_id, start, end, frequency))
        self.busy_until = end
        self.current_frequency = frequency
        self.busy_time += end - start


@dataclass(frozen=True)
class DataMoveModel:
    """Latency of moving a parent's output to the PE running the child.

    Defaults are surrogates: CPU-side flush of ``flush_latency`` plus
    ``flush_ns_per_byte``; accelerator transfers at ``dma_bytes_per_ns``.
    ``table`` overrides a (src class, dst class) pair with (fixed ns, ns per byte).
    """

    flush_latency: int = 10_000
    flush_ns_per_byte: Fraction = Fraction(1)
    dma_bytes_per_ns: Fraction = Fraction(8)
    table: dict = field(default_factory=dict)

    def latency(self, src: ProcessingElement | None, dst: ProcessingElement, nbytes: int) -> int:
        if src is not None and src.id == dst.id:
            return 0
        dst_cat = category_of(dst.pe_class)
        if src is None:
            # source-task inputs sit in shared main memory
            return math.ceil(Fraction(nbytes) / self.dma_bytes_per_ns) if dst_cat == "accel" else 0
        src_cat = category_of(src.pe_class)
        if src_cat == "gpu":
            return 0
        key = (src.class_name, dst.class_name)
        if key in self.table:
            fixed, per_byte = self.table[key]
            return fixed + math.ceil(Fraction(per_byte) * nbytes)
        if src_cat == "accel" or dst_cat == "accel":
            return math.ceil(Fraction(nbytes) / self.dma_bytes_per_ns)
        return self.flush_latency + math.ceil(self.flush_ns_per_byte * nbytes)


class Platform:
    """A set of PE instances plus the platform-wide cost models."""

    def __init__(self, name, pes, data_move=None, alpha=Fraction(1, 10), f_slack=Fraction(0)):
        self.name = name
        self.pes: list[ProcessingElement] = list(pes)
        self.data_move: DataMoveModel = data_move or DataMoveModel()
        self.alpha = Fraction(alpha)
        self.f_slack = Fraction(f_slack)
        self.classes: dict[str, PeClass] = {}
        for pe in self.pes:
            self.classes.setdefault(pe.class_name, pe.pe_class)
        self.by_class: dict[str, list[ProcessingElement]] = {}
        for pe in self.pes:
            self.by_class.setdefault(pe.class_name, []).append(pe)
        self._exec_cache: dict = {}
        self._move_cache: dict = {}
        self._eligible: dict = {}

    @classmethod
    def build(cls, name, counts, **kw) -> "Platform":
        """``counts`` is an ordered list of (PeClass, instance count)."""
        pes = []
        for pe_class, n in counts:
            for i in range(n):
                pes.append(ProcessingElement(len(pes), f"{pe_class.name}{i}", pe_class))
        return cls(name, pes, **kw)

    def fresh(self) -> "Platform":
        pes = [ProcessingElement(pe.id, pe.name, pe.pe_class) for pe in self.pes]
        return Platform(self.name, pes, self.data_move, self.alpha, self.f_slack)

    def with_params(self, **kw) -> "Platform":
        p = self.fresh()
        for k, v in kw.items():
            setattr(p, k, Fraction(v) if k in ("alpha", "f_slack") else v)
        return p

    def counts(self) -> dict[str, int]:
        return {c: len(v) for c, v in self.by_class.items()}

    @property
    def n_pes(self) -> int:
        return len(self.pes)

    def eligible_classes(self, kind: TaskKind) -> list[str]:
        return [c for c in self.by_class if kind.supports(c)]

    def eligible_pes(self, kind: TaskKind) -> list[ProcessingElement]:
        pes = self._eligible.get(kind.name)
        if pes is None:
            pes = self._eligible[kind.name] = [pe for pe in self.pes
                                               if kind.supports(pe.class_name)]
        return pes

    def heterogeneity_cov(self) -> float:
        """Coefficient of variation of PE peak performance (population std / mean)."""
        perf = np.array([pe.pe_class.peak_perf for pe in self.pes], dtype=float)
        return float(perf.std() / perf.mean())

    # cost model

    def contention_factor(self, n_busy: int) -> Fraction:
        if self.n_pes <= 1:
            return Fraction(1)
        return 1 + self.alpha * n_busy / (self.n_pes - 1)

    def exec_time_on(self, kind: TaskKind, pe: ProcessingElement, n_busy: int = 0,
                     frequency: int | None = None) -> int:
        if frequency is not None and frequency != pe.pe_class.nominal_frequency:
            return exec_time_on(kind, pe, n_busy, frequency, self)
        key = (kind.name, pe.class_name, n_busy)
        t = self._exec_cache.get(key)
        if t is None:
            t = self._exec_cache[key] = exec_time_on(kind, pe, n_busy, None, self)
        return t

    def _latency(self, src, dst, nbytes) -> int:
        if src is not None and src.id == dst.id:
            return 0
        key = (src.class_name if src is not None else None, dst.class_name, nbytes)
        t = self._move_cache.get(key)
        if t is None:
            t = self._move_cache[key] = self.data_move.latency(src, dst, nbytes)
        return t

    def data_move_cost(self, parents, dst: ProcessingElement, kind: TaskKind) -> int:
        """Sum of moves of each parent's output (``parents`` = [(pe, bytes)]) to ``dst``."""
        if not parents:
            return self._latency(None, dst, kind.input_bytes)
        return sum(self._latency(src, dst, nbytes) for src, nbytes in parents)

    def __repr__(self):
        return f"Platform({self.name!r}, {self.counts()})"


def exec_time_on(kind: TaskKind, pe: ProcessingElement, n_busy: int, frequency: int | None,
                 platform: Platform) -> int:
    """Profile time scaled by frequency and by the contention factor, rounded to ns."""
    prof = kind.profile.get(pe.class_name)
    if prof is None:
        raise IneligiblePe(f"{kind.name} cannot run on {pe.class_name}")
    f_nom = pe.pe_class.nominal_frequency
    frequency = frequency or f_nom
    t = Fraction(prof.exec_time * f_nom, frequency)
    if n_busy and platform.alpha:
        t *= platform.contention_factor(n_busy)
    return round_ns(t)


def dvfs_select(base_time: int, pe_class: PeClass, slack: int, f_slack) -> tuple[int, float]:
    """Lowest DVFS point whose stretched time fits in ``base_time + f_slack*slack``.

    ``base_time`` is the nominal-frequency duration; returns (frequency, voltage).
    """
    f_nom = pe_class.nominal_frequency
    if not pe_class.dvfs_enabled or not f_slack or slack <= 0:
        return f_nom, pe_class.nominal_voltage
    budget = base_time + Fraction(f_slack) * slack
    for volt, freq in pe_class.dvfs_table:
        if Fraction(base_time * f_nom, freq) <= budget:
            return freq, volt
    return f_nom, pe_class.nominal_voltage


def task_energy_mj(power_mw: float, duration_ns: int, voltage: float, nominal_voltage: float) -> float:
    scale = (voltage / nominal_voltage) ** 2.5 if voltage != nominal_voltage else 1.0
    return power_mw * scale * duration_ns * 1e-9
