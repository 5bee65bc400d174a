"""Offline analysis of a DAG template: paths, critical path and static sub-deadlines."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import DagTemplate, HetSchedError, validate_dag

DEFAULT_PATH_CAP = 10_000


class PathExplosion(HetSchedError):
    pass


class NonPositiveDeadline(HetSchedError):
    pass


@dataclass(frozen=True, eq=False)
class DagAnalysis:
    template: DagTemplate
    paths: tuple[tuple[int, ...], ...]
    pt: tuple[int, ...]  # per path, sum of WCETs
    cpt: int
    critical_path: int  # index into paths
    intersects: tuple[bool, ...]  # per path: shares a node with the critical path
    cpst: dict  # path index -> WCET sum of the segment on the critical path
    ncpst: dict  # path index -> WCET sum of the segment off the critical path
    wcet: dict  # node -> WCET
    bcet: dict  # node -> BCET
    paths_of: dict  # node -> path indices containing it
    remaining_wcet: dict  # (node, path) -> WCET of node and its successors on path
    bottom_level: dict  # node -> longest WCET path from node to a sink (inclusive)
    _sd_cache: dict = field(default_factory=dict, repr=False)

    @property
    def critical_nodes(self) -> tuple[int, ...]:
        return self.paths[self.critical_path]

    def critical_path_bcet(self) -> int:
        return sum(self.bcet[n] for n in self.critical_nodes)

    def is_on_critical_path(self, node: int) -> bool:
        return self.critical_path in self.paths_of[node]


def enumerate_paths(template: DagTemplate, cap: int = DEFAULT_PATH_CAP) -> list[tuple[int, ...]]:
    """All maximal source-to-sink paths, DFS with ascending node ids."""
    out: list[tuple[int, ...]] = []
    sources = sorted(n for n in template.node_ids if not template.parents[n])

    def walk(node, prefix):
        prefix.append(node)
        kids = template.children[node]
        if not kids:
            out.append(tuple(prefix))
            if len(out) > cap:
                raise PathExplosion(f"{template.id}: more than {cap} paths")
        for c in kids:
            walk(c, prefix)
        prefix.pop()

    for s in sources:
        walk(s, [])
    return out


def analyze(template: DagTemplate, path_cap: int = DEFAULT_PATH_CAP) -> DagAnalysis:
    if not template.order:
        template = validate_dag(template)
    wcet = {n: k.wcet for n, k in template.nodes}
    bcet = {n: k.bcet for n, k in template.nodes}
    paths = enumerate_paths(template, path_cap)
    pt = [sum(wcet[n] for n in p) for p in paths]
    cpt = max(pt)
    cp = pt.index(cpt)  # first path in DFS order wins ties
    cp_nodes = set(paths[cp])

    intersects, cpst, ncpst = [], {}, {}
    for i, p in enumerate(paths):
        if i == cp:
            intersects.append(False)
            continue
        on = [n for n in p if n in cp_nodes]
        intersects.append(bool(on))
        if on:
            cpst[i] = sum(wcet[n] for n in on)
            ncpst[i] = sum(wcet[n] for n in p if n not in cp_nodes)

    paths_of: dict[int, list[int]] = {n: [] for n in wcet}
    remaining = {}
    for i, p in enumerate(paths):
        suffix = 0
        for n in reversed(p):
            suffix += wcet[n]
            remaining[(n, i)] = suffix
            paths_of[n].append(i)

    bottom = {}
    for n in reversed(template.order):
        bottom[n] = wcet[n] + max((bottom[c] for c in template.children[n]), default=0)

    return DagAnalysis(
        template=template,
        paths=tuple(paths),
        pt=tuple(pt),
        cpt=cpt,
        critical_path=cp,
        intersects=tuple(intersects),
        cpst=cpst,
        ncpst=ncpst,
        wcet=wcet,
        bcet=bcet,
        paths_of={n: tuple(v) for n, v in paths_of.items()},
        remaining_wcet=remaining,
        bottom_level=bottom,
    )


def static_subdeadlines(analysis: DagAnalysis, deadline: int) -> dict[int, tuple[Fraction, Fraction]]:
    """Per-node ``(sdr, sd)`` under the static policy, all exact rationals.

    A node reachable by several rules keeps the smallest SD (and that rule's SDR).
    """
    if deadline <= 0:
        raise NonPositiveDeadline(f"deadline must be positive, got {deadline}")
    cached = analysis._sd_cache.get(deadline)
    if cached is not None:
        return cached

    D = Fraction(deadline)
    cp = analysis.critical_path
    cp_nodes = set(analysis.paths[cp])
    best: dict[int, tuple[Fraction, Fraction]] = {}

    def offer(node, sdr, sd):
        cur = best.get(node)
        if cur is None or sd < cur[1]:
            best[node] = (sdr, sd)

    for i, path in enumerate(analysis.paths):
        if i == cp or not analysis.intersects[i]:
            pt = analysis.pt[i]
            for n in path:
                sdr = Fraction(analysis.wcet[n], pt)
                offer(n, sdr, sdr * D)
        else:
            deadline_cps = Fraction(analysis.cpst[i], analysis.cpt) * D
            deadline_ncps = D - deadline_cps
            ncpst = analysis.ncpst[i]
            for n in path:
                if n in cp_nodes:
                    sdr = Fraction(analysis.wcet[n], analysis.cpt)
                    offer(n, sdr, sdr * D)
                else:
                    sdr = Fraction(analysis.wcet[n], ncpst)
                    offer(n, sdr, sdr * deadline_ncps)

    analysis._sd_cache[deadline] = best
    return best
