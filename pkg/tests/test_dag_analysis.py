from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import random_dag, seeds
from hetsched.core import DagTemplate, KindProfile, TaskKind, validate_dag
from hetsched.dag_analysis import (
    NonPositiveDeadline, PathExplosion, analyze, enumerate_paths, static_subdeadlines,
)
from oracles import all_paths, critical_path, static_sd


def kind(name, cpu, gpu=None, acc=None):
    prof = {"cpu": KindProfile(cpu, 1.0)}
    if gpu:
        prof["gpu"] = KindProfile(gpu, 1.0)
    if acc:
        prof["accel-cnnfft"] = KindProfile(acc, 1.0)
    return TaskKind(name, prof)


def seven_task_dag():
    # P0 = 0-2-4-6 critical, P1 = 1-4-6 intersects it, P2 = 1-3-5 does not
    w = [40, 10, 30, 10, 20, 10, 30]
    nodes = tuple((i, kind(f"t{i}", w[i], max(1, w[i] // 4))) for i in range(7))
    edges = ((0, 2), (2, 4), (4, 6), (1, 4), (1, 3), (3, 5))
    return validate_dag(DagTemplate("seven", nodes, edges))


def test_seven_task_example():
    t = seven_task_dag()
    an = analyze(t)
    assert an.critical_nodes == (0, 2, 4, 6)
    assert an.cpt == 120
    sd = static_subdeadlines(an, 240)
    # critical path nodes get WCET/CPT of the deadline
    assert sd[0][1] == 80 and sd[6][1] == 60
    # node 3 lies only on the independent path 1-3-5 (PT 30)
    assert sd[3] == (Fraction(1, 3), 80)
    # node 1: 10/30*240 = 80 on P2; on P1, NCPS deadline = 240 - 50/120*240 = 140, 10/10*140
    assert sd[1][1] == 80
    assert sum(sd[n][1] for n in an.critical_nodes) == 240


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_paths_match_networkx(seed):
    t = random_dag(seed)
    assert sorted(enumerate_paths(t)) == all_paths(t)
    assert enumerate_paths(t) == sorted(enumerate_paths(t))


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_critical_path_and_sd_match_oracle(seed):
    t = random_dag(seed)
    an = analyze(t)
    cp, cpt = critical_path(t)
    assert an.critical_nodes == cp and an.cpt == cpt
    deadline = 1 + seed % 10_000_000
    got = {n: v[1] for n, v in static_subdeadlines(an, deadline).items()}
    assert got == static_sd(t, deadline)
    assert sum(got[n] for n in cp) == deadline


def test_bottom_level_and_bounds():
    an = analyze(seven_task_dag())
    assert an.bottom_level[0] == 120
    assert an.bottom_level[1] == max(10 + 20 + 30, 10 + 10 + 10)
    assert an.critical_path_bcet() == sum(an.bcet[n] for n in (0, 2, 4, 6))


def test_errors():
    with pytest.raises(NonPositiveDeadline):
        static_subdeadlines(analyze(seven_task_dag()), 0)
    # a ladder of diamonds has 2**k paths
    k = kind("x", 1)
    nodes, edges = [(0, k)], []
    for i in range(12):
        a, b, c = 3 * i, 3 * i + 1, 3 * i + 2
        nodes += [(b, k), (c, k), (3 * i + 3, k)]
        edges += [(a, b), (a, c), (b, 3 * i + 3), (c, 3 * i + 3)]
    big = validate_dag(DagTemplate("ladder", tuple(nodes), tuple(edges)))
    with pytest.raises(PathExplosion):
        analyze(big, path_cap=1000)
