import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from hetsched.config import load_catalog, load_kinds, load_platform
from hetsched.core import DagTemplate, KindProfile, TaskKind, validate_dag
from hetsched.tracegen import synthetic_pool

CLASSES = ("cpu", "gpu", "accel-cnnfft")


@pytest.fixture(scope="session")
def kinds():
    return load_kinds()


@pytest.fixture(scope="session")
def pool(kinds):
    return synthetic_pool(kinds)


@pytest.fixture(scope="session")
def sys_a():
    return load_platform("sys_a")


@pytest.fixture(scope="session")
def sys_b():
    return load_platform("sys_b")


@pytest.fixture(scope="session")
def adsuite():
    return load_catalog("adsuite")[0]


def random_kind(rng, name):
    """Kind with random profiles; CPU is always eligible."""
    prof = {"cpu": KindProfile(int(rng.integers(1_000, 1_000_000)), float(rng.uniform(100, 5000)))}
    for c in CLASSES[1:]:
        if rng.random() < 0.6:
            prof[c] = KindProfile(int(rng.integers(1, 500_000)), float(rng.uniform(1, 5000)))
    return TaskKind(name, prof)


def random_dag(seed, n_min=2, n_max=10, edge_p=0.35, tid="rnd"):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    kinds = [random_kind(rng, f"k{i}") for i in range(3)]
    nodes = tuple((i, kinds[int(rng.integers(3))]) for i in range(n))
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < edge_p)
    return validate_dag(DagTemplate(f"{tid}{seed}", nodes, edges))


seeds = st.integers(min_value=0, max_value=2**31 - 1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
