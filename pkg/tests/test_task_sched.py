from hetsched.config import load_platform
from hetsched.core import DagTemplate, KindProfile, PeClass, TaskKind, validate_dag
from hetsched.meta_sched import SchedulerConfig
from hetsched.platform import Platform
from hetsched.task_sched import HetSched, collect_completions, list_assign

CPU = PeClass("cpu", 1.0, 0.0, ((1.0, 1_000_000_000),), False)
GPU = PeClass("gpu", 8.0, 0.0, ((1.0, 1_000_000_000),), False)
K = TaskKind("k", {"cpu": KindProfile(100, 1.0), "gpu": KindProfile(10, 1.0)}, 0, 0)


def plat(n_cpu=1, n_gpu=1):
    return Platform.build("t", [(CPU, n_cpu), (GPU, n_gpu)], alpha=0)


def single(tid):
    return validate_dag(DagTemplate(tid, ((0, K),)))


def sched(config=None, p=None):
    s = HetSched(config or SchedulerConfig(ranking="hyb"))
    s.bind(p or plat())
    return s


def test_earliest_finish_picks_fast_pe():
    s = sched()
    s.admit(single("a"), 0, 1000, 1)
    out = s.schedule(0)
    assert len(out) == 1 and out[0].pe.class_name == "gpu" and out[0].est_finish == 10


def test_waiting_task_reserves_and_later_task_takes_slow_pe():
    # two tasks: the first goes to the GPU; the second finishes sooner waiting
    # for the GPU (10 + 10) than on the CPU (100), so it waits
    s = sched(SchedulerConfig(ranking="hyb", carve_out=False))
    s.admit(single("a"), 0, 1000, 2)
    s.admit(single("b"), 0, 1000, 2)
    out = s.schedule(0)
    assert [a.pe.class_name for a in out] == ["gpu"]
    assert len(s.ready) == 1


def test_window_one_blocks_behind_head():
    p = plat(n_cpu=1, n_gpu=1)
    s = sched(SchedulerConfig(ranking="hyb", window_w=1, carve_out=False), p)
    gpu = p.pes[1]
    gpu.running, gpu.busy_until = object(), 85
    s.admit(single("a"), 0, 1000, 2)  # best: wait for the GPU (95 < 100)
    s.admit(single("b"), 0, 5000, 1)
    out = s.schedule(0)
    # window 1: the head waits and nothing behind it is considered
    assert out == []
    s2 = sched(SchedulerConfig(ranking="hyb", window_w=4, carve_out=False), plat())
    p2 = s2.platform
    p2.pes[1].running, p2.pes[1].busy_until = object(), 85
    s2.admit(single("a"), 0, 1000, 2)
    s2.admit(single("b"), 0, 5000, 1)
    out = s2.schedule(0)
    # window 4: the second task looks past the head; the GPU is now reserved
    # until 95 so the CPU (100) beats waiting (105)
    assert [(a.task.dag.instance_id, a.pe.class_name) for a in out] == [(1, "cpu")]


def test_carve_out_steers_noncritical_to_slow_pe():
    s = sched(SchedulerConfig(ranking="hyb", carve_out=True))
    s.admit(single("c"), 0, 10_000, 2)
    s.admit(single("n"), 0, 10_000, 1)
    out = {a.task.dag.criticality: a.pe.class_name for a in s.schedule(0)}
    assert out == {2: "gpu", 1: "cpu"}


def test_carve_out_falls_back_when_slow_pe_misses_sd():
    s = sched(SchedulerConfig(ranking="hyb", carve_out=True))
    s.admit(single("c"), 0, 10_000, 2)
    s.admit(single("n"), 0, 50, 1)  # CPU (100) would miss its sub-deadline
    out = s.schedule(0)
    assert [a.task.dag.criticality for a in out] == [2]


def test_list_assign_respects_candidate_filter():
    s = sched()
    s.admit(single("a"), 0, 1000, 1)
    cpu_only = lambda task, avail: [pe for pe in s.platform.pes if pe.class_name == "cpu"]
    out = list_assign(s, list(s.ready.values()), s.platform, 0, candidates_for=cpu_only)
    assert out[0].pe.class_name == "cpu" and out[0].est_finish == 100


def test_dvfs_slack_offered():
    s = sched()
    s.admit(single("a"), 0, 1000, 1)
    (a,) = s.schedule(0)
    assert a.slack == 1000 - 10


def test_collect_completions():
    p = load_platform("sys_a")
    p.pes[3].running, p.pes[3].busy_until = "t3", 10
    p.pes[1].running, p.pes[1].busy_until = "t1", 10
    p.pes[2].running, p.pes[2].busy_until = "t2", 20
    assert collect_completions(p, 10) == [("t1", 1, 10), ("t3", 3, 10)]
