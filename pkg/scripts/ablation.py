"""Feature ablation on Sys_A synthetic traces: Hom, +pruning, het ranking, hybrid ranking.

Prints the max safe speed and the mission time at that speed for each
(scenario, policy, step).
"""

from _common import Clock, parser, search, write_rows
from hetsched.config import load_kinds, load_platform
from hetsched.metrics import max_safe_speed
from hetsched.schedulers import ablation_config
from hetsched.task_sched import HetSched
from hetsched.tracegen import ScenarioSpec, gen_synthetic, synthetic_pool

STEPS = ("hom", "pruning", "het", "hyb")


def main():
    args = parser(__doc__, "results/ablation.csv").parse_args()
    pool = synthetic_pool(load_kinds())
    plat = load_platform("sys_a")
    rows = []
    for scen in ("rural", "semi_urban", "urban"):
        tr = gen_synthetic(ScenarioSpec(scen, n_dags=args.n_dags), args.seed, pool=pool)
        for pol in ("ms_stat", "ms_dyn"):
            clock = Clock()
            base = None
            for step in STEPS:
                cfg = ablation_config(step, pol)
                ss = max_safe_speed(lambda: HetSched(cfg), plat, tr, pool, search(args, 2, 128))
                base = base or ss.mission_time
                rows.append({"scenario": scen, "policy": pol, "step": step,
                             "max_safe_speed": f"{ss.speed:.4f}", "saturated": ss.saturated,
                             "mission_time_ns": ss.mission_time,
                             "gain_over_hom": f"{base / ss.mission_time:.3f}"})
            print(scen, pol, " ".join(f"{r['step']}={r['max_safe_speed']}" for r in rows[-4:]),
                  clock, flush=True)
    write_rows(args.out, rows, args)


if __name__ == "__main__":
    main()
