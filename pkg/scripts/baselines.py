"""HetSched against CPATH-style, ADS-style and 2lvl-EDF baselines on Sys_B app traces.

``--app`` selects the catalog (adsuite by default; mapping3d and delivery
model the drone workloads).
"""

from _common import Clock, parser, search, write_rows
from hetsched.config import load_platform
from hetsched.metrics import NoFeasibleSpeed, max_safe_speed
from hetsched.schedulers import make_scheduler
from hetsched.tracegen import ScenarioSpec, gen_app_trace

SCHEDULERS = ("hetsched-msdyn-hyb", "cpath", "ads", "2lvl-edf")


def main():
    p = parser(__doc__, "results/baselines.csv")
    p.add_argument("--app", default="adsuite")
    args = p.parse_args()
    plat = load_platform("sys_b")
    rows = []
    for scen in ("rural", "semi_urban", "urban"):
        tr, tm = gen_app_trace(args.app, ScenarioSpec(scen, n_dags=args.n_dags), args.seed)
        clock = Clock()
        speeds = {}
        for name in SCHEDULERS:
            try:
                speeds[name] = max_safe_speed(lambda: make_scheduler(name), plat, tr, tm,
                                              search(args, 1 / 64, 64)).speed
            except NoFeasibleSpeed:
                speeds[name] = 0.0
        for name in SCHEDULERS:
            ratio = speeds[SCHEDULERS[0]] / speeds[name] if speeds[name] else float("inf")
            rows.append({"app": args.app, "scenario": scen, "scheduler": name,
                         "max_safe_speed": f"{speeds[name]:.4f}", "hetsched_ratio": f"{ratio:.3f}"})
        print(scen, " ".join(f"{k}={v:.3f}" for k, v in speeds.items()), clock, flush=True)
    write_rows(args.out, rows, args)


if __name__ == "__main__":
    main()
