"""Exhaustive Sys_C PE-count search on an ADSuite trace (minimum energy x mission time)."""

from _common import Clock, parser, write_rows
from hetsched.metrics import SocEvaluator, dse_search
from hetsched.tracegen import ScenarioSpec, gen_app_trace


def main():
    p = parser(__doc__, "results/dse.csv")
    p.add_argument("--scenario", default="urban")
    p.add_argument("--scheduler", default="hetsched-msdyn-hyb")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(n_dags=150)
    args = p.parse_args()
    tr, tm = gen_app_trace("adsuite", ScenarioSpec(args.scenario, n_dags=args.n_dags), args.seed)
    clock = Clock()
    # (det, tra, loc, gpu, cpu)
    res = dse_search([[1, 2], [1, 2], [1, 2], [1, 2], [1, 2, 4]], SocEvaluator(args.scheduler, tr, tm),
                     jobs=args.jobs)
    front = {p.config for p in res.pareto}
    rows = [{"config": ":".join(map(str, p.config)), "safe": p.safe, "energy_mj": f"{p.energy_mj:.1f}",
             "mission_time_ns": p.mission_time, "pareto": p.config in front,
             "best": p == res.best} for p in res.points]
    print("best", res.best.config, "pareto", len(front), clock)
    write_rows(args.out, rows, args)


if __name__ == "__main__":
    main()
