"""DVFS slack reclamation on ADSuite/Sys_B at HetSched's max safe speed."""

from _common import parser, search, write_rows
from hetsched.config import load_platform
from hetsched.metrics import crit2_safe, max_safe_speed, qom_report
from hetsched.schedulers import make_scheduler
from hetsched.sim import run
from hetsched.tracegen import ScenarioSpec, gen_app_trace, scale_trace


def main():
    args = parser(__doc__, "results/energy.csv").parse_args()
    plat = load_platform("sys_b")
    fac = lambda: make_scheduler("hetsched-msdyn-hyb")  # noqa: E731
    rows = []
    for scen in ("rural", "semi_urban", "urban"):
        tr, tm = gen_app_trace("adsuite", ScenarioSpec(scen, n_dags=args.n_dags), args.seed)
        speed = max_safe_speed(fac, plat, tr, tm, search(args, 1 / 64, 64)).speed
        st = scale_trace(tr, speed)
        base = qom_report(run(st, fac(), plat, tm))
        for fs in (0.0, 0.25, 0.5):
            q = plat.with_params(f_slack=fs)
            r = qom_report(run(st, fac(), q, tm))
            rows.append({"scenario": scen, "speed": f"{speed:.4f}", "f_slack": fs,
                         "energy_mj": f"{r.energy_mj:.1f}",
                         "saving": f"{1 - r.energy_mj / base.energy_mj:.4f}",
                         "mission_increase": f"{r.mission_time / base.mission_time - 1:.5f}",
                         "crit2_safe": crit2_safe(fac, q, st, tm)})
            print(*rows[-1].values(), flush=True)
    write_rows(args.out, rows, args)


if __name__ == "__main__":
    main()
