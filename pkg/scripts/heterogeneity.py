"""HetSched speedup over 2lvl-EDF on platform variants of increasing PE peak-performance CoV.

Family G diversifies a homogeneous GPU platform by adding CPUs, then the
CNN/FFT accelerator. Families F and H are alternative variant sets kept for
comparison.
"""

from _common import Clock, parser, search, write_rows
from hetsched.config import load_kinds, load_platform
from hetsched.metrics import max_safe_speed
from hetsched.schedulers import make_scheduler
from hetsched.tracegen import ScenarioSpec, gen_synthetic, synthetic_pool

FAMILIES = {
    "G": {"G1": [["gpu", 3]], "G2": [["cpu", 8], ["gpu", 3]],
          "G3": [["cpu", 8], ["gpu", 3], ["accel-cnnfft", 1]]},
    "F": {"F1": [["cpu", 8], ["gpu", 2]], "F2": [["cpu", 8], ["gpu", 2], ["accel-cnnfft", 1]],
          "F3": [["cpu", 8], ["gpu", 1], ["accel-cnnfft", 1]], "F4": [["cpu", 8], ["accel-cnnfft", 1]]},
    "H": {"H1": [["cpu", 8], ["gpu", 3]], "H2": [["cpu", 8], ["gpu", 2], ["accel-cnnfft", 1]],
          "H3": [["cpu", 8], ["gpu", 1], ["accel-cnnfft", 2]]},
}


def main():
    p = parser(__doc__, "results/heterogeneity.csv")
    p.add_argument("--family", default="G", choices=sorted(FAMILIES))
    p.add_argument("--scenario", default="urban")
    p.set_defaults(n_dags=500)
    args = p.parse_args()
    pool = synthetic_pool(load_kinds())
    tr = gen_synthetic(ScenarioSpec(args.scenario, n_dags=args.n_dags), args.seed, pool=pool)
    rows = []
    for name, counts in FAMILIES[args.family].items():
        clock = Clock()
        plat = load_platform("sys_a", counts=counts, name=name)
        sp = {s: max_safe_speed(lambda: make_scheduler(s), plat, tr, pool,
                                search(args, 1 / 16, 256)).speed
              for s in ("hetsched-msdyn-hyb", "2lvl-edf")}
        rows.append({"variant": name, "cov": f"{plat.heterogeneity_cov():.4f}",
                     "hetsched": f"{sp['hetsched-msdyn-hyb']:.4f}", "2lvl_edf": f"{sp['2lvl-edf']:.4f}",
                     "speedup": f"{sp['hetsched-msdyn-hyb'] / sp['2lvl-edf']:.3f}"})
        print(*rows[-1].values(), clock, flush=True)
    write_rows(args.out, rows, args)


if __name__ == "__main__":
    main()
