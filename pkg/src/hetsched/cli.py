"""Command-line front end: ``hetsched {run,sweep,safe-speed,dse,gen-trace,report}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import ConfigError
from .core import HetSchedError, parse_duration
from .experiment import config_hash, load_experiment, write_text
from .metrics import SocEvaluator, dse_search, max_safe_speed, qom_report
from .sim import SimConfig, run
from .tracegen import APPS, ScenarioSpec, dumps_trace, gen_app_trace, gen_synthetic

SWEEP_COLS = ["scenario", "scheduler", "max_safe_speed", "saturated", "probes", "mission_time",
              "energy_mj", "crit2_deadline_hit_rate", "n_pruned", "speedup"]


def _csv(rows, cols, prov) -> str:
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in prov.items()) + "\n")
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _json(obj, prov) -> str:
    return json.dumps({"_meta": prov, **obj}, sort_keys=True, indent=1) + "\n"


def read_csv(path) -> list[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _overrides(a) -> dict:
    return dict(scheduler=getattr(a, "scheduler", None), seed=a.seed, fslack=a.fslack,
                ranking=a.ranking, policy=a.policy,
                pruning=False if a.no_pruning else None,
                rank_update=False if a.no_rank_update else None)


def cmd_run(a) -> int:
    exp = load_experiment(a.config, **_overrides(a))
    res = run(exp.trace, exp.scheduler(), exp.platform, exp.templates, exp.sim, seed=exp.seed)
    rep = qom_report(res)
    out = Path(a.out_dir)
    prov = exp.provenance
    head = json.dumps({"_meta": prov}, sort_keys=True, separators=(",", ":")) + "\n"
    write_text(out / "events.jsonl", head + res.events_jsonl())
    row = rep.row()
    write_text(out / "qom.csv", _csv([row], list(row), prov))
    write_text(out / "summary.txt", "# " + json.dumps(prov, sort_keys=True) + "\n" + rep.summary())
    if not a.no_plots:
        from .plots import run_charts
        run_charts(rep, out)
    print(rep.summary(), end="")
    return 0


def _sweep_cell(job):
    config, overrides, scenario, sched = job
    exp = load_experiment(config, scenario=scenario, **overrides)
    ss = max_safe_speed(exp.factory(sched), exp.platform, exp.trace, exp.templates, exp.search,
                        exp.sim)
    rep = ss.report
    return {"scenario": scenario, "scheduler": sched, "max_safe_speed": ss.speed,
            "saturated": ss.saturated, "probes": ss.n_runs, "mission_time": rep.mission_time,
            "energy_mj": rep.energy_mj, "crit2_deadline_hit_rate": rep.crit2_deadline_hit_rate,
            "n_pruned": rep.n_pruned}


def cmd_sweep(a) -> int:
    scheds = [s.strip() for s in a.schedulers.split(",") if s.strip()]
    scens = [s.strip() for s in a.scenarios.split(",") if s.strip()]
    ov = _overrides(a)
    ov.pop("scheduler")
    exp = load_experiment(a.config, **ov)
    jobs = [(a.config, ov, sc, s) for sc in scens for s in scheds]
    if a.jobs > 1:
        with ProcessPoolExecutor(a.jobs) as ex:
            rows = list(ex.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(j) for j in jobs]
    ref = a.reference or scheds[-1]
    base = {r["scenario"]: r["max_safe_speed"] for r in rows if r["scheduler"] == ref}
    for r in rows:
        r["speedup"] = r["max_safe_speed"] / base[r["scenario"]] if r["scenario"] in base else ""
    out = Path(a.out_dir)
    write_text(out / "sweep.csv", _csv(rows, SWEEP_COLS, exp.provenance))
    if not a.no_plots:
        from .plots import grouped_bars
        grouped_bars(rows, "mission_time", out / "mission_time.png", "mission time (ns)", log=True)
        grouped_bars(rows, "energy_mj", out / "energy.png", "energy (mJ)")
        grouped_bars(rows, "max_safe_speed", out / "max_safe_speed.png", "max safe speed")
    for r in rows:
        print(f"{r['scenario']:<11} {r['scheduler']:<20} speed {r['max_safe_speed']:8.3f}"
              f"{'+' if r['saturated'] else ' '} mission {r['mission_time'] / 1e6:10.2f} ms"
              f"  speedup {r['speedup'] if r['speedup'] == '' else round(r['speedup'], 3)}")
    return 0


def cmd_safe_speed(a) -> int:
    exp = load_experiment(a.config, **_overrides(a))
    ss = max_safe_speed(exp.factory(), exp.platform, exp.trace, exp.templates, exp.search, exp.sim)
    body = {"scheduler": exp.scheduler_name, "max_safe_speed": ss.speed,
            "saturated": ss.saturated, "monotone": ss.monotone,
            "mission_time": ss.mission_time,
            "probes": [[s, ok] for s, ok in sorted(ss.probes.items())]}
    write_text(Path(a.out_dir) / "safe_speed.json", _json(body, exp.provenance))
    print(f"{exp.scheduler_name}: max safe speed {ss.speed:.4g}"
          f"{' (saturated at upper bound)' if ss.saturated else ''} after {ss.n_runs} runs")
    return 0


def _parse_grid(text) -> list[list[int]]:
    ranges = [[int(x) for x in part.split(",")] for part in text.split(":")]
    if len(ranges) != 5:
        raise ConfigError("--grid", "grid", "need five ':'-separated count lists "
                          "(det:tra:loc:gpu:cpu)")
    return ranges


def cmd_dse(a) -> int:
    exp = load_experiment(a.config, **_overrides(a))
    ranges = _parse_grid(a.grid) if a.grid else exp.raw.get("dse", {}).get("ranges")
    if ranges is None:
        raise ConfigError(exp.source, "dse", "no grid given (use --grid or dse.ranges)")
    ev = SocEvaluator(exp.scheduler_name, exp.trace, exp.templates,
                      SimConfig(**{**exp.raw.get("sim", {}), "record_log": False}))
    res = dse_search(ranges, ev, jobs=a.jobs)
    cols = ["n_det", "n_tra", "n_loc", "n_gpu", "n_cpu", "feasible", "safe", "energy_mj",
            "mission_time", "product", "n_pes", "pareto"]
    front = {p.config for p in res.pareto}

    def row(p):
        return {**dict(zip(cols, p.config)), "feasible": p.feasible, "safe": p.safe,
                "energy_mj": p.energy_mj, "mission_time": p.mission_time,
                "product": p.product, "n_pes": p.n_pes, "pareto": p.config in front}

    out = Path(a.out_dir)
    write_text(out / "dse.csv", _csv([row(p) for p in res.points], cols, exp.provenance))
    write_text(out / "pareto.csv", _csv([row(p) for p in res.pareto], cols, exp.provenance))
    write_text(out / "best.json", _json({"best": row(res.best)}, exp.provenance))
    print(f"best {res.best.config}  E*T {res.best.product:.6g}  PEs {res.best.n_pes}  "
          f"pareto {len(res.pareto)}/{len(res.points)}")
    return 0


def cmd_gen_trace(a) -> int:
    kw = {"n_dags": a.n_dags}
    if a.mean_interarrival:
        kw["mean_interarrival"] = parse_duration(a.mean_interarrival)
    spec = ScenarioSpec(a.scenario, **kw)
    if a.app == "synthetic":
        trace = gen_synthetic(spec, a.seed)
    else:
        trace, _ = gen_app_trace(a.app, spec, a.seed)
    params = {"app": a.app, "scenario": spec.name, "n_dags": spec.n_dags,
              "mean_interarrival": a.mean_interarrival}
    prov = {"config_hash": config_hash(params), "seed": a.seed, "version": __version__, **params}
    text = dumps_trace(trace, prov)
    if a.out == "-":
        sys.stdout.write(text)
    else:
        write_text(Path(a.out), text)
        print(f"wrote {len(trace)} DAGs to {a.out}")
    return 0


def cmd_report(a) -> int:
    rows = read_csv(a.csv)
    if not rows:
        raise ConfigError(a.csv, "rows", "empty report")
    cols = list(rows[0])
    widths = [max(len(c), *(len(r[c]) for r in rows)) for c in cols]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
    for r in rows:
        print("  ".join(r[c].ljust(w) for c, w in zip(cols, widths)))
    if a.out_dir and "scenario" in rows[0]:
        from .plots import grouped_bars
        out = Path(a.out_dir)
        for value in ("mission_time", "energy_mj", "max_safe_speed"):
            if value in rows[0]:
                grouped_bars(rows, value, out / f"{value}.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hetsched", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, scheduler=True):
        sp.add_argument("--config", required=True, help="experiment JSON file")
        if scheduler:
            sp.add_argument("--scheduler", help="e.g. hetsched-msdyn-hyb, ads, 2lvl-edf, cpath")
        sp.add_argument("--ranking", choices=["hom", "het", "hyb"])
        sp.add_argument("--policy", choices=["ms-stat", "ms-dyn"])
        sp.add_argument("--no-pruning", action="store_true")
        sp.add_argument("--no-rank-update", action="store_true")
        sp.add_argument("--fslack", type=float, help="DVFS slack fraction in [0, 1]")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out-dir", default="out")
        sp.add_argument("--jobs", type=int, default=1, help="parallel workers (default serial)")

    sp = sub.add_parser("run", help="simulate one configuration")
    common(sp)
    sp.add_argument("--no-plots", action="store_true")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("sweep", help="max safe speed per scheduler and scenario")
    common(sp, scheduler=False)
    sp.add_argument("--schedulers", default="hetsched,ads,2lvl-edf,cpath")
    sp.add_argument("--scenarios", default="rural,semi,urban")
    sp.add_argument("--reference", help="scheduler the speedup column is relative to")
    sp.add_argument("--no-plots", action="store_true")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("safe-speed", help="bisect the maximum safe arrival-rate multiplier")
    common(sp)
    sp.set_defaults(fn=cmd_safe_speed)

    sp = sub.add_parser("dse", help="exhaustive PE-count search")
    common(sp)
    sp.add_argument("--grid", help="det:tra:loc:gpu:cpu count lists, e.g. 8,16:2,4:1,2:2,3:0,1")
    sp.set_defaults(fn=cmd_dse)

    sp = sub.add_parser("gen-trace", help="write a DAG arrival trace")
    sp.add_argument("--app", default="synthetic", choices=["synthetic", *APPS])
    sp.add_argument("--scenario", default="urban")
    sp.add_argument("--n-dags", type=int, default=1000)
    sp.add_argument("--mean-interarrival", help="e.g. 2ms")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="-")
    sp.set_defaults(fn=cmd_gen_trace)

    sp = sub.add_parser("report", help="print a CSV report and redraw its charts")
    sp.add_argument("csv")
    sp.add_argument("--out-dir")
    sp.set_defaults(fn=cmd_report)
    return p


def _error(exc) -> dict:
    err = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        err.update(path=exc.path, field=exc.field)
    return err


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(json.dumps(_error(e), sort_keys=True), file=sys.stderr)
        return 2
    except (HetSchedError, ValueError) as e:
        print(json.dumps(_error(e), sort_keys=True), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
