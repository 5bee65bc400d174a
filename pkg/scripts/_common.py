"""Shared helpers for the experiment runners."""

import argparse
import csv
import sys
import time
from pathlib import Path

from hetsched import __version__
from hetsched.metrics import SpeedSearch


def parser(doc, out):
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--n-dags", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--rel-tol", type=float, default=0.05)
    p.add_argument("--out", default=out, help="CSV file to write")
    return p


def search(args, lo, hi):
    return SpeedSearch(lo=lo, hi=hi, rel_tol=args.rel_tol)


def write_rows(path, rows, args):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        f.write(f"# seed={args.seed} n_dags={args.n_dags} version={__version__}\n")
        w = csv.DictWriter(f, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {path}", file=sys.stderr)


class Clock:
    def __init__(self):
        self.t0 = time.perf_counter()

    def __str__(self):
        return f"{time.perf_counter() - self.t0:.0f}s"
