"""Static bar charts for run and sweep reports (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# no Software/date stamp so re-runs produce stable files
_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def run_charts(report, out_dir) -> list[Path]:
    """Per-PE utilization and idle-time bars for one run."""
    out_dir = Path(out_dir)
    x = np.arange(len(report.pe_names))
    fig, (a, b) = plt.subplots(2, 1, figsize=(max(6, 0.5 * len(x)), 6), sharex=True)
    a.bar(x, report.utilization, color="tab:blue")
    a.set_ylabel("utilization")
    a.set_ylim(0, 1)
    a.set_title(f"{report.scheduler} on {report.platform}")
    b.bar(x, np.asarray(report.idle) / 1e6, color="tab:gray")
    b.set_ylabel("idle (ms)")
    b.set_xticks(x, report.pe_names, rotation=60, ha="right", fontsize=7)
    return [_save(fig, out_dir / "pe_bars.png")]


def grouped_bars(rows, value, out_path, ylabel=None, log=False) -> Path:
    """One group per scenario, one bar per scheduler."""
    scenarios = list(dict.fromkeys(r["scenario"] for r in rows))
    scheds = list(dict.fromkeys(r["scheduler"] for r in rows))
    table = {(r["scenario"], r["scheduler"]): float(r[value]) for r in rows}
    width = 0.8 / max(1, len(scheds))
    fig, ax = plt.subplots(figsize=(1.6 + 1.8 * len(scenarios), 4))
    x = np.arange(len(scenarios))
    for i, s in enumerate(scheds):
        ys = [table.get((sc, s), np.nan) for sc in scenarios]
        ax.bar(x + i * width, ys, width, label=s)
    ax.set_xticks(x + width * (len(scheds) - 1) / 2, scenarios)
    ax.set_ylabel(ylabel or value)
    if log:
        ax.set_yscale("log")
    ax.legend(fontsize=7)
    return _save(fig, Path(out_path))
