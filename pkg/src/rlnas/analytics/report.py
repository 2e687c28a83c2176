"""Writing the standard analytics artifacts of a run directory."""

from __future__ import annotations

import json
from pathlib import Path

from .metrics import quantile_bands, stats, top_k, trajectory, trajectory_points, utilization
from .output import csv_text, write_csv, write_svg


def default_bin(log_events):
    end = max((e["t"] for e in log_events), default=0.0)
    return max(end / 50.0, 1e-9) if end > 0 else 1.0


def write_trajectory(events, out_dir, bin_seconds):
    out_dir = Path(out_dir)
    bins = trajectory(events, bin_seconds)
    write_csv(out_dir / "trajectory.csv", ["start", "end", "count", "max", "mean", "best"],
              [(b.start, b.end, b.count, b.max, b.mean, b.best) for b in bins])
    points = trajectory_points(events)
    write_csv(out_dir / "trajectory_points.csv", ["time", "reward", "best", "agent"],
              [(p.time, p.reward, p.best, p.agent) for p in points])
    write_svg(out_dir / "trajectory.svg",
              {"best so far": [(b.end, b.best) for b in bins],
               "bin max": [(b.end, b.max) for b in bins]},
              title="Reward over time", ylabel="reward")
    return bins


def write_utilization(events, out_dir, bin_seconds, workers=None):
    out_dir = Path(out_dir)
    bins = utilization(events, bin_seconds, workers)
    write_csv(out_dir / "utilization.csv", ["start", "end", "utilization"],
              [(b.start, b.end, b.utilization) for b in bins])
    write_svg(out_dir / "utilization.svg", {"utilization": [(b.start, b.utilization) for b in bins]},
              title="Worker utilization", ylabel="fraction busy")
    return bins


def write_topk(events, out_dir, k):
    entries = top_k(events, k)
    doc = [{"rank": i + 1, "encoding": list(e.encoding), "reward": e.reward, "time": e.time,
            "agent": e.agent} for i, e in enumerate(entries)]
    (Path(out_dir) / "topk.json").write_text(json.dumps(doc, indent=2) + "\n")
    return entries


def write_stats(events, out_dir):
    s = stats(events)
    (Path(out_dir) / "stats.json").write_text(json.dumps(s, indent=2, sort_keys=True) + "\n")
    return s


def write_quantiles(logs, out_dir, bin_seconds, quantiles=(0.1, 0.5, 0.9)):
    bands = quantile_bands(logs, quantiles, bin_seconds)
    header = ["time", "replications"] + [f"q{q:g}" for q in quantiles]
    write_csv(Path(out_dir) / "quantiles.csv", header,
              [[b.time, b.replications] + [b.quantiles[float(q)] for q in quantiles] for b in bands])
    write_svg(Path(out_dir) / "quantiles.svg",
              {f"q{q:g}": [(b.time, b.quantiles[float(q)]) for b in bands] for q in quantiles},
              title="Best-so-far reward across replications", ylabel="reward")
    return bands


def write_run_artifacts(events, out_dir, bin_seconds=None, k=50, workers=None):
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    bin_seconds = bin_seconds or default_bin(events)
    write_trajectory(events, out_dir, bin_seconds)
    write_utilization(events, out_dir, bin_seconds, workers)
    write_topk(events, out_dir, k)
    write_stats(events, out_dir)


def ratios_csv(report):
    return csv_text(["arch_id", "accuracy_ratio", "param_ratio", "time_ratio"],
                    [(r.arch_id, r.accuracy_ratio, r.param_ratio, r.time_ratio) for r in report.rows])
