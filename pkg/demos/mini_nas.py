"""A small end-to-end architecture search on tabular data.

Run with ``python demos/mini_nas.py [run_dir]``. The script drives the same
steps a user would take on the command line:

    nas search run --config config.json --run-dir run
    nas post-train --log run/log.jsonl --top 5 --epochs 20 --baseline reference:combo

Training cost is charged on a simulated clock from a FLOP count, so the
"10 minute" search below finishes in well under a minute of real time.
"""

import csv
import json
import sys
import tempfile
from pathlib import Path

from rlnas.analytics import cli

CONFIG = {
    "strategy": "a3c", "num_agents": 2, "workers_per_agent": 4, "seed": 1,
    "wall_clock_budget": 600.0,
    "space": {"builtin": "combo_small", "unit_scale": 0.1},
    "benchmark": {"kind": "netbench", "dataset": {"preset": "combo-mini", "seed": 0},
                  "cost_model": {"flops_per_second": 2e6, "step_overhead": 0.01}},
    "fidelity": {"epochs": 1, "subset_fraction": 0.5, "timeout": 120.0},
    "ppo": {"lr": 0.01},
}


def main(run_dir):
    run_dir.mkdir(parents=True, exist_ok=True)
    config = run_dir / "config.json"
    config.write_text(json.dumps(CONFIG, indent=2))

    print("== search: low-fidelity rewards (1 epoch on half the rows) ==")
    if cli.main(["search", "run", "--config", str(config), "--run-dir", str(run_dir)]):
        sys.exit("search failed")
    stats = json.loads((run_dir / "stats.json").read_text())
    print(f"{stats['evaluations']} evaluations, {stats['unique_architectures']} unique, "
          f"{stats['cache_hits']} served from cache, utilization {stats['mean_utilization']:.2f}")

    print("\n== post-training: 20 epochs on all rows, no timeout ==")
    if cli.main(["post-train", "--log", str(run_dir / "log.jsonl"), "--top", "5", "--epochs", "20",
                 "--baseline", "reference:combo"]):
        sys.exit("post-training failed")
    with open(run_dir / "ratios.csv") as fh:
        rows = list(csv.DictReader(fh))
    best = max(rows, key=lambda r: float(r["accuracy_ratio"]))
    print(f"\nbest architecture keeps {float(best['accuracy_ratio']):.1%} of the reference R2 "
          f"with {float(best['param_ratio']):.1f}x fewer parameters")
    print(f"artifacts: {sorted(p.name for p in run_dir.iterdir())}")


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="mini_nas_"))
    main(target)
