"""Command line entry point ``nas``.

Exit codes: 0 success, 2 configuration or input error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..netbench.data import DatasetError, generate_dataset, write_dataset
from ..orchestrator.config import ConfigError, SearchConfig
from ..orchestrator.log import SearchLog
from ..orchestrator.search import resolve_dataset, resolve_space, run_search
from ..space.builtins import builtin_space
from ..space.search_space import SpaceError, build_space, decode, sample_random
from ..space.spec import load_spec
from . import report
from .metrics import stats
from .post_train import PRESET_BASELINES, BaselineRecord, post_train, reference_baseline
from .output import write_csv


class UsageError(Exception):
    pass


def _space_from_args(args):
    if args.spec:
        return build_space(load_spec(args.spec))
    if not args.name:
        raise UsageError("give a built-in space name or --spec")
    try:
        return build_space(builtin_space(args.name, unit_scale=args.unit_scale))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_space(args):
    space = _space_from_args(args)
    if args.action == "size":
        print(space.size)
    elif args.action == "sample":
        encs = sample_random(space, args.seed, n=args.n)
        for e in encs:
            print(" ".join(map(str, e)))
    else:
        if args.encoding:
            enc = tuple(int(x) for x in args.encoding.replace(",", " ").split())
            print(decode(space, enc).to_json())
            return
        print(f"space {space.spec.name or '(unnamed)'}: {space.num_slots} slots, size {space.size}")
        for k, slot in enumerate(space.slots):
            print(f"  {k:3d} {slot.path:<14} arity {slot.arity}")


def _load_config(args):
    cfg = SearchConfig.load(args.config)
    return cfg.with_overrides(strategy=args.strategy, num_agents=args.agents,
                              workers_per_agent=args.workers, seed=args.seed,
                              wall_clock_budget=args.budget, max_evaluations=args.max_evals)


def cmd_search(args):
    cfg = _load_config(args)
    run_dir = Path(args.run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    log = run_search(cfg, run_dir=run_dir)
    report.write_run_artifacts(log.events, run_dir, args.bin, args.top)
    s = stats(log.events)
    print(f"{s['end_reason']}: {s['evaluations']} evaluations, best reward {s['best_reward']}, "
          f"artifacts in {run_dir}")


def _read_log(path):
    errors = []
    log = SearchLog.read(path, errors)
    for lineno, msg in errors:
        print(f"{path}:{lineno}: skipped corrupt line ({msg})", file=sys.stderr)
    return log.events


def cmd_analyze(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    logs = [_read_log(p) for p in args.log]
    events = logs[0]
    bin_s = args.bin or report.default_bin(events)
    if args.what == "trajectory":
        report.write_trajectory(events, out, bin_s)
    elif args.what == "utilization":
        report.write_utilization(events, out, bin_s, args.workers)
    elif args.what == "quantiles":
        if len(logs) < 2:
            raise UsageError("quantiles needs at least two --log files")
        try:
            report.write_quantiles(logs, out, bin_s)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    elif args.what == "topk":
        for i, e in enumerate(report.write_topk(events, out, args.k), 1):
            print(f"{i:3d} {e.reward:.6f} {'-'.join(map(str, e.encoding))}")
        return
    else:
        print(json.dumps(report.write_stats(events, out), indent=2, sort_keys=True))
        return
    print(f"wrote {args.what} to {out}")


def _baseline(arg, dataset, unit_scale, epochs, seed):
    if arg in PRESET_BASELINES:
        return PRESET_BASELINES[arg]
    if arg.startswith("reference:"):
        return reference_baseline(arg.split(":", 1)[1], dataset, unit_scale, epochs=epochs, seed=seed)
    try:
        return BaselineRecord.load(arg)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read baseline {arg}: {exc}") from exc


def cmd_post_train(args):
    events = _read_log(args.log)
    cfg_dict = SearchLog(events=events).config
    if not cfg_dict:
        raise UsageError("log has no SearchStarted event with a config")
    cfg = SearchConfig.from_dict(cfg_dict)
    if cfg.benchmark.get("kind") != "netbench":
        raise UsageError("post-training needs a search run on the netbench benchmark")
    dataset = resolve_dataset(cfg.benchmark)
    space = resolve_space(cfg, dataset.input_dims)
    unit_scale = cfg.space.get("unit_scale", 1.0) if isinstance(cfg.space, dict) else 1.0
    baseline = _baseline(args.baseline, dataset, unit_scale, args.epochs, args.seed)
    top = report.top_k(events, args.top)
    rep = post_train(space, [e.encoding for e in top], dataset, baseline, epochs=args.epochs,
                     seed=args.seed, workers=args.workers)
    out = Path(args.out or Path(args.log).parent)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ratios.csv").write_text(report.ratios_csv(rep))
    write_csv(out / "metrics.csv", ["arch_id", "encoding", "status", "metric", "params", "train_time"],
              [tuple(m.values()) for m in rep.metrics])
    baseline.save(out / "baseline.json")
    for r in rep.rows:
        print(f"arch {r.arch_id:3d}  acc {r.accuracy_ratio:.4f}  params {r.param_ratio:.3f}  "
              f"time {r.time_ratio:.3f}")
    print(f"wrote ratios.csv and metrics.csv to {out}")


def cmd_data(args):
    ds = generate_dataset(args.preset, seed=args.seed, rows=args.rows)
    path = write_dataset(ds, args.out)
    print(path)


def build_parser():
    p = argparse.ArgumentParser(prog="nas", description="Reinforcement-learning architecture search.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space", help="inspect built-in or JSON search spaces")
    sp.add_argument("action", choices=("size", "sample", "describe"))
    sp.add_argument("name", nargs="?")
    sp.add_argument("--spec", help="space spec JSON instead of a built-in name")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--unit-scale", type=float, default=1.0)
    sp.add_argument("--encoding", help="with describe: print the decoded graph JSON")
    sp.set_defaults(func=cmd_space)

    se = sub.add_parser("search", help="run a search")
    se.add_argument("action", choices=("run",))
    se.add_argument("--config", required=True)
    se.add_argument("--strategy", choices=("a3c", "a2c", "random"))
    se.add_argument("--agents", type=int)
    se.add_argument("--workers", type=int)
    se.add_argument("--seed", type=int)
    se.add_argument("--budget", type=float, help="wall-clock budget in (simulated) seconds")
    se.add_argument("--max-evals", type=int)
    se.add_argument("--run-dir", default="run")
    se.add_argument("--bin", type=float, help="analytics bin width in seconds")
    se.add_argument("--top", type=int, default=50)
    se.set_defaults(func=cmd_search)

    an = sub.add_parser("analyze", help="derive series from search logs")
    an.add_argument("what", choices=("trajectory", "utilization", "quantiles", "topk", "stats"))
    an.add_argument("--log", action="append", required=True)
    an.add_argument("--out", default=".")
    an.add_argument("--bin", type=float)
    an.add_argument("--workers", type=int)
    an.add_argument("--k", type=int, default=50)
    an.set_defaults(func=cmd_analyze)

    pt = sub.add_parser("post-train", help="retrain top architectures at full fidelity")
    pt.add_argument("--log", required=True)
    pt.add_argument("--top", type=int, default=50)
    pt.add_argument("--epochs", type=int, default=20)
    pt.add_argument("--baseline", required=True,
                    help="baseline JSON, a preset (combo, uno, nt3) or reference:<combo|uno>")
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--workers", type=int, default=1)
    pt.add_argument("--out")
    pt.set_defaults(func=cmd_post_train)

    da = sub.add_parser("data", help="synthetic datasets")
    da.add_argument("action", choices=("gen",))
    da.add_argument("--preset", default="combo-mini")
    da.add_argument("--seed", type=int, default=0)
    da.add_argument("--rows", type=int)
    da.add_argument("--out", default="data")
    da.set_defaults(func=cmd_data)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (UsageError, ConfigError, DatasetError, SpaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
