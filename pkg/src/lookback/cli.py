"""Command line entry point and sweep driver.

    lookback run --preset desk --rule LL-PF-Exp --set alpha=0.1 --out out/
    lookback sweep --preset desk --axis W --values 1,5,20 --seeds 0,1,2 --out sweep/
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import PRESETS, ScenarioConfig, dump_config, load_config, parse_value, resolve_key
from .engine import RunLog, run
from .metrics import RunReport

log = logging.getLogger("lookback")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_run(result: RunLog, out: Path) -> None:
    """report.json, bins.csv, handover.csv and manifest.json under `out`."""
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as fh:
        json.dump(result.report.to_dict(), fh, indent=2, default=_json_default)
    with open(out / "bins.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "t_bin", "bits", "serving_cell", "frozen_flag"])
        for i, tr in enumerate(result.traces):
            for b, bits in enumerate(tr.bins):
                frozen = int(result.bin_frozen[i, b] > 0)
                w.writerow([i, b, repr(float(bits)), int(result.bin_serving[i, b]), frozen])
    with open(out / "handover.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user", "from_cell", "to_cell", "long_avg", "freeze", "timestamp"])
        for r in result.handovers:
            w.writerow([r.user, r.from_cell, r.to_cell, repr(r.long_avg), repr(r.freeze), repr(r.timestamp)])
    manifest = {
        "config": result.config.to_dict(),
        "seed": result.config.seed,
        "code_version": f"lookback {__version__}",
        "env_digests": result.env_digests,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)


def _sweep_task(args) -> dict:
    cfg_dict, key, value, seed = args
    cfg = ScenarioConfig.from_dict(cfg_dict).replace(**{key: value, "seed": seed})
    report = run(cfg).report.to_dict()
    report["axis"] = key
    report["value"] = value
    return report


def sweep(base: ScenarioConfig, axis: str, values, seeds, out: str | Path | None = None,
          jobs: int = 1) -> list[RunReport]:
    """Cartesian runs over values x seeds; reports are appended to reports.jsonl as they finish."""
    key = resolve_key(axis)  # raises KeyError on unknown axes
    tasks = [(base.to_dict(), key, v, int(s)) for v in values for s in seeds]
    if not tasks:
        return []
    sink = None
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        sink = open(Path(out) / "reports.jsonl", "a")
    reports = []
    try:
        if jobs > 1:
            pool = ProcessPoolExecutor(max_workers=jobs)
            results = pool.map(_sweep_task, tasks)
        else:
            pool = None
            results = map(_sweep_task, tasks)
        for d in results:
            log.info("%s=%s seed=%s done", d["axis"], d["value"], d["seed"])
            if sink is not None:
                sink.write(json.dumps(d, default=_json_default) + "\n")
                sink.flush()
            extra = {k: d.pop(k) for k in ("axis", "value")}
            rep = RunReport(**d)
            rep.config.setdefault("sweep", extra)
            reports.append(rep)
        if pool is not None:
            pool.shutdown()
    finally:
        if sink is not None:
            sink.close()
    return reports


def _overrides(args) -> dict:
    ov = {}
    for item in args.set or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        ov[resolve_key(k.strip())] = parse_value(v.strip())
    if args.rule is not None:
        ov["scheduler.rule"] = args.rule
    if args.seed is not None:
        ov["seed"] = args.seed
    return ov


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lookback", description="multi-cell downlink scheduling simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path)
        s.add_argument("--preset", choices=sorted(PRESETS), default="paper")
        s.add_argument("--seed", type=int)
        s.add_argument("--rule")
        s.add_argument("--set", action="append", metavar="KEY=VALUE")
        s.add_argument("--out", type=Path, default=Path("out"))
        if name == "sweep":
            s.add_argument("--axis", required=True)
            s.add_argument("--values", required=True, help="comma separated")
            s.add_argument("--seeds", default="0", help="comma separated")
            s.add_argument("--jobs", type=int, default=1)
    sub.add_parser("show-config").add_argument("--preset", choices=sorted(PRESETS), default="paper")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "show-config":
        sys.stdout.write(dump_config(load_config(preset=args.preset)))
        return 0
    try:
        cfg = load_config(args.config, args.preset, _overrides(args))
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "run":
        result = run(cfg)
        write_run(result, args.out)
        print(json.dumps({k: v for k, v in result.report.to_dict().items() if k != "config"},
                         default=_json_default))
        return 0
    values = [parse_value(v) for v in args.values.split(",") if v.strip()]
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    try:
        reports = sweep(cfg, args.axis, values, seeds, out=args.out, jobs=args.jobs)
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for r in reports:
        print(f"{r.config['sweep']['value']}\tseed={r.seed}\tT_Net={r.T_Net:.4g}\tJ_Net={r.J_Net}\tR_log={r.R_log_net:.6g}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
