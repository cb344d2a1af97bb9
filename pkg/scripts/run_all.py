"""Run every experiment config in configs/ and print a one-line digest per run.

Usage: python scripts/run_all.py [--out runs] [--workers N] [--only c05 c06 ...]
"""
import argparse
import dataclasses
import json
from pathlib import Path

from deltales.experiments import load_config, run_experiment

ROOT = Path(__file__).resolve().parent.parent


def digest(s: dict) -> str:
    keys = ("max_rel_err", "violations", "E0", "poisson", "intensity", "wegner", "minami",
            "double_monotone", "gap_monotone", "gamma_increasing", "sqrtE_ratio_spread")
    out = {}
    for k in keys:
        if k in s:
            v = s[k]
            if isinstance(v, dict):
                v = {kk: vv for kk, vv in v.items() if not isinstance(vv, (list, dict))}
            out[k] = v
    return json.dumps(out, default=float)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="runs")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--only", nargs="*", default=None, help="config name prefixes")
    args = p.parse_args()
    for path in sorted((ROOT / "configs").glob("*.yaml")):
        if args.only and not any(path.stem.startswith(o) for o in args.only):
            continue
        cfg = load_config(path)
        cfg = dataclasses.replace(cfg, output_dir=str(Path(args.out) / path.stem), workers=args.workers)
        s = run_experiment(cfg)
        print(f"{path.stem} ({s['wall_time_s']:.0f}s): {digest(s)}", flush=True)


if __name__ == "__main__":
    main()
