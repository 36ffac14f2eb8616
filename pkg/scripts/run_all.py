"""Run every shipped config and write one report per config into reports/.

    python3 scripts/run_all.py [--workers N] [--outdir reports]
"""

import argparse
import configparser
import pathlib
import sys

from grauert_lab.cli import main

ROOT = pathlib.Path(__file__).resolve().parents[1]


def experiment_of(path: pathlib.Path) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read(path)
    return cp["experiment"]["name"]


def run(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--outdir", default=str(ROOT / "reports"))
    args = ap.parse_args(argv)
    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for cfg in sorted((ROOT / "configs").glob("*.ini")):
        if cfg.stem.startswith("bad_"):
            continue
        exp = experiment_of(cfg)
        code = main([exp, "--config", str(cfg), "--workers", str(args.workers), "--output", str(out / f"{cfg.stem}.csv")])
        print(f"{cfg.stem:24s} exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run())
