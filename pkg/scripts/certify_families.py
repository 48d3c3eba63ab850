#!/usr/bin/env python3
"""Certify structural conditions for every shipped growth-function fixture."""

import argparse
from pathlib import Path

from orlicz_lab.cli import run_certify, write_rows
from orlicz_lab.config import parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for path in sorted(CONFIGS.glob("*.cfg")):
        cfg = parse_config(path, seed=args.seed, out_override=args.out)
        rows = run_certify(cfg)
        csv_path = Path(args.out) / f"{cfg.experiment_id}_certify.csv"
        write_rows(rows, csv_path)
        worst = min(rows, key=lambda r: r.passed)
        status = "all pass" if all(r.passed for r in rows) else \
            f"FAIL at {worst.metric}"
        print(f"{cfg.experiment_id:<28} {len(rows):>2} certificates: {status}")


if __name__ == "__main__":
    main()
