#!/usr/bin/env python3
"""Run the shipped stability experiments and print per-index tables."""

import argparse
from pathlib import Path

from orlicz_lab.cli import build_experiment, run_stability, write_rows
from orlicz_lab.config import parse_config
from orlicz_lab.stability import run_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
DEFAULT = ("stability_exponent_1d", "stability_double_phase_2d",
           "stability_null_1d")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out", help="CSV output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--experiments", nargs="*", default=list(DEFAULT),
                    help="config stems under configs/")
    args = ap.parse_args()

    for name in args.experiments:
        cfg = parse_config(CONFIGS / f"{name}.cfg", seed=args.seed,
                           out_override=args.out)
        report = run_experiment(build_experiment(cfg))
        print(f"\n=== {name} (theta = {report.theta:.4f}, "
              f"limit energy = {report.limit_energy:.6g}) ===")
        print(f"{'i':>3} {'modular':>12} {'luxemburg':>12} {'holder(K0)':>12} "
              f"{'op gap':>10} {'dom fwd':>8} {'E-ratio':>8} {'iters':>6}")
        for row in report.rows:
            print(f"{row.index:>3} {row.modular_distance:>12.4e} "
                  f"{row.luxemburg_distance:>12.4e} "
                  f"{row.holder_distances[0]:>12.4e} {row.operator_gap:>10.3e} "
                  f"{row.domination_forward:>8.3f} {row.energy_ratio:>8.4f} "
                  f"{row.iterations:>6}")
        verdict = "PASS" if report.passed else "FAIL"
        print(f"sobolev decay {report.sobolev_decay:.3e}, holder decay "
              f"{tuple(f'{h:.3e}' for h in report.holder_decay)} -> {verdict}")
        rows = run_stability(cfg)
        csv_path = Path(args.out) / f"{name}_stability.csv"
        write_rows(rows, csv_path)
        print(f"rows written to {csv_path}")


if __name__ == "__main__":
    main()
