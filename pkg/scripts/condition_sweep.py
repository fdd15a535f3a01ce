#!/usr/bin/env python3
"""Sweep the Gram-system condition number over sample counts.

Prints the raw condition number of the uncentered quadratic design for
T = 3..T_MAX alongside the grid policy's chosen alpha and the resulting
regularized condition number. With --csv, also writes the table for
plotting.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from drivestyle.regression import GridSearchAlpha, condition_diagnostics


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t-max", type=int, default=40)
    parser.add_argument("--csv", default=None, help="write table to this file")
    args = parser.parse_args()

    policy = GridSearchAlpha()
    rows = []
    print(f"{'T':>4} {'kappa_raw':>14} {'alpha':>8} {'kappa_reg':>14}")
    for t_count in range(3, args.t_max + 1):
        alpha = policy.select(np.arange(t_count, dtype=float))
        kappa_raw, kappa_reg = condition_diagnostics(t_count, alpha)
        rows.append((t_count, kappa_raw, alpha, kappa_reg))
        print(f"{t_count:>4} {kappa_raw:>14.6e} {alpha:>8g} {kappa_reg:>14.6e}")

    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("T,kappa_raw,alpha,kappa_regularized\n")
            for t_count, kappa_raw, alpha, kappa_reg in rows:
                fh.write(f"{t_count},{kappa_raw!r},{alpha!r},{kappa_reg!r}\n")
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
