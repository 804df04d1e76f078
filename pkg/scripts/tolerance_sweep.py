"""Objective reached and median path time across error tolerances."""

import argparse
import json
import math
from pathlib import Path

import numpy as np

from wfrechet import DescentConfig, SupportBounds, generate_zinbinom_qf, solution_path
from wfrechet.bench import measure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.05, 0.014, 1e-3, 1e-4, 1e-6])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--out", default="results/tolerance_sweep.json")
    args = ap.parse_args()

    X, Y = generate_zinbinom_qf(100, 100, 10, args.seed)
    taus = np.arange(1, 21) * 0.5
    b = SupportBounds(0, math.inf)
    reference = solution_path(X, Y, taus, b, DescentConfig(epsilon=1e-6)).objectives
    rows = []
    for eps in args.eps:
        cfg = DescentConfig(epsilon=eps)
        F = solution_path(X, Y, taus, b, cfg).objectives
        t = measure(lambda: solution_path(X, Y, taus, b, cfg).lambdas, reps=args.reps).median
        ratio = F / reference
        rows.append({"epsilon": eps, "median_s": t, "objective_ratio": ratio.tolist()})
        print(f"eps={eps:<8g} median {t:.3f}s  max F/F(1e-6) {ratio.max():.8f}")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
