#!/usr/bin/env python3
"""Distribution of |G(a/q + beta) - nu(q,a) J(beta)| / (x^(2/3) q^(1/2+eps) (1 + x|beta|)).

Prints summary quantiles per x and, with --rows, every diagnostic as CSV.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from r3var.cli import emit
from r3var.cube_reps import sieve_r3
from r3var.variance_lab import arc_survey


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", type=int, nargs="+", default=[10**3, 10**4, 10**5])
    ap.add_argument("--q-max", type=int, default=32)
    ap.add_argument("--rows", action="store_true", help="emit every diagnostic")
    args = ap.parse_args()

    table = sieve_r3(max(args.x))
    summary, detail = [], []
    for x in args.x:
        diags = arc_survey(table, x, args.q_max)
        ratios = np.array([d.bound_ratio for d in diags])
        worst = diags[int(np.argmax(ratios))]
        summary.append({
            "x": x,
            "n": len(diags),
            "median": float(np.median(ratios)),
            "p90": float(np.quantile(ratios, 0.9)),
            "max": float(ratios.max()),
            "argmax_q": worst.q,
            "argmax_a": worst.a,
            "argmax_beta": worst.beta,
        })
        if args.rows:
            detail += [{"x": x, "q": d.q, "a": d.a, "beta": d.beta, "delta_abs": d.delta_abs,
                        "bound_ratio": d.bound_ratio} for d in diags]
    emit(detail if args.rows else summary, "csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
