#!/usr/bin/env python3
"""Named constants with error estimates for several (prime, series) cutoff pairs."""
from __future__ import annotations

import argparse
import sys
import warnings

from r3var.cli import emit
from r3var.dirichlet_constants import TruncationWarning, constants


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--prime-cutoffs", type=int, nargs="+", default=[10**2, 10**3, 10**4])
    ap.add_argument("--series-cutoff", type=int, default=10**5)
    args = ap.parse_args()
    rows = []
    for p in args.prime_cutoffs:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            cs = constants(p, args.series_cutoff)
        for rec in cs.records():
            rows.append({"prime_cutoff": p, "series_cutoff": args.series_cutoff,
                         "name": rec["name"], "value": rec["value"], "error_estimate": rec["error_estimate"]})
    emit(rows, "csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
