"""Command-line front end: ``r3var <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
import warnings
from math import gcd
from pathlib import Path

import numpy as np

from . import cache as cache_mod
from .arith import primes_up_to
from .config import RunConfig
from .cube_reps import CubeRepTable, sieve_r3, sum_r3_squared
from .dirichlet_constants import TruncationWarning, check_dirichlet_identity, constants
from .exp_sums import s_direct, s_direct_all, s_prime_power, s_reduce
from .local_densities import IdentityError, rho_second_moment, rho_table, rho_via_dft
from .main_terms import FORMULAS, FormulaDomainError, auto_formula, predict
from .variance_lab import DEFAULT_NORMALIZE_EXPONENT, Q_POLICIES, arc_survey, empirical_variance, scan

log = logging.getLogger("r3var")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_IDENTITY = 0, 2, 3, 4
REPORT_FIELDS = ("x", "Q", "v_empirical", "prediction", "u0_residual", "normalized", "formula")


class UsageError(ValueError):
    pass


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        x_max=args.x_max,
        q_max=args.q_max,
        prime_cutoff=args.prime_cutoff,
        series_cutoff=args.series_cutoff,
        cache_path=args.cache or "r3.cache",
        output_format=args.format,
        threads=args.threads,
    )


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return "" if v is None else v


def emit(rows: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        json.dump(rows, out, indent=2, default=float)
        out.write("\n")
        return
    if not rows:
        return
    flat = []
    for r in rows:
        r = dict(r)
        if isinstance(r.get("prediction"), dict):
            r["prediction"] = r["prediction"]["total"]
        flat.append(r)
    fields = list(flat[0])
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in flat:
        w.writerow({k: _fmt(r.get(k)) for k in fields})


def _constants(args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        cs = constants(args.prime_cutoff, args.series_cutoff)
    for note in cs.notes:
        log.warning("%s", note)
    return cs


def load_table(args: argparse.Namespace, x_needed: int) -> CubeRepTable:
    """Read the cache if one was given, otherwise sieve in memory."""
    if args.cache:
        table = cache_mod.read_cache(args.cache)
        if table.x_max < x_needed:
            raise UsageError(f"cache covers x <= {table.x_max}, need {x_needed}")
        return table
    return sieve_r3(x_needed, workers=_config(args).workers)


def cmd_sieve(args) -> int:
    cfg = _config(args)
    path = Path(cfg.cache_path)
    if path.exists():
        try:
            if cache_mod.read_header(path) >= cfg.x_max:
                cache_mod.read_cache(path)
                log.info("cache hit: %s covers x_max=%d", path, cfg.x_max)
                emit([{"cache": str(path), "x_max": cfg.x_max, "status": "cache hit"}], "json")
                return EXIT_OK
        except cache_mod.CacheError as exc:
            log.warning("rebuilding cache: %s", exc)
    t0 = time.perf_counter()
    table = sieve_r3(cfg.x_max, workers=cfg.workers)
    cache_mod.write_cache(path, table)
    elapsed = time.perf_counter() - t0
    log.info("sieved x_max=%d in %.2fs", cfg.x_max, elapsed)
    emit([{"cache": str(path), "x_max": cfg.x_max, "status": "written", "seconds": elapsed}], "json")
    return EXIT_OK


def cmd_constants(args) -> int:
    cs = _constants(args)
    payload = {r["name"]: {"value": r["value"], "error_estimate": r["error_estimate"]} for r in cs.records()}
    payload["cutoffs"] = {"prime_cutoff": cs.prime_cutoff, "series_cutoff": cs.series_cutoff}
    payload["notes"] = list(cs.notes)
    if args.format == "json":
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        emit([{"name": n, **payload[n]} for n in payload if n not in ("cutoffs", "notes")], "csv")
    return EXIT_OK


def cmd_gauss_sum(args) -> int:
    q = args.q
    if q is None or q < 1:
        raise UsageError("--q >= 1 is required")
    a_values = [args.a] if args.a is not None else range(1, q + 1)
    rows = []
    for a in a_values:
        s = s_reduce(q, a)
        d = s_direct(q, a)
        rows.append({"q": q, "a": a, "re": s.real, "im": s.imag, "abs_dev_direct": abs(s - d)})
    emit(rows, args.format)
    return EXIT_OK


def cmd_rho(args) -> int:
    if args.q is None or args.q < 1:
        raise UsageError("--q >= 1 is required")
    t = rho_table(args.q)
    emit([{"q": args.q, "a": a, "rho": int(v)} for a, v in enumerate(t.rho, start=1)], args.format)
    return EXIT_OK


def run_identities(
    q_max: int = 200,
    s_direct_max: int = 2000,
    prime_cutoff: int = 10**3,
    series_cutoff: int = 10**4,
    dirichlet: bool = True,
) -> list[dict]:
    """Run the exact identity suites; one summary row per identity."""
    rows = []

    dev = 0.0
    for q in range(1, q_max + 1):
        rho = rho_table(q).rho
        for a in range(1, q + 1):
            dev = max(dev, abs(rho_via_dft(q, a) - rho[a - 1]))
    rows.append({"identity": "rho_dft", "range": f"q<={q_max}", "max_deviation": dev, "ok": dev < 0.5})

    ok = True
    for q in range(1, q_max + 1):
        try:
            rho_second_moment(q)
        except IdentityError:
            ok = False
    rows.append({"identity": "rho_second_moment", "range": f"q<={q_max}", "max_deviation": 0.0 if ok else math.inf, "ok": ok})

    dev = 0.0
    for q in range(1, s_direct_max + 1):
        full = s_direct_all(q)
        red = np.array([s_reduce(q, a) for a in range(q)])
        dev = max(dev, float(np.max(np.abs(red - full))) / q)
    rows.append({"identity": "s_reduce_vs_direct", "range": f"q<={s_direct_max}", "max_deviation": dev, "ok": dev <= 1e-9})

    dev = 0.0
    top = 500
    for q1 in range(2, top + 1):
        s1 = s_direct_all(q1)
        for q2 in range(q1 + 1, top // q1 + 1):
            if gcd(q1, q2) != 1:
                continue
            q = q1 * q2
            a = np.array([c for c in range(1, q) if gcd(c, q) == 1], dtype=np.int64)
            lhs = s_direct_all(q)[a]
            rhs = s1[a * q2 * q2 % q1] * s_direct_all(q2)[a * q1 * q1 % q2]
            dev = max(dev, float(np.max(np.abs(lhs - rhs))) / q)
    rows.append({"identity": "multiplicativity", "range": f"q1*q2<={top}", "max_deviation": dev, "ok": dev <= 1e-9})

    dev = 0.0
    for p in primes_up_to(s_direct_max):
        p = int(p)
        pa, alpha = p, 1
        while pa <= s_direct_max:
            full = s_direct_all(pa)
            for a in range(1, pa):
                if a % p:
                    dev = max(dev, abs(s_prime_power(p, alpha, a) - full[a]) / pa)
            pa *= p
            alpha += 1
    rows.append({"identity": "prime_power_forms", "range": f"p^k<={s_direct_max}", "max_deviation": dev, "ok": dev <= 1e-9})

    if not dirichlet:
        return rows
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for s in (0.0, -1.0):
            chk = check_dirichlet_identity(s, series_cutoff, prime_cutoff)
            rows.append({"identity": f"dirichlet_s={s:g}", "range": f"q<={series_cutoff},p<={prime_cutoff}",
                         "max_deviation": abs(chk.difference), "ok": chk.ok})
    return rows


def cmd_identities(args) -> int:
    rows = run_identities(q_max=args.q_max, s_direct_max=args.s_direct_max,
                          prime_cutoff=args.prime_cutoff, series_cutoff=args.series_cutoff)
    emit(rows, args.format)
    for r in rows:
        log.info("%-22s %-22s max deviation %.3g  %s", r["identity"], r["range"], r["max_deviation"], "PASS" if r["ok"] else "FAIL")
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_IDENTITY


def _q_arg(args, x: int) -> int:
    if args.q is None:
        raise UsageError("--q is required")
    if not 1 <= args.q <= x:
        raise UsageError(f"need 1 <= Q <= x, got Q={args.q}, x={x}")
    return args.q


def _formula(args, x, Q) -> str | None:
    f = args.formula
    if f == "none":
        return None
    return auto_formula(x, Q) if f == "auto" else f


def cmd_predict(args) -> int:
    x = args.x
    Q = _q_arg(args, x)
    table = load_table(args, x)
    fid = _formula(args, x, Q) or auto_formula(x, Q)
    p = predict(fid, x, Q, sum_r3_squared(table, x), _constants(args))
    emit([{"x": x, "Q": Q, "formula": fid, "k": p.k, "total": p.total, **p.main_terms}], args.format)
    return EXIT_OK


def cmd_variance(args) -> int:
    x = args.x
    Q = _q_arg(args, x)
    table = load_table(args, x)
    cfg = _config(args)
    rep = empirical_variance(table, x, Q, workers=cfg.workers)
    fid = _formula(args, x, Q)
    pred = None
    if fid is not None:
        pred = predict(fid, x, Q, sum_r3_squared(table, x), _constants(args))
    rep = rep.with_prediction(pred, args.normalize_exponent)
    emit([rep.row()], args.format)
    return EXIT_OK


def cmd_scan(args) -> int:
    grid = args.x_grid or [args.x]
    table = load_table(args, max(grid))
    f = None if args.formula == "none" else args.formula
    reports = scan(table, grid, args.q_policy, f, _constants(args),
                   workers=_config(args).workers, normalize_exponent=args.normalize_exponent)
    emit([r.row() for r in reports], args.format)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    x = args.x
    table = load_table(args, x)
    diags = arc_survey(table, x, q_max=args.q_max)
    rows = [
        {"q": d.q, "a": d.a, "beta": d.beta, "delta_abs": d.delta_abs, "bound_ratio": d.bound_ratio}
        for d in diags
    ]
    worst = max(diags, key=lambda d: d.bound_ratio)
    log.info("max bound_ratio %.4g at q=%d a=%d beta=%.3g", worst.bound_ratio, worst.q, worst.a, worst.beta)
    emit(rows, args.format)
    return EXIT_OK


COMMANDS = {
    "sieve": cmd_sieve,
    "constants": cmd_constants,
    "gauss-sum": cmd_gauss_sum,
    "rho": cmd_rho,
    "identities": cmd_identities,
    "predict": cmd_predict,
    "variance": cmd_variance,
    "scan": cmd_scan,
    "diagnose": cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="r3var", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--x", type=int, default=10**4)
    ap.add_argument("--x-grid", type=int, nargs="+", help="x values for scan")
    ap.add_argument("--q", type=int)
    ap.add_argument("--a", type=int, help="single residue for gauss-sum")
    ap.add_argument("--q-max", type=int, default=None)
    ap.add_argument("--x-max", type=int, default=10**4)
    ap.add_argument("--s-direct-max", type=int, default=2000)
    ap.add_argument("--formula", choices=FORMULAS + ("auto", "none"), default="auto")
    ap.add_argument("--q-policy", choices=sorted(Q_POLICIES), default="x")
    ap.add_argument("--prime-cutoff", type=int, default=10**4)
    ap.add_argument("--series-cutoff", type=int, default=10**5)
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--cache")
    ap.add_argument("--threads", type=int, default=1, help="worker count, 0 = all CPUs")
    ap.add_argument("--normalize-exponent", type=float, default=DEFAULT_NORMALIZE_EXPONENT)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.q_max is None:
        args.q_max = {"identities": 200, "diagnose": 32}.get(args.command, 200)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, FormulaDomainError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (OSError, cache_mod.CacheError) as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
