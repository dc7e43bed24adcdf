#!/usr/bin/env python3
"""Convergence sweeps: primal Poisson, mixed Poisson, mixed elasticity.

Each sweep prints its error history with fitted observed orders; the
mixed Poisson run also monitors the discrete inf-sup constant across
levels.  --csv writes one plot-ready file per sweep.
"""

import argparse
import pathlib

from whitney.cli import emit_csv
from whitney.experiments import (
    elasticity_convergence,
    galerkin_quasioptimality_demo,
    mixed_poisson_convergence,
)


def show(report):
    keys = list(report.errors)
    print(f"\n{report.name}")
    head = f"  {'h':>10} " + " ".join(f"{k:>12}" for k in keys)
    if report.infsup is not None:
        head += f" {'inf-sup':>10}"
    print(head)
    for i, h in enumerate(report.hs):
        row = f"  {h:>10.5f} " + " ".join(f"{report.errors[k][i]:>12.4e}" for k in keys)
        if report.infsup is not None:
            row += f" {report.infsup[i]:>10.6f}"
        print(row)
    print("  orders: " + ", ".join(f"{k} {report.orders[k]:.3f}" for k in keys)
          + f"   -> {'PASS' if report.passed else 'FAIL'}")


def run(args):
    ns = tuple(int(v) for v in args.ns.split(","))
    reports = [
        galerkin_quasioptimality_demo(ns=ns, order=1),
        galerkin_quasioptimality_demo(ns=ns, order=2),
        mixed_poisson_convergence(ns=ns, coefficient=args.coefficient),
        elasticity_convergence(ns=tuple(n for n in ns if n <= 16) or ns[:3]),
    ]
    for report in reports:
        show(report)
    if args.csv:
        outdir = pathlib.Path(args.csv)
        outdir.mkdir(parents=True, exist_ok=True)
        for report in reports:
            (outdir / f"{report.name.replace(' ', '_')}.csv").write_text(emit_csv(report))
        print(f"\nCSV files written to {outdir}")
    return all(r.passed for r in reports)


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", default="4,8,16,32", help="refinement levels")
    ap.add_argument("--coefficient", type=float, default=1.0,
                    help="scalar diffusion coefficient for the mixed sweep")
    ap.add_argument("--csv", metavar="DIR", help="directory for CSV renderings")
    return ap.parse_args()


if __name__ == "__main__":
    raise SystemExit(0 if run(parse_args()) else 1)
