"""Tabulate the closed-form T(G/Z) over a grid of (n, q, p) for SL and GL."""

import argparse

from endoatlas.errors import EndoAtlasError
from endoatlas.matgrp import GroupSpec
from endoatlas.ttgroup import evaluate_T


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--q", type=int, nargs="+", default=[2, 3, 4, 5, 7, 8, 9])
    ap.add_argument("--p", type=int, nargs="+", default=[2, 3, 5, 7])
    args = ap.parse_args()
    print(f"{'group':10} {'p':>3}  {'case':12} {'rank':>4}  torsion")
    for n in args.n:
        for q in args.q:
            for p in args.p:
                if q % p == 0:
                    continue
                for G in (GroupSpec.sl(n, q), GroupSpec.gl(n, q)):
                    try:
                        r = evaluate_T(G, p)
                    except EndoAtlasError as exc:
                        print(f"{G.label:10} {p:>3}  -- {type(exc).__name__}")
                        continue
                    print(f"{r.group:10} {p:>3}  {r.case_tag:12} {r.free_rank:>4}  "
                          f"{list(r.torsion.torsion)}")


if __name__ == "__main__":
    main()
