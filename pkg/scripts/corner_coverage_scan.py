"""Which H-H double cosets of SL(n,q) contain a corner matrix diag(I_{n-2}, W)?

Compares H = derived parabolic (full coverage expected) against H = SL(n-1,q)
embedded in the upper-left corner (coverage fails already for SL(3,2)).
"""

import argparse
import json

from endoatlas.cosets import verify_coset_lemmas, verify_corner_coverage_lower_sl


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", nargs="*", default=["3,2", "3,3", "4,2"],
                    help="n,q pairs to scan")
    args = ap.parse_args()
    rows = []
    for case in args.cases:
        n, q = (int(x) for x in case.split(","))
        par = verify_coset_lemmas("9.5", n, q).checks[1]
        low = verify_corner_coverage_lower_sl(n, q).checks[0]
        rows.append({"n": n, "q": q,
                     "derived_parabolic": {"count": par.witness["count"],
                                           "missed": len(par.witness["missed"])},
                     "lower_sl": {"count": low.witness["count"],
                                  "missed": len(low.witness["missed"])}})
    for r in rows:
        print(json.dumps(r, sort_keys=True))


if __name__ == "__main__":
    main()
