"""Random U <= V <= H triples: compare the count of U-fixed cosets xV in H with
|V|/|N_V(U)| and with [N_H(U) : N_V(U)], and print the violations of each."""

import argparse
import json

from endoatlas.acceptance import random_triples
from endoatlas.cosets import lemma44_bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--show", type=int, default=5, help="examples to print")
    args = ap.parse_args()
    bad_index, bad_normalizer, shown = 0, 0, 0
    for G, U, V, H in random_triples(args.count, args.seed):
        count, by_index, by_normalizer = lemma44_bounds(U, V, H)
        bad_normalizer += count < by_normalizer
        if count < by_index:
            bad_index += 1
            if shown < args.show:
                shown += 1
                print(json.dumps({"group": G.label, "U": U.order, "V": V.order, "H": H.order,
                                  "fixed": count, "V_over_NV": by_index}))
    print(json.dumps({"triples": args.count, "V_over_NV_violations": bad_index,
                      "NH_over_NV_violations": bad_normalizer}))


if __name__ == "__main__":
    main()
