"""Command-line front end.

Exit codes: 0 success, 1 hypothesis violation, 2 size cap exceeded,
3 verification failure, 4 internal inconsistency, 64 malformed arguments.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import registry
from .config import RunConfig, set_config, get_config
from .errors import EndoAtlasError, HypothesisError
from .report import SCHEMA, Report, dumps, jsonable

log = logging.getLogger("endoatlas")

EXIT_OK, EXIT_HYPOTHESIS, EXIT_CAP, EXIT_VERIFY, EXIT_INCONSISTENT, EXIT_USAGE = 0, 1, 2, 3, 4, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--output", choices=("json", "text"), default=d if suppress else "json")
    parser.add_argument("--workers", type=int, default=d if suppress else 1)
    parser.add_argument("--seed", type=int, default=d if suppress else 0)
    parser.add_argument("--max-enumerate", type=int, default=d)
    parser.add_argument("--max-relation-pairs", type=int, default=d)
    parser.add_argument("--cache-dir", default=d)


def _group_args(parser):
    parser.add_argument("--type", choices=("SL", "GL"), default=None)
    parser.add_argument("--det-order", type=int, default=None)
    parser.add_argument("--center", type=int, default=1)


def build_parser():
    ap = _Parser(prog="endoatlas", description="Endotrivial-module atlas for SL <= G <= GL.")
    _common(ap, suppress=False)
    ap.add_argument("--list-checks", action="store_true")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, **kw):
        sp = sub.add_parser(name, **kw)
        _common(sp, suppress=True)
        return sp

    sp = add("tt", help="closed-form T(G/Z)")
    for a in ("n", "q", "p"):
        sp.add_argument(a, type=int)
    _group_args(sp)

    sp = add("balmer", help="weak-homomorphism group A(G,H)")
    for a in ("n", "q", "p"):
        sp.add_argument(a, type=int)
    _group_args(sp)
    sp.add_argument("--subgroup", choices=("sylow", "lower-sl", "custom-file"), default="sylow")
    sp.add_argument("--file", default=None, help="JSON {\"generators\": [hex, ...]}")
    sp.add_argument("--mode", choices=("full", "reduced", "sampled", "auto"), default="auto")
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--certificate", action="append", default=[],
                    choices=("prop55", "prop56", "cor57", "rho_chain"))
    sp.add_argument("--structural", action="store_true",
                    help="prop55 via the parabolic chain, without enumerating G")
    sp.add_argument("--export-presentation", action="store_true")

    sp = add("cosets", help="parabolic double-coset lemmas")
    sp.add_argument("n", type=int)
    sp.add_argument("q", type=int)
    sp.add_argument("--lemma", choices=registry.COSET_LEMMAS, required=True)

    sp = add("structure", help="structural identity checks")
    for a in ("n", "q", "p"):
        sp.add_argument(a, type=int)
    sp.add_argument("--check", choices=registry.STRUCTURE_CHECKS, required=True)

    sp = add("validate", help="cross-validate closed form against computation")
    for a in ("n", "q", "p"):
        sp.add_argument(a, type=int)
    _group_args(sp)

    sp = add("selftest", help="run the acceptance matrix")
    sp.add_argument("--only", type=int, action="append", default=None)
    return ap


def _group(args):
    from .matgrp import GroupSpec
    if args.det_order is not None:
        d = args.det_order
    elif args.type == "GL":
        d = args.q - 1
    else:
        d = 1
    return GroupSpec(args.n, args.q, d, args.center)


def _emit(payload, args, text=None):
    if args.output == "json":
        sys.stdout.write(dumps({"schema": SCHEMA, **payload}) + "\n")
    else:
        sys.stdout.write((text if text is not None else json.dumps(jsonable(payload), indent=2,
                                                                    sort_keys=True)) + "\n")


def _report_out(rep: Report, args, fail_code=EXIT_VERIFY):
    if args.output == "json":
        sys.stdout.write(rep.dumps() + "\n")
    else:
        sys.stdout.write(rep.text() + "\n")
    return EXIT_OK if rep.passed else fail_code


def cmd_tt(args):
    from .ttgroup import evaluate_T
    res = evaluate_T(_group(args), args.p)
    t = res.torsion.torsion
    text = (f"T({res.group}) for p={res.p}: case {res.case_tag}, free rank {res.free_rank}, "
            f"torsion {list(t) if t else 'trivial'}")
    for w in res.warnings:
        text += f"\n  warning: {w}"
    _emit(res.to_json(), args, text)
    return EXIT_OK


def _custom_subgroup(G, path):
    from .matgrp import Mat, Subgroup, hex_decode
    with open(path) as fh:
        data = json.load(fh)
    gens = [Mat(G.field, hex_decode(G.field, G.n, h)) for h in data["generators"]]
    if not all(bool(G.contains(g.a[None])[0]) for g in gens):
        raise HypothesisError("custom generators are not in G")
    return Subgroup(G, gens, name="custom")


def cmd_balmer(args):
    from .balmer import certify_trivial, parabolic_chain_certificate, solve_weak_hom, \
        weak_hom_presentation
    from .matgrp import closure, group_order
    from .pstruct import sl_generators, sylow_subgroup
    G = _group(args).without_center()
    p = args.p
    payload = {"group": G.label, "p": p, "subgroup": args.subgroup}
    if args.structural:
        if args.subgroup != "lower-sl" or G.d != 1:
            raise HypothesisError("the structural certificate is for G = SL(n,q), H = SL(n-1,q)")
        cert = parabolic_chain_certificate(args.n, args.q, p, small_cases=((3, 2), (3, 3)))
        payload["certificates"] = [cert.to_json()]
        _emit(payload, args)
        return EXIT_OK
    if args.subgroup == "sylow":
        H = sylow_subgroup(G, p)
    elif args.subgroup == "lower-sl":
        H = closure(sl_generators(G.field, G.n - 1, 0, G.n), G)
    else:
        if not args.file:
            raise UsageError("--subgroup custom-file needs --file")
        H = _custom_subgroup(G, args.file)
    mode = args.mode
    if mode == "auto":
        order = group_order(G)
        mode = "full" if order * order <= get_config().max_relation_pairs else "reduced"
    P = weak_hom_presentation(G, H, p, mode, samples=args.samples)
    sol = solve_weak_hom(P)
    pres = P.to_json() if args.export_presentation else {
        "cosets": len(P.cosets), "killed": P.killed, "relation_rows": len(P.relations),
        "mode": P.mode, "completeness": P.completeness, "pairs": P.pairs_examined,
        "seed": P.seed}
    payload.update({"H_order": H.order, "presentation": pres, "solution": sol.to_json()})
    certs = [certify_trivial(G, H, s, p) for s in args.certificate]
    payload["certificates"] = [c.to_json() for c in certs]
    text = (f"A({G.label}, H) for p={p}, |H|={H.order}: {sol.group} "
            f"[{P.completeness}; {len(P.cosets)} double cosets, {len(P.killed)} killed, "
            f"{len(P.relations)} relations]")
    if sol.diagnostic:
        text += f"\n  {sol.diagnostic}"
    for c in certs:
        text += f"\n  certificate {c.strategy}: {c.status}"
    _emit(payload, args, text)
    if any(c.trivial for c in certs) and not sol.group.is_trivial() and not sol.upper_bound_only:
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_cosets(args):
    return _report_out(registry.run_coset_lemma(args.lemma, args.n, args.q), args)


def cmd_structure(args):
    return _report_out(registry.run_structure(args.check, args.n, args.q, args.p), args)


def cmd_validate(args):
    from .ttgroup import cross_validate
    return _report_out(cross_validate(_group(args), args.p), args, EXIT_INCONSISTENT)


def cmd_selftest(args):
    from .acceptance import run_all
    reports = run_all(args.only)
    ok = all(r.passed for r in reports)
    if args.output == "json":
        sys.stdout.write(dumps({"schema": SCHEMA, "pass": ok,
                                "reports": [r.to_json() for r in reports]}) + "\n")
    else:
        for r in reports:
            mark = "PASS" if r.passed else "FAIL"
            sys.stdout.write(f"[{mark}] {r.params.get('criterion')} {r.name}\n")
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"tt": cmd_tt, "balmer": cmd_balmer, "cosets": cmd_cosets,
            "structure": cmd_structure, "validate": cmd_validate, "selftest": cmd_selftest}


def _configure(args):
    kw = {"workers": args.workers, "seed": args.seed, "output": args.output}
    if args.max_enumerate is not None:
        kw["max_enumerate"] = args.max_enumerate
    if args.max_relation_pairs is not None:
        kw["max_relation_pairs"] = args.max_relation_pairs
    if args.cache_dir is not None:
        kw["cache_dir"] = args.cache_dir
    set_config(RunConfig.from_env(**kw))


def run(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.list_checks:
            for c in registry.list_checks():
                sys.stdout.write(f"{c['check_id']:18} {' '.join(c['params']):14} {c['summary']}\n")
            return EXIT_OK
        if not args.command:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        _configure(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"endoatlas: {exc}\n")
        return EXIT_USAGE
    except EndoAtlasError as exc:
        sys.stderr.write(f"endoatlas: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except ValueError as exc:
        sys.stderr.write(f"endoatlas: invalid input: {exc}\n")
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
