"""The acceptance matrix, shared by ``endoatlas selftest`` and the test suite.

Each check returns a Report; reports carry no timings so their JSON is
reproducible byte for byte.
"""

from __future__ import annotations

import numpy as np

from .balmer import (
    certify_trivial, normalizer_oracle, parabolic_chain_certificate, solve_weak_hom,
    weak_hom_presentation,
)
from .config import get_config, using
from .cosets import (
    check_double_coset_sizes, double_cosets, lemma44_bounds, verify_coset_lemmas,
)
from .errors import EndoAtlasError
from .matgrp import (
    GroupSpec, Subgroup, abelianization, closure, derived_subgroup, enumerate_group,
    presentation_invariants, random_subgroup,
)
from .pstruct import (
    build_standard_subgroups, lemma33_scan, sylow_subgroup, verify_glebasics,
    verify_torus_commutator,
)
from .report import Report
from .ttgroup import cross_validate, evaluate_T, torsion_free_rank

CYCLIC_TABLE = [  # (n, q, p, expected torsion)
    (2, 4, 3, [4]),
    (3, 2, 7, [6]),
    (2, 7, 3, [2, 4]),
    (2, 2, 3, [4]),
    (5, 2, 7, [2, 6]),
]
ORACLE_TABLE = [(2, 4, 3, [2]), (3, 2, 7, [3]), (2, 5, 5, [4]), (2, 7, 3, [4])]


def check_cyclic_classification():
    rep = Report("cyclic_classification")
    for n, q, p, want in CYCLIC_TABLE:
        r = evaluate_T(GroupSpec.sl(n, q), p)
        rep.check(f"SL({n},{q})/p={p}", list(r.torsion.torsion) == want and r.free_rank == 0,
                  case=r.case_tag, torsion=list(r.torsion.torsion), expected=want)
    return rep


def check_weak_hom_vs_normalizer():
    rep = Report("weak_hom_vs_normalizer")
    for n, q, p, want in ORACLE_TABLE:
        G = GroupSpec.sl(n, q)
        S = sylow_subgroup(G, p)
        sol = solve_weak_hom(weak_hom_presentation(G, S, p, "full"))
        orc, N = normalizer_oracle(G, S, p)
        rep.check(f"SL({n},{q})/p={p}", sol.group == orc and list(sol.group.torsion) == want,
                  A=sol.group, oracle=orc, normalizer=N.order, expected=want)
    return rep


def check_order_identity():
    rep = Report("order_identity")
    for n, q, p, _ in ORACLE_TABLE:
        cv = cross_validate(GroupSpec.sl(n, q), p)
        leg = next(c for c in cv.checks if c.check_id == "order_identity")
        rep.check(f"SL({n},{q})/p={p}", leg.passed, leg.witness)
    return rep


def check_coset_lemmas():
    rep = Report("coset_lemmas")
    for n, q in ((3, 2), (3, 3)):
        for lemma in ("9.4", "9.1", "9.5"):
            r = verify_coset_lemmas(lemma, n, q)
            rep.extend(r, prefix=f"SL({n},{q})/{lemma}")
    return rep


def check_structural_identities():
    rep = Report("structural_identities")
    for e, q in ((2, 3), (2, 5), (3, 2), (2, 4)):
        rep.extend(verify_glebasics(e, q), prefix=f"glebasics({e},{q})")
    for n, q in ((3, 4), (4, 5)):
        rep.extend(verify_torus_commutator(n, q), prefix=f"torus({n},{q})")
    from .balmer import verify_section7
    for e, q, p in ((2, 5, 3), (2, 4, 5), (5, 2, 31)):
        rep.extend(verify_section7(e, q, p), prefix=f"section7({e},{q},{p})")
    return rep


def check_noncyclic_abelian():
    rep = Report("noncyclic_abelian")
    G = GroupSpec.sl(3, 4)
    p = 3
    S = sylow_subgroup(G, p)
    rep.value("sylow_order", S.order)
    sol = solve_weak_hom(weak_hom_presentation(G, S, p, "sampled"))
    rep.check("sampled_solver_trivial", sol.group.is_trivial() and sol.diagnostic is None,
              A=sol.group, diagnostic=sol.diagnostic, seed=get_config().seed)
    for strategy in ("prop55", "rho_chain", "prop56"):
        c = certify_trivial(G, S, strategy, p)
        rep.check(f"certificate_{strategy}", c.trivial, status=c.status)
    rk = torsion_free_rank(G, p, "brute_force")
    rep.check("tf_rank_brute", rk.tf_rank == 1 and rk.n_G == 1, rk.to_json())
    rep.extend(lemma33_scan(G, p), prefix="")
    quot = evaluate_T(GroupSpec.sl(3, 4, z=3), p)
    rep.check("quotient_closed_form", quot.case_tag == "1.1" and quot.free_rank == 1
              and quot.torsion.is_trivial(), result=quot.to_json())
    return rep


SOUNDNESS_MATRIX = [  # (label, G, p, H kind)
    (GroupSpec.sl(2, 4), 3, "sylow"),
    (GroupSpec.sl(3, 2), 7, "sylow"),
    (GroupSpec.sl(2, 5), 5, "sylow"),
    (GroupSpec.sl(2, 7), 3, "sylow"),
    (GroupSpec.gl(2, 3), 2, "sylow"),
    (GroupSpec.gl(2, 4), 3, "sylow"),
    (GroupSpec.sl(3, 3), 13, "sylow"),
    (GroupSpec.sl(3, 2), 3, "lower-sl"),
]


def _subgroup_for(G, p, kind):
    if kind == "sylow":
        return sylow_subgroup(G, p)
    return build_standard_subgroups(G, "levi", {"composition": [G.n - 1, 1]}) \
        if G.d != 1 else closure(_lower_sl_gens(G), G)


def _lower_sl_gens(G):
    from .pstruct import sl_generators
    return sl_generators(G.field, G.n - 1, 0, G.n)


def check_certificate_soundness():
    rep = Report("certificate_soundness")
    cfg = get_config()
    for G, p, kind in SOUNDNESS_MATRIX:
        H = _subgroup_for(G, p, kind)
        order = len(enumerate_group(G))
        mode = "full" if order * order <= cfg.max_relation_pairs else "reduced"
        sol = solve_weak_hom(weak_hom_presentation(G, H, p, mode))
        strategies = ["prop55", "rho_chain"]
        if kind == "sylow":
            strategies.append("prop56")
            if _abelian(H):
                strategies.append("cor57")
        statuses = {s: certify_trivial(G, H, s, p).status for s in strategies}
        sound = sol.group.is_trivial() or all(v != "trivial" for v in statuses.values())
        rep.check(f"{G.label}/p={p}/{kind}", sound, A=sol.group, mode=mode, certificates=statuses)
    with using(max_enumerate=100_000):
        c = parabolic_chain_certificate(5, 4, 5, small_cases=((3, 2), (3, 3)))
    rep.check("SL(5,4)>SL(4,4)/p=5/structural", c.trivial, witnesses=c.witnesses)
    return rep


def _abelian(S):
    return all(x @ y == y @ x for i, x in enumerate(S.gens) for y in S.gens[i + 1:])


PROPERTY_GROUPS = [GroupSpec.sl(2, 4), GroupSpec.sl(3, 2), GroupSpec.gl(2, 3),
                   GroupSpec.sl(2, 5), GroupSpec.gl(2, 4), GroupSpec.sl(2, 7)]


def _random_inside(S: Subgroup, rng, ngens):
    els = S.elements()
    idx = rng.integers(0, len(els), size=ngens)
    return closure([els.mat(int(i)) for i in idx], S.ambient)


def random_triples(count, seed):
    """(U, V, H) with U ⊆ V ⊆ H in groups of order <= 2000, seeded."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        G = PROPERTY_GROUPS[int(rng.integers(len(PROPERTY_GROUPS)))]
        H = random_subgroup(G, rng, ngens=int(rng.integers(1, 3)))
        V = _random_inside(H, rng, int(rng.integers(1, 3)))
        U = _random_inside(V, rng, 1)
        out.append((G, U, V, H))
    return out


def smith_oracle(rows, ncols):
    """Invariant factors and free rank of Z^ncols / rows via sympy."""
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import invariant_factors
    if not rows:
        return [], ncols
    inv = [int(x) for x in invariant_factors(Matrix(rows), domain=ZZ)]
    nonzero = [abs(x) for x in inv if x != 0]
    return [x for x in nonzero if x != 1], ncols - len(nonzero)


def random_integer_matrices(count, seed, max_dim=12, bound=10):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m, n = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
        M = rng.integers(-bound, bound + 1, size=(m, n))
        M[rng.random(size=(m, n)) < 0.3] = 0
        out.append(M.tolist())
    return out


def check_property_suites():
    rep = Report("property_suites")
    seed = get_config().seed
    printed_fail, corrected_fail, examples = 0, 0, []
    for G, U, V, H in random_triples(200, seed):
        count, printed, corrected = lemma44_bounds(U, V, H)
        if count < printed:
            printed_fail += 1
            if len(examples) < 3:
                examples.append({"group": G.label, "U": U.order, "V": V.order, "H": H.order,
                                 "count": count, "printed": printed})
        corrected_fail += count < corrected
    rep.check("lemma44_printed_bound", printed_fail == 0, triples=200, violations=printed_fail,
              examples=examples)
    rep.check("lemma44_corrected_bound", corrected_fail == 0, triples=200,
              violations=corrected_fail)
    bad_sizes, decomps = [], 0
    for G in PROPERTY_GROUPS:
        for p in (2, 3, 5, 7):
            if G.q % p == 0 or len(enumerate_group(G)) % p:
                continue
            S = sylow_subgroup(G, p)
            D = double_cosets(S, S, G)
            ok_sum, bad = check_double_coset_sizes(D, S, S)
            decomps += 1
            if not ok_sum or bad:
                bad_sizes.append(f"{G.label}/{p}")
    for G, U, V, H in random_triples(40, seed + 1):
        D = double_cosets(U, V, H)
        ok_sum, bad = check_double_coset_sizes(D, U, V)
        decomps += 1
        if not ok_sum or bad:
            bad_sizes.append(f"{G.label}:{U.order},{V.order},{H.order}")
    rep.check("double_coset_sizes", not bad_sizes, decompositions=decomps, failures=bad_sizes)
    mismatches = 0
    for M in random_integer_matrices(500, seed):
        ours = presentation_invariants(M, len(M[0]))
        tors, free = smith_oracle(M, len(M[0]))
        mismatches += (list(ours.torsion) != sorted(tors) or ours.free_rank != free)
    rep.check("smith_vs_oracle", mismatches == 0, matrices=500, mismatches=mismatches)
    rng = np.random.default_rng(seed)
    bad_ab = 0
    for k in range(100):
        G = PROPERTY_GROUPS[k % len(PROPERTY_GROUPS)]
        H = random_subgroup(G, rng, ngens=int(rng.integers(1, 3)))
        ab = abelianization(H)
        bad_ab += H.order != ab.order * derived_subgroup(H).order or ab.free_rank != 0
    rep.check("abelianization_order", bad_ab == 0, subgroups=100, failures=bad_ab)
    return rep


CHECKS = [
    (1, "cyclic_classification", check_cyclic_classification),
    (2, "weak_hom_vs_normalizer", check_weak_hom_vs_normalizer),
    (3, "order_identity", check_order_identity),
    (4, "coset_lemmas", check_coset_lemmas),
    (5, "structural_identities", check_structural_identities),
    (6, "noncyclic_abelian", check_noncyclic_abelian),
    (7, "certificate_soundness", check_certificate_soundness),
    (8, "property_suites", check_property_suites),
]


def run_check(number):
    for num, name, fn in CHECKS:
        if num == number:
            try:
                rep = fn()
            except EndoAtlasError as exc:  # reported, never hidden
                rep = Report(name)
                rep.check("completed", False, error=f"{type(exc).__name__}: {exc}")
            rep.params["criterion"] = num
            return rep
    raise KeyError(number)


def run_all(numbers=None):
    numbers = numbers or [c[0] for c in CHECKS]
    return [run_check(n) for n in numbers]


__all__ = ["CHECKS", "run_check", "run_all", "smith_oracle", "random_triples",
           "random_integer_matrices"]
