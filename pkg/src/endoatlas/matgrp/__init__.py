from .abelian import AbelianGroupInv, invariants_from_orders, presentation_invariants
from .groups import (
    CentralQuotient, ElementSet, GroupSpec, Subgroup, abelianization, central_quotient_view,
    closure, coset_labels, derived_subgroup, element_orders, enumerate_group, gl_order,
    group_order, group_orders, intersect, random_subgroup, sl_order, stabilizer_scan,
    standard_generators, whole_group,
)
from .mat import Mat, bdet, binv, binv_det, bkeys, bmatmul, bpow, hex_decode, hex_encode, mat_arith
