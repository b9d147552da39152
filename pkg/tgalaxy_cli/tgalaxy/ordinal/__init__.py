from tgalaxy.ordinal.arith import (
    ARROW_OMEGA,
    MINUS_ONE,
    OMEGA,
    ONE,
    ZERO,
    Cmp,
    ExtRank,
    Ordinal,
    compare,
    format_ordinal,
    min_ordinal,
    nat_diff,
    nat_mul,
    nat_sum,
    omega_pow,
    parse_ordinal,
    parse_rank,
)
from tgalaxy.ordinal.poly import (
    UNBOUNDED,
    BoundedBy,
    OrdinalPoly,
    Unbounded,
    eventually_compare,
    fit_ordinal_poly,
    poly_evaluate,
    poly_growth_class,
)

FIN0 = ExtRank.fin(0)
FIN1 = ExtRank.fin(1)
