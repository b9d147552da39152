import pytest

from tgalaxy.core.errors import BelowValidFromError, FitFailure
from tgalaxy.ordinal import (
    ARROW_OMEGA,
    FIN0,
    FIN1,
    UNBOUNDED,
    BoundedBy,
    Cmp,
    ExtRank,
    OrdinalPoly,
    eventually_compare,
    fit_ordinal_poly,
    nat_mul,
    omega_pow,
    parse_ordinal,
    poly_evaluate,
    poly_growth_class,
)

W = parse_ordinal
FIN2 = ExtRank.fin(2)


def test_evaluate():
    f = OrdinalPoly.of({FIN1: (0, 1), FIN0: (3,)})
    assert poly_evaluate(f, 0) == W("3")
    assert poly_evaluate(f, 4) == W("w*4+3")
    g = OrdinalPoly.of({FIN2: (1,), FIN1: (-1, 1)}, valid_from=1)
    assert g.evaluate(1) == W("w^2")
    assert g.evaluate(5) == W("w^2+w*4")
    assert str(g) == "w^2+w*(n-1)"


def test_below_valid_from():
    g = OrdinalPoly.of({FIN1: (-1, 1)}, valid_from=1)
    with pytest.raises(BelowValidFromError):
        poly_evaluate(g, 0)


def test_negative_coefficients_rejected():
    with pytest.raises(ValueError):
        OrdinalPoly.of({FIN1: (-1, 1)}, valid_from=0)
    with pytest.raises(ValueError):
        OrdinalPoly.of({FIN1: (5, -1)}, valid_from=0)


def test_compose_affine():
    f = OrdinalPoly.of({FIN1: (-1, 1)}, valid_from=1)
    h = f.compose_affine(2, 1)
    assert h.valid_from == 0
    for k in range(6):
        assert h.evaluate(k) == f.evaluate(2 * k + 1)
    with pytest.raises(ValueError):
        f.compose_affine(0, 1)


def _least_bound_holds(f, rho, mu, span=40):
    bound = nat_mul(omega_pow(rho), mu)
    return all(f.evaluate(n) <= bound for n in range(f.valid_from, f.valid_from + span))


def test_growth_class_examples():
    assert poly_growth_class(OrdinalPoly.constant(W("w*3")), FIN1) == BoundedBy(3)
    assert poly_growth_class(OrdinalPoly.constant(W("w*3+2")), FIN1) == BoundedBy(4)
    assert poly_growth_class(OrdinalPoly.of({FIN1: (0, 1)}), FIN1) == UNBOUNDED
    assert poly_growth_class(OrdinalPoly.constant(W("w^2")), FIN1) == UNBOUNDED
    assert poly_growth_class(OrdinalPoly.constant(W("5")), FIN0) == BoundedBy(5)
    assert poly_growth_class(OrdinalPoly(), FIN1) == BoundedBy(0)


def test_growth_class_is_least_bound():
    cases = [
        (OrdinalPoly.constant(W("w*3+2")), FIN1),
        (OrdinalPoly.constant(W("w^2*2")), FIN2),
        (OrdinalPoly.of({FIN2: (1,), FIN0: (0, 1)}), FIN2),
        (OrdinalPoly.constant(W("7")), FIN0),
    ]
    for f, rho in cases:
        g = poly_growth_class(f, rho)
        assert isinstance(g, BoundedBy)
        assert _least_bound_holds(f, rho, g.mu)
        assert g.mu == 0 or not _least_bound_holds(f, rho, g.mu - 1)


def test_growth_class_arrow_omega():
    assert poly_growth_class(OrdinalPoly.constant(W("w")), ARROW_OMEGA) == BoundedBy(1)
    assert poly_growth_class(OrdinalPoly.of({FIN1: (0, 1)}), ARROW_OMEGA) == BoundedBy(2)
    assert poly_growth_class(OrdinalPoly.constant(W("w^w")), ARROW_OMEGA) == UNBOUNDED


def test_eventually_compare():
    a = OrdinalPoly.of({FIN1: (0, 2)})
    b = OrdinalPoly.of({FIN1: (5, 1)})
    assert eventually_compare(a, b) == Cmp.GT
    assert eventually_compare(b, a) == Cmp.LT
    assert eventually_compare(a, a) == Cmp.EQ
    c = OrdinalPoly.of({FIN2: (1,)})
    assert eventually_compare(a, c) == Cmp.LT


def test_fit_ordinal_poly():
    f = fit_ordinal_poly(lambda n: nat_mul(W("w"), max(n - 1, 0)), 3)
    assert f.as_dict() == {FIN1: (-1, 1)}
    assert f.valid_from == 1

    g = fit_ordinal_poly(lambda n: nat_mul(W("w^2"), n * n), 2)
    assert g.as_dict() == {FIN2: (0, 0, 1)}
    assert g.valid_from == 0


def test_fit_rejects_non_polynomial():
    with pytest.raises(FitFailure):
        fit_ordinal_poly(lambda n: nat_mul(W("w"), 2 ** n), 1)


def test_to_json():
    f = OrdinalPoly.of({FIN1: (-1, 1)}, valid_from=1)
    assert f.to_json() == {"valid_from": 1, "terms": [{"exponent": 1, "coefficients": [-1, 1]}]}
