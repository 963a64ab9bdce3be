import random

import pytest

from prismkit.base_rings import Precision, parse_spec_id
from prismkit.errors import (
    BadPrecision,
    EnumerationBudgetExceeded,
    NotDistinguished,
    NotEisenstein,
    UnsupportedCarrier,
)
from prismkit.prism import (
    check_eisenstein,
    envelope_points,
    hodge_tate_quotient,
    is_distinguished,
    mk_prism,
    parse_eisenstein,
    prismatic_envelope,
    q_bracket_p,
    solve_mod_prime_power,
)
from prismkit.witt import restriction, witt_add, witt_from_int, witt_mul, frobenius


def _prec(p, **kw):
    return Precision(p, **{"padic_digits": 4, "series_order": 16, **kw})


# --------------------------------------------------------------------------
# linear algebra


def test_solve_mod_prime_power_random():
    rng = random.Random(3)
    p, N = 3, 4
    mod = p**N
    for _ in range(30):
        M = [[rng.randrange(mod) for _ in range(3)] for _ in range(3)]
        x = [rng.randrange(mod) for _ in range(3)]
        b = [sum(a * c for a, c in zip(row, x)) % mod for row in M]
        y = solve_mod_prime_power(M, b, p, N)
        assert y is not None
        assert [sum(a * c for a, c in zip(row, y)) % mod for row in M] == b


def test_solve_mod_prime_power_unsolvable():
    assert solve_mod_prime_power([[3, 0], [0, 9]], [1, 0], 3, 3) is None


# --------------------------------------------------------------------------
# Eisenstein input


def test_parse_eisenstein_forms():
    assert parse_eisenstein("1,0,-2", 2) == (-2, 0, 1)
    assert parse_eisenstein("u^2-2", 2) == (-2, 0, 1)
    assert parse_eisenstein([1, 0, -5], 5) == (-5, 0, 1)


@pytest.mark.parametrize("E", ["u^2-4", "u^2+u-2", "2*u^2-2", "3"])
def test_not_eisenstein(E):
    with pytest.raises(NotEisenstein):
        check_eisenstein(parse_eisenstein(E, 2), 2)


def test_q_bracket():
    assert q_bracket_p(3) == (3, 3, 1)


# --------------------------------------------------------------------------
# catalog and distinguishedness


@pytest.mark.parametrize("cat", ["crystalline", "bk", "qdr", "perfectoid"])
@pytest.mark.parametrize("p", [2, 3])
def test_catalog_builds(cat, p):
    P = mk_prism(cat, _prec(p))
    assert P.p == p and P.to_json()["catalog"] == cat


def test_crystalline_delta_of_p_is_unit():
    P = mk_prism("crystalline", _prec(3))
    rep = is_distinguished(P)
    assert rep.delta_unit and rep.verdict
    dp = P.delta_ring.delta(P.d)
    assert dp.prec == 3 and dp.agrees(dp.spec.from_int(1 - 9))


def test_bk_witness_p2():
    P = mk_prism("bk", _prec(2, series_order=8), eisenstein="1,0,-2")
    R = P.delta_ring.carrier
    u = R.gen("u")
    E = P.d
    assert P.phi(E) == u**4 - 2
    # the explicit combination p = phi(E) - (u^2 + 2) E
    assert P.phi(E) - (u**2 + 2) * E == R.from_int(2)
    rep = is_distinguished(P)
    a, b = rep.witness
    assert (a * E + b * P.phi(E)).agrees(R.from_int(2))


def test_u_minus_2_is_distinguished():
    P = mk_prism("bk", _prec(2, series_order=8))
    R = P.delta_ring.carrier
    rep = is_distinguished(P.delta_ring, R.parse("u-2"))
    assert rep.verdict and rep.agree


@pytest.mark.parametrize("p", [2, 3])
def test_p_squared_is_not_distinguished(p):
    P = mk_prism("crystalline", _prec(p))
    rep = is_distinguished(P.delta_ring, P.delta_ring.carrier.from_int(p * p))
    assert not rep.verdict and not rep.delta_unit and rep.agree


def test_bad_orientation_rejected():
    with pytest.raises(NotDistinguished):
        mk_prism("crystalline", _prec(2), orientation="4")


def test_unit_orientation():
    P = mk_prism("crystalline", _prec(2))
    assert not is_distinguished(P.delta_ring, P.delta_ring.carrier.one()).verdict


def test_bk_needs_enough_series_order():
    with pytest.raises(BadPrecision):
        mk_prism("bk", Precision(2, padic_digits=4, series_order=4))


def test_perfectoid_witness_verifies():
    P = mk_prism("perfectoid", _prec(2, witt_length=3))
    a, b = is_distinguished(P).witness
    lhs = witt_add(witt_mul(a, restriction(P.d)), witt_mul(b, frobenius(P.d)))
    assert lhs == witt_from_int(2, P.d.spec, 2)


def test_perfectoid_budget():
    P = mk_prism("perfectoid", _prec(3, witt_length=3))
    with pytest.raises(EnumerationBudgetExceeded):
        is_distinguished(P, budget=10)


# --------------------------------------------------------------------------
# Hodge-Tate quotients


def test_ht_quotient_bk():
    P = mk_prism("bk", _prec(2, series_order=8))
    Q, red = hodge_tate_quotient(P)
    assert Q.spec_id == "Z/2^4[pi]/(pi^2 - 2)"
    assert red(P.d).is_zero()
    assert red(P.delta_ring.carrier.gen("u")) ** 2 == Q.from_int(2)


def test_ht_quotient_crystalline():
    Q, red = hodge_tate_quotient(mk_prism("crystalline", _prec(3)))
    assert Q.spec_id == "F_3"


def test_ht_quotient_perfectoid_unsupported():
    with pytest.raises(UnsupportedCarrier):
        hodge_tate_quotient(mk_prism("perfectoid", _prec(2)))


# --------------------------------------------------------------------------
# envelopes


def test_envelope_of_p_over_crystalline():
    P = mk_prism("crystalline", _prec(2))
    E = prismatic_envelope(P, ["2"], 1)
    rules = E.solve_rules()
    assert [r.var for r in rules] == ["f1", "df1"]
    assert rules[0].rhs.agrees(E.ring.carrier.one())
    assert E.diagnostics()["locally_confluent"]


def test_envelope_free_variable_depth_two():
    P = mk_prism("crystalline", _prec(2))
    E = prismatic_envelope(P, ["t"], 2)
    assert len(E.relations) == 3
    diag = E.diagnostics()
    assert diag["locally_confluent"]
    js = E.to_json()
    assert js["depth"] == 2 and len(js["rules"]) == 3


def test_envelope_relations_are_delta_iterates():
    P = mk_prism("crystalline", _prec(3))
    E = prismatic_envelope(P, ["t"], 2)
    B = E.ring
    assert E.relations[(0, 1)] == B.delta(E.relations[(0, 0)])
    assert E.relations[(0, 2)] == B.delta(E.relations[(0, 1)])


def test_envelope_equal_numerators_diagnostic():
    P = mk_prism("crystalline", _prec(2))
    E = prismatic_envelope(P, ["t", "t"], 1)
    assert E.diagnostics()["equal_numerators"][0]["pair"] == [1, 2]


def test_envelope_normal_form_uses_solve_rules():
    P = mk_prism("crystalline", _prec(3))
    E = prismatic_envelope(P, ["3"], 1)
    B = E.ring.carrier
    assert E.normal_form(B.gen("f1") * 5).agrees(B.from_int(5))


def test_envelope_rejects_perfectoid_and_empty():
    with pytest.raises(UnsupportedCarrier):
        prismatic_envelope(mk_prism("perfectoid", _prec(2)), ["s"], 1)
    with pytest.raises(BadPrecision):
        prismatic_envelope(mk_prism("crystalline", _prec(2)), [], 1)


def test_points_trivial_numerator_equals_d():
    P = mk_prism("crystalline", _prec(2))
    E = prismatic_envelope(P, ["2"], 1)
    rep = envelope_points(E, parse_spec_id("F_2"), 2, {})
    assert rep.equal
    # h * p = p in W_2(F_2) = Z/4 means h is odd: two solutions
    assert len(rep.set_a) == 2


def test_points_budget():
    P = mk_prism("crystalline", _prec(2))
    E = prismatic_envelope(P, ["t", "t"], 1)
    with pytest.raises(EnumerationBudgetExceeded):
        envelope_points(E, parse_spec_id("F_2[s]/(s^2)"), 3, {}, budget=100)


def test_points_need_finite_target():
    P = mk_prism("crystalline", _prec(2))
    E = prismatic_envelope(P, ["t"], 1)
    with pytest.raises(UnsupportedCarrier):
        envelope_points(E, parse_spec_id("Z(p=2)"), 2, {})
