import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prismkit.base_rings import Precision, mk_ring, parse_spec_id
from prismkit.errors import (
    EnumerationBudgetExceeded,
    InsufficientTerms,
    NotAUnit,
    NotCharP,
    SpecMismatch,
    UnramifiedInput,
)
from prismkit.hodge_tate import (
    GroupLawSeries,
    exp_G,
    integrality_profile,
    log_G,
    log_product_argument,
    prismatic_log,
    prismatic_log_oracle,
    required_terms,
    solve_frobenius_equation,
    star_inverse,
    star_product,
    star_series,
)
from prismkit.witt import witt_from_json


def _vec(R, comps):
    return witt_from_json({"components": [{"spec_id": R.spec_id, "terms": [{"monomial": [], "coeff": str(c)}]}
                                          for c in comps]})


# --------------------------------------------------------------------------
# F x = p^m


def test_frozen_solutions_f2():
    R = parse_spec_id("F_2")
    sol = solve_frobenius_equation(R, 2, 1)
    assert set(sol.solutions) == {_vec(R, [0, 0]), _vec(R, [0, 1])}
    assert sol.torsor and sol.contains_p_power


def test_m_zero_is_one_plus_kernel():
    for R_id in ("F_2", "F_2[t]/(t^2)"):
        R = parse_spec_id(R_id)
        sol = solve_frobenius_equation(R, 2, 0)
        assert sol.torsor and len(sol.solutions) == len(sol.kernel)


def test_solve_rejects():
    with pytest.raises(NotCharP):
        solve_frobenius_equation(parse_spec_id("Z/2^2"), 2, 1)
    with pytest.raises(EnumerationBudgetExceeded):
        solve_frobenius_equation(parse_spec_id("F_2"), 1, 0)
    with pytest.raises(EnumerationBudgetExceeded):
        solve_frobenius_equation(parse_spec_id("F_3[t]/(t^3)"), 3, 0, budget=1000)


# --------------------------------------------------------------------------
# the group law


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 26), st.integers(0, 26), st.integers(0, 26), st.integers(0, 26))
def test_star_is_associative_mod_27(a, b, d, c):
    Z = parse_spec_id("Z/3^3")
    a, b, d, c = (Z.from_int(v) for v in (a, b, d, c))
    assert star_product(star_product(a, b, c), d, c) == star_product(a, star_product(b, d, c), c)
    assert star_product(a, b, c) == star_product(b, a, c)


def test_star_inverse():
    Z = parse_spec_id("Z/3^3")
    c = Z.from_int(3)
    for v in range(27):
        a = Z.from_int(v)
        assert star_product(a, star_inverse(a, c), c).is_zero()
    with pytest.raises(NotAUnit):
        star_inverse(Z.from_int(1), Z.from_int(2))  # 1 + 2 = 3 is not a unit


def test_star_spec_mismatch():
    with pytest.raises(SpecMismatch):
        star_product(parse_spec_id("F_2").one(), parse_spec_id("F_3").one(), parse_spec_id("F_2").one())


def test_exp_and_log_coefficients():
    e, lg = exp_G(5), log_G(5)
    assert e.coefficient(3) == (Fraction(0), Fraction(0), Fraction(1, 6))
    assert lg.coefficient(2) == (Fraction(0), Fraction(-1, 2))
    assert lg.coefficient(4) == (Fraction(0), Fraction(0), Fraction(0), Fraction(-1, 4))


@pytest.mark.parametrize("M", [1, 4, 12])
def test_exp_log_inverse(M):
    x = GroupLawSeries.variable(0, 1, M)
    assert (log_G(M).compose(exp_G(M)) - x).is_zero()
    assert (exp_G(M).compose(log_G(M)) - x).is_zero()


def test_star_series_at_order_6():
    M = 6
    X, Y = GroupLawSeries.variable(0, 2, M), GroupLawSeries.variable(1, 2, M)
    e = exp_G(M)
    assert (e.compose(X + Y) - star_series(e.compose(X), e.compose(Y))).is_zero()
    # log turns the group law into addition
    lg = log_G(M)
    assert (lg.compose(star_series(X, Y)) - lg.compose(X) - lg.compose(Y)).is_zero()


def test_integrality_regimes():
    prof = integrality_profile("u^2-5", 5, 10)
    assert prof.regime == "above" and prof.all_integral
    border = integrality_profile("u^2-3", 3, 10)
    assert border.regime == "borderline" and border.v_E_prime == Fraction(1, 2)
    assert integrality_profile("u^2-2", 2, 10).v_E_prime == Fraction(3, 2)
    below = integrality_profile("u^3+2*u-2", 2, 10)
    assert below.v_E_prime == Fraction(2, 3)
    assert below.regime == "below" and not below.all_integral
    with pytest.raises(UnramifiedInput):
        integrality_profile("u-5", 5, 4)


def test_integrality_profile_json():
    js = integrality_profile("1,0,-5", 5, 3).to_json()
    assert js["e"] == 2 and js["v_E_prime"] == "1/2" and len(js["terms"]) == 3


# --------------------------------------------------------------------------
# the logarithm


def test_required_terms_covers_tail():
    for p in (2, 3, 5):
        for N in range(1, 9):
            K = required_terms(p, N)
            for k in range(K + 1, K + 60):
                assert k - 1 - max(e for e in range(10) if k % p**e == 0) >= N


def test_log_p5_n3_z1_oracle():
    Z = mk_ring("IntegersModPN", precision=Precision(5, padic_digits=3))
    r = prismatic_log(Z.from_int(1))
    assert r.epsilon == 0
    # 1 - 5/2 + 25/3 - ... modulo 125
    assert r.value.constant_term() == prismatic_log_oracle(1, 5, 3, r.terms)
    partial = Fraction(1) - Fraction(5, 2) + Fraction(25, 3)
    assert r.value.constant_term() % 125 == partial.numerator * pow(partial.denominator, -1, 125) % 125


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3**6 - 1))
def test_log_power_rule(z):
    Z = mk_ring("IntegersModPN", precision=Precision(3, padic_digits=6))
    a = Z.from_int(z)
    w = log_product_argument(log_product_argument(a, a), a)
    assert prismatic_log(w).value.agrees(prismatic_log(a).value.scale(3))


def test_log_against_oracle_random():
    rng = random.Random(11)
    for p, N in ((2, 10), (3, 6), (7, 3)):
        Z = mk_ring("IntegersModPN", precision=Precision(p, padic_digits=N))
        for _ in range(20):
            z = rng.randrange(p**N)
            r = prismatic_log(Z.from_int(z))
            assert r.value.constant_term() == prismatic_log_oracle(z, p, N, r.terms)


def test_log_errors():
    Z = mk_ring("IntegersModPN", precision=Precision(3, padic_digits=6))
    with pytest.raises(InsufficientTerms):
        prismatic_log(Z.from_int(1), K=1)
    with pytest.raises(SpecMismatch):
        prismatic_log(parse_spec_id("F_3").one())
    assert prismatic_log(Z.zero()).value.is_zero()
