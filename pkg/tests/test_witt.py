import itertools
import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from prismkit import witt_polys
from prismkit.base_rings import Precision, mk_ring, parse_spec_id
from prismkit.errors import CapExceeded, LengthUnderflow, SpecMismatch
from prismkit.witt import (
    WittVector,
    enumerate_witt,
    frobenius,
    from_ghost,
    ghost,
    is_ga_sharp,
    restriction,
    teichmuller,
    verschiebung,
    witt_add,
    witt_from_int,
    witt_from_json,
    witt_inverse,
    witt_mul,
    witt_neg,
    witt_one,
    witt_sub,
    witt_to_json,
)

# --------------------------------------------------------------------------
# universal polynomials


@pytest.mark.parametrize("p", [2, 3])
def test_sum_index_one_frozen(p):
    got = oracles.table_as_sympy(witt_polys.table(p).to_text("sum", 1))
    assert sympy.expand(got - sympy.sympify(oracles.WITT_SUM_1[p])) == 0


def test_product_index_one_frozen():
    got = oracles.table_as_sympy(witt_polys.table(2).to_text("product", 1))
    assert sympy.expand(got - sympy.sympify(oracles.WITT_PRODUCT_1[2])) == 0


@pytest.mark.parametrize("p,op,i", [(2, "sum", 2), (2, "product", 2), (3, "sum", 2), (3, "frobenius", 1),
                                    (2, "negation", 3), (5, "product", 1), (2, "frobenius", 2)])
def test_against_sympy_recursion(p, op, i):
    got = oracles.table_as_sympy(witt_polys.table(p).to_text(op, i))
    assert sympy.expand(got - oracles.sympy_witt_poly(p, op, i)) == 0


def test_cap_fails_fast():
    tab = witt_polys.WittPolynomialTable(5)
    with pytest.raises(CapExceeded):
        tab.get("sum", 4)
    with pytest.raises(CapExceeded):
        tab.get("sum", 6)


def test_corrupted_copy_is_detected():
    tab = witt_polys.table(3).corrupted_copy("product", 2)
    ok, witness = witt_polys.verify_ghost_identity(tab, "product", 2)
    assert not ok and "monomial" in witness


def test_corrupt_table_restores():
    before = witt_polys.table(2)
    with witt_polys.corrupt_table(2, "sum", 1) as bad:
        assert witt_polys.table(2) is bad
    assert witt_polys.table(2) is before


def test_estimates_bound_actual_sizes():
    tab = witt_polys.table(2)
    for op in ("sum", "product", "negation", "frobenius"):
        for i in range(4):
            assert len(tab.get(op, i)) <= witt_polys.estimate_terms(2, op, i)


# --------------------------------------------------------------------------
# arithmetic against the integer ghost oracle


def _reduce(vec, spec):
    return WittVector(tuple(spec.from_int(c) for c in vec))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.lists(st.integers(-50, 50), min_size=3, max_size=3),
       st.lists(st.integers(-50, 50), min_size=3, max_size=3))
def test_arithmetic_matches_integer_oracle(p, a, b):
    spec = mk_ring("IntegersModPN", precision=Precision(p, padic_digits=5))
    x, y = _reduce(a, spec), _reduce(b, spec)
    assert witt_add(x, y) == _reduce(oracles.witt_int("sum", a, b, p), spec)
    assert witt_mul(x, y) == _reduce(oracles.witt_int("product", a, b, p), spec)
    assert witt_neg(x) == _reduce(oracles.witt_int("negation", a, None, p), spec)
    assert frobenius(x) == _reduce(oracles.witt_int("frobenius", a, None, p), spec)


def test_two_component_sum_over_z():
    Z = mk_ring("Integers", precision=Precision(2))
    R = mk_ring("PolyQuotient", Z, ["a0", "a1", "b0", "b1"])
    x = WittVector((R.gen("a0"), R.gen("a1")))
    y = WittVector((R.gen("b0"), R.gen("b1")))
    s = witt_add(x, y)
    assert s[0] == R.gen("a0") + R.gen("b0")
    assert s[1] == R.gen("a1") + R.gen("b1") - R.gen("a0") * R.gen("b0")


def test_ghost_first_components():
    Z = mk_ring("Integers", precision=Precision(3))
    R = mk_ring("PolyQuotient", Z, ["a0", "a1"])
    g = ghost(WittVector((R.gen("a0"), R.gen("a1"))))
    assert g[1] == R.gen("a0") ** 3 + 3 * R.gen("a1")


@pytest.mark.parametrize("p", [2, 3])
def test_ghost_is_multiplicative(p):
    Z = mk_ring("Integers", precision=Precision(p))
    n = 4
    R = mk_ring("PolyQuotient", Z, [f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)])
    x = WittVector(tuple(R.gen(f"a{i}") for i in range(n)))
    y = WittVector(tuple(R.gen(f"b{i}") for i in range(n)))
    assert ghost(witt_mul(x, y)) == [u * v for u, v in zip(ghost(x), ghost(y))]


def test_from_ghost_roundtrip():
    spec = mk_ring("Integers", precision=Precision(3))
    x = WittVector(tuple(spec.from_int(c) for c in (4, -2, 7)))
    assert from_ghost(ghost(x)) == x


@pytest.mark.parametrize("p", [2, 3, 5])
def test_p_is_v_of_one_in_char_p(p):
    R = parse_spec_id(f"F_{p}")
    pw = witt_from_int(p, R, 3)
    assert pw == verschiebung(witt_one(R, 3))
    assert [c.constant_term() for c in pw.components] == [0, 1, 0]


def test_integer_as_witt_vector():
    R = parse_spec_id("Z/3^4")
    assert [c.constant_term() % 81 for c in witt_from_int(5, R, 3).components] == \
        [c % 81 for c in oracles.int_as_witt(5, 3, 3)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**16))
def test_teichmuller_multiplicative(seed):
    rng = random.Random(seed)
    R = parse_spec_id("F_3[t]/(t^3)")
    a, b = R.random_element(rng), R.random_element(rng)
    assert witt_mul(teichmuller(a, 3), teichmuller(b, 3)) == teichmuller(a * b, 3)


def test_restriction_and_lengths():
    R = parse_spec_id("F_2")
    x = witt_from_int(3, R, 4)
    assert restriction(x, 2).length == 2
    assert verschiebung(x).length == 4
    assert frobenius(x).length == 3
    with pytest.raises(LengthUnderflow):
        frobenius(restriction(x, 3))


def test_mismatched_specs():
    with pytest.raises(SpecMismatch):
        witt_add(witt_one(parse_spec_id("F_2"), 2), witt_one(parse_spec_id("F_3"), 2))


def test_inverse_of_unit():
    R = parse_spec_id("F_2[t]/(t^2)")
    u = witt_add(teichmuller(R.gen("t"), 2), witt_one(R, 2))
    assert witt_mul(u, witt_inverse(u)) == witt_one(R, 2)


def test_ga_sharp_exhaustive_w2_f2():
    R = parse_spec_id("F_2")
    kernel = [x for x in enumerate_witt(R, 2) if is_ga_sharp(x)]
    direct = [x for x in enumerate_witt(R, 2) if frobenius(x).is_zero()]
    assert kernel == direct
    assert all(x[0].is_zero() for x in kernel) and len(kernel) == 2
    for a in enumerate_witt(R, 2):
        assert is_ga_sharp(verschiebung(a))


def test_witt_ring_axioms_exhaustive_small():
    R = parse_spec_id("F_2[t]/(t^2)")
    vs = list(enumerate_witt(R, 2))
    for x, y in itertools.product(vs, repeat=2):
        assert witt_add(x, y) == witt_add(y, x)
        assert witt_mul(x, y) == witt_mul(y, x)
        assert witt_sub(witt_add(x, y), y) == x


def test_json_roundtrip():
    R = parse_spec_id("Z/2^3[u]/(u^2)")
    x = WittVector((R.parse("u+1"), R.from_int(3), R.zero()))
    assert witt_from_json(witt_to_json(x)) == x
