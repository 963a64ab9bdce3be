"""Reference computations that share no code with prismkit.

Witt vectors over Z are handled through their ghost components with exact
rationals; universal polynomials come from sympy solving the ghost
recursion directly.  Frozen values below were produced by these oracles.
"""

from __future__ import annotations

from fractions import Fraction

import sympy


def ghost_int(a: list, p: int) -> list:
    return [sum(p**i * a[i] ** (p ** (m - i)) for i in range(m + 1)) for m in range(len(a))]


def from_ghost_int(g: list, p: int) -> list:
    a: list = []
    for m, gm in enumerate(g):
        rest = gm - sum(p**i * a[i] ** (p ** (m - i)) for i in range(m))
        q = Fraction(rest, p**m)
        assert q.denominator == 1, "ghost vector is not integral"
        a.append(int(q))
    return a


def witt_int(op: str, a: list, b: list | None, p: int) -> list:
    """Witt operation on integer vectors (componentwise results are integers)."""
    ga = ghost_int(a, p)
    if op == "sum":
        g = [x + y for x, y in zip(ga, ghost_int(b, p))]
    elif op == "product":
        g = [x * y for x, y in zip(ga, ghost_int(b, p))]
    elif op == "negation":
        g = [-x for x in ga]
    elif op == "frobenius":
        g = ga[1:]
    else:
        raise KeyError(op)
    return from_ghost_int(g, p)


def int_as_witt(c: int, p: int, n: int) -> list:
    return from_ghost_int([c] * n, p)


def sympy_witt_poly(p: int, op: str, i: int):
    """The index-i universal polynomial as a sympy expression in a0.., b0..."""
    a = sympy.symbols(f"a0:{i + 2}")
    b = sympy.symbols(f"b0:{i + 2}")

    def gh(v, m):
        return sum(p**k * v[k] ** (p ** (m - k)) for k in range(m + 1))

    S: list = []
    for m in range(i + 1):
        if op == "sum":
            phi = gh(a, m) + gh(b, m)
        elif op == "product":
            phi = gh(a, m) * gh(b, m)
        elif op == "negation":
            phi = -gh(a, m)
        elif op == "frobenius":
            phi = gh(a, m + 1)
        else:
            raise KeyError(op)
        rest = sympy.expand(phi - sum(p**k * S[k] ** (p ** (m - k)) for k in range(m)))
        S.append(sympy.expand(rest / p**m))
    return S[i]


def table_as_sympy(rows) -> object:
    """``[(coeff, "a0*b1^2"), ...]`` to a sympy expression."""
    total = sympy.Integer(0)
    for c, mono in rows:
        term = sympy.Integer(c)
        if mono != "1":
            for factor in mono.split("*"):
                name, _, e = factor.partition("^")
                term *= sympy.Symbol(name) ** int(e or 1)
        total += term
    return sympy.expand(total)


def exp_log_coefficients(M: int):
    """Coefficients in Q[c] of exp_G and log_G by series reversion in sympy."""
    x, c = sympy.symbols("x c")
    log_g = sympy.expand(sympy.log(1 + c * x).series(x, 0, M + 1).removeO() / c)
    exp_g = sympy.expand(((sympy.exp(c * x) - 1) / c).series(x, 0, M + 1).removeO())
    return x, c, exp_g, log_g


# frozen oracle values
WITT_SUM_1 = {2: "a1 + b1 - a0*b0", 3: "a1 + b1 - a0**2*b0 - a0*b0**2"}
WITT_PRODUCT_1 = {2: "a0**2*b1 + a1*b0**2 + 2*a1*b1"}
DELTA_OF_P = {2: -1, 3: -8, 5: -624}  # (p - p^p)/p = 1 - p^(p-1)
