"""Oriented prisms from a small catalog, distinguishedness, and prismatic envelopes.

Catalog entries (all truncated):

``crystalline``  ``Z/p^N`` with ``d = p``
``bk``           ``Z/p^N[[u]]/O(M)`` with ``delta(u) = 0`` and ``d = E(u)`` Eisenstein
``qdr``          ``Z/p^N[[t]]/O(M)`` with ``q = 1 + t``, ``phi(q) = q^p`` and ``d = [p]_q``
``perfectoid``   ``W_n(F_p[s]/(s^(p^k)))`` with ``d = p - [s]``

An orientation d is distinguished when ``p`` lies in ``(d, phi(d))``.  On
local carriers this is equivalent to ``delta(d)`` being a unit, and
:func:`is_distinguished` decides both and insists that they agree.
"""

from __future__ import annotations

import itertools
import time
from math import comb
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .base_rings import (
    Precision,
    RingElem,
    RingHom,
    RingSpec,
    div_exact_by_p,
    elem_to_json,
    invert,
    is_unit,
    mk_ring,
    parse_poly,
    poly_symbols,
    v_p,
)
from .delta import (
    PresentedDeltaRing,
    DeltaLift,
    adjoin_free_delta_vars,
    delta_on_witt,
    embed_constant,
    gen_name,
)
from .errors import (
    BadPrecision,
    EnumerationBudgetExceeded,
    NonOrientable,
    NotDistinguished,
    NotEisenstein,
    PrecisionExhausted,
    SpecMismatch,
    UnsupportedCarrier,
    UnsupportedQuery,
)
from .witt import (
    WittVector,
    enumerate_witt,
    frobenius,
    restriction,
    teichmuller,
    witt_add,
    witt_from_int,
    witt_mul,
    witt_sub,
    witt_to_json,
)

CATALOG = ("crystalline", "bk", "qdr", "perfectoid")


# --------------------------------------------------------------------------
# linear algebra over Z/p^N


def solve_mod_prime_power(M: list, b: list, p: int, N: int):
    """Solve ``M x = b`` over ``Z/p^N``; return x or None if unsolvable.

    Diagonalizes M by row and column operations, always pivoting on an entry
    of minimal valuation, so every pivot divides the rest of its row and
    column.
    """
    mod = p**N
    rows, cols = len(M), len(M[0]) if M else 0
    A = [[x % mod for x in row] for row in M]
    rhs = [x % mod for x in b]
    C = [[int(i == j) for j in range(cols)] for i in range(cols)]
    vals = []
    for t in range(min(rows, cols)):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j]:
                    v = v_p(A[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        A[t], A[i] = A[i], A[t]
        rhs[t], rhs[i] = rhs[i], rhs[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        for row in C:
            row[t], row[j] = row[j], row[t]
        unit = A[t][t] // p**v
        uinv = pow(unit, -1, mod)
        A[t] = [x * uinv % mod for x in A[t]]
        rhs[t] = rhs[t] * uinv % mod
        pv = p**v
        for i2 in range(rows):
            if i2 != t and A[i2][t]:
                f = A[i2][t] // pv
                A[i2] = [(x - f * y) % mod for x, y in zip(A[i2], A[t])]
                rhs[i2] = (rhs[i2] - f * rhs[t]) % mod
        for j2 in range(cols):
            if j2 != t and A[t][j2]:
                f = A[t][j2] // pv
                for row in A:
                    row[j2] = (row[j2] - f * row[t]) % mod
                for row in C:
                    row[j2] = (row[j2] - f * row[t]) % mod
        vals.append(v)
    y = [0] * cols
    for t, v in enumerate(vals):
        if rhs[t] % p**v:
            return None
        y[t] = rhs[t] // p**v
    for t in range(len(vals), rows):
        if rhs[t]:
            return None
    return [sum(C[i][j] * y[j] for j in range(cols)) % mod for i in range(cols)]


def _coords(a: RingElem, basis: Sequence) -> list:
    return [a._d.get(m, 0) for m in basis]


# --------------------------------------------------------------------------
# prisms


@dataclass
class PrismSpec:
    """An oriented prism.

    For ring carriers ``delta_ring`` is set; for the Witt-vector carrier of
    the perfectoid entry ``witt_base`` and ``witt_length`` are set instead.
    """

    name: str
    d: object
    precision: Precision
    delta_ring: PresentedDeltaRing | None = None
    witt_base: RingSpec | None = None
    witt_length: int | None = None
    eisenstein: tuple | None = None  # ascending coefficients of E

    @property
    def p(self) -> int:
        return self.precision.p

    @property
    def carrier_id(self) -> str:
        if self.delta_ring is not None:
            return self.delta_ring.carrier.spec_id
        return f"W_{self.witt_length}({self.witt_base.spec_id})"

    def phi(self, a):
        if self.delta_ring is not None:
            return self.delta_ring.phi(a)
        return frobenius(a)

    def to_json(self) -> dict:
        d = elem_to_json(self.d) if isinstance(self.d, RingElem) else witt_to_json(self.d)
        out = {"catalog": self.name, "carrier": self.carrier_id, "d": d, "p": self.p}
        if self.eisenstein is not None:
            out["eisenstein"] = [str(c) for c in reversed(self.eisenstein)]
        return out


def parse_eisenstein(coeffs, p: int) -> tuple:
    """Ascending integer coefficients from "1,0,-2" (high to low), "u^2-2" or a list."""
    if isinstance(coeffs, str):
        text = coeffs.strip()
        if "," in text or text.lstrip("-").isdigit():
            high_to_low = [int(c) for c in text.split(",")]
            return tuple(reversed(high_to_low))
        syms = poly_symbols(text)
        if len(syms) > 1:
            raise NotEisenstein(f"{text!r} is not univariate")
        var = syms[0] if syms else "u"
        poly = parse_poly(text, [var])
        deg = max(m[0] for m in poly)
        return tuple(poly.get((k,), 0) for k in range(deg + 1))
    return tuple(int(c) for c in reversed(list(coeffs)))


def check_eisenstein(coeffs: tuple, p: int) -> int:
    """Validate ascending coefficients; return the degree e."""
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    e = len(coeffs) - 1
    if e < 1:
        raise NotEisenstein("an Eisenstein polynomial has positive degree")
    if coeffs[-1] != 1:
        raise NotEisenstein(f"leading coefficient {coeffs[-1]} is not 1")
    for i, c in enumerate(coeffs[:-1]):
        if c % p:
            raise NotEisenstein(f"coefficient of u^{i} is not divisible by {p}")
    if coeffs[0] % (p * p) == 0:
        raise NotEisenstein(f"constant term {coeffs[0]} is divisible by {p}^2")
    return e


def q_bracket_p(p: int) -> tuple:
    """Ascending coefficients of [p]_q = ((1+t)^p - 1)/t in t."""
    return tuple(comb(p, j + 1) for j in range(p))


def mk_prism(catalog: str, precision: Precision, eisenstein=None, k: int = 1,
             orientation: str | None = None, check: bool = True) -> PrismSpec:
    """Build a catalog prism and verify that its orientation is distinguished."""
    p, N, M = precision.p, precision.padic_digits, precision.series_order
    if catalog not in CATALOG:
        raise UnsupportedCarrier(f"unknown catalog entry {catalog!r}; choose from {CATALOG}")
    if catalog != "perfectoid" and N < 2:
        raise BadPrecision("prisms need at least two p-adic digits")
    if catalog == "crystalline":
        carrier = mk_ring("IntegersModPN", precision=precision)
        A = PresentedDeltaRing(carrier, {}, name="crystalline")
        d = carrier.parse(orientation) if orientation else carrier.from_int(p)
        P = PrismSpec("crystalline", d, precision, delta_ring=A)
    elif catalog == "bk":
        E = parse_eisenstein(eisenstein if eisenstein is not None else f"u^2-{p}", p)
        e = check_eisenstein(E, p)
        if M < e * N:
            raise BadPrecision(f"series order {M} must be at least e*N = {e * N}")
        carrier = mk_ring("PowerSeriesTrunc", mk_ring("IntegersModPN", precision=precision), ["u"], M)
        A = PresentedDeltaRing(carrier, {"u": carrier.zero()}, name="bk")
        d = carrier.parse(orientation) if orientation else carrier.element({(i,): c for i, c in enumerate(E)})
        P = PrismSpec("bk", d, precision, delta_ring=A, eisenstein=E)
    elif catalog == "qdr":
        E = q_bracket_p(p)
        if M < (p - 1) * N:
            raise BadPrecision(f"series order {M} must be at least (p-1)*N = {(p - 1) * N}")
        carrier = mk_ring("PowerSeriesTrunc", mk_ring("IntegersModPN", precision=precision), ["t"], M)
        # delta(t) = ((1+t)^p - 1 - t^p)/p, an integral polynomial
        dt = carrier.element({(j,): comb(p, j) // p for j in range(1, p)})
        A = PresentedDeltaRing(carrier, {"t": dt}, name="qdr")
        d = carrier.parse(orientation) if orientation else carrier.element({(i,): c for i, c in enumerate(E)})
        P = PrismSpec("qdr", d, precision, delta_ring=A, eisenstein=E)
    else:
        if k < 1:
            raise BadPrecision("perfectoid level k must be positive")
        n = precision.witt_length
        if n < 2:
            raise BadPrecision("the perfectoid carrier needs Witt length at least 2")
        R = mk_ring("PolyQuotient", mk_ring("PrimeField", precision=precision), ["s"], [f"s^{p**k}"])
        s = R.gen("s")
        d = witt_sub(witt_from_int(p, R, n), teichmuller(s, n))
        P = PrismSpec("perfectoid", d, precision, witt_base=R, witt_length=n)
    if check:
        report = is_distinguished(P)
        if not report.verdict:
            raise NotDistinguished(f"{P.d} is not distinguished in {P.carrier_id}")
    return P


# --------------------------------------------------------------------------
# distinguishedness


@dataclass
class DistinguishedReport:
    verdict: bool
    witness: tuple | None
    delta_unit: bool | None
    agree: bool
    note: str = ""

    def to_json(self) -> dict:
        def enc(x):
            return elem_to_json(x) if isinstance(x, RingElem) else witt_to_json(x)
        return {
            "distinguished": self.verdict,
            "delta_unit": self.delta_unit,
            "agree": self.agree,
            "witness": None if self.witness is None else {"a": enc(self.witness[0]), "b": enc(self.witness[1])},
            "note": self.note,
        }


def is_distinguished(P_or_A, d=None, budget: int = 1 << 16) -> DistinguishedReport:
    """Decide p in (d, phi(d)) and cross-check against delta(d) being a unit."""
    if isinstance(P_or_A, PrismSpec):
        if P_or_A.delta_ring is None:
            return _distinguished_witt(P_or_A.d, P_or_A.witt_length, budget)
        A, d = P_or_A.delta_ring, P_or_A.d
    else:
        A = P_or_A
        if isinstance(d, WittVector):
            return _distinguished_witt(d, d.length, budget)
    spec = A.carrier
    if spec.modulus is None:
        raise UnsupportedCarrier(f"{spec.spec_id} is not a local truncated carrier")
    if not spec.is_local:
        raise UnsupportedCarrier(f"{spec.spec_id} is not local")
    d = spec.coerce(d)
    p = spec.p
    if is_unit(d):
        return DistinguishedReport(False, None, None, True, "orientation is a unit")
    phid = A.phi(d)
    delta_unit = is_unit(A.delta(d))
    target = spec.from_int(p)
    if spec.nvars == 0:
        c = d.constant_term()
        verdict = c != 0 and v_p(c, p) == 1
        witness = None
        if verdict:
            u = c // p
            witness = (spec.from_int(pow(u, -1, spec.modulus)), spec.zero())
    else:
        basis = spec.standard_monomials
        cols = []
        for m in basis:
            mono = spec.element({m: 1})
            cols.append(_coords(d * mono, basis))
        for m in basis:
            mono = spec.element({m: 1})
            cols.append(_coords(phid * mono, basis))
        matrix = [[cols[j][i] for j in range(len(cols))] for i in range(len(basis))]
        x = solve_mod_prime_power(matrix, _coords(target, basis), p, spec.digits)
        verdict = x is not None
        witness = None
        if verdict:
            k = len(basis)
            a = spec.element(dict(zip(basis, x[:k])))
            b = spec.element(dict(zip(basis, x[k:])))
            witness = (a, b)
    if witness is not None and not (witness[0] * d + witness[1] * phid).agrees(target):
        raise AssertionError("ideal-membership witness failed to verify")  # pragma: no cover
    return DistinguishedReport(verdict, witness, delta_unit, verdict == delta_unit)


def _distinguished_witt(d: WittVector, n: int, budget: int) -> DistinguishedReport:
    """Brute force over W_{n-1}(R): p = a Res(d) + b F(d)."""
    R = d.spec
    if R.modulus is None or R.standard_monomials is None:
        raise UnsupportedCarrier("Witt carriers must have a finite base")
    if R.size() ** (n - 1) > budget:
        raise EnumerationBudgetExceeded(
            f"|W_{n - 1}({R.spec_id})| = {R.size() ** (n - 1)} exceeds the budget {budget}")
    if is_unit(d[0]):
        return DistinguishedReport(False, None, None, True, "orientation is a unit")
    dres = restriction(d)
    fd = frobenius(d)
    delta_unit = is_unit(delta_on_witt(d)[0])
    target = witt_from_int(R.p, R, n - 1)
    elements = list(enumerate_witt(R, n - 1))
    bset = {}
    for b in elements:
        bset.setdefault(witt_mul(b, fd), b)
    witness = None
    for a in elements:
        rest = witt_sub(target, witt_mul(a, dres))
        if rest in bset:
            witness = (a, bset[rest])
            break
    verdict = witness is not None
    return DistinguishedReport(verdict, witness, delta_unit, verdict == delta_unit)


# --------------------------------------------------------------------------
# Hodge-Tate quotients


def hodge_tate_quotient(P: PrismSpec) -> tuple:
    """(spec of A/(d), reduction homomorphism A -> A/(d))."""
    if P.delta_ring is None:
        raise UnsupportedCarrier("the perfectoid Witt carrier has no catalog Hodge-Tate quotient")
    A = P.delta_ring.carrier
    if P.name == "crystalline" or A.nvars == 0:
        c = P.d.constant_term()
        if v_p(c, P.p) != 1:
            raise UnsupportedCarrier("only orientations of valuation one are supported")
        Fp = mk_ring("PrimeField", precision=P.precision)
        return Fp, RingHom(A, Fp, {})
    var = "pi" if P.name == "bk" else A.vars[0]
    E = P.eisenstein
    rel = {(i,): c for i, c in enumerate(E)}
    relation = _poly_text(rel, var)
    Q = mk_ring("PolyQuotient", A.base, [var], relation)
    red = RingHom(A, Q, {A.vars[0]: Q.gen(var)})
    if not red(P.d).is_zero():
        raise UnsupportedCarrier("the orientation is not the catalog Eisenstein polynomial")
    return Q, red


def _poly_text(d: dict, var: str) -> str:
    from .base_rings import format_poly
    return format_poly(d, [var])


# --------------------------------------------------------------------------
# prismatic envelopes


@dataclass
class Rule:
    """``var -> rhs`` (kind ``solve``), or an unoriented relation (kind ``check``)."""

    kind: str
    var: str | None
    rhs: RingElem | None
    relation: RingElem
    origin: tuple

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "var": self.var,
            "rhs": None if self.rhs is None else elem_to_json(self.rhs),
            "relation": elem_to_json(self.relation),
            "origin": list(self.origin),
        }


@dataclass
class EnvelopePresentation:
    base: PrismSpec
    numerators: tuple  # elements of the envelope carrier
    numerator_text: tuple
    ring: PresentedDeltaRing  # A{free vars}{f_i}
    base_ring: PresentedDeltaRing  # A{free vars}
    fnames: tuple
    depth: int
    relations: dict  # (i, k) -> element
    rules: list = field(default_factory=list)
    step_budget: int = 10_000

    def solve_rules(self) -> list:
        return [r for r in self.rules if r.kind == "solve"]

    def normal_form(self, a: RingElem) -> RingElem:
        """Substitute solve rules until no left-hand side occurs."""
        a = self.ring.carrier.coerce(a)
        rules = self.solve_rules()
        steps = 0
        changed = True
        while changed:
            changed = False
            for r in rules:
                b = _substitute(a, r)
                if b is not None:
                    a = b
                    changed = True
                    steps += 1
                    if steps > self.step_budget:
                        raise NonOrientable("normal form exceeded its step budget")
        return a

    def critical_pairs(self) -> list:
        """Reduce lhs_i * lhs_j through rule i first and through rule j first."""
        spec = self.ring.carrier
        out = []
        for r1, r2 in itertools.combinations(self.solve_rules(), 2):
            m = spec.gen(r1.var) * spec.gen(r2.var)
            left = self.normal_form(_substitute(m, r1))
            right = self.normal_form(_substitute(m, r2))
            out.append({"rules": [r1.var, r2.var], "joinable": left.agrees(right)})
        return out

    def diagnostics(self) -> dict:
        spec = self.ring.carrier
        pairs = self.critical_pairs()
        checks = []
        for r in self.rules:
            if r.kind == "check":
                nf = self.normal_form(r.relation)
                checks.append({"origin": list(r.origin), "normal_form": elem_to_json(nf),
                               "reduces_to_zero": nf.is_zero()})
        same = []
        for i, j in itertools.combinations(range(len(self.numerators)), 2):
            if self.numerators[i] == self.numerators[j]:
                diff = self.normal_form(spec.gen(self.fnames[i]) - spec.gen(self.fnames[j]))
                same.append({"pair": [i + 1, j + 1], "difference_reduces_to_zero": diff.is_zero()})
        return {
            "critical_pairs": pairs,
            "locally_confluent": all(x["joinable"] for x in pairs),
            "check_relations": checks,
            "equal_numerators": same,
        }

    def to_json(self) -> dict:
        return {
            "prism": self.base.to_json(),
            "carrier": self.ring.carrier.spec_id,
            "numerators": list(self.numerator_text),
            "depth": self.depth,
            "relations": [
                {"numerator": i + 1, "k": k, "relation": elem_to_json(r)}
                for (i, k), r in sorted(self.relations.items())
            ],
            "rules": [r.to_json() for r in self.rules],
            "diagnostics": self.diagnostics(),
        }


def _substitute(a: RingElem, rule: Rule):
    """Replace the rule variable by its right-hand side; None if it does not occur."""
    spec = a.spec
    i = spec.var_index(rule.var)
    if not any(m[i] for m in a._d):
        return None
    by_power: dict = {}
    for m, c in a._d.items():
        by_power.setdefault(m[i], {})[m[:i] + (0,) + m[i + 1:]] = c
    out = spec.element({}, a.prec)
    for k, part in by_power.items():
        out = out + spec.element(part, a.prec) * rule.rhs**k
    return out


def _split_linear(R: RingElem, i: int, fvars: set):
    """R = c * v + T with v the i-th variable; raises if R is not of this shape."""
    spec = R.spec
    c, T = {}, {}
    for m, coeff in R._d.items():
        if m[i] >= 2:
            raise NonOrientable(f"relation {R} is not linear in {spec.vars[i]}")
        if m[i] == 1:
            if any(m[j] for j in fvars if j != i):
                raise NonOrientable(
                    f"relation {R}: the coefficient of {spec.vars[i]} involves adjoined fractions")
            c[m[:i] + (0,) + m[i + 1:]] = coeff
        else:
            T[m] = coeff
    return spec.element(c, R.prec), spec.element(T, R.prec)


def prismatic_envelope(P: PrismSpec, numerators: Sequence, D: int) -> EnvelopePresentation:
    """Presentation of A{x_1/d, ..., x_r/d} truncated at delta-depth D.

    Numerators are expressions in the carrier's generators; any other
    symbol becomes a free delta-variable adjoined to A.
    """
    if P.delta_ring is None:
        raise UnsupportedCarrier("envelopes over the perfectoid Witt carrier are not supported")
    if not numerators:
        raise BadPrecision("at least one numerator is required")
    if D < 0:
        raise BadPrecision("depth must be non-negative")
    A = P.delta_ring
    texts = []
    free = []
    for x in numerators:
        if isinstance(x, RingElem):
            texts.append(str(x))
            continue
        texts.append(x)
        for s in poly_symbols(x):
            if s not in A.carrier.vars and s not in free:
                free.append(s)
    depth = max(D, 1)
    fnames = tuple(f"f{i}" for i in range(1, len(numerators) + 1))
    Ax = adjoin_free_delta_vars(A, free, depth) if free else A
    B = adjoin_free_delta_vars(Ax, fnames, depth)
    spec = B.carrier
    xs = []
    for x, text in zip(numerators, texts):
        if isinstance(x, RingElem):
            xs.append(embed_constant(A, B, x) if x.spec == A.carrier else spec.coerce(x))
        else:
            xs.append(spec.element(parse_poly(text, spec.vars)))
    d = embed_constant(A, B, P.d)
    fidx = {spec.var_index(gen_name(f, j)) for f in fnames for j in range(depth + 1)}
    pres = EnvelopePresentation(P, tuple(xs), tuple(texts), B, Ax, fnames, D, {})
    for i, x in enumerate(xs):
        R = d * spec.gen(fnames[i]) - x
        for k in range(D + 1):
            if k:
                R = B.delta(R)
            pres.relations[(i, k)] = R
    for k in range(D + 1):
        for i in range(len(xs)):
            R = pres.relations[(i, k)]
            v = gen_name(fnames[i], k)
            pres.rules.append(_orient(pres, R, v, fidx, (f"numerator {i + 1}", f"k={k}")))
    return pres


def _orient(pres: EnvelopePresentation, R: RingElem, v: str, fidx: set, origin: tuple) -> Rule:
    """Solve R = c*v + T for v when c is a unit, or c = p^e*u with p^e | T."""
    spec = pres.ring.carrier
    p = spec.p
    c, T = _split_linear(R, spec.var_index(v), fidx)
    T = pres.normal_form(T)
    if c.is_zero():
        return Rule("check", None, None, pres.normal_form(R), origin)
    if c.is_constant():
        cc = c.constant_term()
        e = v_p(cc, p)
        uinv = pow(cc // p**e, -1, spec.modulus)
        if e == 0:
            return Rule("solve", v, -(T.scale(uinv)), R, origin)
        if all(coef % p**e == 0 for coef in T._d.values()) and T.prec is not None and T.prec >= e:
            Tq, _ = div_exact_by_p(T, e)
            return Rule("solve", v, -(Tq.scale(uinv)), R, origin)
        return Rule("check", None, None, R, origin)
    base = pres.base_ring.carrier
    c_base = base.element({m[: base.nvars]: a for m, a in c._d.items()}, c.prec)
    if base.is_local and is_unit(c_base):
        cinv = embed_constant(pres.base_ring, pres.ring, invert(c_base))
        return Rule("solve", v, -(cinv * T), R, origin)
    return Rule("check", None, None, R, origin)


# --------------------------------------------------------------------------
# functor of points


@dataclass
class PointsReport:
    set_a: list
    set_b: list
    equal: bool
    target: str
    witt_length: int
    runtime: float = 0.0

    def to_json(self) -> dict:
        enc = lambda t: [[str(c) for c in h.components] for h in t]  # noqa: E731
        return {
            "target": self.target,
            "witt_length": self.witt_length,
            "set_a": [enc(t) for t in self.set_a],
            "set_b": [enc(t) for t in self.set_b],
            "equal": self.equal,
        }


def _witt_power_of(x: WittVector, e: int) -> WittVector:
    out = None
    base = x
    while e:
        if e & 1:
            out = base if out is None else witt_mul(out, base)
        e >>= 1
        if e:
            base = witt_mul(base, base)
    return out


def envelope_points(E: EnvelopePresentation, S: RingSpec, n: int, base_point: Mapping,
                    budget: int = 1 << 16) -> PointsReport:
    """Compare {h : h d = x_i} with the points of the presentation in W_n(S).

    ``base_point`` assigns an element of S to every generator of the base
    carrier (including free numerator variables and their delta-powers;
    missing ones map to 0); it is lifted to the unique delta-map into W_n(S).
    """
    start = time.perf_counter()
    if S.modulus is None or S.standard_monomials is None:
        raise UnsupportedCarrier(f"{S.spec_id} is not finite")
    Ab = E.base_ring
    f = RingHom(Ab.carrier, S, {v: S.coerce(base_point.get(v, 0)) for v in Ab.carrier.vars})
    size = S.size() ** n
    r = len(E.numerators)
    if size ** r > budget:
        raise EnumerationBudgetExceeded(f"{size}^{r} candidate tuples exceed the budget {budget}")
    lifts = {m: DeltaLift(Ab, f, m) for m in range(1, n + 1)}
    spec = E.ring.carrier
    nb = Ab.carrier.nvars

    def lift(a: RingElem, m: int) -> WittVector:
        w = lifts[m](a)
        for c in w.components:
            if c.prec is not None and c.prec < S.digits:
                raise PrecisionExhausted(
                    f"base point known only to {c.prec} digits; raise the p-adic precision")
        return w.full_prec()

    d_bar = lift(embed_constant(E.base.delta_ring, Ab, E.base.d), n)
    x_bars = [lift(Ab.carrier.element({m[:nb]: c for m, c in x._d.items()}), n) for x in E.numerators]
    elements = [w for w in enumerate_witt(S, n)]

    set_a_parts = []
    for xb in x_bars:
        set_a_parts.append([h for h in elements if witt_mul(h, d_bar) == xb])
    set_a = sorted((tuple(t) for t in itertools.product(*set_a_parts)),
                   key=lambda t: tuple(h.sort_key() for h in t))

    # presentation side: every relation, evaluated through the delta-map
    rel_terms = {}
    for (i, k), R in E.relations.items():
        if n - k <= 0:
            continue
        groups: dict = {}
        for m, c in R._d.items():
            fm = m[nb:]
            groups.setdefault(fm, {})[m[:nb]] = c
        rel_terms[(i, k)] = [(fm, lift(Ab.carrier.element(coeffs, R.prec), n - k)) for fm, coeffs in groups.items()]

    fvars = spec.vars[nb:]
    fpos = {}
    for pos, name in enumerate(fvars):
        for i, fn in enumerate(E.fnames):
            for j in range(max(E.depth, 1) + 1):
                if gen_name(fn, j) == name:
                    fpos[pos] = (i, j)

    set_b = []
    for t in itertools.product(elements, repeat=r):
        chains = []
        for h in t:
            chain = [h]
            for _ in range(n - 1):
                chain.append(delta_on_witt(chain[-1]) if chain[-1].length >= 2 else None)
            chains.append(chain)
        ok = True
        for (i, k), terms in sorted(rel_terms.items()):
            L = n - k
            total = None
            for fm, coeff in terms:
                val = coeff
                for pos, e in enumerate(fm):
                    if not e:
                        continue
                    fi, j = fpos[pos]
                    hv = chains[fi][j]
                    if hv is None or hv.length < L:
                        raise PrecisionExhausted("delta chain too short for the relation")
                    val = witt_mul(val, _witt_power_of(restriction(hv, hv.length - L) if hv.length > L else hv, e))
                total = val if total is None else witt_add(total, val)
            if total is not None and not total.is_zero():
                ok = False
                break
        if ok:
            set_b.append(tuple(t))
    set_b.sort(key=lambda t: tuple(h.sort_key() for h in t))
    equal = [tuple(h.sort_key() for h in t) for t in set_a] == [tuple(h.sort_key() for h in t) for t in set_b]
    return PointsReport(set_a, set_b, equal, S.spec_id, n, time.perf_counter() - start)
