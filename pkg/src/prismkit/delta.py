"""delta-rings on catalog carriers, free delta-rings, and the cofree structure on W.

A :class:`PresentedDeltaRing` is a carrier spec together with a table giving
delta of each generator.  delta of an arbitrary element is then forced by

    delta(1)   = 0
    delta(x+y) = delta(x) + delta(y) - sum_{0<i<p} (C(p,i)/p) x^i y^(p-i)
    delta(xy)  = x^p delta(y) + y^p delta(x) + p delta(x) delta(y)

and on integer constants by delta(c) = (c - c^p)/p.  The Frobenius lift is
phi(x) = x^p + p delta(x).

Over ``Z/p^N`` the computation runs on representatives, so the result is
only meaningful modulo ``p^(N-1)``; its ``prec`` says so.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Mapping, Sequence

from .base_rings import (
    DegreeTruncation,
    MonicRelation,
    MonomialIdeal,
    Precision,
    RingElem,
    RingHom,
    RingSpec,
    div_exact_by_p,
    elem_from_json,
    elem_to_json,
    mk_ring,
    parse_spec_id,
)
from .errors import (
    BadPrecision,
    DepthExceeded,
    LengthUnderflow,
    RelationViolated,
    SpecMismatch,
    UnsupportedCarrier,
    UnsupportedRelationSet,
)
from .witt import (
    WittVector,
    _apply,
    from_ghost,
    frobenius_universal,
    ghost,
    map_witt,
)


@lru_cache(maxsize=None)
def sum_correction_coeffs(p: int) -> tuple:
    """C(p, i)/p for 0 < i < p, as integers."""
    return tuple(comb(p, i) // p for i in range(1, p))


def delta_int(c: int, p: int) -> int:
    return (c - c**p) // p


def gen_name(name: str, j: int) -> str:
    """Carrier name of delta^j applied to the generator ``name``."""
    if j == 0:
        return name
    if j == 1:
        return f"d{name}"
    return f"d{j}{name}"


class PresentedDeltaRing:
    """A delta-ring given by a carrier spec and delta on each generator.

    ``table`` maps generator names to their delta-values; a value of ``None``
    marks the edge of a truncated presentation, and asking for it raises
    :class:`DepthExceeded`.
    """

    def __init__(self, carrier: RingSpec, table: Mapping, name: str = "", depth: int | None = None,
                 check_relations: bool = True):
        self.carrier = carrier
        self.p = carrier.p
        self.name = name or carrier.spec_id
        self.depth = depth
        missing = [v for v in carrier.vars if v not in table]
        if missing:
            raise SpecMismatch(f"no delta given for generators {missing}")
        self.table = {v: (None if table[v] is None else carrier.coerce(table[v])) for v in carrier.vars}
        self._mono_cache: dict = {}
        if check_relations:
            self._check_relations()

    # -- delta -----------------------------------------------------------
    def _gen_delta(self, i: int) -> RingElem:
        v = self.carrier.vars[i]
        d = self.table[v]
        if d is None:
            raise DepthExceeded(f"delta({v}) lies beyond the presented depth")
        return d

    def _lift(self, d: dict) -> RingElem:
        return RingElem._make(self.carrier, d, self.carrier.digits)

    def _delta_power(self, i: int, e: int) -> RingElem:
        """delta(x_i^e) by the product rule, memoized."""
        key = (i, e)
        hit = self._mono_cache.get(key)
        if hit is not None:
            return hit
        spec = self.carrier
        if e == 1:
            out = self._gen_delta(i)
        else:
            h = e // 2
            out = self._delta_product(self._var_pow(i, h), self._delta_power(i, h),
                                      self._var_pow(i, e - h), self._delta_power(i, e - h))
        self._mono_cache[key] = out
        return out

    def _var_pow(self, i: int, e: int) -> RingElem:
        m = [0] * self.carrier.nvars
        m[i] = e
        return self.carrier.element({tuple(m): 1})

    def _delta_product(self, x, dx, y, dy) -> RingElem:
        p = self.p
        return x**p * dy + y**p * dx + (dx * dy).scale(p)

    def _delta_monomial(self, m: tuple) -> RingElem:
        spec = self.carrier
        x = None
        dx = None
        for i, e in enumerate(m):
            if not e:
                continue
            y, dy = self._var_pow(i, e), self._delta_power(i, e)
            if x is None:
                x, dx = y, dy
            else:
                dx = self._delta_product(x, dx, y, dy)
                x = x * y
        return dx if dx is not None else spec.zero()

    def _delta_term(self, m: tuple, c: int) -> RingElem:
        spec = self.carrier
        mono = spec.element({m: 1})
        dc = spec.from_int(delta_int(c, self.p))
        if not any(m):
            return dc
        dm = self._delta_monomial(m)
        return self._delta_product(spec.from_int(c), dc, mono, dm)

    def _delta_sum(self, terms: list) -> tuple:
        """(sum, delta(sum)) for a list of (monomial, coeff) terms."""
        spec = self.carrier
        if len(terms) == 1:
            m, c = terms[0]
            return spec.element({m: c}), self._delta_term(m, c)
        mid = len(terms) // 2
        x, dx = self._delta_sum(terms[:mid])
        y, dy = self._delta_sum(terms[mid:])
        corr = spec.zero()
        p = self.p
        for i, k in enumerate(sum_correction_coeffs(p), start=1):
            corr = corr + (x**i * y ** (p - i)).scale(k)
        return x + y, dx + dy - corr

    def delta(self, a: RingElem) -> RingElem:
        a = self.carrier.coerce(a)
        if a.is_zero():
            out = self.carrier.zero()
        else:
            _, out = self._delta_sum(a.terms())
        return out.with_prec(self._result_prec(a, out))

    def _result_prec(self, a: RingElem, out: RingElem):
        if self.carrier.digits is None:
            return None
        prec = min(a.prec - 1, out.prec)
        if prec < 0:
            from .errors import PrecisionExhausted
            raise PrecisionExhausted("delta needs at least one digit of precision")
        return prec

    def delta_iter(self, a: RingElem, k: int) -> RingElem:
        for _ in range(k):
            a = self.delta(a)
        return a

    def phi(self, a: RingElem) -> RingElem:
        """Frobenius lift a^p + p delta(a)."""
        a = self.carrier.coerce(a)
        return a**self.p + self.delta(a).scale(self.p)

    def phi_hom(self) -> RingHom:
        """phi as a ring endomorphism given by generator images."""
        return RingHom(self.carrier, self.carrier, {v: self.phi(self.carrier.gen(v)) for v in self.carrier.vars})

    def delta_via_phi(self, a: RingElem) -> RingElem:
        """Independent route: (phi(a) - a^p)/p with phi applied as a substitution."""
        a = self.carrier.coerce(a)
        full = self._lift(a._d)
        used = {i for m in full._d for i, e in enumerate(m) if e}
        images = {i: self.phi(self.carrier.gen(self.carrier.vars[i])) for i in used}
        img = self.carrier.zero()
        for m, c in full._d.items():
            term = self.carrier.from_int(c)
            for i, e in enumerate(m):
                if e:
                    term = term * images[i] ** e
            img = img + term
        diff = img - full**self.p
        b, _ = div_exact_by_p(diff, 1)
        return b.with_prec(None if b.prec is None else min(b.prec, a.prec - 1))

    # -- compatibility with the carrier relations -------------------------
    def _check_relations(self):
        """delta must send the relation ideal into itself."""
        spec = self.carrier
        rel = spec.relation
        if rel is None or not spec.vars:
            return
        if isinstance(rel, MonicRelation):
            raise UnsupportedCarrier(
                f"{spec.spec_id}: a delta-structure on a monic quotient is not supported")
        if isinstance(rel, DegreeTruncation):
            from .base_rings import _monomials_of_degree
            gens = list(_monomials_of_degree(spec.nvars, rel.order))
        else:
            gens = list(rel.generators)
        ambient = mk_ring("PolyQuotient", spec.base, spec.vars)
        amb = PresentedDeltaRing(
            ambient,
            {v: (None if d is None else ambient.element(d._d)) for v, d in self.table.items()},
            check_relations=False,
        )
        back = RingHom(ambient, spec, {v: spec.gen(v) for v in spec.vars})
        for g in gens:
            if any(self.table[spec.vars[i]] is None for i, e in enumerate(g) if e):
                continue
            img = back(amb.delta(ambient.element({g: 1})))
            if not img.is_zero():
                raise RelationViolated(
                    f"delta of the relation {g} is {img}, not zero in {spec.spec_id}")

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        return {
            "carrier": self.carrier.spec_id,
            "vars": list(self.carrier.vars),
            "depth": self.depth,
            "rule_table": {v: (None if d is None else elem_to_json(d)) for v, d in self.table.items()},
        }

    @classmethod
    def from_json(cls, obj) -> "PresentedDeltaRing":
        carrier = parse_spec_id(obj["carrier"])
        table = {v: (None if d is None else elem_from_json(d, carrier)) for v, d in obj["rule_table"].items()}
        return cls(carrier, table, depth=obj.get("depth"))


# --------------------------------------------------------------------------
# free delta-rings


def free_delta_ring(k: int, D: int, precision: Precision, names: Sequence[str] | None = None,
                    base: RingSpec | None = None) -> PresentedDeltaRing:
    """Truncated free delta-ring on k generators with delta-depth D.

    The carrier is the polynomial ring on delta^j(x_i), j <= D, over Z
    (or the given coefficient base).
    """
    if k < 1 or D < 1:
        raise BadPrecision("the free delta-ring needs k >= 1 and D >= 1")
    if names is None:
        names = ["x"] if k == 1 else [f"x{i}" for i in range(1, k + 1)]
    if len(names) != k:
        raise BadPrecision("one name per generator")
    if base is None:
        base = mk_ring("Integers", precision=precision)
    vars = [gen_name(n, j) for n in names for j in range(D + 1)]
    carrier = mk_ring("PolyQuotient", base, vars)
    table = {}
    for n in names:
        for j in range(D + 1):
            table[gen_name(n, j)] = carrier.gen(gen_name(n, j + 1)) if j < D else None
    return PresentedDeltaRing(carrier, table, name=f"free({','.join(names)};D={D})", depth=D)


def adjoin_free_delta_vars(A: PresentedDeltaRing, names: Sequence[str], depth: int) -> PresentedDeltaRing:
    """A{f_1, ..., f_r} truncated at delta-depth ``depth``, as a polynomial quotient."""
    spec = A.carrier
    new_vars = [gen_name(n, j) for n in names for j in range(depth + 1)]
    clash = set(new_vars) & set(spec.vars)
    if clash:
        raise SpecMismatch(f"generator names {sorted(clash)} already in use")
    all_vars = tuple(spec.vars) + tuple(new_vars)
    k = len(new_vars)
    rel = spec.relation
    if rel is None:
        ideal = None
    elif isinstance(rel, MonomialIdeal):
        ideal = MonomialIdeal(tuple(tuple(g) + (0,) * k for g in rel.generators))
    elif isinstance(rel, DegreeTruncation):
        from .base_rings import _monomials_of_degree
        ideal = MonomialIdeal(tuple(g + (0,) * k for g in _monomials_of_degree(spec.nvars, rel.order)))
    else:
        raise UnsupportedRelationSet(f"cannot adjoin variables to {spec.spec_id}")
    carrier = mk_ring("PolyQuotient", spec.base, all_vars, ideal)
    embed = RingHom(spec, carrier, {v: carrier.gen(v) for v in spec.vars}) if spec.vars else None
    table = {}
    for v, d in A.table.items():
        table[v] = None if d is None else embed(d)
    for n in names:
        for j in range(depth + 1):
            table[gen_name(n, j)] = carrier.gen(gen_name(n, j + 1)) if j < depth else None
    out = PresentedDeltaRing(carrier, table, name=f"{A.name}{{{','.join(names)}}}", depth=depth,
                             check_relations=False)
    out.embedding = embed
    return out


def embed_constant(A: PresentedDeltaRing, B: PresentedDeltaRing, a: RingElem) -> RingElem:
    """Image of a in B when B's carrier extends A's by new variables."""
    if A.carrier.nvars == 0:
        return B.carrier.from_int(a.constant_term()).with_prec(a.prec)
    k = B.carrier.nvars - A.carrier.nvars
    return B.carrier.element({m + (0,) * k: c for m, c in a._d.items()}, a.prec)


# --------------------------------------------------------------------------
# the delta-structure on Witt vectors


def delta_on_witt(x: WittVector, method: str = "universal") -> WittVector:
    """delta_W: W_n(R) -> W_{n-1}(R), the delta with phi_W = F.

    ``universal`` evaluates integral universal delta polynomials (no
    precision loss).  ``ghost`` divides ghost components by p and inverts the
    ghost map, losing digits, and is unavailable in characteristic p.
    """
    if x.length < 2:
        raise LengthUnderflow("delta on Witt vectors needs length at least 2")
    if method == "universal":
        return WittVector(tuple(_apply("delta", x.components, None, x.length - 1)))
    if method != "ghost":
        raise ValueError(f"unknown method {method!r}")
    spec = x.spec
    if spec.is_char_p:
        raise UnsupportedCarrier("ghost-route delta needs a carrier without p-torsion ambiguity")
    gx = ghost(x)
    gf = ghost(frobenius_universal(x))
    parts = []
    for m in range(x.length - 1):
        b, _ = div_exact_by_p(gf[m] - gx[m] ** spec.p, 1)
        parts.append(b)
    return from_ghost(parts, spec)


# --------------------------------------------------------------------------
# lifting ring maps to delta-maps into Witt vectors


@lru_cache(maxsize=None)
def cofree_components(p: int, n: int) -> tuple:
    """Integer polynomials L_m(y_0, ..., y_m) with y_j standing for delta^j y.

    The Witt vector (L_0, ..., L_{n-1}) has ghost components
    (y, phi y, ..., phi^{n-1} y); it is the canonical delta-map A -> W(A).
    """
    F = free_delta_ring(1, max(n, 1), Precision(p), names=["y"])
    y = F.carrier.gen("y")
    ghosts = [y]
    for _ in range(n - 1):
        ghosts.append(F.phi(ghosts[-1]))
    return F, tuple(from_ghost(ghosts, F.carrier).components)


class DeltaLift:
    """The delta-map A -> W_n(S) lifting a ring map f: A -> S."""

    def __init__(self, A: PresentedDeltaRing, f: RingHom, n: int):
        if n < 1:
            raise LengthUnderflow("Witt length must be positive")
        self.A, self.f, self.n = A, f, n
        self.F, self.L = cofree_components(A.p, n)
        self._cache: dict = {}

    def canonical(self, a: RingElem) -> WittVector:
        """s_A(a) in W_n(A): components L_m(a, delta a, ..., delta^m a)."""
        chain = [a]
        for _ in range(self.n - 1):
            chain.append(self.A.delta(chain[-1]))
        names = [gen_name("y", j) for j in range(self.F.carrier.nvars)]
        images = {v: (chain[j] if j < len(chain) else self.A.carrier.zero()) for j, v in enumerate(names)}
        sub = RingHom(self.F.carrier, self.A.carrier, images)
        prec = min((c.prec for c in chain if c.prec is not None), default=None)
        comps = []
        for m, L in enumerate(self.L):
            c = sub(L)
            comps.append(c.with_prec(min(prec, c.prec)) if prec is not None else c)
        return WittVector(tuple(comps))

    def __call__(self, a: RingElem) -> WittVector:
        a = self.A.carrier.coerce(a)
        key = a
        hit = self._cache.get(key)
        if hit is None:
            hit = map_witt(self.f, self.canonical(a))
            self._cache[key] = hit
        return hit


def delta_lift_hom(A: PresentedDeltaRing, f, n: int, target: RingSpec | None = None) -> DeltaLift:
    """Lift a generator assignment f (dict or RingHom) to a delta-map into W_n(S)."""
    if not isinstance(f, RingHom):
        if target is None:
            target = next(iter(f.values())).spec
        f = RingHom(A.carrier, target, f)
    return DeltaLift(A, f, n)


def delta_lift_via_ghost(A: PresentedDeltaRing, f: RingHom, a: RingElem, n: int) -> WittVector:
    """Oracle: from_ghost of (f(a), f(phi a), ..., f(phi^{n-1} a)) over the target."""
    vals = [a]
    for _ in range(n - 1):
        vals.append(A.phi(vals[-1]))
    return from_ghost([f(v) for v in vals], f.target)
