"""Exact normal-form arithmetic over a closed catalog of truncated rings.

Every carrier is a quotient ``C[x_1, ..., x_k] / I`` where ``C`` is ``Z``,
``Z/p^N`` or ``F_p`` and ``I`` is drawn from a small catalog:

* a monomial ideal (covers ``(x, y)^2``, nilpotency bounds ``x^a = 0``),
* a total-degree truncation (truncated power series),
* a single monic univariate relation (Eisenstein quotients such as ``u^2 - p``).

Each of these has a confluent normal form, so equality of elements is
decidable by comparing canonical representatives.

Elements over ``Z/p^N`` carry an absolute p-adic precision ``prec``: the
coefficients are only meaningful modulo ``p^prec``.  Exact division by ``p``
lowers it, p-th powers and multiplication by ``p`` raise it (capped at ``N``).
Elements over ``Z`` are exact and have ``prec = None``.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import random
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping

from .errors import (
    BadPrecision,
    NotAUnit,
    NotDivisible,
    ParseError,
    PrecisionExhausted,
    RelationViolated,
    SpecMismatch,
    UnsupportedQuery,
    UnsupportedRelationSet,
)

COEFFICIENT_KINDS = ("Integers", "IntegersModPN", "PrimeField")
COMPOSITE_KINDS = ("PolyQuotient", "PowerSeriesTrunc")
KINDS = COEFFICIENT_KINDS + COMPOSITE_KINDS

Monomial = tuple  # exponent vector, one entry per variable


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def v_p(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class Precision:
    """Truncation parameters shared by a computation."""

    p: int
    padic_digits: int = 4
    witt_length: int = 3
    delta_depth: int = 2
    series_order: int = 8

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise BadPrecision(f"p={self.p!r} is not prime")
        for name in ("padic_digits", "witt_length", "delta_depth", "series_order"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise BadPrecision(f"{name}={value!r} must be a positive integer")

    def replace(self, **changes) -> "Precision":
        return dataclasses.replace(self, **changes)


# --------------------------------------------------------------------------
# relation catalog


@dataclass(frozen=True)
class MonomialIdeal:
    """Ideal generated by monomials; a monomial is zero iff some generator divides it."""

    generators: tuple

    def contains(self, m: Monomial) -> bool:
        for g in self.generators:
            if all(a >= b for a, b in zip(m, g)):
                return True
        return False


@dataclass(frozen=True)
class DegreeTruncation:
    """All monomials of total degree >= order vanish."""

    order: int


@dataclass(frozen=True)
class MonicRelation:
    """Single univariate relation ``u^e + c_{e-1} u^{e-1} + ... + c_0``.

    ``coeffs`` is ascending and ends with the leading 1.
    """

    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def maximal_ideal_power(nvars: int, k: int) -> MonomialIdeal:
    """The monomial ideal ``(x_1, ..., x_n)^k``."""
    gens = tuple(m for m in _monomials_of_degree(nvars, k))
    return MonomialIdeal(gens)


def _monomials_of_degree(nvars: int, k: int) -> Iterator[Monomial]:
    if nvars == 0:
        if k == 0:
            yield ()
        return
    if nvars == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _monomials_of_degree(nvars - 1, k - first):
            yield (first,) + rest


def grlex_key(m: Monomial):
    return (sum(m), m)


# --------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class RingSpec:
    """A presented carrier ring.

    ``coeff_kind`` is the coefficient ring kind; for the coefficient kinds
    themselves it equals ``kind``.  ``digits`` is ``N`` for ``Z/p^N`` (1 for
    ``F_p``) and ``None`` for ``Z``.  ``p`` is recorded even over ``Z`` since
    Witt vectors and delta structures depend on it.
    """

    kind: str
    coeff_kind: str
    p: int
    digits: int | None
    vars: tuple = ()
    relation: object = None

    # -- basic structure -------------------------------------------------
    @property
    def modulus(self) -> int | None:
        return None if self.digits is None else self.p**self.digits

    @property
    def nvars(self) -> int:
        return len(self.vars)

    @property
    def is_modular(self) -> bool:
        return self.digits is not None

    @property
    def is_char_p(self) -> bool:
        return self.digits == 1

    @property
    def base(self) -> "RingSpec":
        if self.kind in COEFFICIENT_KINDS:
            return self
        return RingSpec(self.coeff_kind, self.coeff_kind, self.p, self.digits)

    @cached_property
    def spec_id(self) -> str:
        if self.coeff_kind == "Integers":
            head = f"Z(p={self.p})"
        elif self.coeff_kind == "PrimeField":
            head = f"F_{self.p}"
        else:
            head = f"Z/{self.p}^{self.digits}"
        if self.kind in COEFFICIENT_KINDS:
            return head
        names = ",".join(self.vars)
        if self.kind == "PowerSeriesTrunc":
            return f"{head}[[{names}]]/O({self.relation.order})"
        rel = self.relation
        if rel is None:
            return f"{head}[{names}]"
        if isinstance(rel, MonomialIdeal):
            gens = sorted(rel.generators, key=grlex_key, reverse=True)
            body = ",".join(format_monomial(g, self.vars) for g in gens)
        else:
            body = format_poly({(i,): c for i, c in enumerate(rel.coeffs) if c}, self.vars)
        return f"{head}[{names}]/({body})"

    def __str__(self):
        return self.spec_id

    def var_index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise SpecMismatch(f"{name!r} is not a generator of {self.spec_id}") from None

    # -- element construction --------------------------------------------
    @property
    def full_prec(self) -> int | None:
        return self.digits

    def element(self, coeffs: Mapping, prec: int | None = None) -> "RingElem":
        """Build an element from a monomial -> integer map, normalizing it."""
        prec = self._check_prec(prec)
        d = {}
        for m, c in coeffs.items():
            m = tuple(m)
            if len(m) != self.nvars:
                raise SpecMismatch(f"monomial {m} has wrong arity for {self.spec_id}")
            if c:
                d[m] = d.get(m, 0) + int(c)
        return RingElem._make(self, self._normalize(d, prec), prec)

    def _check_prec(self, prec):
        if self.digits is None:
            return None
        if prec is None:
            return self.digits
        if not 0 <= prec <= self.digits:
            raise PrecisionExhausted(f"precision {prec} outside [0, {self.digits}]")
        return prec

    def from_int(self, c: int, prec: int | None = None) -> "RingElem":
        return self.element({(0,) * self.nvars: c}, prec)

    def zero(self) -> "RingElem":
        return self.from_int(0)

    def one(self) -> "RingElem":
        return self.from_int(1)

    def gen(self, name: str) -> "RingElem":
        m = [0] * self.nvars
        m[self.var_index(name)] = 1
        return self.element({tuple(m): 1})

    def gens(self) -> list:
        return [self.gen(v) for v in self.vars]

    def coerce(self, x) -> "RingElem":
        if isinstance(x, RingElem):
            if x.spec != self:
                raise SpecMismatch(f"{x.spec.spec_id} vs {self.spec_id}")
            return x
        if isinstance(x, int):
            return self.from_int(x)
        if isinstance(x, str):
            return self.parse(x)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self.spec_id}")

    def parse(self, text: str) -> "RingElem":
        """Parse a small polynomial expression in this spec's generators."""
        return self.element(parse_poly(text, self.vars))

    # -- normal form -----------------------------------------------------
    def _prune(self, m: Monomial) -> bool:
        rel = self.relation
        if rel is None:
            return False
        if isinstance(rel, MonomialIdeal):
            return rel.contains(m)
        if isinstance(rel, DegreeTruncation):
            return sum(m) >= rel.order
        return False

    def _normalize(self, d: dict, prec: int | None) -> dict:
        rel = self.relation
        if isinstance(rel, MonicRelation):
            d = self._reduce_monic(d, rel)
        elif rel is not None:
            d = {m: c for m, c in d.items() if not self._prune(m)}
        if prec is None:
            return {m: c for m, c in d.items() if c}
        mod = self.p**prec
        out = {}
        for m, c in d.items():
            c %= mod
            if c:
                out[m] = c
        return out

    @staticmethod
    def _reduce_monic(d: dict, rel: MonicRelation) -> dict:
        e = rel.degree
        if not d or max(m[0] for m in d) < e:
            return d
        top = max(m[0] for m in d)
        coeffs = [0] * (top + 1)
        for (k,), c in d.items():
            coeffs[k] += c
        low = rel.coeffs[:-1]
        for k in range(top, e - 1, -1):
            c = coeffs[k]
            if c:
                coeffs[k] = 0
                shift = k - e
                for i, r in enumerate(low):
                    if r:
                        coeffs[shift + i] -= c * r
        return {(k,): c for k, c in enumerate(coeffs[:e]) if c}

    # -- raw arithmetic on normalized dicts ------------------------------
    def _add_raw(self, a: dict, b: dict, prec) -> dict:
        out = dict(a)
        for m, c in b.items():
            out[m] = out.get(m, 0) + c
        return self._finish(out, prec)

    def _mul_raw(self, a: dict, b: dict, prec) -> dict:
        if not a or not b:
            return {}
        out = {}
        prune = self.relation is not None and not isinstance(self.relation, MonicRelation)
        if self.nvars == 0:
            return self._finish({(): a.get((), 0) * b.get((), 0)}, prec)
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                if prune and self._prune(m):
                    continue
                out[m] = out.get(m, 0) + ca * cb
        return self._normalize(out, prec)

    def _finish(self, d: dict, prec) -> dict:
        if prec is None:
            return {m: c for m, c in d.items() if c}
        mod = self.p**prec
        out = {}
        for m, c in d.items():
            c %= mod
            if c:
                out[m] = c
        return out

    def _pow_raw(self, a: dict, e: int, prec) -> dict:
        result = self._finish({(0,) * self.nvars: 1}, prec)
        base = a
        while e:
            if e & 1:
                result = self._mul_raw(result, base, prec)
            e >>= 1
            if e:
                base = self._mul_raw(base, base, prec)
        return result

    # -- finiteness and enumeration --------------------------------------
    @cached_property
    def standard_monomials(self) -> tuple | None:
        """Monomials spanning the ring over its coefficients, or None if infinite."""
        n = self.nvars
        rel = self.relation
        if n == 0:
            return ((),)
        if isinstance(rel, MonicRelation):
            return tuple((k,) for k in range(rel.degree))
        if isinstance(rel, DegreeTruncation):
            out = []
            for k in range(rel.order):
                out.extend(sorted(_monomials_of_degree(n, k)))
            return tuple(out)
        if isinstance(rel, MonomialIdeal):
            bounds = []
            for i in range(n):
                pure = [g[i] for g in rel.generators if all(g[j] == 0 for j in range(n) if j != i)]
                if not pure:
                    return None
                bounds.append(min(pure))
            out = [m for m in itertools.product(*(range(b) for b in bounds)) if not rel.contains(m)]
            return tuple(sorted(out, key=grlex_key))
        return None

    def size(self) -> int | None:
        mons = self.standard_monomials
        if mons is None or self.modulus is None:
            return None
        return self.modulus ** len(mons)

    def elements(self) -> Iterator["RingElem"]:
        """Enumerate every element (finite specs only), in a fixed order."""
        mons = self.standard_monomials
        if mons is None or self.modulus is None:
            raise UnsupportedQuery(f"{self.spec_id} is infinite")
        for coeffs in itertools.product(range(self.modulus), repeat=len(mons)):
            yield RingElem._make(self, {m: c for m, c in zip(mons, coeffs) if c}, self.digits)

    def random_element(self, rng: random.Random, bound: int = 5, terms: int = 3) -> "RingElem":
        mons = self.standard_monomials
        if mons is not None:
            if self.modulus is not None:
                coeffs = {m: rng.randrange(self.modulus) for m in mons}
            else:
                coeffs = {m: rng.randint(-bound, bound) for m in mons if rng.random() < 0.6}
            return self.element(coeffs)
        coeffs = {}
        for _ in range(terms):
            m = [0] * self.nvars
            for _ in range(rng.randint(0, 2)):
                m[rng.randrange(self.nvars)] += 1
            hi = self.modulus if self.modulus is not None else 2 * bound + 1
            c = rng.randrange(hi) - (0 if self.modulus is not None else bound)
            coeffs[tuple(m)] = coeffs.get(tuple(m), 0) + c
        return self.element(coeffs)

    # -- locality --------------------------------------------------------
    @cached_property
    def is_local(self) -> bool:
        """True when the ring is local with residue field F_p."""
        if self.modulus is None:
            return False
        rel = self.relation
        if self.nvars == 0 or isinstance(rel, DegreeTruncation):
            return True
        if isinstance(rel, MonomialIdeal):
            return self.standard_monomials is not None
        if isinstance(rel, MonicRelation):
            return all(c % self.p == 0 for c in rel.coeffs[:-1])
        return False


def mk_ring(kind: str, base: RingSpec | None = None, vars=(), relations=None,
            precision: Precision | None = None) -> RingSpec:
    """Construct a catalog ring.

    ``relations`` may be a relation object, a list of monomial strings
    (monomial ideal), a single polynomial string (monic relation) or, for
    ``PowerSeriesTrunc``, the truncation order.
    """
    if kind not in KINDS:
        raise UnsupportedRelationSet(f"unknown ring kind {kind!r}")
    if kind in COEFFICIENT_KINDS:
        if precision is None:
            raise BadPrecision(f"{kind} needs a precision")
        if kind == "Integers":
            return RingSpec(kind, kind, precision.p, None)
        if kind == "PrimeField":
            return RingSpec(kind, kind, precision.p, 1)
        return RingSpec(kind, kind, precision.p, precision.padic_digits)
    if base is None:
        if precision is None:
            raise BadPrecision(f"{kind} needs a base ring or a precision")
        base = mk_ring("IntegersModPN", precision=precision)
    if base.kind not in COEFFICIENT_KINDS:
        raise UnsupportedRelationSet("composite specs nest only over Z, Z/p^N or F_p")
    vars = tuple(vars)
    if not vars or len(set(vars)) != len(vars):
        raise UnsupportedRelationSet(f"bad variable list {vars!r}")
    for v in vars:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v):
            raise UnsupportedRelationSet(f"bad variable name {v!r}")
    if kind == "PowerSeriesTrunc":
        rel = relations
        if rel is None:
            if precision is None:
                raise BadPrecision("PowerSeriesTrunc needs an order")
            rel = precision.series_order
        if isinstance(rel, int):
            rel = DegreeTruncation(rel)
        if not isinstance(rel, DegreeTruncation) or rel.order < 1:
            raise UnsupportedRelationSet("PowerSeriesTrunc takes a positive truncation order")
        return RingSpec(kind, base.kind, base.p, base.digits, vars, rel)
    rel = _coerce_relation(relations, vars, base)
    return RingSpec(kind, base.kind, base.p, base.digits, vars, rel)


def _coerce_relation(relations, vars, base):
    if relations is None or isinstance(relations, (MonomialIdeal, MonicRelation)):
        rel = relations
    elif isinstance(relations, str):
        poly = parse_poly(relations, vars)
        rel = _monic_from_poly(poly, vars)
    elif isinstance(relations, (list, tuple)):
        gens = []
        for item in relations:
            poly = parse_poly(item, vars) if isinstance(item, str) else {tuple(item): 1}
            if len(poly) != 1 or list(poly.values())[0] != 1:
                raise UnsupportedRelationSet(f"{item!r} is not a monomial")
            gens.append(next(iter(poly)))
        rel = MonomialIdeal(tuple(gens))
    else:
        raise UnsupportedRelationSet(f"unsupported relation set {relations!r}")
    if isinstance(rel, MonomialIdeal):
        if not rel.generators:
            return None
        for g in rel.generators:
            if len(g) != len(vars) or any(e < 0 for e in g):
                raise UnsupportedRelationSet(f"generator {g} has wrong shape")
            if sum(g) == 0:
                raise UnsupportedRelationSet("the unit ideal is not a supported relation")
        gens = tuple(sorted(set(tuple(g) for g in rel.generators), key=grlex_key))
        rel = MonomialIdeal(gens)
    if isinstance(rel, MonicRelation):
        if len(vars) != 1:
            raise UnsupportedRelationSet("a monic relation needs exactly one variable")
        if rel.degree < 1 or rel.coeffs[-1] != 1:
            raise UnsupportedRelationSet("relation must be monic of positive degree")
        if base.modulus is not None:
            m = base.modulus
            rel = MonicRelation(tuple((c + m // 2) % m - m // 2 for c in rel.coeffs[:-1]) + (1,))
    return rel


def _monic_from_poly(poly: dict, vars) -> MonicRelation:
    if len(vars) != 1:
        raise UnsupportedRelationSet("a polynomial relation needs exactly one variable")
    deg = max(m[0] for m in poly)
    coeffs = [0] * (deg + 1)
    for (k,), c in poly.items():
        coeffs[k] = c
    if coeffs[-1] != 1:
        raise UnsupportedRelationSet("relation must be monic")
    return MonicRelation(tuple(coeffs))


# --------------------------------------------------------------------------
# elements


class RingElem:
    """Immutable element of a :class:`RingSpec`, stored in normal form."""

    __slots__ = ("spec", "_d", "prec", "_hash")

    def __init__(self, spec: RingSpec, coeffs: Mapping | None = None, prec: int | None = None):
        e = spec.element(coeffs or {}, prec)
        self.spec, self._d, self.prec, self._hash = e.spec, e._d, e.prec, None

    @classmethod
    def _make(cls, spec, d, prec):
        obj = object.__new__(cls)
        obj.spec = spec
        obj._d = d
        obj.prec = prec
        obj._hash = None
        return obj

    # -- inspection ------------------------------------------------------
    @property
    def coeffs(self) -> dict:
        return dict(self._d)

    def terms(self) -> list:
        """(monomial, coefficient) pairs in ascending graded-lex order."""
        return sorted(self._d.items(), key=lambda t: grlex_key(t[0]))

    def is_zero(self) -> bool:
        return not self._d

    def constant_term(self) -> int:
        return self._d.get((0,) * self.spec.nvars, 0)

    def is_constant(self) -> bool:
        zero = (0,) * self.spec.nvars
        return all(m == zero for m in self._d)

    def valuation(self) -> int | None:
        """Minimal p-adic valuation of the coefficients (prec for zero, None over Z)."""
        if not self._d:
            return self.prec
        return min(v_p(c, self.spec.p) for c in self._d.values())

    def with_prec(self, prec: int | None) -> "RingElem":
        """Forget digits beyond ``prec`` (never adds information)."""
        if self.spec.digits is None or prec is None:
            return self
        if prec > self.prec:
            raise PrecisionExhausted(f"cannot raise precision {self.prec} to {prec}")
        if prec == self.prec:
            return self
        return RingElem._make(self.spec, self.spec._finish(self._d, prec), prec)

    def agrees(self, other) -> bool:
        """Equality at the smaller of the two precisions."""
        other = self.spec.coerce(other) if not isinstance(other, RingElem) else other
        if other.spec != self.spec:
            return False
        if self.spec.digits is None:
            return self._d == other._d
        k = min(self.prec, other.prec)
        return self.with_prec(k)._d == other.with_prec(k)._d

    # -- arithmetic ------------------------------------------------------
    def _other(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.spec != self.spec:
                raise SpecMismatch(f"{self.spec.spec_id} vs {other.spec.spec_id}")
            return other
        if isinstance(other, int):
            return self.spec.from_int(other)
        return NotImplemented

    @staticmethod
    def _minp(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        prec = self._minp(self.prec, other.prec)
        return RingElem._make(self.spec, self.spec._add_raw(self._d, other._d, prec), prec)

    __radd__ = __add__

    def __neg__(self):
        return RingElem._make(self.spec, self.spec._finish({m: -c for m, c in self._d.items()}, self.prec),
                              self.prec)

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def _mul_prec(self, other):
        if self.spec.digits is None:
            return None
        va, vb = self.valuation(), other.valuation()
        return min(self.spec.digits, self.prec + vb, other.prec + va)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        other = self._other(other)
        if other is NotImplemented:
            return other
        prec = self._mul_prec(other)
        return RingElem._make(self.spec, self.spec._mul_raw(self._d, other._d, prec), prec)

    __rmul__ = __mul__

    def scale(self, c: int) -> "RingElem":
        """Multiply by an integer, crediting the precision gained from p | c."""
        if self.spec.digits is None:
            prec = None
        elif c == 0:
            prec = self.spec.digits
        else:
            prec = min(self.spec.digits, self.prec + v_p(c, self.spec.p))
        return RingElem._make(self.spec, self.spec._finish({m: a * c for m, a in self._d.items()}, prec), prec)

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a non-negative integer")
        p = self.spec.p
        k, m = 0, e
        while m and m % p == 0:
            k += 1
            m //= p
        x = self._pow_plain(m) if e else self.spec.one()
        for _ in range(k):
            x = x._pow_p()
        return x

    def _pow_plain(self, e: int) -> "RingElem":
        result = self.spec.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def _pow_p(self) -> "RingElem":
        p = self.spec.p
        if self.spec.digits is None:
            prec = None
        else:
            r, v = self.prec, self.valuation()
            prec = min(self.spec.digits, r + 1 + (p - 1) * v, r * p) if r >= 1 else 0
        work = self.spec.digits if prec is not None else None
        d = self.spec._pow_raw(self._d, p, work)
        return RingElem._make(self.spec, self.spec._finish(d, prec), prec)

    # -- comparison ------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, int):
            other = self.spec.from_int(other, self.prec)
        if not isinstance(other, RingElem):
            return NotImplemented
        return self.spec == other.spec and self.prec == other.prec and self._d == other._d

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.spec, self.prec, frozenset(self._d.items())))
        return self._hash

    def sort_key(self):
        return (self.prec if self.prec is not None else -1,
                tuple((grlex_key(m), c) for m, c in self.terms()))

    def __str__(self):
        body = format_poly(self._d, self.spec.vars)
        if self.spec.digits is not None and self.prec < self.spec.digits:
            body += f" + O({self.spec.p}^{self.prec})"
        return body

    def __repr__(self):
        return f"RingElem({self.spec.spec_id}: {self})"


# --------------------------------------------------------------------------
# unit detection, exact division, homomorphisms


def is_unit(a: RingElem) -> bool:
    """Residue-field unit test; defined on local catalog carriers only."""
    spec = a.spec
    if not spec.is_local:
        raise UnsupportedQuery(f"unit detection needs a local carrier, got {spec.spec_id}")
    if a.prec < 1:
        raise PrecisionExhausted("no residue digit left to test")
    return a.constant_term() % spec.p != 0


def invert(a: RingElem) -> RingElem:
    """Inverse of a unit: scale to 1 - n with n nilpotent and sum the geometric series."""
    if not is_unit(a):
        raise NotAUnit(f"{a} is not a unit in {a.spec.spec_id}")
    spec = a.spec
    c0inv = pow(a.constant_term(), -1, spec.modulus)
    n = spec.one() - a.scale(c0inv)
    total = spec.one()
    term = spec.one()
    for _ in range(100_000):
        term = term * n
        if term.is_zero():
            return total.scale(c0inv).with_prec(a.prec)
        total = total + term
    raise NotAUnit("geometric series failed to terminate")  # pragma: no cover


def div_exact_by_p(a: RingElem, k: int = 1) -> tuple:
    """Return ``(b, k)`` with ``p^k b = a``; b is meaningful modulo ``p^(prec - k)``."""
    spec = a.spec
    q = spec.p**k
    if spec.digits is not None and k > a.prec:
        raise PrecisionExhausted(f"dividing by {spec.p}^{k} at precision {a.prec}")
    out = {}
    for m, c in a._d.items():
        if c % q:
            raise NotDivisible(f"coefficient {c} of {a} is not divisible by {spec.p}^{k}")
        out[m] = c // q
    prec = None if spec.digits is None else a.prec - k
    return RingElem._make(spec, spec._finish(out, prec), prec), k


class RingHom:
    """Homomorphism out of a catalog ring, given by images of generators.

    Construction checks that the images respect the source relations and
    that the source characteristic vanishes in the target.
    """

    def __init__(self, source: RingSpec, target: RingSpec, images: Mapping):
        self.source, self.target = source, target
        missing = [v for v in source.vars if v not in images]
        if missing:
            raise SpecMismatch(f"no image given for {missing}")
        self.images = tuple(target.coerce(images[v]) for v in source.vars)
        self._powers: dict = {}
        self._check()

    def _check(self):
        s, t = self.source, self.target
        if s.modulus is not None:
            if t.modulus is None or t.p != s.p or t.digits > s.digits:
                raise RelationViolated(f"{s.p}^{s.digits} does not vanish in {t.spec_id}")
        rel = s.relation
        if rel is None:
            return
        if isinstance(rel, MonomialIdeal):
            probes = [s.element({g: 1}) for g in rel.generators]
        elif isinstance(rel, DegreeTruncation):
            probes = [s.element({m: 1}) for m in _monomials_of_degree(s.nvars, rel.order)]
        else:
            probes = [_unreduced_relation(s, rel)]
        for probe in probes:
            img = self._apply_dict(probe)
            if not img.is_zero():
                raise RelationViolated(f"relation image {img} is nonzero in {t.spec_id}")

    def _power(self, i: int, e: int) -> RingElem:
        key = (i, e)
        if key not in self._powers:
            self._powers[key] = self.images[i] ** e
        return self._powers[key]

    def _apply_dict(self, probe) -> RingElem:
        t = self.target
        acc = t.zero()
        for m, c in (probe.items() if isinstance(probe, dict) else probe._d.items()):
            term = t.from_int(c)
            for i, e in enumerate(m):
                if e:
                    term = term * self._power(i, e)
            acc = acc + term
        return acc

    def __call__(self, a: RingElem) -> RingElem:
        if a.spec != self.source:
            raise SpecMismatch(f"{a.spec.spec_id} is not the source {self.source.spec_id}")
        img = self._apply_dict(a)
        if a.prec is not None and img.prec is not None and a.prec < img.prec:
            img = img.with_prec(a.prec)
        return img


def _unreduced_relation(spec: RingSpec, rel: MonicRelation) -> dict:
    return {(i,): c for i, c in enumerate(rel.coeffs) if c}


def hom_apply(f: Mapping, a: RingElem, target: RingSpec | None = None) -> RingElem:
    """Image of ``a`` under the homomorphism sending each generator ``v`` to ``f[v]``."""
    if target is None:
        if not f:
            raise SpecMismatch("target spec required when there are no generators")
        target = next(iter(f.values())).spec
    return RingHom(a.spec, target, f)(a)


# --------------------------------------------------------------------------
# text and JSON


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\^)|(\*)|(\+)|(-))")


def parse_poly(text: str, vars) -> dict:
    """Parse ``"u^2 - 2"``-style expressions into a monomial -> int map."""
    vars = tuple(vars)
    pos, tokens = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot parse {text!r} at offset {pos}")
        pos = m.end()
        kind = m.lastindex
        tokens.append((kind, m.group(kind)))
    out: dict = {}
    i, sign, first = 0, 1, True
    if not tokens:
        raise ParseError("empty expression")
    while i < len(tokens):
        if tokens[i][0] in (5, 6):
            sign = 1 if tokens[i][0] == 5 else -1
            i += 1
        elif not first:
            raise ParseError(f"expected + or - in {text!r}")
        first = False
        coef, mono, seen = 1, [0] * len(vars), False
        while i < len(tokens) and tokens[i][0] in (1, 2, 4):
            kind, val = tokens[i]
            i += 1
            if kind == 4:
                continue
            if kind == 1:
                base = int(val)
            else:
                if val not in vars:
                    raise ParseError(f"unknown symbol {val!r}; generators are {list(vars)}")
                base = None
            exp = 1
            if i < len(tokens) and tokens[i][0] == 3:
                if i + 1 >= len(tokens) or tokens[i + 1][0] != 1:
                    raise ParseError(f"bad exponent in {text!r}")
                exp = int(tokens[i + 1][1])
                i += 2
            if base is None:
                mono[vars.index(val)] += exp
            else:
                coef *= base**exp
            seen = True
        if not seen:
            raise ParseError(f"dangling sign in {text!r}")
        key = tuple(mono)
        out[key] = out.get(key, 0) + sign * coef
        sign = 1
    return {m: c for m, c in out.items() if c}


def poly_symbols(text: str) -> list:
    """Identifiers appearing in an expression, in order of first appearance."""
    seen = []
    for name in re.findall(r"[A-Za-z_][A-Za-z0-9_]*", text):
        if name not in seen:
            seen.append(name)
    return seen


def format_monomial(m: Monomial, vars) -> str:
    parts = []
    for name, e in zip(vars, m):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def format_poly(d: Mapping, vars) -> str:
    if not d:
        return "0"
    out = []
    for m, c in sorted(d.items(), key=lambda t: grlex_key(t[0]), reverse=True):
        mono = format_monomial(m, vars)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if mono == "1":
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        out.append((sign, body))
    s = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        s += f" {sign} {body}"
    return s


_SPEC_HEAD = re.compile(r"^(?:Z\(p=(\d+)\)|Z/(\d+)\^(\d+)|F_(\d+))")


def parse_spec_id(spec_id: str) -> RingSpec:
    """Inverse of :attr:`RingSpec.spec_id`."""
    m = _SPEC_HEAD.match(spec_id)
    if not m:
        raise ParseError(f"unrecognized spec id {spec_id!r}")
    if m.group(1):
        base = mk_ring("Integers", precision=Precision(int(m.group(1))))
    elif m.group(2):
        base = mk_ring("IntegersModPN", precision=Precision(int(m.group(2)), padic_digits=int(m.group(3))))
    else:
        base = mk_ring("PrimeField", precision=Precision(int(m.group(4))))
    rest = spec_id[m.end():]
    if not rest:
        return base
    ps = re.fullmatch(r"\[\[([^\]]+)\]\]/O\((\d+)\)", rest)
    if ps:
        return mk_ring("PowerSeriesTrunc", base, ps.group(1).split(","), int(ps.group(2)))
    pq = re.fullmatch(r"\[([^\]]+)\](?:/\((.*)\))?", rest)
    if not pq:
        raise ParseError(f"unrecognized spec id {spec_id!r}")
    vars = pq.group(1).split(",")
    body = pq.group(2)
    if body is None:
        return mk_ring("PolyQuotient", base, vars)
    if re.search(r"[+-]", body):
        return mk_ring("PolyQuotient", base, vars, body)
    return mk_ring("PolyQuotient", base, vars, body.split(","))


def elem_to_json(a: RingElem) -> dict:
    terms = []
    for m, c in a.terms():
        mono = [[v, e] for v, e in zip(a.spec.vars, m) if e]
        terms.append({"monomial": mono, "coeff": str(c)})
    obj = {"spec_id": a.spec.spec_id, "terms": terms}
    if a.spec.digits is not None and a.prec < a.spec.digits:
        obj["prec"] = a.prec
    return obj


def elem_from_json(obj: Mapping, spec: RingSpec | None = None) -> RingElem:
    if spec is None:
        spec = parse_spec_id(obj["spec_id"])
    elif obj.get("spec_id", spec.spec_id) != spec.spec_id:
        raise SpecMismatch(f"{obj['spec_id']} vs {spec.spec_id}")
    coeffs = {}
    for t in obj["terms"]:
        m = [0] * spec.nvars
        for name, e in t["monomial"]:
            m[spec.var_index(name)] += int(e)
        coeffs[tuple(m)] = coeffs.get(tuple(m), 0) + int(t["coeff"])
    return spec.element(coeffs, obj.get("prec"))


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
