"""Truncated p-typical Witt vectors W_n(R) over catalog rings.

Addition, multiplication, negation (p = 2) and Frobenius evaluate the
universal polynomials of :mod:`prismkit.witt_polys`.  Verschiebung is kept
length-preserving, ``V(a_0, ..., a_{n-1}) = (0, a_0, ..., a_{n-2})``, and
Frobenius drops one component, ``F: W_n -> W_{n-1}``.

Components may carry reduced p-adic precision (after ghost inversion); the
result of a polynomial operation is known to the minimum precision of the
inputs it reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from . import witt_polys
from .base_rings import (
    RingElem,
    RingHom,
    RingSpec,
    div_exact_by_p,
    elem_from_json,
    elem_to_json,
    invert,
    is_unit,
    parse_spec_id,
)
from .errors import (
    LengthUnderflow,
    NonIntegralGhost,
    NotAUnit,
    NotDivisible,
    SpecMismatch,
)


@dataclass(frozen=True)
class WittVector:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise LengthUnderflow("a Witt vector needs at least one component")
        spec = comps[0].spec
        for c in comps:
            if not isinstance(c, RingElem) or c.spec != spec:
                raise SpecMismatch("Witt components must share one spec")
        object.__setattr__(self, "components", comps)

    @property
    def spec(self) -> RingSpec:
        return self.components[0].spec

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def length(self) -> int:
        return len(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def agrees(self, other: "WittVector") -> bool:
        return (self.spec == other.spec and self.length == other.length
                and all(a.agrees(b) for a, b in zip(self.components, other.components)))

    def with_prec(self, prec) -> "WittVector":
        return WittVector(tuple(c.with_prec(min(prec, c.prec)) if c.prec is not None else c
                                for c in self.components))

    def full_prec(self) -> "WittVector":
        """Same representatives, declared at full precision (for exhaustive sweeps)."""
        d = self.spec.digits
        return WittVector(tuple(RingElem._make(c.spec, c._d, d) for c in self.components))

    def sort_key(self):
        return tuple(c.sort_key() for c in self.components)

    def __add__(self, other):
        return witt_add(self, other)

    def __sub__(self, other):
        return witt_sub(self, other)

    def __mul__(self, other):
        if isinstance(other, int):
            return witt_mul(self, witt_from_int(other, self.spec, self.length))
        return witt_mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return witt_neg(self)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    def __repr__(self):
        return f"WittVector[{self.spec.spec_id}]{self}"


# --------------------------------------------------------------------------
# polynomial evaluation


def _check_pair(x: WittVector, y: WittVector):
    if x.spec != y.spec:
        raise SpecMismatch(f"{x.spec.spec_id} vs {y.spec.spec_id}")
    if x.length != y.length:
        raise SpecMismatch(f"lengths {x.length} and {y.length} differ")


def _min_prec(elems: Iterable[RingElem]):
    precs = [e.prec for e in elems if e.prec is not None]
    return min(precs) if precs else None


def _evaluate(form: tuple, values: dict, spec: RingSpec, prec) -> RingElem:
    """Evaluate an unpacked universal polynomial at ring values keyed by slot."""
    zero_slots = {s for s, v in values.items() if v.is_zero()}
    work = spec.digits
    if spec.nvars == 0:
        ints = {s: v.constant_term() for s, v in values.items()}
        mod = spec.modulus
        acc = 0
        cache: dict = {}
        for coeff, mono in form:
            term = coeff
            for slot, e in mono:
                if slot in zero_slots:
                    term = 0
                    break
                key = (slot, e)
                pw = cache.get(key)
                if pw is None:
                    pw = pow(ints[slot], e, mod) if mod else ints[slot] ** e
                    cache[key] = pw
                term *= pw
            acc += term
        return spec.element({(): acc}, prec) if spec.digits is not None else spec.element({(): acc})
    cache = {}
    acc: dict = {}
    one = {(0,) * spec.nvars: 1}
    for coeff, mono in form:
        term = one
        for slot, e in mono:
            if slot in zero_slots:
                term = None
                break
            key = (slot, e)
            pw = cache.get(key)
            if pw is None:
                pw = spec._pow_raw(values[slot]._d, e, work)
                cache[key] = pw
            term = spec._mul_raw(term, pw, work)
            if not term:
                break
        if not term:
            continue
        for m, c in term.items():
            acc[m] = acc.get(m, 0) + coeff * c
    out = RingElem._make(spec, spec._finish(acc, work), work)
    return out.with_prec(prec) if prec is not None else out


def _apply(op: str, xs: Sequence[RingElem], ys: Sequence[RingElem] | None, count: int) -> list:
    tab = witt_polys.table(xs[0].spec.p)
    L = tab.layout
    spec = xs[0].spec
    out = []
    for i in range(count):
        k = tab.arity(op, i)
        values = {L.a(j): xs[j] for j in range(k)}
        used = list(xs[:k])
        if ys is not None:
            values.update({L.b(j): ys[j] for j in range(k)})
            used += list(ys[:k])
        out.append(_evaluate(tab.unpacked(op, i), values, spec, _min_prec(used)))
    return out


# --------------------------------------------------------------------------
# ring structure


def witt_add(x: WittVector, y: WittVector) -> WittVector:
    _check_pair(x, y)
    return WittVector(tuple(_apply("sum", x.components, y.components, x.length)))


def witt_mul(x: WittVector, y: WittVector) -> WittVector:
    _check_pair(x, y)
    return WittVector(tuple(_apply("product", x.components, y.components, x.length)))


def witt_neg(x: WittVector) -> WittVector:
    if x.p != 2:
        return WittVector(tuple(-c for c in x.components))
    return WittVector(tuple(_apply("negation", x.components, None, x.length)))


def witt_sub(x: WittVector, y: WittVector) -> WittVector:
    return witt_add(x, witt_neg(y))


def witt_zero(spec: RingSpec, n: int) -> WittVector:
    return WittVector(tuple(spec.zero() for _ in range(n)))


def witt_one(spec: RingSpec, n: int) -> WittVector:
    return teichmuller(spec.one(), n)


@lru_cache(maxsize=None)
def int_witt_components(p: int, c: int, n: int) -> tuple:
    """Witt components of the integer c in W_n(Z), by exact ghost inversion."""
    comps = []
    for m in range(n):
        acc = c - sum(p**i * comps[i] ** (p ** (m - i)) for i in range(m))
        q, r = divmod(acc, p**m)
        if r:  # pragma: no cover - integers always have integral components
            raise NonIntegralGhost(f"integer {c} has non-integral component {m}")
        comps.append(q)
    return tuple(comps)


def witt_from_int(c: int, spec: RingSpec, n: int) -> WittVector:
    """Image of the integer c under Z -> W_n(spec)."""
    return WittVector(tuple(spec.from_int(a) for a in int_witt_components(spec.p, c, n)))


def witt_pow(x: WittVector, e: int) -> WittVector:
    result = witt_one(x.spec, x.length)
    base = x
    while e:
        if e & 1:
            result = witt_mul(result, base)
        e >>= 1
        if e:
            base = witt_mul(base, base)
    return result


def witt_is_unit(x: WittVector) -> bool:
    """A Witt vector over a local carrier is a unit iff its first component is."""
    return is_unit(x.components[0])


def witt_inverse(x: WittVector, max_steps: int = 4096) -> WittVector:
    """Inverse of a unit: x[a_0^{-1}] = 1 - e with e topologically nilpotent."""
    if not witt_is_unit(x):
        raise NotAUnit(f"{x} is not a unit of W_{x.length}({x.spec.spec_id})")
    t = teichmuller(invert(x.components[0]), x.length)
    one = witt_one(x.spec, x.length)
    e = witt_sub(one, witt_mul(x, t))
    total, term = one, one
    for _ in range(max_steps):
        term = witt_mul(term, e)
        if term.is_zero():
            return witt_mul(total, t)
        total = witt_add(total, term)
    raise NotAUnit("geometric series for the Witt inverse did not terminate")


# --------------------------------------------------------------------------
# operators


def teichmuller(r: RingElem, n: int) -> WittVector:
    if n < 1:
        raise LengthUnderflow("length must be positive")
    return WittVector((r,) + tuple(r.spec.zero() for _ in range(n - 1)))


def verschiebung(x: WittVector) -> WittVector:
    return WittVector((x.spec.zero(),) + x.components[:-1])


def restriction(x: WittVector, k: int = 1) -> WittVector:
    if x.length - k < 1:
        raise LengthUnderflow(f"cannot restrict length {x.length} by {k}")
    return WittVector(x.components[: x.length - k])


def frobenius(x: WittVector) -> WittVector:
    """F: W_n -> W_{n-1}."""
    if x.length < 2:
        raise LengthUnderflow("Frobenius needs length at least 2")
    if x.spec.is_char_p:
        return WittVector(tuple(c ** x.p for c in x.components[:-1]))
    return frobenius_universal(x)


def frobenius_universal(x: WittVector) -> WittVector:
    """Frobenius through the universal polynomials, on any carrier."""
    if x.length < 2:
        raise LengthUnderflow("Frobenius needs length at least 2")
    return WittVector(tuple(_apply("frobenius", x.components, None, x.length - 1)))


def ghost(x: WittVector) -> list:
    p = x.p
    out = []
    for m in range(x.length):
        acc = x.spec.zero() if x.spec.digits is None else x.spec.from_int(0)
        for i in range(m + 1):
            acc = acc + (x.components[i] ** (p ** (m - i))).scale(p**i)
        out.append(acc)
    return out


def from_ghost(g: Sequence[RingElem], spec: RingSpec | None = None) -> WittVector:
    """Invert the ghost map; component m is known to precision (input prec) - m."""
    if not g:
        raise LengthUnderflow("empty ghost vector")
    spec = spec or g[0].spec
    p = spec.p
    comps: list = []
    for m, gm in enumerate(g):
        gm = spec.coerce(gm)
        acc = gm
        for i in range(m):
            acc = acc - (comps[i] ** (p ** (m - i))).scale(p**i)
        try:
            a, _ = div_exact_by_p(acc, m)
        except NotDivisible as exc:
            raise NonIntegralGhost(f"ghost vector leaves the image at component {m}: {exc}") from None
        comps.append(a)
    return WittVector(tuple(comps))


def map_witt(f: RingHom, x: WittVector) -> WittVector:
    """W_n(f) applied componentwise."""
    return WittVector(tuple(f(c) for c in x.components))


def is_ga_sharp(x: WittVector) -> bool:
    """x lies in W_n[F], the kernel of Frobenius."""
    return frobenius(x).is_zero()


def is_gm_sharp(u: WittVector) -> bool:
    """u is a unit with F(u) = 1."""
    if not witt_is_unit(u):
        return False
    fu = frobenius(u)
    return fu.agrees(witt_one(u.spec, fu.length))


def enumerate_witt(spec: RingSpec, n: int):
    """All of W_n(spec) for a finite spec, in a fixed order."""
    import itertools

    elems = list(spec.elements())
    for comps in itertools.product(elems, repeat=n):
        yield WittVector(comps)


# --------------------------------------------------------------------------
# JSON


def witt_to_json(x: WittVector) -> dict:
    return {"components": [elem_to_json(c) for c in x.components]}


def witt_from_json(obj, spec: RingSpec | None = None) -> WittVector:
    comps = obj["components"]
    if not comps:
        raise LengthUnderflow("empty component list")
    if spec is None:
        spec = parse_spec_id(comps[0]["spec_id"])
    return WittVector(tuple(elem_from_json(c, spec) for c in comps))
