"""Universal Witt polynomials generated from the ghost recursion.

A polynomial is a dict mapping a *packed* monomial to an integer
coefficient.  Exponents of the variables ``a_0, a_1, ...`` and
``b_0, b_1, ...`` live in fixed-width bit fields of one Python int, so
multiplying monomials is integer addition.

For an operation with ghost-side expression ``Phi_n`` the n-th polynomial is

    S_n = (Phi_n - sum_{j<n} p^j S_j^(p^(n-j))) / p^n,

and the division must be exact.  A remainder raises
:class:`IntegralityFailure`, so every generated table doubles as a check of
Dwork's lemma.
"""

from __future__ import annotations

import contextlib
import threading
from math import comb

from .errors import CapExceeded, IntegralityFailure

OPS = ("sum", "product", "negation", "frobenius", "delta")

Poly = dict


class PackedMonomials:
    """Bit layout for the variables a_0..a_{cap+1}, b_0..b_{cap+1}."""

    def __init__(self, p: int, cap: int):
        self.nslots = 2 * (cap + 2)
        self.width = (p ** (cap + 2)).bit_length() + 1
        self.mask = (1 << self.width) - 1
        self.cap = cap

    def a(self, j: int) -> int:
        return j

    def b(self, j: int) -> int:
        return self.cap + 2 + j

    def var(self, slot: int, exp: int = 1) -> int:
        return exp << (slot * self.width)

    def unpack(self, m: int) -> tuple:
        """Sparse ((slot, exp), ...) form, slots ascending."""
        out = []
        slot = 0
        w, mask = self.width, self.mask
        while m:
            e = m & mask
            if e:
                out.append((slot, e))
            m >>= w
            slot += 1
        return tuple(out)

    def name(self, slot: int) -> str:
        half = self.cap + 2
        return f"a{slot}" if slot < half else f"b{slot - half}"


# --------------------------------------------------------------------------
# sparse polynomial arithmetic over Z


def padd(f: Poly, g: Poly, scale: int = 1) -> Poly:
    out = dict(f)
    for m, c in g.items():
        v = out.get(m, 0) + scale * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def pscale(f: Poly, c: int) -> Poly:
    return {m: c * v for m, v in f.items()} if c else {}


def pmul(f: Poly, g: Poly) -> Poly:
    if len(f) > len(g):
        f, g = g, f
    out: dict = {}
    get = out.get
    gi = list(g.items())
    for m1, c1 in f.items():
        for m2, c2 in gi:
            m = m1 + m2
            out[m] = get(m, 0) + c1 * c2
    return {m: c for m, c in out.items() if c}


def psquare(f: Poly) -> Poly:
    items = list(f.items())
    out: dict = {}
    get = out.get
    for i, (m1, c1) in enumerate(items):
        m = m1 + m1
        out[m] = get(m, 0) + c1 * c1
        c1 *= 2
        for m2, c2 in items[i + 1:]:
            m = m1 + m2
            out[m] = get(m, 0) + c1 * c2
    return {m: c for m, c in out.items() if c}


def ppow(f: Poly, e: int) -> Poly:
    if e == 0:
        return {0: 1}
    if len(f) == 1:
        (m, c), = f.items()
        return {m * e: c**e}
    if len(f) == 2:
        (m1, c1), (m2, c2) = f.items()
        return {m1 * k + m2 * (e - k): comb(e, k) * c1**k * c2 ** (e - k) for k in range(e + 1)}
    result = None
    base = f
    while e:
        if e & 1:
            result = base if result is None else pmul(result, base)
        e >>= 1
        if e:
            base = psquare(base)
    return result


def pdiv_exact(f: Poly, q: int, what: str) -> Poly:
    out = {}
    for m, c in f.items():
        d, r = divmod(c, q)
        if r:
            raise IntegralityFailure(f"{what}: coefficient {c} not divisible by {q}")
        out[m] = d
    return out


# --------------------------------------------------------------------------
# monomial-count estimates


def _weighted_count(weights: list, target: int) -> int:
    """Number of exponent vectors with sum(w_i e_i) == target."""
    ways = [0] * (target + 1)
    ways[0] = 1
    for w in weights:
        for t in range(w, target + 1):
            ways[t] += ways[t - w]
    return ways[target]


def estimate_terms(p: int, op: str, i: int) -> int:
    """Upper bound on the number of monomials of the index-i polynomial.

    Every universal polynomial is weighted-homogeneous when a_j and b_j have
    weight p^j; the product polynomial is bihomogeneous.
    """
    weights = [p**j for j in range(i + 1)]
    if op == "sum":
        return _weighted_count(weights + weights, p**i)
    if op == "product":
        return _weighted_count(weights, p**i) ** 2
    if op == "negation":
        return _weighted_count(weights, p**i)
    weights.append(p ** (i + 1))
    return _weighted_count(weights, p ** (i + 1))


# --------------------------------------------------------------------------
# the table


class WittPolynomialTable:
    """Memoized universal polynomials for one prime.

    Reads of already-published entries take no lock; a missing entry is
    generated under ``_lock`` and published once.  ``max_terms`` bounds the
    estimated size of a polynomial before generation starts, so requests that
    cannot fit in memory fail fast with :class:`CapExceeded`.
    """

    def __init__(self, p: int, cap: int = 6, max_terms: int = 250_000):
        self.p = p
        self.cap = cap
        self.max_terms = max_terms
        self.layout = PackedMonomials(p, cap)
        self._entries: dict = {}
        self._unpacked: dict = {}
        self._powers: dict = {}
        self._lock = threading.RLock()

    # -- ghost components as packed polynomials --------------------------
    def ghost_poly(self, which: str, m: int) -> Poly:
        L, p = self.layout, self.p
        slot = L.a if which == "a" else L.b
        return {L.var(slot(i), p ** (m - i)): p**i for i in range(m + 1)}

    def _phi(self, op: str, n: int) -> Poly:
        p = self.p
        if op == "sum":
            return padd(self.ghost_poly("a", n), self.ghost_poly("b", n))
        if op == "product":
            return pmul(self.ghost_poly("a", n), self.ghost_poly("b", n))
        if op == "negation":
            return pscale(self.ghost_poly("a", n), -1)
        if op == "frobenius":
            return self.ghost_poly("a", n + 1)
        if op == "delta":
            diff = padd(self.ghost_poly("a", n + 1), ppow(self.ghost_poly("a", n), p), -1)
            return pdiv_exact(diff, p, f"delta ghost side {n}")
        raise KeyError(op)

    def _tower(self, op: str, j: int, k: int) -> Poly:
        """S_j^(p^k), built by repeated p-th powers and cached."""
        key = (op, j, k)
        hit = self._powers.get(key)
        if hit is not None:
            return hit
        base = self.get(op, j) if k == 0 else ppow(self._tower(op, j, k - 1), self.p)
        self._powers[key] = base
        return base

    def _generate(self, op: str, n: int) -> Poly:
        p = self.p
        acc = self._phi(op, n)
        for j in range(n):
            acc = padd(acc, self._tower(op, j, n - j), -(p**j))
        return pdiv_exact(acc, p**n, f"{op} polynomial {n} for p={p}")

    # -- public access ---------------------------------------------------
    def get(self, op: str, i: int) -> Poly:
        """The index-i polynomial of ``op`` (generating lower indices as needed)."""
        hit = self._entries.get((op, i))
        if hit is not None:
            return hit
        if op not in OPS:
            raise KeyError(f"unknown Witt operation {op!r}")
        if i < 0:
            raise ValueError("negative index")
        if i >= self.cap:
            raise CapExceeded(f"{op} index {i} is at or beyond the cap {self.cap}")
        bound = estimate_terms(self.p, op, i)
        if bound > self.max_terms:
            raise CapExceeded(
                f"{op} index {i} for p={self.p} may have up to {bound} monomials "
                f"(limit {self.max_terms})")
        with self._lock:
            hit = self._entries.get((op, i))
            if hit is not None:
                return hit
            for j in range(i):
                self.get(op, j)
            poly = self._generate(op, i)
            self._entries[(op, i)] = poly
            return poly

    def unpacked(self, op: str, i: int) -> tuple:
        """``((coeff, ((slot, exp), ...)), ...)`` for fast evaluation."""
        key = (op, i)
        hit = self._unpacked.get(key)
        if hit is not None:
            return hit
        poly = self.get(op, i)
        U = self.layout.unpack
        form = tuple((c, U(m)) for m, c in poly.items())
        self._unpacked[key] = form
        return form

    def arity(self, op: str, i: int) -> int:
        """Number of leading components of each argument the polynomial reads."""
        return i + 2 if op in ("frobenius", "delta") else i + 1

    def to_text(self, op: str, i: int) -> list:
        """Terms as (coeff, monomial string) in descending graded-lex order."""
        L = self.layout
        rows = []
        for c, mono in self.unpacked(op, i):
            exps = [0] * L.nslots
            for slot, e in mono:
                exps[slot] = e
            rows.append((sum(exps), tuple(exps), c))
        rows.sort(key=lambda r: (r[0], r[1]), reverse=True)
        out = []
        for _, exps, c in rows:
            parts = [L.name(s) + (f"^{e}" if e > 1 else "") for s, e in enumerate(exps) if e]
            out.append((c, "*".join(parts) if parts else "1"))
        return out

    def corrupted_copy(self, op: str, i: int) -> "WittPolynomialTable":
        """A table whose (op, i) entry has one extra monomial (negative control)."""
        t = WittPolynomialTable(self.p, self.cap, self.max_terms)
        bad = dict(t.get(op, i))
        key = t.layout.var(t.layout.a(0), 1)
        bad[key] = bad.get(key, 0) + 1
        t._entries[(op, i)] = {m: c for m, c in bad.items() if c}
        return t


def verify_ghost_identity(tab: WittPolynomialTable, op: str, i: int):
    """Check sum_{j<=i} p^j S_j^(p^(i-j)) == Phi_i for the stored polynomials.

    Powers are rebuilt here rather than taken from the generation cache, so a
    corrupted or mis-generated entry shows up.  Returns ``(ok, witness)``
    where the witness names the first offending monomial.
    """
    p = tab.p
    entries = [tab.get(op, j) for j in range(i + 1)]  # size cap is checked before any work
    lhs: Poly = {}
    for j, entry in enumerate(entries):
        for c in entry.values():
            if not isinstance(c, int):
                return False, {"index": j, "non_integer_coefficient": str(c)}
        lhs = padd(lhs, ppow(dict(entry), p ** (i - j)), p**j)
    diff = padd(lhs, tab._phi(op, i), -1)
    if not diff:
        return True, {"terms": len(tab.get(op, i))}
    m, c = min(diff.items())
    names = [tab.layout.name(s) + (f"^{e}" if e > 1 else "") for s, e in tab.layout.unpack(m)]
    return False, {"monomial": "*".join(names) or "1", "excess": c}


_registry: dict = {}
_registry_lock = threading.Lock()


def table(p: int) -> WittPolynomialTable:
    """The shared table for p."""
    t = _registry.get(p)
    if t is None:
        with _registry_lock:
            t = _registry.get(p)
            if t is None:
                t = WittPolynomialTable(p)
                _registry[p] = t
    return t


@contextlib.contextmanager
def corrupt_table(p: int, op: str, i: int):
    """Temporarily replace the shared table for p by a corrupted copy."""
    with _registry_lock:
        old = _registry.get(p)
        _registry[p] = table_for_corruption = (old or WittPolynomialTable(p)).corrupted_copy(op, i)
    try:
        yield table_for_corruption
    finally:
        with _registry_lock:
            if old is None:
                _registry.pop(p, None)
            else:
                _registry[p] = old
