"""Explicit Hodge-Tate computations.

* the Frobenius equation ``F x = p^m`` in W_n(R) for an F_p-algebra R, whose
  solution set is a torsor under ``W_n[F](R)``;
* the group law ``a * b = a + b + c a b`` with its exponential and logarithm
  as exact series over Q[c];
* the crystalline prismatic logarithm ``log(1 + p z) / p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .base_rings import RingElem, RingSpec, invert, v_p
from .errors import (
    EnumerationBudgetExceeded,
    InsufficientTerms,
    NotCharP,
    PrecisionExhausted,
    SpecMismatch,
    UnramifiedInput,
)
from .witt import (
    WittVector,
    enumerate_witt,
    frobenius,
    witt_add,
    witt_from_int,
    witt_to_json,
)

# --------------------------------------------------------------------------
# the Frobenius equation


@dataclass
class FrobeniusSolution:
    ring: str
    n: int
    m: int
    solutions: list
    kernel: list
    contains_p_power: bool
    torsor: bool

    def to_json(self) -> dict:
        enc = lambda xs: [witt_to_json(x)["components"] for x in xs]  # noqa: E731
        return {
            "ring": self.ring,
            "n": self.n,
            "m": self.m,
            "solutions": enc(self.solutions),
            "kernel": enc(self.kernel),
            "contains_p_power": self.contains_p_power,
            "torsor": self.torsor,
        }


def _sorted(xs) -> list:
    return sorted(xs, key=WittVector.sort_key)


def solve_frobenius_equation(R: RingSpec, n: int, m: int, budget: int = 1 << 16) -> FrobeniusSolution:
    """All x in W_n(R) with F x = p^m in W_{n-1}(R), by exhaustion.

    Also checks that p^m itself is a solution and that the solution set is
    exactly p^m + W_n[F](R).
    """
    if not R.is_char_p:
        raise NotCharP(f"{R.spec_id} does not have characteristic p")
    if n < 2:
        raise EnumerationBudgetExceeded("the Frobenius equation needs Witt length at least 2")
    size = R.size() ** n
    if size > budget:
        raise EnumerationBudgetExceeded(f"|W_{n}({R.spec_id})| = {size} exceeds the budget {budget}")
    target = witt_from_int(R.p**m, R, n - 1)
    zero = witt_from_int(0, R, n - 1)
    solutions, kernel = [], []
    for x in enumerate_witt(R, n):
        fx = frobenius(x)
        if fx == target:
            solutions.append(x)
        if fx == zero:
            kernel.append(x)
    pm = witt_from_int(R.p**m, R, n)
    translate = {witt_add(pm, k) for k in kernel}
    return FrobeniusSolution(
        R.spec_id, n, m, _sorted(solutions), _sorted(kernel),
        contains_p_power=pm in set(solutions),
        torsor=translate == set(solutions),
    )


# --------------------------------------------------------------------------
# the group law a * b = a + b + c a b


def star_product(a: RingElem, b: RingElem, c: RingElem) -> RingElem:
    if not (a.spec == b.spec == c.spec):
        raise SpecMismatch("star product needs a common spec")
    return a + b + c * a * b


def star_inverse(a: RingElem, c: RingElem) -> RingElem:
    """-a / (1 + c a); raises NotAUnit when 1 + c a is not invertible."""
    if a.spec != c.spec:
        raise SpecMismatch("star inverse needs a common spec")
    return -(a * invert(a.spec.one() + c * a))


# Q[c] polynomials are tuples of Fractions, lowest degree first.


def _qc_trim(f) -> tuple:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def _qc_add(f, g) -> tuple:
    n = max(len(f), len(g))
    return _qc_trim((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n))


def _qc_mul(f, g) -> tuple:
    if not f or not g:
        return ()
    out = [Fraction(0)] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            out[i + j] += a * b
    return _qc_trim(out)


def _qc_text(f) -> str:
    parts = []
    for i, a in enumerate(f):
        if a:
            parts.append(str(a) + ("" if i == 0 else "*c" if i == 1 else f"*c^{i}"))
    return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class GroupLawSeries:
    """Truncated power series in ``nvars`` variables with coefficients in Q[c].

    ``coeffs`` maps exponent tuples to Q[c] polynomials; every term of total
    degree above ``order`` is dropped.
    """

    nvars: int
    order: int
    coeffs: dict = field(default_factory=dict)

    @classmethod
    def make(cls, nvars: int, order: int, coeffs) -> "GroupLawSeries":
        clean = {}
        for m, f in coeffs.items():
            f = _qc_trim(Fraction(x) for x in f)
            if f and sum(m) <= order:
                clean[tuple(m)] = f
        return cls(nvars, order, clean)

    @classmethod
    def variable(cls, i: int, nvars: int, order: int) -> "GroupLawSeries":
        return cls.make(nvars, order, {tuple(int(j == i) for j in range(nvars)): (1,)})

    @classmethod
    def constant(cls, f, nvars: int, order: int) -> "GroupLawSeries":
        return cls.make(nvars, order, {(0,) * nvars: tuple(f)})

    def _check(self, other):
        if (self.nvars, self.order) != (other.nvars, other.order):
            raise SpecMismatch("series differ in variables or order")

    def __add__(self, other: "GroupLawSeries") -> "GroupLawSeries":
        self._check(other)
        out = dict(self.coeffs)
        for m, f in other.coeffs.items():
            out[m] = _qc_add(out.get(m, ()), f)
        return GroupLawSeries.make(self.nvars, self.order, out)

    def __neg__(self):
        return GroupLawSeries.make(self.nvars, self.order,
                                   {m: tuple(-a for a in f) for m, f in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "GroupLawSeries") -> "GroupLawSeries":
        self._check(other)
        out: dict = {}
        for m1, f in self.coeffs.items():
            for m2, g in other.coeffs.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                if sum(m) <= self.order:
                    out[m] = _qc_add(out.get(m, ()), _qc_mul(f, g))
        return GroupLawSeries.make(self.nvars, self.order, out)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, *m) -> tuple:
        return self.coeffs.get(tuple(m), ())

    def compose(self, inner: "GroupLawSeries") -> "GroupLawSeries":
        """Substitute ``inner`` (no constant term) into this univariate series."""
        if self.nvars != 1:
            raise SpecMismatch("only univariate series can be composed into")
        if inner.coefficient(*(0,) * inner.nvars):
            raise SpecMismatch("inner series must have zero constant term")
        order = min(self.order, inner.order)
        inner = GroupLawSeries.make(inner.nvars, order, inner.coeffs)
        out = GroupLawSeries.make(inner.nvars, order, {})
        power = GroupLawSeries.constant((1,), inner.nvars, order)
        for k in range(order + 1):
            f = self.coefficient(k)
            if f:
                out = out + GroupLawSeries.constant(f, inner.nvars, order) * power
            power = power * inner
        return out

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "order": self.order,
            "coefficients": [
                {"exponents": list(m), "value": _qc_text(f)} for m, f in sorted(self.coeffs.items())
            ],
        }


def exp_G(M: int) -> GroupLawSeries:
    """(e^{c x} - 1) / c = sum_{n >= 1} c^{n-1} x^n / n!."""
    return GroupLawSeries.make(1, M, {
        (n,): (0,) * (n - 1) + (Fraction(1, factorial(n)),) for n in range(1, M + 1)
    })


def log_G(M: int) -> GroupLawSeries:
    """log(1 + c a) / c = sum_{n >= 1} (-c)^{n-1} a^n / n."""
    return GroupLawSeries.make(1, M, {
        (n,): (0,) * (n - 1) + (Fraction((-1) ** (n - 1), n),) for n in range(1, M + 1)
    })


def star_series(a: GroupLawSeries, b: GroupLawSeries) -> GroupLawSeries:
    c = GroupLawSeries.constant((0, 1), a.nvars, a.order)
    return a + b + c * a * b


# --------------------------------------------------------------------------
# integrality of the series at c = E'(pi)


@dataclass
class IntegralityProfile:
    p: int
    eisenstein: tuple  # ascending coefficients
    e: int
    v_E_prime: Fraction
    threshold: Fraction
    regime: str  # "above", "borderline" or "below" 1/(p-1)
    rows: list  # (n, v(exp coeff), v(log coeff))

    @property
    def all_integral(self) -> bool:
        return all(ve >= 0 and vl >= 0 for _, ve, vl in self.rows)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "eisenstein": list(self.eisenstein),
            "e": self.e,
            "v_E_prime": str(self.v_E_prime),
            "E_prime_is_unit": self.v_E_prime == 0,
            "threshold": str(self.threshold),
            "regime": self.regime,
            "terms": [
                {"n": n, "v_exp": str(ve), "exp_integral": ve >= 0, "v_log": str(vl), "log_integral": vl >= 0}
                for n, ve, vl in self.rows
            ],
            "all_integral": self.all_integral,
        }


def integrality_profile(E, p: int, M: int) -> IntegralityProfile:
    """Valuations of c^{n-1}/n! and c^{n-1}/n at c = E'(pi), with v(p) = 1, v(pi) = 1/e."""
    from .prism import check_eisenstein, parse_eisenstein

    coeffs = tuple(parse_eisenstein(E, p))
    e = check_eisenstein(coeffs, p)
    if e == 1:
        raise UnramifiedInput("degree one: E' is a unit and the group is G_m-sharp")
    # E'(pi) = sum i a_i pi^{i-1}; the summands have distinct valuations mod 1/e
    vals = [Fraction(v_p(i * a, p)) + Fraction(i - 1, e) for i, a in enumerate(coeffs) if i and i * a]
    v = min(vals)
    threshold = Fraction(1, p - 1)
    regime = "above" if v > threshold else "borderline" if v == threshold else "below"
    rows = []
    for n in range(1, M + 1):
        rows.append((n, (n - 1) * v - v_p(factorial(n), p), (n - 1) * v - v_p(n, p)))
    return IntegralityProfile(p, coeffs, e, v, threshold, regime, rows)


# --------------------------------------------------------------------------
# the crystalline prismatic logarithm


@dataclass
class LogResult:
    value: RingElem
    epsilon: int
    terms: int

    def to_json(self) -> dict:
        from .base_rings import elem_to_json
        return {"value": elem_to_json(self.value), "epsilon": self.epsilon, "terms": self.terms}


def _term_floor(k: int, p: int) -> int:
    """A priori valuation of p^{k-1} z^k / k."""
    return k - 1 - v_p(k, p)


def required_terms(p: int, N: int) -> int:
    """Smallest K such that every term past K vanishes modulo p^N."""
    K = 0
    k = 1
    # k - 1 - log_p(k) is non-decreasing, so once it clears N no later term can fail
    while k - 1 - _ilog(k, p) < N:
        if _term_floor(k, p) < N:
            K = k
        k += 1
    return K


def _ilog(k: int, p: int) -> int:
    e = 0
    while p ** (e + 1) <= k:
        e += 1
    return e


def prismatic_log(z: RingElem, K: int | None = None) -> LogResult:
    """log(1 + p z) / p = sum_{k=1}^K (-1)^{k-1} p^{k-1} z^k / k in Z/p^N.

    Each term is formed as p^{k-1-v_p(k)} z^k / k' with k = p^{v_p(k)} k', so
    the division by k costs no p-adic digits; epsilon records that loss.
    """
    spec = z.spec
    if spec.kind != "IntegersModPN":
        raise SpecMismatch(f"prismatic_log works in Z/p^N, got {spec.spec_id}")
    p, N = spec.p, spec.digits
    if z.prec < 1:
        raise PrecisionExhausted("z carries no p-adic digits")
    need = required_terms(p, N)
    if K is None:
        K = need
    if K < need:
        raise InsufficientTerms(f"term {need} has valuation below {N}; use at least {need} terms")
    mod = spec.modulus
    zi = z.constant_term()
    acc = 0
    epsilon = 0
    for k in range(1, K + 1):
        vk = v_p(k, p)
        epsilon = max(epsilon, vk - (k - 1))
        kp = k // p**vk
        acc += (-1) ** (k - 1) * p ** (k - 1 - vk) * pow(zi, k, mod) * pow(kp, -1, mod)
    prec = min(z.prec, N - epsilon)
    return LogResult(spec.element({(): acc}, prec), epsilon, K)


def prismatic_log_oracle(z: int, p: int, N: int, K: int) -> int:
    """Exact rational partial sum reduced modulo p^N (independent of the ring layer)."""
    total = sum(Fraction((-1) ** (k - 1) * p ** (k - 1) * z**k, k) for k in range(1, K + 1))
    mod = p**N
    return total.numerator * pow(total.denominator, -1, mod) % mod


def log_product_argument(z1: RingElem, z2: RingElem) -> RingElem:
    """z with 1 + p z = (1 + p z1)(1 + p z2)."""
    p = z1.spec.p
    return z1 + z2 + (z1 * z2).scale(p)


__all__ = [
    "FrobeniusSolution", "solve_frobenius_equation", "star_product", "star_inverse",
    "GroupLawSeries", "exp_G", "log_G", "star_series", "IntegralityProfile",
    "integrality_profile", "LogResult", "prismatic_log", "prismatic_log_oracle",
    "required_terms", "log_product_argument",
]
