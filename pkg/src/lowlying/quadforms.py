"""Positive definite binary quadratic forms of discriminant -D, the form class
group, genus characters and the principal-genus representation test."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

from .arith import Discriminant, is_fundamental, kronecker, prime_table


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def inverse(self) -> "QuadForm":
        return reduce(QuadForm(self.a, -self.b, self.c))

    def as_list(self) -> list[int]:
        return [self.a, self.b, self.c]


def reduce(f: QuadForm) -> QuadForm:
    """Gauss reduction of a positive definite form."""
    a, b, c = f.a, f.b, f.c
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise ValueError(f"{f} is not positive definite")
    while True:
        if b > a or b <= -a:
            # normalize b into (-a, a]
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return QuadForm(a, b, c)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def compose(f1: QuadForm, f2: QuadForm) -> QuadForm:
    """Dirichlet composition via the united-forms construction, then reduction."""
    if f1.disc != f2.disc:
        raise ValueError("forms of different discriminant")
    disc = f1.disc
    if f1.a > f2.a:
        f1, f2 = f2, f1
    a1, b1 = f1.a, f1.b
    a2, b2, c2 = f2.a, f2.b, f2.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, u, v = _xgcd(s, d)
        x2, y2 = u, -v
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - disc) // (4 * a3)
    return reduce(QuadForm(a3, b3, c3))


def reduced_forms(D: int) -> list[QuadForm]:
    """All reduced primitive forms of discriminant -D."""
    out = []
    amax = math.isqrt(D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b * b + D) % (4 * a):
                continue
            c = (b * b + D) // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append(QuadForm(a, b, c))
    return out


def principal_form(D: int) -> QuadForm:
    if D % 4 == 0:
        return QuadForm(1, 0, D // 4)
    return QuadForm(1, 1, (D + 1) // 4)


def _invariant_factors(orders_by_prime: dict[int, list[int]]) -> list[int]:
    """Invariant factors from counts n_k = #{x : x^(p^k) = 1} per prime p."""
    parts: dict[int, list[int]] = {}
    for p, counts in orders_by_prime.items():
        # counts[k] = p^(sum_i min(k, lam_i)); differences give #lam_i > k
        logs = [round(math.log(c, p)) for c in counts]
        greater = [logs[k + 1] - logs[k] for k in range(len(logs) - 1)]
        lam = []
        for k, g in enumerate(greater):
            nxt = greater[k + 1] if k + 1 < len(greater) else 0
            lam += [k + 1] * (g - nxt)
        parts[p] = sorted(lam, reverse=True)
    width = max((len(v) for v in parts.values()), default=0)
    factors = []
    for i in range(width):
        m = 1
        for p, lam in parts.items():
            if i < len(lam):
                m *= p ** lam[i]
        factors.append(m)
    return sorted(factors)


@dataclass
class ClassGroup:
    D: Discriminant
    forms: list[QuadForm]
    table: list[list[int]] = field(repr=False)

    @property
    def h(self) -> int:
        return len(self.forms)

    @cached_property
    def index(self) -> dict[QuadForm, int]:
        return {f: i for i, f in enumerate(self.forms)}

    @property
    def identity(self) -> int:
        return self.index[principal_form(self.D.d)]

    def compose(self, i: int, j: int) -> int:
        return self.table[i][j]

    def inverse(self, i: int) -> int:
        return self.index[self.forms[i].inverse()]

    def class_of(self, f: QuadForm) -> int:
        return self.index[reduce(f)]

    def power(self, i: int, k: int) -> int:
        out = self.identity
        for _ in range(k):
            out = self.table[out][i]
        return out

    @cached_property
    def orders(self) -> list[int]:
        e = self.identity
        out = []
        for i in range(self.h):
            k, x = 1, i
            while x != e:
                x = self.table[x][i]
                k += 1
            out.append(k)
        return out

    @cached_property
    def principal_genus(self) -> list[int]:
        return sorted({self.table[i][i] for i in range(self.h)})

    @property
    def e(self) -> int:
        """Exponent of the principal genus."""
        out = 1
        for i in self.principal_genus:
            out = out * self.orders[i] // math.gcd(out, self.orders[i])
        return out

    @property
    def genus_count(self) -> int:
        return 2 ** (self.D.omega - 1)

    @property
    def ambiguous(self) -> list[int]:
        return [i for i, o in enumerate(self.orders) if o <= 2]

    @property
    def principal_genus_odd(self) -> bool:
        return len(self.principal_genus) % 2 == 1

    @cached_property
    def invariant_factors(self) -> list[int]:
        h = self.h
        primes = [p for p in prime_table(max(h, 2)).primes if h % p == 0]
        counts = {}
        for p in primes:
            kmax = 0
            while h % p ** (kmax + 1) == 0:
                kmax += 1
            counts[p] = [sum(1 for o in self.orders if (p**k) % o == 0) for k in range(kmax + 1)]
        return _invariant_factors(counts)

    def to_json(self) -> dict:
        return {
            "D": self.D.d,
            "h": self.h,
            "forms": [f.as_list() for f in self.forms],
            "invariant_factors": self.invariant_factors,
            "e": self.e,
            "genus_count": self.genus_count,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def class_group(D: int) -> ClassGroup:
    if D <= 0 or not is_fundamental(-D):
        raise ValueError(f"-{D} is not a negative fundamental discriminant")
    forms = sorted(reduced_forms(D))
    pos = {f: i for i, f in enumerate(forms)}
    h = len(forms)
    table = [[0] * h for _ in range(h)]
    for i in range(h):
        for j in range(i, h):
            k = pos[compose(forms[i], forms[j])]
            table[i][j] = table[j][i] = k
    return ClassGroup(Discriminant.imaginary(D), forms, table)


@dataclass(frozen=True)
class GenusCharacter:
    d1: int
    d2: int

    @property
    def is_trivial(self) -> bool:
        return 1 in (self.d1, self.d2)

    def on_prime(self, p: int) -> int:
        return psi_value(self, p)

    def on_form(self, f: QuadForm) -> int:
        """psi(f): chi_{d1} or chi_{d2} evaluated at any represented integer prime to D."""
        D = -(self.d1 * self.d2)
        for x in range(0, 50):
            for y in range(0, 50):
                m = f(x, y)
                if m > 0 and math.gcd(m, D) == 1:
                    return kronecker(self.d1, m) if math.gcd(m, self.d1) == 1 else kronecker(self.d2, m)
        raise RuntimeError(f"no coprime value found for {f}")


def genus_characters(D: int) -> list[GenusCharacter]:
    """All factorizations -D = d1*d2 into fundamental discriminants, d1 > 0 > d2."""
    info = Discriminant.imaginary(D)
    primes = info.prime_divisors
    # prime discriminants: -4, 8, -8 for 2; (-1)^((q-1)/2) q for odd q
    odd = [q if q % 4 == 1 else -q for q in primes if q != 2]
    two = []
    if 2 in primes:
        rest = 1
        for q in odd:
            rest *= q
        two = [-D // rest]
    pieces = odd + two
    out = []
    n = len(pieces)
    for mask in range(1 << n):
        d1 = 1
        for i in range(n):
            if mask >> i & 1:
                d1 *= pieces[i]
        d2 = -D // d1
        if d1 > 0:
            out.append(GenusCharacter(d1, d2))
    return sorted(out, key=lambda g: (g.d1, g.d2))


def psi_value(psi: GenusCharacter, p: int) -> int:
    """Value of the genus character on the class representing the prime p."""
    D = -(psi.d1 * psi.d2)
    if kronecker(-D, p) == -1:
        raise ValueError(f"p = {p} is inert in Q(sqrt(-{D}))")
    if psi.d1 % p != 0:
        return kronecker(psi.d1, p)
    return kronecker(psi.d2, p)


def represent_prime(cg: ClassGroup, p: int) -> int | None:
    """Index of the class of (p, b, c), 0 <= b <= p, b^2 = -D mod 4p; None if p is inert."""
    D = cg.D.d
    if kronecker(-D, p) == -1:
        return None
    for b in range(0, p + 1):
        if (b * b + D) % (4 * p) == 0:
            return cg.class_of(QuadForm(p, b, (b * b + D) // (4 * p)))
    raise RuntimeError(f"no square root of -{D} mod 4*{p}")


def represents(f: QuadForm, m: int) -> tuple[int, int] | None:
    """A solution of f(x, y) = m (exhaustive, f positive definite), or None."""
    a, b, c = f.a, f.b, f.c
    D = 4 * a * c - b * b
    # 4a f = (2ax + by)^2 + D y^2
    ymax = math.isqrt(4 * a * m // D)
    for y in range(-ymax, ymax + 1):
        rest = 4 * a * m - D * y * y
        if rest < 0:
            continue
        r = math.isqrt(rest)
        if r * r != rest:
            continue
        for u in {r, -r}:
            if (u - b * y) % (2 * a) == 0:
                return (u - b * y) // (2 * a), y
    return None


@dataclass
class PrincipalGenusReport:
    D: int
    e: int
    bound: float
    primes_checked: list[int]
    witness: tuple[int, QuadForm, tuple[int, int]] | None

    @property
    def ok(self) -> bool:
        return self.witness is None


def principal_genus_min_prime(cg: ClassGroup, e: int | None = None) -> PrincipalGenusReport:
    """Check that no prime p < (D/4)^(1/e), p prime to D, is represented by a principal-genus form."""
    D = cg.D.d
    e = cg.e if e is None else e
    bound = (D / 4) ** (1.0 / e)
    pg = [cg.forms[i] for i in cg.principal_genus]
    checked = []
    for p in prime_table(max(2, math.ceil(bound))).primes:
        if p >= bound:
            break
        if D % p == 0:
            continue
        checked.append(p)
        for f in pg:
            sol = represents(f, p)
            if sol is not None:
                return PrincipalGenusReport(D, e, bound, checked, (p, f, sol))
    return PrincipalGenusReport(D, e, bound, checked, None)
