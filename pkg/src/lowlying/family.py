"""The family F(X) of fundamental discriminants f with (f, D) = 1 and X <= |f| < 2X,
character sums over it, and the two regime checkers."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np

from .arith import Discriminant, divisors, kronecker, moebius, prime_table
from .quadforms import class_group, genus_characters, psi_value, represent_prime


def squarefree_mask(n: int) -> np.ndarray:
    """Boolean array s with s[k] true iff k is squarefree, for 0 <= k <= n (s[0] false)."""
    s = np.ones(n + 1, dtype=bool)
    s[0] = False
    for p in prime_table(max(2, math.isqrt(n) + 1)).primes:
        if p * p > n:
            break
        s[p * p::p * p] = False
    return s


@dataclass(frozen=True)
class FamilySpec:
    D: Discriminant
    X: int
    members: tuple[int, ...] = field(repr=False)

    @property
    def xstar(self) -> int:
        return len(self.members)

    @property
    def asymptotic(self) -> float:
        """(6/pi^2) prod_{q|D} (1 - 1/(q+1)) X."""
        out = 6 / math.pi**2 * self.X
        for q in self.D.prime_divisors:
            out *= 1 - 1 / (q + 1)
        return out

    @property
    def ratio(self) -> float:
        return self.xstar / self.asymptotic

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.int64)


def enumerate_family(D: int, X: int) -> FamilySpec:
    """Exact enumeration of F(X) by a squarefree sieve over [1, 2X)."""
    if X < 2:
        raise ValueError("X must be at least 2")
    info = Discriminant.imaginary(D)
    sf = squarefree_mask(2 * X)
    n = np.arange(X, 2 * X, dtype=np.int64)
    found = []
    for sign in (1, -1):
        f = sign * n
        r = f % 4
        ok = (r == 1) & sf[n]
        m = f // 4
        ok |= (r == 0) & np.isin(m % 4, (2, 3)) & sf[np.abs(m)]
        found.append(f[ok])
    f = np.sort(np.concatenate(found))
    rad = 1
    for q in info.prime_divisors:
        rad *= q
    f = f[np.gcd(f, rad) == 1]
    return FamilySpec(info, X, tuple(int(v) for v in f))


def char_values(f: np.ndarray, p: int) -> np.ndarray:
    """kronecker(f, p) for an integer array f and a prime p."""
    if p == 2:
        table = np.array([0, 1, 0, -1, 0, -1, 0, 1], dtype=np.int64)
        return table[f % 8]
    table = np.array([kronecker(a, p) for a in range(p)], dtype=np.int64)
    return table[f % p]


def char_sum(p: int, fam: FamilySpec) -> int:
    """sum over f in F(X) of chi_f(p)."""
    return int(char_values(fam.array, p).sum())


class _Periodic:
    """A completely multiplicative periodic function a(k), with prefix sums K(Z) = sum_{1<=k<=Z} a(k)."""

    def __init__(self, values: np.ndarray):
        self.period = len(values)
        self.values = values  # values[k % period]
        ext = np.concatenate((values[1:], values[:1]))  # a(1), ..., a(period)
        self.prefix = np.concatenate(([0], np.cumsum(ext)))
        self.full = int(self.prefix[-1])

    def __call__(self, k: int) -> int:
        return int(self.values[k % self.period])

    def K(self, Z: int) -> int:
        if Z <= 0:
            return 0
        q, r = divmod(Z, self.period)
        return q * self.full + int(self.prefix[r])


def _chars_for(p: int) -> dict[str, _Periodic]:
    """The characters (as tables mod 8p) needed by the rearrangement."""
    P = 8 * p
    k = np.arange(P)
    chi0 = (k % 2 == 1).astype(np.int64)
    chi4 = np.where(k % 2 == 0, 0, np.where(k % 4 == 1, 1, -1))
    if p == 2:
        chi8 = np.array([0, 1, 0, -1, 0, -1, 0, 1])[k % 8]
        return {"chi8": _Periodic(chi8), "chi4chi8": _Periodic(chi4 * chi8)}
    leg = np.array([kronecker(a, p) for a in range(p)], dtype=np.int64)[k % p]
    return {"leg": _Periodic(chi0 * leg), "chi4leg": _Periodic(chi4 * leg)}


def _squarefree_sum(a: _Periodic, Y: int, D: int, coprime_l: bool = True) -> int:
    """sum_{m <= Y, m squarefree, (m, D) = 1} a(m) via mu^2(m) = sum_{l^2 | m} mu(l)
    and [(k, D) = 1] = sum_{t | (k, D)} mu(t).

    With coprime_l False the l-sum is not restricted to (l, D) = 1; that variant is
    inexact whenever some l shares a prime with D and is kept only for comparison."""
    if Y <= 0:
        return 0
    rad_divs = [t for t in divisors(D) if moebius(t) != 0]
    total = 0
    for t in rad_divs:
        at = a(t)
        if at == 0:
            continue
        inner = 0
        lmax = math.isqrt(Y // t)
        for l in range(1, lmax + 1):
            if coprime_l and math.gcd(l, D) != 1:
                continue
            mu = moebius(l)
            if mu == 0:
                continue
            al = a(l)
            if al == 0:
                continue
            inner += mu * al * al * a.K(Y // (t * l * l))
        total += moebius(t) * at * inner
    return total


def moebius_decomposition(p: int, D: int, X: int, coprime_l: bool = True) -> int:
    """sum over F(X) of chi_f(p), recomputed type by type through Moebius rearrangements.

    Odd f = +-m with m squarefree odd, and even f = +-4m (m = 3 resp. 1 mod 4) or +-8m
    (m odd); each piece is a combination of sums of completely multiplicative a(m)."""
    ch = _chars_for(p)
    lo, hi = X - 1, 2 * X - 1

    def M(name: str, scale: int) -> int:
        a = ch[name]
        return _squarefree_sum(a, hi // scale, D, coprime_l) - _squarefree_sum(a, lo // scale, D, coprime_l)

    if p == 2:
        # chi_f(2) = chi8(f) for odd f and 0 for even f; chi8 is even
        plus = M("chi8", 1) + M("chi4chi8", 1)  # f = m, m = 1 mod 4
        minus = M("chi8", 1) - M("chi4chi8", 1)  # f = -m, m = 3 mod 4
        assert plus % 2 == 0 and minus % 2 == 0
        return (plus + minus) // 2
    e1 = kronecker(-1, p)
    e2 = kronecker(2, p)
    t1 = M("leg", 1) + M("chi4leg", 1)  # 2x: f = m, m = 1 mod 4
    t2 = M("leg", 1) - M("chi4leg", 1)  # 2x: f = -m, m = 3 mod 4
    total2 = t1 + e1 * t2
    if D % 2 == 1:
        t3 = M("leg", 4) - M("chi4leg", 4)  # 2x: f = 4m, m = 3 mod 4
        t4 = M("leg", 4) + M("chi4leg", 4)  # 2x: f = -4m, m = 1 mod 4
        t5 = M("leg", 8)  # f = 8m
        t6 = M("leg", 8)  # f = -8m
        total2 += t3 + e1 * t4 + 2 * (e2 * t5 + e1 * e2 * t6)
    assert total2 % 2 == 0
    return total2 // 2


def burgess_bound(D: int, X: int, p: int, eps: float) -> float:
    """tau(D) (X^{1-eps^2} + X^{1/2} p^{1/8 + eps/2}), implied constant taken as 1."""
    tau = Discriminant.imaginary(D).tau
    return tau * (X ** (1 - eps * eps) + math.sqrt(X) * p ** (0.125 + eps / 2))


@dataclass(frozen=True)
class CharSumRow:
    p: int
    sum: int
    bound: float
    ratio: float


def burgess_dashboard(fam: FamilySpec, pmax: int, eps: float = 0.1) -> list[CharSumRow]:
    """Observed |char_sum| against the Burgess-shaped bound for every prime p <= pmax."""
    rows = []
    for p in prime_table(max(2, pmax)).primes:
        if p > pmax:
            break
        s = char_sum(p, fam)
        b = burgess_bound(fam.D.d, fam.X, p, eps)
        rows.append(CharSumRow(p, s, b, abs(s) / b))
    return rows


@dataclass
class RegimeReport:
    D: int
    X: float
    sigma: float
    e: int | None = None
    principal_genus_odd: bool | None = None
    x_max_algebra: float | None = None
    no_split_certificate: bool | None = None
    algebra_ok: bool | None = None
    logD_X: float | None = None
    logD_X_window: tuple[float, float] | None = None
    window_feasible: bool | None = None
    epsilon: float | None = None  # supremum of admissible epsilon, capped at 1/4
    analysis_ok: bool | None = None

    def to_json(self) -> dict:
        out = asdict(self)
        if self.logD_X_window is not None:
            out["logD_X_window"] = list(self.logD_X_window)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def algebra_regime(D: int, e: int, sigma: float, X: float | None = None,
                   report: RegimeReport | None = None) -> RegimeReport:
    """Principal-genus regime: sigma < 2/e and X < D^{1/(sigma e) - 1/2}/4."""
    if sigma <= 0 or e < 1:
        raise ValueError("need sigma > 0 and e >= 1")
    rep = report or RegimeReport(D=D, X=X if X is not None else float("nan"), sigma=sigma)
    rep.e = e
    x_max = D ** (1 / (sigma * e) - 0.5) / 4
    rep.x_max_algebra = x_max
    # with X = x_max every prime below (sqrt(D) X)^sigma already lies below (D/4)^{1/e}
    rep.no_split_certificate = (math.sqrt(D) * x_max) ** sigma <= (D / 4) ** (1 / e) * (1 + 1e-12)
    if X is not None:
        rep.algebra_ok = sigma < 2 / e and X < x_max
    return rep


def analysis_regime(D: int, X: float, sigma: float, report: RegimeReport | None = None) -> RegimeReport:
    """Burgess regime: sigma/(8 - 2 sigma) < log_D X < 1/sigma - 1/2 with sigma < 4/3."""
    if not 0 < sigma < 2:
        raise ValueError("sigma must lie in (0, 2)")
    if D <= 1 or X <= 1:
        raise ValueError("need D > 1 and X > 1")
    rep = report or RegimeReport(D=D, X=X, sigma=sigma)
    lx = math.log(X) / math.log(D)
    lo, hi = sigma / (8 - 2 * sigma), 1 / sigma - 0.5
    rep.logD_X = lx
    rep.logD_X_window = (lo, hi)
    rep.window_feasible = lo < hi
    # D^{sigma/2} < X^{4 - sigma - 16 eps}  <=>  eps < (4 - sigma - (sigma/2)/log_D X)/16
    sup = (4 - sigma - (sigma / 2) / lx) / 16
    rep.epsilon = min(0.25, sup) if sup > 0 else None
    rep.analysis_ok = sigma < 4 / 3 and lo < lx < hi and rep.epsilon is not None
    return rep


def regime(D: int, X: float, sigma: float) -> RegimeReport:
    """Both regime checks for -D, using the principal-genus exponent of C(-D)."""
    cg = class_group(D)
    rep = RegimeReport(D=D, X=X, sigma=sigma)
    rep.principal_genus_odd = cg.principal_genus_odd
    algebra_regime(D, cg.e, sigma, X, rep)
    if 0 < sigma < 2 and X > 1:
        analysis_regime(D, X, sigma, rep)
    return rep


@dataclass
class OrthogonalityRecord:
    D: int
    genus_count: int
    rows: list[tuple[int, int, bool, int]]  # (p, class index, in principal genus, sum_psi psi)

    @property
    def ok(self) -> bool:
        return all(tot == (self.genus_count if pg else 0) for _, _, pg, tot in self.rows)


def orthogonality_sum(D: int, pmax: int = 1000) -> OrthogonalityRecord:
    """sum_psi psi(p) for every split or ramified p <= pmax, compared with the genus of p's class."""
    cg = class_group(D)
    chars = genus_characters(D)
    pg = set(cg.principal_genus)
    rows = []
    for p in prime_table(max(2, pmax)).primes:
        if p > pmax:
            break
        cls = represent_prime(cg, p)
        if cls is None:
            continue
        total = sum(psi_value(psi, p) for psi in chars)
        rows.append((p, cls, cls in pg, total))
    return OrthogonalityRecord(D, cg.genus_count, rows)
