"""Special functions: Hurwitz zeta (Euler-Maclaurin), digamma, Dirichlet L-functions of
real primitive characters, zeros on the critical line, real zeros near 1, and the
resonance log-derivatives used in the density formulas.

All evaluators accept a scalar or an array of complex arguments.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import optimize, special

from .arith import Discriminant, character_table, is_fundamental

EULER_GAMMA = 0.57721566490153286060651209008240243

# B_2 .. B_20
_BERNOULLI = [
    1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510, 43867 / 798, -174611 / 330,
]
_EM_COEF = [b / math.factorial(2 * k + 2) for k, b in enumerate(_BERNOULLI)]


class NearZeroError(ArithmeticError):
    """Raised when a logarithmic derivative is requested at (or extremely close to) a zero."""


def _as_complex(s) -> tuple[np.ndarray, bool]:
    arr = np.asarray(s, dtype=complex)
    return np.atleast_1d(arr).ravel(), arr.ndim == 0


def _shape_back(out: np.ndarray, scalar: bool, like):
    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(like))


def _terms_for(s: np.ndarray) -> int:
    # keeps the first omitted Bernoulli term below ~1e-16 relative (see module tests)
    return max(12, int(math.ceil((float(np.max(np.abs(s))) + 21.0) / 1.1)))


def _phi(z: np.ndarray) -> np.ndarray:
    """expm1(z)/z for complex z."""
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    big = np.expm1(zs.real) * np.exp(1j * zs.imag) + (np.exp(1j * zs.imag) - 1)
    out = big / zs
    ser = 1 + z / 2 + z * z / 6 + z**3 / 24
    return np.where(small, ser, out)


def _dphi(z: np.ndarray) -> np.ndarray:
    """Derivative of expm1(z)/z."""
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    out = (np.exp(zs) * (zs - 1) + 1) / (zs * zs)
    ser = 0.5 + z / 3 + z * z / 8 + z**3 / 30
    return np.where(small, ser, out)


def _em_corrections(s: np.ndarray, y: np.ndarray):
    """y^{-s}/2 + sum_k B_2k/(2k)! (s)_{2k-1} y^{-s-2k+1} and its s-derivative.

    s has shape (m, 1), y shape (1, k); result shape (m, k).
    """
    logy = np.log(y)
    ys = np.exp(-s * logy)
    val = ys / 2
    der = -logy * ys / 2
    poch = s.copy() * np.ones_like(logy)
    dpoch = np.ones_like(poch)
    inv_y = 1.0 / y
    pw = ys * inv_y  # y^{-s-1}
    for k, c in enumerate(_EM_COEF):
        val = val + c * poch * pw
        der = der + c * (dpoch * pw - poch * logy * pw)
        # advance (s)_{2k+1} -> (s)_{2k+3}
        for j in (2 * k + 1, 2 * k + 2):
            dpoch = dpoch * (s + j) + poch
            poch = poch * (s + j)
        pw = pw * inv_y * inv_y
    return val, der


def hurwitz_zeta(s, a: float, derivative: bool = False):
    """zeta(s, a) for 0 < a <= 1 by Euler-Maclaurin; with derivative=True returns (value, d/ds).

    Relative accuracy is about 1e-13 for Re s >= -1 and degrades to about 1e-11 near Re s = -3.
    """
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    sv, scalar = _as_complex(s)
    if np.any(sv == 1):
        raise ValueError("pole of the Hurwitz zeta function at s = 1")
    N = _terms_for(sv)
    n = np.arange(N) + a
    logn = np.log(n)
    S = sv[:, None]
    pw = np.exp(-S * logn[None, :])
    val = pw.sum(axis=1)
    der = -(pw * logn[None, :]).sum(axis=1)
    y = N + a
    ly = math.log(y)
    u = (1 - sv) * ly
    val = val + 1 / (sv - 1) - ly * _phi(u)
    der = der - 1 / (sv - 1) ** 2 + ly * ly * _dphi(u)
    cv, cd = _em_corrections(S, np.array([[y]]))
    val = val + cv[:, 0]
    der = der + cd[:, 0]
    if derivative:
        return _shape_back(val, scalar, s), _shape_back(der, scalar, s)
    return _shape_back(val, scalar, s)


def hurwitz_zeta_ds(s, a: float):
    return hurwitz_zeta(s, a, derivative=True)[1]


def digamma(z):
    """Gamma'/Gamma by upward recurrence to Re z >= 12 and the Stirling series."""
    zv, scalar = _as_complex(z)
    if np.any((zv.imag == 0) & (zv.real <= 0) & (zv.real == np.round(zv.real))):
        raise ValueError("digamma has poles at the non-positive integers")
    acc = np.zeros_like(zv)
    w = zv.copy()
    for _ in range(64):
        low = w.real < 12
        if not low.any():
            break
        acc = acc - np.where(low, 1.0 / w, 0)
        w = np.where(low, w + 1, w)
    inv2 = 1.0 / (w * w)
    series = np.zeros_like(w)
    pw = inv2.copy()
    for k, b in enumerate(_BERNOULLI):
        series = series + b / (2 * k + 2) * pw
        pw = pw * inv2
    out = acc + np.log(w) - 0.5 / w - series
    return _shape_back(out, scalar, z)


class _Character:
    """Table data for chi_d, d fundamental."""

    def __init__(self, d: int):
        if not is_fundamental(d):
            raise ValueError(f"{d} is not a fundamental discriminant")
        self.d = d
        self.q = abs(d)
        self.parity = 0 if d > 0 else 1
        self.table = character_table(d) if self.q > 1 else np.array([1], dtype=np.int64)
        self.residues = np.flatnonzero(self.table[1:]) + 1 if self.q > 1 else np.array([1])
        self.values = self.table[self.residues % self.q].astype(float)


_CHAR_CACHE: dict[int, _Character] = {}


def _char(d: int) -> _Character:
    c = _CHAR_CACHE.get(d)
    if c is None:
        c = _CHAR_CACHE[d] = _Character(d)
    return c


def _lseries_block(sv: np.ndarray, ch: _Character, N: int):
    """L(s, chi_d) and L'(s, chi_d) for a 1-d array sv with a common Euler-Maclaurin cutoff N."""
    q = ch.q
    # direct part: m = q n + a, n < N
    m = (np.arange(N)[:, None] * q + ch.residues[None, :]).ravel()
    cm = np.tile(ch.values, N)
    logm = np.log(m.astype(float))
    S = sv[:, None]
    pw = np.exp(-S * logm[None, :]) * cm[None, :]
    val = pw.sum(axis=1)
    der = -(pw * logm[None, :]).sum(axis=1)
    # tails of the Hurwitz pieces at y = N + a/q
    y = N + ch.residues / q
    cv, cd = _em_corrections(S, y[None, :])
    tv = (cv * ch.values).sum(axis=1)
    td = (cd * ch.values).sum(axis=1)
    if q == 1:
        # y^{1-s}/(s-1) = 1/(s-1) - log(y) phi((1-s) log y), pole kept exact
        ly = math.log(y[0])
        u = (1 - sv) * ly
        tv = tv + 1 / (sv - 1) - ly * _phi(u)
        td = td - 1 / (sv - 1) ** 2 + ly * ly * _dphi(u)
        return val + tv, der + td
    # sum chi(a) = 0 lets the pole piece become sum chi(a) (y^{1-s} - N^{1-s})/(s-1)
    u = (1 - sv)[:, None]
    ell = np.log(y / N)[None, :]
    G = ell * _phi(u * ell)
    dG = ell * ell * _dphi(u * ell)
    Nu = np.exp(u * math.log(N))
    F = -Nu * G
    dF = Nu * (math.log(N) * G + dG)  # d/ds
    tv = tv + (F * ch.values).sum(axis=1)
    td = td + (dF * ch.values).sum(axis=1)
    qs = np.exp(-sv * math.log(q))
    lq = math.log(q)
    return val + qs * tv, der - lq * qs * tv + qs * td


def _lseries(sv: np.ndarray, d: int):
    ch = _char(d)
    if ch.q == 1 and np.any(sv == 1):
        raise ValueError("pole of zeta at s = 1")
    val = np.empty(sv.shape, dtype=complex)
    der = np.empty(sv.shape, dtype=complex)
    order = np.argsort(np.abs(sv))
    # chunk so that each block shares a cutoff and stays a few MB
    width = max(1, int(4e6 // max(1, ch.q * _terms_for(sv[order[-1:]]))))
    for start in range(0, len(order), width):
        idx = order[start:start + width]
        N = _terms_for(sv[idx])
        v, dv = _lseries_block(sv[idx], ch, N)
        val[idx] = v
        der[idx] = dv
    return val, der


def dirichlet_L(s, d: int, derivative: bool = False):
    """L(s, chi_d) for fundamental d (d = 1 gives zeta)."""
    sv, scalar = _as_complex(s)
    val, der = _lseries(sv, d)
    if derivative:
        return _shape_back(val, scalar, s), _shape_back(der, scalar, s)
    return _shape_back(val, scalar, s)


def L_logderiv(s, d: int, tol: float = 1e-13):
    sv, scalar = _as_complex(s)
    val, der = _lseries(sv, d)
    if np.any(np.abs(val) < tol):
        raise NearZeroError(f"|L(s, chi_{d})| < {tol} near s = {sv[np.argmin(np.abs(val))]}")
    return _shape_back(der / val, scalar, s)


def zeta_logderiv(s, tol: float = 1e-13):
    """zeta'/zeta(s)."""
    return L_logderiv(s, 1, tol)


def _prime_power_logderiv(sv: np.ndarray, primes) -> np.ndarray:
    """sum over q of log q * q^{-s} / (1 - q^{-s})."""
    out = np.zeros_like(sv)
    for q in primes:
        lq = math.log(q)
        w = np.exp(-sv * lq)
        out = out + lq * w / (1 - w)
    return out


def zeta_D_logderiv(s, D: int):
    """Log-derivative of zeta(s)^2 prod_{q|D}(1 - q^{-s}) / zeta(s+1)^2."""
    sv, scalar = _as_complex(s)
    if np.any(sv == 1):
        raise ValueError("pole at s = 1")
    primes = Discriminant.of(D).prime_divisors
    out = 2 * zeta_logderiv(sv) + _prime_power_logderiv(sv, primes) - 2 * zeta_logderiv(sv + 1)
    return _shape_back(out, scalar, s)


def zeta_LS_logderiv(s, D: int):
    """Log-derivative of zeta(s) L(2s, 1_D) / (zeta(s+1)^2 L(s, chi_{-D}))."""
    sv, scalar = _as_complex(s)
    if np.any(sv == 1):
        raise ValueError("pole at s = 1")
    primes = Discriminant.of(D).prime_divisors
    out = (
        zeta_logderiv(sv)
        + 2 * (zeta_logderiv(2 * sv) + _prime_power_logderiv(2 * sv, primes))
        - 2 * zeta_logderiv(sv + 1)
        - L_logderiv(sv, -D)
    )
    return _shape_back(out, scalar, s)


def re_resonance_on_line(t: np.ndarray, D: int) -> tuple[np.ndarray, np.ndarray]:
    """Real parts of zeta_D'/zeta_D(1+2it) and zeta_LS'/zeta_LS(1+2it).

    At t = 0 the simple pole of zeta'/zeta at 1 is purely imaginary on the line, so the
    real parts extend continuously; that limit is used there.
    """
    t = np.asarray(t, dtype=float)
    primes = Discriminant.of(D).prime_divisors
    red = np.empty_like(t)
    blue = np.empty_like(t)
    nz = t != 0
    if nz.any():
        s = 1 + 2j * t[nz]
        red[nz] = zeta_D_logderiv(s, D).real
        blue[nz] = zeta_LS_logderiv(s, D).real
    if (~nz).any():
        qsum1 = sum(math.log(q) / (q - 1) for q in primes)
        qsum2 = sum(math.log(q) / (q * q - 1) for q in primes)
        z2 = zeta_logderiv(2.0).real
        red[~nz] = 2 * EULER_GAMMA + qsum1 - 2 * z2
        blue[~nz] = EULER_GAMMA + 2 * (zeta_logderiv(2.0).real + qsum2) - 2 * z2 - L_logderiv(1.0, -D).real
    return red, blue


# ----------------------------------------------------------------------------- zeros


def _theta(t: np.ndarray, ch: _Character) -> np.ndarray:
    """Phase of (q/pi)^{(s+a)/2} Gamma((s+a)/2) at s = 1/2 + it (zero at t = 0)."""
    z = (0.5 + 1j * t + ch.parity) / 2
    return (z * math.log(ch.q / math.pi)).imag + special.loggamma(z).imag


def hardy_z(t, d: int) -> np.ndarray:
    """Real-valued rotation of L(1/2 + it, chi_d) with the sign of the completed function."""
    tv = np.atleast_1d(np.asarray(t, dtype=float))
    ch = _char(d)
    val, _ = _lseries(0.5 + 1j * tv, d)
    z = (np.exp(1j * _theta(tv, ch)) * val).real
    if ch.q == 1:
        z = -z  # xi = s(s-1)/2 * Lambda and s(s-1) < 0 on the line
    return z if np.ndim(t) else float(z[0])


def completed(s, d: int):
    """xi(s, chi_d) = (|d|/pi)^{(s+a)/2} Gamma((s+a)/2) L(s, chi_d), times s(s-1)/2 when d = 1."""
    sv, scalar = _as_complex(s)
    ch = _char(d)
    z = (sv + ch.parity) / 2
    pre = np.exp(z * math.log(ch.q / math.pi) + special.loggamma(z))
    val, _ = _lseries(sv, d)
    out = pre * val
    if ch.q == 1:
        out = out * sv * (sv - 1) / 2
    return _shape_back(out, scalar, s)


@dataclass(frozen=True)
class ZeroRecord:
    d: int
    index: int
    gamma: float
    width: float


def zero_count(d: int, T: float, step: float = 0.01) -> int:
    """N(T): zeros with 0 < gamma <= T, from the continuous change of arg of the completed
    function along 2 -> 2 + iT -> 1/2 + iT (the real segment contributes nothing)."""
    ch = _char(d)
    L2 = dirichlet_L(2 + 1j * T, d)
    arg = math.atan2(L2.imag, L2.real)  # |L - 1| < 1 on Re s = 2
    x = 2.0
    h = step
    prev = L2
    while x > 0.5:
        h = min(h, x - 0.5)
        cur = dirichlet_L(x - h + 1j * T, d)
        da = math.atan2((cur / prev).imag, (cur / prev).real)
        if abs(da) > math.pi / 8 and h > 1e-7:
            h /= 4
            continue
        arg += da
        prev = cur
        x -= h
        h = min(step, 2 * h)
    theta = float(_theta(np.array([T]), ch)[0])
    n = (theta + arg) / math.pi + (1 if ch.q == 1 else 0)
    return int(round(n))


def _scan_sign_changes(f, t0: float, t1: float, step: float):
    grid = np.arange(t0, t1 + step / 2, step)
    if grid[-1] > t1:
        grid[-1] = t1
    vals = f(grid)
    idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    exact = np.flatnonzero(vals == 0)
    return grid, vals, idx, exact


def find_zeros(d: int, T: float, step: float = 0.01, xtol: float = 1e-10, check: bool = True) -> list[ZeroRecord]:
    """Ordinates 0 < gamma <= T of the completed L-function on the critical line."""
    if not is_fundamental(d):
        raise ValueError(f"{d} is not fundamental")
    f = lambda t: hardy_z(t, d)  # noqa: E731
    # nudge T off a zero so the count is well defined
    Tq = T
    while abs(f(np.array([Tq]))[0]) < 1e-12:
        Tq += 1e-6
    cur = step
    for _attempt in range(3):
        grid, vals, idx, exact = _scan_sign_changes(f, 0.0, Tq, cur)
        gammas = [float(grid[i]) for i in exact if grid[i] > 0]
        for i in idx:
            a, b = grid[i], grid[i + 1]
            g = optimize.brentq(lambda x: f(np.array([x]))[0], a, b, xtol=xtol, rtol=4 * np.finfo(float).eps)
            gammas.append(g)
        gammas.sort()
        if not check:
            break
        n = zero_count(d, Tq)
        if n == len(gammas):
            break
        cur /= 10
    else:
        raise RuntimeError(f"zero count mismatch for d={d}, T={T}: {len(gammas)} sign changes vs N(T) = {n}")
    w = max(xtol, 1e-12)
    return [ZeroRecord(d, k + 1, g, w) for k, g in enumerate(gammas)]


@dataclass(frozen=True)
class LSRecord:
    D: int
    delta: float | None


def real_zero_scan(D: int, step: float = 1e-4) -> LSRecord:
    """Largest real zero 1 - delta of L(s, chi_{-D}) in (1/2, 1), if any."""
    d = -D
    xs = np.arange(0.5 + step, 1.0, step)
    vals = dirichlet_L(xs.astype(complex), d).real
    idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    if len(idx) == 0:
        return LSRecord(D, None)
    i = idx[-1]
    beta = optimize.brentq(lambda x: dirichlet_L(complex(x), d).real, xs[i], xs[i + 1], xtol=1e-14)
    return LSRecord(D, 1 - beta)


class ZeroCache:
    """Line-delimited JSON store of zero records keyed by (d, T, step).

    A run to height T is answered from any stored run with the same d and step and a
    larger height; a marker row with index -1 records that a run was completed, so
    empty zero lists are cached too.
    """

    def __init__(self, path: str | os.PathLike | None):
        self.path = Path(path) if path else None
        self._mem: dict[tuple, list[ZeroRecord]] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            rows: dict[tuple, dict[int, ZeroRecord]] = {}
            done = set()
            for line in self.path.read_text().splitlines():
                if not line.strip():
                    continue
                r = json.loads(line)
                key = (r["d"], r["T"], r["step"])
                if r["index"] < 0:
                    done.add(key)
                    continue
                rec = ZeroRecord(r["d"], r["index"], r["gamma"], r["width"])
                rows.setdefault(key, {})[rec.index] = rec  # last write wins
            # runs without a completion marker were interrupted and are recomputed
            self._mem = {k: [v[i] for i in sorted(v)] for k, v in rows.items() if k in done}
            self._mem.update({k: [] for k in done if k not in rows})

    def _lookup(self, d: int, T: float, step: float) -> list[ZeroRecord] | None:
        best = None
        for (dd, TT, ss) in self._mem:
            if dd == d and ss == step and TT >= T and (best is None or TT < best):
                best = TT
        if best is None:
            return None
        return [r for r in self._mem[(d, best, step)] if r.gamma <= T]

    def lookup(self, d: int, T: float, step: float = 0.01) -> list[ZeroRecord] | None:
        with self._lock:
            return self._lookup(d, float(T), float(step))

    def store(self, d: int, T: float, step: float, recs: list[ZeroRecord]) -> None:
        T, step = float(T), float(step)
        with self._lock:
            self._mem[(d, T, step)] = recs
            if self.path:
                with self.path.open("a") as fh:
                    for r in recs:
                        fh.write(json.dumps({**asdict(r), "T": T, "step": step}) + "\n")
                    fh.write(json.dumps({"d": d, "index": -1, "gamma": None, "width": None,
                                         "T": T, "step": step}) + "\n")

    def zeros(self, d: int, T: float, step: float = 0.01) -> list[ZeroRecord]:
        hit = self.lookup(d, T, step)
        if hit is not None:
            return hit
        recs = find_zeros(d, T, step)
        self.store(d, T, step, recs)
        return recs
