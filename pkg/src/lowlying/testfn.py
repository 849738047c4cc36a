"""Even test functions g whose Fourier transform ghat is supported in [-sigma, sigma].

Normalization: ghat(u) = int g(x) exp(-2 pi i x u) dx, so g(0) = int ghat and
ghat(0) = int g.  ``g_imag(y)`` is g(iy) = int ghat(u) exp(-2 pi u y) du.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TestFunctionPair:
    name: str
    sigma: float
    g: ArrayFn
    g_imag: ArrayFn
    ghat: ArrayFn
    ghat0: float
    max_ghat: float
    tail_constant: float  # |g(y)| <= tail_constant / (1 + y^2)
    tail_coeff: float  # |g(y)| <= tail_coeff / y^2
    fejer: bool = False

    __test__ = False  # not a pytest class

    @property
    def g0(self) -> float:
        return float(self.g(np.array([0.0]))[0])

    def majorant(self, y: np.ndarray | float) -> np.ndarray:
        """Pointwise upper bound for |g(y)| used in tail certificates."""
        y = np.abs(np.asarray(y, dtype=float))
        with np.errstate(divide="ignore"):
            return np.minimum(self.tail_constant / (1 + y * y), self.tail_coeff / (y * y))


def fejer_pair(sigma: float) -> TestFunctionPair:
    """Triangle transform max(0, 1 - |u|/sigma); g(y) = sigma sinc^2(sigma y)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")

    def g(y):
        y = np.asarray(y, dtype=float)
        return sigma * np.sinc(sigma * y) ** 2

    def g_imag(y):
        x = np.pi * sigma * np.abs(np.asarray(y, dtype=float))
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(x < 1e-8, 1.0 + x * x / 3, np.sinh(x) / np.where(x == 0, 1, x))
        return sigma * r * r

    def ghat(u):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(u, dtype=float)) / sigma)

    return TestFunctionPair(
        name="fejer",
        sigma=sigma,
        g=g,
        g_imag=g_imag,
        ghat=ghat,
        ghat0=1.0,
        max_ghat=1.0,
        tail_constant=sigma + 1.0 / (math.pi**2 * sigma),
        tail_coeff=1.0 / (math.pi**2 * sigma),
        fejer=True,
    )


def _bump(u: np.ndarray, r: float) -> np.ndarray:
    x = np.asarray(u, dtype=float) / r
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def bump_pair(sigma: float, nodes: int = 400) -> TestFunctionPair:
    """ghat = b * b for the smooth bump b supported in [-sigma/2, sigma/2]; g = (b-transform)^2 >= 0.

    Everything is evaluated with Gauss-Legendre rules on the supports, normalized to ghat(0) = 1.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    r = sigma / 2
    x, w = np.polynomial.legendre.leggauss(nodes)
    u = r * x
    wu = r * w
    bu = _bump(u, r)

    rules = {nodes: (u, bu * wu)}

    def rule(n):
        if n not in rules:
            xn, wn = np.polynomial.legendre.leggauss(n)
            rules[n] = (r * xn, _bump(r * xn, r) * r * wn)
        return rules[n]

    def bcheck(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        # the rule must resolve about sigma * |y| oscillations of the cosine; the node
        # count depends only on each y, so values do not depend on the batch
        need = 2 * sigma * np.abs(y) + 64
        ns = np.where(need <= nodes, nodes, 2 ** np.ceil(np.log2(np.maximum(need, 1))).astype(int))
        out = np.empty_like(y)
        for n in np.unique(ns):
            sel = ns == n
            un, wn = rule(int(n))
            out[sel] = (np.cos(2 * np.pi * np.outer(y[sel], un)) * wn).sum(axis=1)
        return out

    norm = float((bu * bu * wu).sum())

    def g(y):
        shape = np.shape(y)
        return (bcheck(np.ravel(y)) ** 2 / norm).reshape(shape)

    # ghat(s) = int b(u) b(s - u) du / norm over the overlap of the two supports
    xc, wc = np.polynomial.legendre.leggauss(nodes)

    def ghat(s):
        s = np.asarray(s, dtype=float)
        shape = s.shape
        sv = np.abs(s.ravel())
        lo = np.maximum(-r, sv - r)
        hi = np.minimum(r, sv + r)
        half = np.maximum(hi - lo, 0.0) / 2
        u = half[:, None] * xc[None, :] + ((hi + lo) / 2)[:, None]
        vals = (_bump(u, r) * _bump(sv[:, None] - u, r) * wc[None, :]).sum(axis=1) * half / norm
        return vals.reshape(shape)

    xs, ws = np.polynomial.legendre.leggauss(2 * nodes)
    us = sigma * xs
    ghs = ghat(us) * sigma * ws

    def g_imag(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        shape = y.shape
        out = (np.cosh(2 * np.pi * np.outer(y.ravel(), us)) * ghs).sum(axis=1)
        return out.reshape(shape)

    ys = np.linspace(0, 200, 20001)
    gs = g(ys)
    tail_constant = float(np.max(gs * (1 + ys**2))) * 1.05
    tail_coeff = float(np.max(gs[1:] * ys[1:] ** 2)) * 1.05
    return TestFunctionPair(
        name="bump",
        sigma=sigma,
        g=g,
        g_imag=g_imag,
        ghat=ghat,
        ghat0=float(ghat(0.0)),
        max_ghat=float(ghat(0.0)),
        tail_constant=tail_constant,
        tail_coeff=tail_coeff,
    )


def make_pair(name: str, sigma: float) -> TestFunctionPair:
    if name == "fejer":
        return fejer_pair(sigma)
    if name == "bump":
        return bump_pair(sigma)
    raise ValueError(f"unknown test function family {name!r}")


def integral_of_g(tf: TestFunctionPair) -> float:
    """int g over the real line by quadrature (oscillatory tail handled by QAWF for Fejer)."""
    if tf.fejer:
        s = tf.sigma
        a = 10.0 / s
        head, _ = integrate.quad(lambda t: float(tf.g(t)), 0, a, limit=400, epsabs=1e-13)
        # g = (1 - cos(2 pi s t)) / (2 pi^2 s t^2) beyond a
        c = 1.0 / (2 * math.pi**2 * s)
        smooth = c / a
        osc, _ = integrate.quad(lambda t: c / t**2, a, np.inf, weight="cos", wvar=2 * math.pi * s)
        return 2 * (head + smooth - osc)
    val, _ = integrate.quad(lambda t: float(tf.g(t)), 0, 60.0 / tf.sigma, limit=800, epsabs=1e-13)
    return 2 * val


def sin_kernel_functional(tf: TestFunctionPair) -> float:
    """2 int g(y) (1 - sin(2 pi sigma y)/(2 pi y)) dy by quadrature."""
    s = tf.sigma

    def kern(y):
        return float(tf.g(y)) * (1.0 - s * np.sinc(2 * s * y))

    if tf.fejer:
        a = 10.0 / s
        head, _ = integrate.quad(kern, 0, a, limit=400, epsabs=1e-13)
        c = 1.0 / (2 * math.pi**2 * s)
        w = 2 * math.pi * s
        # tail of g(1 - sin(w y)/(2 pi y)) with g = c (1 - cos(w y)) / y^2
        t1 = c / a
        t2, _ = integrate.quad(lambda y: c / y**2, a, np.inf, weight="cos", wvar=w)
        t3, _ = integrate.quad(lambda y: c / (2 * math.pi * y**3), a, np.inf, weight="sin", wvar=w)
        # (1 - cos)(sin) = sin - sin(2wy)/2
        t4, _ = integrate.quad(lambda y: c / (4 * math.pi * y**3), a, np.inf, weight="sin", wvar=2 * w)
        return 2 * 2 * (head + t1 - t2 - t3 + t4)
    val, _ = integrate.quad(kern, 0, 60.0 / s, limit=800, epsabs=1e-13)
    return 4 * val


def pole_term(tf: TestFunctionPair, L: float, delta: float) -> float:
    """2 g(i L/4pi) - 2 g(i (1/2 - delta) L / 2pi): pole of zeta minus a real zero at 1 - delta."""
    if not 0 <= delta < 0.5:
        raise ValueError("delta must lie in [0, 1/2)")
    a = float(tf.g_imag(np.array([L / (4 * math.pi)]))[0])
    b = float(tf.g_imag(np.array([(0.5 - delta) * L / (2 * math.pi)]))[0])
    return 2 * a - 2 * b


def pole_term_integral(tf: TestFunctionPair, L: float, delta: float) -> float:
    """Same quantity as 2 int ghat(u) (exp(-uL/2) - exp(-(1/2 - delta) u L)) du."""
    if not 0 <= delta < 0.5:
        raise ValueError("delta must lie in [0, 1/2)")
    s = tf.sigma
    # ghat even: int ghat(u)(e^{-au} - e^{-bu}) over [-s, s] = 2 int_0^s ghat(u)(cosh(au) - cosh(bu))
    a = L / 2
    b = (0.5 - delta) * L

    def f(u):
        return float(tf.ghat(u)) * (math.cosh(a * u) - math.cosh(b * u))

    val, _ = integrate.quad(f, 0, s, limit=400, epsabs=1e-14, epsrel=1e-12)
    return 4 * val
