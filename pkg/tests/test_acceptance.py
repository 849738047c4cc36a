"""The thirteen acceptance criteria, each at its stated tolerance.

Every test prints one line ``[ACCEPT n] PASS|FAIL <summary>``.  Zeros are cached in
``.cache/zeros.jsonl`` (override with LOWLYING_ZERO_CACHE) so reruns are quick; a cold run
of criterion 7 takes about ten minutes on one core.
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.signal import argrelmin

from lowlying.arith import is_fundamental, prime_table
from lowlying.explicit import (
    ZETA2_LOGDERIV,
    a_prime,
    adjudicate_even2_sign,
    dedekind_ef,
    ef_balance,
    gamma_term,
    log_scale,
    rem_assembled,
    rem_closed,
    rem_prime_term,
    resonance_table,
    s_even1,
    s_even1_integral,
    siegel_scaling,
    sum_over_characters_odd,
    s_odd_psi,
)
from lowlying.family import char_sum, enumerate_family, moebius_decomposition, orthogonality_sum, regime
from lowlying.lfun import EULER_GAMMA, ZeroCache, digamma, find_zeros, real_zero_scan, zeta_logderiv
from lowlying.quadforms import GenusCharacter, class_group, genus_characters, principal_genus_min_prime
from lowlying.testfn import bump_pair, fejer_pair, pole_term, pole_term_integral, sin_kernel_functional

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="module")
def cache():
    path = Path(os.environ.get("LOWLYING_ZERO_CACHE", ROOT / ".cache" / "zeros.jsonl"))
    path.parent.mkdir(parents=True, exist_ok=True)
    return ZeroCache(path)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[ACCEPT {n:>2}] {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return emit


def test_01_digamma_identity(report):
    lhs = (digamma(0.25) + digamma(0.75)).real
    rhs = -2 * EULER_GAMMA - math.log(64)
    err = abs(lhs - rhs)
    assert report(1, err <= 1e-12, f"psi(1/4) + psi(3/4) + 2C + log 64 = {err:.3e} (tol 1e-12)")


def test_02_a_prime_at_zero(report):
    a5 = a_prime(0.0, 10**5).real
    a6 = a_prime(0.0, 10**6).real
    z = -zeta_logderiv(2.0).real
    ok = abs(a5 - 0.569961) <= 5e-6 and abs(a6 - z) <= 1e-8
    assert report(2, ok, f"A'(0) = {a5:.9f} (primes to 1e5 + PNT tail), |A'(0) - (-zeta'/zeta(2))| = "
                         f"{abs(a6 - z):.2e} (primes to 1e6; {abs(a5 - z):.2e} at 1e5)")


def test_03_rem_oracle(report):
    t = np.round(np.arange(0.0, 20.0 + 0.005, 0.01), 12)
    diff = float(np.max(np.abs(rem_closed(t) - rem_assembled(t))))
    at0 = abs(rem_closed(0.0))
    vanish = max(abs(rem_prime_term(p, 2 * math.pi * k / math.log(p))) for p in (2, 3, 5) for k in range(1, 6))
    ok = diff <= 1e-8 and at0 <= 1e-10 and vanish <= 1e-12
    assert report(3, ok, f"max|Rem closed - (A' + zeta'/zeta(2+2it))| = {diff:.2e}, |Rem(0)| = {at0:.1e}, "
                         f"single-prime vanishing {vanish:.1e}")


def test_04_zero_anchors(report):
    z = find_zeros(1, 15.0)[0].gamma
    l1411 = find_zeros(-1411, 0.5)[0].gamma
    ok = abs(z - 14.134725) <= 1e-5 and abs(l1411 - 0.077967) <= 1e-5
    assert report(4, ok, f"first zeta ordinate {z:.9f}, first ordinate for chi_-1411 {l1411:.9f}")


def test_05_resonance_figure(report):
    t, red, blue, green, zeros = resonance_table(1411, 10.0, 0.005)
    # (a) the q | D components: remove the D-independent zeta part and correlate
    tt, s = t[1:], 1 + 2j * t[1:]
    resid = red[1:] - (2 * zeta_logderiv(s) - 2 * zeta_logderiv(s + 1)).real
    resid = resid - resid.mean()
    # Hann-tapered correlation; noise is measured outside the main lobes (half-width 4 pi / length)
    win = np.hanning(len(tt))
    lobe = 4 * math.pi / (tt[-1] - tt[0])
    ws = np.arange(0.5, 15.0, 0.01)
    amp = np.abs(np.exp(-1j * np.outer(ws, tt)) @ (resid * win)) * 2 / win.sum()
    found, noise_mask = {}, np.ones_like(ws, dtype=bool)
    for q in (17, 83):
        w0 = 2 * math.log(q)  # angular frequency in t; the period in 2t is 2 pi / log q
        near = np.abs(ws - w0) <= lobe
        k = np.flatnonzero(near)[np.argmax(amp[near])]
        found[q] = (ws[k], amp[k])
        noise_mask &= ~near
        noise_mask &= np.abs(ws - 2 * w0) > lobe  # second harmonic from q^{-2s}
    noise = float(amp[noise_mask].max())
    ok_a = all(abs(w - 2 * math.log(q)) <= 0.1 and a > 2 * noise for q, (w, a) in found.items())
    periods = {q: 2 * math.pi / w for q, (w, _) in found.items()}
    # (b) a local minimum of blue within 0.05 of each green point; t = 0 counts (blue is even)
    mins = np.concatenate(([0.0], t[argrelmin(blue)[0]]))
    dist = [float(np.min(np.abs(mins - g))) for g in zeros if g <= 10.0]
    missed = sum(d > 0.05 for d in dist)
    ok_b = missed == 0
    detail = (f"(a) periods in 2t: 17 -> {2 * periods[17]:.3f}, 83 -> {2 * periods[83]:.3f}, peak/noise "
              f"{found[17][1] / noise:.1f}, {found[83][1] / noise:.1f}: {'ok' if ok_a else 'no'}; "
              f"(b) {len(dist) - missed}/{len(dist)} green points have a blue minimum within 0.05 "
              f"(worst {max(dist):.3f})")
    assert report(5, ok_a and ok_b, detail)


@pytest.mark.parametrize("D", [3, 4, 15, 20])
def test_06_dedekind_balance(D, report, cache):
    assert real_zero_scan(D).delta is None
    rep = dedekind_ef(D, fejer_pair(1.0), 1e5, 50.0, cache=cache)
    ok = rep.balanced and rep.tail_total <= 5e-3
    assert report(6, ok, f"D = {D}: |residual| = {abs(rep.residual):.3e} <= tail {rep.tail_total:.3e}")


def _family_balance(X, cache):
    fam = enumerate_family(15, X)
    tf = fejer_pair(1.0)
    reps = [ef_balance(psi, fam, tf, 50.0, cache=cache) for psi in (GenusCharacter(5, -3), GenusCharacter(1, -15))]
    same = all(getattr(reps[0], k) == getattr(reps[1], k) for k in ("conductor_term", "gamma_term", "even1", "even2"))
    return fam, reps, same


def test_07_family_balance_smoke(report, cache):
    t0 = time.time()
    fam, reps, same = _family_balance(10, cache)
    dt = time.time() - t0
    ok = reps[0].balanced and same and dt < 300
    assert report(7, ok, f"smoke X = 10 (X* = {fam.xstar}): |residual| = {abs(reps[0].residual):.3e} <= tail "
                         f"{reps[0].tail_total:.3e}, non-odd terms identical across psi: {same}, {dt:.0f} s")


@pytest.mark.slow
def test_07_family_balance(report, cache):
    fam, reps, same = _family_balance(50, cache)
    r = reps[0]
    ok = r.balanced and same
    assert report(7, ok, f"X = 50 (X* = {fam.xstar}), psi = (5, -3): |residual| = {abs(r.residual):.3e} <= tail "
                         f"{r.tail_total:.3e}; psi = (1, -15): {abs(reps[1].residual):.3e} <= "
                         f"{reps[1].tail_total:.3e}; non-odd terms identical: {same}")


def test_08_exact_cancellations(report):
    orth = [D for D in range(3, 201) if is_fundamental(-D)]
    bad_orth = []
    for D in orth:
        cg = class_group(D)
        pg = set(cg.principal_genus)
        chars = genus_characters(D)
        for i, f in enumerate(cg.forms):
            if sum(c.on_form(f) for c in chars) != (cg.genus_count if i in pg else 0):
                bad_orth.append(D)
        if not orthogonality_sum(D, 200).ok:
            bad_orth.append(D)
    # odd principal genus with e = 1 found by the class-group scan; X below x_max
    D, X = 5460, 18
    rep = regime(D, X, 1.0)
    cancel = sum_over_characters_odd(enumerate_family(D, X), log_scale(D, X), fejer_pair(1.0))
    # inert window: 2 and 3 are inert for -19 and sigma L < log 5
    fam = enumerate_family(19, 10)
    L = log_scale(19, 10)
    inert = [s_odd_psi(psi, fam, L, fejer_pair(0.4)) for psi in genus_characters(19)]
    ok = not bad_orth and rep.algebra_ok and rep.principal_genus_odd and cancel.exact_zero and cancel.total == 0 \
        and all(v == 0 for v in inert) and math.exp(0.4 * L) < 5
    assert report(8, ok, f"orthogonality on {len(orth)} discriminants D <= 200; sum_psi S_odd = {cancel.total} for "
                         f"D = {D} (h = 16, e = {rep.e}, X = {X} < {rep.x_max_algebra:.2f}); inert window S_odd = "
                         f"{inert[0]}")


def test_09_principal_genus_representation(report):
    Ds = [D for D in range(3, 2001) if is_fundamental(-D)]
    bad = [D for D in Ds if not principal_genus_min_prime(class_group(D)).ok]
    assert report(9, not bad, f"{len(Ds)} discriminants D <= 2000, violations: {bad}")


def test_10_counting(report):
    fam = enumerate_family(15, 10**6)
    density = 6 / math.pi**2 * 10**6
    stated = density * (2 / 3) * (5 / 6)
    rel = abs(fam.xstar / stated - 1)
    # the product over q | D of (1 - 1/(q + 1)) is (3/4)(5/6) for D = 15
    rel_q1 = abs(fam.xstar / (density * (3 / 4) * (5 / 6)) - 1)
    mismatches = []
    for D in (3, 4, 15, 20, 1411):
        for X in (10, 99, 1000, 10**4):
            f = enumerate_family(D, X)
            for p in prime_table(100).primes:
                if moebius_decomposition(p, D, X) != char_sum(p, f):
                    mismatches.append((D, X, p))
    ok = rel <= 0.01 and not mismatches
    assert report(10, ok, f"X* = {fam.xstar} vs (6/pi^2)(2/3)(5/6)X = {stated:.0f} (rel {rel:.2e}); vs "
                          f"(6/pi^2)(3/4)(5/6)X rel {rel_q1:.1e}; Moebius decomposition mismatches: {mismatches}")


def test_11_oracle_pairs(report):
    gaps = {}
    for sigma in (0.5, 1.0, 2.0):
        for L in (4.0, log_scale(15, 10), 12.0):
            gaps[("fejer", sigma, round(L, 3))] = gamma_term(L, fejer_pair(sigma)).gap
    bump = bump_pair(1.0)
    gaps[("bump", 1.0, 6.0)] = gamma_term(6.0, bump).gap
    g_gap = max(gaps.values())
    L = log_scale(15, 10)
    tf = fejer_pair(1.0)
    e1 = s_even1(15, L, tf)
    e1i = s_even1_integral(15, L, tf)
    e1_gap = abs(e1 - e1i.value)
    sk = []
    for sigma in (0.5, 1.0, 4 / 3, 2.0):
        for pair in (fejer_pair(sigma), bump_pair(sigma)):
            sk.append(abs(sin_kernel_functional(pair) - (2 * pair.ghat0 - pair.g0)))
    pole = max(abs(pole_term(p, L2, d) - pole_term_integral(p, L2, d))
               for p in (tf, bump) for L2 in (5.0, 12.0) for d in (0.0, 1e-5, 1e-3, 0.1))
    ok = g_gap <= 1e-8 and e1_gap <= 1e-6 and max(sk) <= 1e-8 and pole <= 1e-10
    assert report(11, ok, f"gamma {g_gap:.1e}, s_even1 {e1_gap:.1e} (integral tail {e1i.tail_bound:.0e}), "
                          f"sin kernel {max(sk):.1e}, pole term {pole:.1e}")


def test_12_sign_adjudication(report):
    rep = adjudicate_even2_sign(enumerate_family(1411, 100), fejer_pair(1.0))
    ok = len(rep.matches) == 1
    assert report(12, ok, f"D = 1411, X = 100: exact S_even2 = {rep.exact:.6f}, conventions "
                          f"{ {k: round(v, 6) for k, v in rep.conventions.items()} }, tol {rep.tolerance:.4f}; "
                          f"verdict {rep.verdict} (= +4 A'(0) ghat(0)/L, A'(0) = -zeta'(2)/zeta(2) = "
                          f"{-ZETA2_LOGDERIV:.6f})")


def test_13_synthetic_siegel_scaling(report):
    sc = siegel_scaling(15, fejer_pair(1.0), 1e5)
    ok = abs(sc.exponent - 1) <= 0.05 and all(1 / 3 <= r <= 3 for r in sc.ratios)
    assert report(13, ok, f"fitted exponent {sc.exponent:.4f}, value / (sigma max ghat (sqrt(D) X)^(sigma/2) "
                          f"delta) = {', '.join(f'{r:.3f}' for r in sc.ratios)}")
