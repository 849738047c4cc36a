import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowlying.arith import kronecker, lambda_split
from lowlying.explicit import (
    adjudicate_constant,
    ZETA2_LOGDERIV,
    a_prime,
    a_prime_D,
    a_prime_tail_bound,
    adjudicate_even2_sign,
    conductor_single,
    conductor_term,
    crude_a_prime_tail,
    dedekind_odd,
    density_constant,
    direct_prime_side,
    ef_balance,
    gamma_direct,
    gamma_rewrite,
    gamma_term,
    log_scale,
    odd_prime_weights,
    rem_assembled,
    rem_closed,
    rem_prime_term,
    rem_table,
    s_even1,
    s_even2_exact,
    s_even2_smooth,
    s_odd_psi,
    siegel_scaling,
    siegel_term,
    sum_over_characters_odd,
    zero_count_upper,
    zero_side,
)
from lowlying.family import enumerate_family
from lowlying.lfun import EULER_GAMMA, find_zeros
from lowlying.quadforms import GenusCharacter, genus_characters
from lowlying.testfn import bump_pair, fejer_pair, pole_term


@pytest.fixture(scope="module")
def bump1():
    return bump_pair(1.0)


CONFIGS = [
    (15, 50, (5, -3), 1.0),
    (15, 50, (1, -15), 1.7),
    (4, 30, (1, -4), 1.0),
    (20, 40, (5, -4), 1.3),
    (1411, 20, (17, -83), 1.0),
    (5460, 12, (105, -52), 0.8),
]


@pytest.mark.parametrize("D,X,psi,sigma", CONFIGS)
def test_prime_side_split_matches_direct_sum(D, X, psi, sigma):
    """S_even1 + S_even2 + S_odd(psi) is the family mean of the plain prime sums of the pairs."""
    fam = enumerate_family(D, X)
    tf = fejer_pair(sigma)
    L = log_scale(D, X)
    direct = math.fsum(direct_prime_side(D, psi, f, L, tf) for f in fam.members) / fam.xstar
    split = s_even1(D, L, tf) + s_even2_exact(fam, L, tf) + s_odd_psi(GenusCharacter(*psi), fam, L, tf)
    assert split == pytest.approx(direct, abs=1e-13)


@pytest.mark.parametrize("D", [3, 4, 15, 20, 1411])
def test_dedekind_prime_side_split(D):
    tf = fejer_pair(1.0)
    L = log_scale(D, 1e3)
    direct = direct_prime_side(D, (1, -D), 1, L, tf)
    assert dedekind_odd(D, L, tf) + s_even1(D, L, tf) == pytest.approx(direct, abs=1e-13)


def test_prime_sum_truncation_is_strict():
    # sigma L = log 8 exactly: p^k = 8 is excluded, 7 included
    tf = fejer_pair(1.0)
    L = math.log(8)
    direct = direct_prime_side(15, (1, -15), 1, L, tf)
    manual = 0.0
    for n, p in ((2, 2), (3, 3), (4, 2), (5, 5), (7, 7)):
        k = round(math.log(n) / math.log(p))
        c = kronecker(1, p) ** k + kronecker(-15, p) ** k
        manual += c * math.log(p) / math.sqrt(n) * (1 - math.log(n) / L)
    assert direct == pytest.approx(-2 / L * manual, abs=1e-14)


def test_conductor_term():
    fam = enumerate_family(15, 10**5)
    tf = fejer_pair(1.0)
    L = log_scale(15, 10**5)
    c = conductor_term(fam, L, tf)
    mean = np.mean([conductor_single(15, f, L, tf) for f in fam.members])
    assert c.exact == pytest.approx(mean, rel=1e-12)
    assert abs(c.gap) < 1e-4


def test_conductor_closed_form_depends_only_on_scale():
    # D X^2 fixed: 15 * 40^2 = 60 * 20^2
    tf = fejer_pair(1.0)
    L1, L2 = log_scale(15, 40), log_scale(60, 20)
    assert L1 == pytest.approx(L2, rel=1e-15)
    a = conductor_term(enumerate_family(15, 40), L1, tf).closed_form
    b = conductor_term(enumerate_family(4 * 15, 20), L2, tf).closed_form
    assert a == pytest.approx(b, rel=1e-14)


@pytest.mark.parametrize("L", [3.0, 6.0, 12.0])
@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_gamma_two_routes_fejer(L, sigma):
    tf = fejer_pair(sigma)
    assert abs(gamma_rewrite(L, tf) - gamma_direct(L, tf)) <= 1e-8


def test_gamma_two_routes_bump(bump1):
    for L in (3.0, 8.0):
        assert gamma_term(L, bump1).gap <= 1e-8


def test_gamma_leading_term():
    # for large L the rewrite is dominated by (-2C - log 64) ghat(0) / L
    tf = fejer_pair(1.0)
    L = 200.0
    assert gamma_rewrite(L, tf) * L == pytest.approx(-2 * EULER_GAMMA - math.log(64), abs=0.1)


def test_s_even1_weights():
    tf = fejer_pair(1.0)
    L = log_scale(15, 10)
    # primes powers n with 2 log n < L: n < e^{L/2}
    cutoff = math.exp(L / 2)
    terms = []
    for n in range(2, int(cutoff) + 1):
        for p in (2, 3, 5, 7):
            k = round(math.log(n) / math.log(p))
            if p**k == n:
                w = math.log(p) if 15 % p == 0 else 2 * math.log(p)
                terms.append(w / n * max(0.0, 1 - 2 * math.log(n) / L))
    assert s_even1(15, L, tf) == pytest.approx(-2 / L * math.fsum(terms), abs=1e-15)


def test_a_prime_at_zero():
    assert a_prime(0.0, 10**6).real == pytest.approx(-ZETA2_LOGDERIV, abs=1e-8)
    assert a_prime(0.0, 10**5).real == pytest.approx(0.569961, abs=5e-6)
    # at 10^5 the prime-number-theorem tail leaves an error inside its certificate
    err = abs(a_prime(0.0, 10**5).real + ZETA2_LOGDERIV)
    assert err <= a_prime_tail_bound(0.0, 10**5)
    # plain truncation is off by about 1e-5 and needs the crude certificate
    plain = a_prime(0.0, 10**5, tail=False).real
    assert abs(plain + ZETA2_LOGDERIV) <= crude_a_prime_tail(10**5)


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 5), st.sampled_from([10**3, 10**4]))
def test_a_prime_tail_certificate(t, P):
    r = 1j * t
    far = a_prime(r, 10**6)
    near = a_prime(r, P)
    assert abs(near - far) <= a_prime_tail_bound(r, P) + a_prime_tail_bound(r, 10**6)
    assert a_prime_tail_bound(0.0, P) < crude_a_prime_tail(P)


def test_rem_routes_and_zeros():
    t = np.linspace(0, 20, 41)
    assert np.max(np.abs(rem_closed(t) - rem_assembled(t, 10**5))) <= 1e-7
    assert abs(rem_closed(0.0)) == 0.0
    for p in (2, 3, 5):
        for k in range(1, 6):
            assert abs(rem_prime_term(p, 2 * math.pi * k / math.log(p))) <= 1e-12


def test_rem_table_small():
    t, red, blue, green = rem_table(1.0, 0.25)
    assert list(t) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert red[0] == EULER_GAMMA
    assert blue[0] == pytest.approx(-ZETA2_LOGDERIV)
    assert green[0] == 0.0


def test_s_even2_exact_vs_smooth_restricted():
    fam = enumerate_family(15, 10**4)
    tf = fejer_pair(1.0)
    L = log_scale(15, 10**4)
    exact = s_even2_exact(fam, L, tf)
    restricted = s_even2_smooth(L, tf, D=15, pmax=10**4)
    unrestricted = s_even2_smooth(L, tf, pmax=10**4)
    assert abs(exact - restricted.value) <= 2e-3 / L + restricted.tail_bound
    # the unrestricted A' also counts q | D, which never divides a member
    assert abs(exact - unrestricted.value) > 50 * abs(exact - restricted.value)


def test_a_prime_D_removes_prime_divisors():
    r = 0.3j
    full = a_prime(r, 10**4)
    rest = a_prime_D(r, 15, 10**4)
    for q in (3, 5):
        full -= math.log(q) / ((q + 1) * (q ** (1 + 2 * r) - 1))
    assert abs(full - rest) < 1e-15


def test_sign_adjudication_large_family():
    rep = adjudicate_even2_sign(enumerate_family(1411, 100), fejer_pair(1.0))
    assert rep.verdict == "minus_zeta_ratio"
    assert rep.exact > 0
    assert rep.conventions["minus_zeta_ratio"] == pytest.approx(4 * 0.569961 / rep.L, rel=1e-5)


def test_odd_weights_are_integers_and_inert_primes_vanish():
    fam = enumerate_family(19, 10)
    L = log_scale(19, 10)
    tf = fejer_pair(0.4)
    w = odd_prime_weights(genus_characters(19)[0], fam, L, 0.4)
    assert set(w) == {2, 3}
    assert all(lambda_split(p, 19) == 0 for p in w)
    assert s_odd_psi(genus_characters(19)[0], fam, L, tf) == 0.0


def test_sum_over_characters_in_algebra_regime():
    fam = enumerate_family(5460, 18)
    L = log_scale(5460, 18)
    rec = sum_over_characters_odd(fam, L, fejer_pair(1.0))
    assert rec.characters == 16 and rec.exact_zero and rec.total == 0.0
    # outside the regime the cancellation is lost
    fam = enumerate_family(5460, 60)
    assert not sum_over_characters_odd(fam, log_scale(5460, 60), fejer_pair(1.0)).exact_zero


def test_zero_count_upper_dominates():
    for d in (1, -3, 5, -15, -1411):
        for T in (5.0, 20.0, 40.0):
            assert zero_count_upper(T, abs(d)) >= len(find_zeros(d, T))


def test_zero_side_errors_and_doubling():
    tf = fejer_pair(1.0)
    L = log_scale(15, 1)
    with pytest.raises(ValueError):
        zero_side([], L, tf, 10.0)
    a = zero_side([-3, 5], L, tf, 25.0)
    b = zero_side([-3, 5], L, tf, 50.0)
    assert b.value >= a.value
    assert b.value - a.value <= a.tail_bound
    assert b.tail_bound < a.tail_bound


def test_psi_independence_of_non_odd_terms():
    fam = enumerate_family(15, 10)
    tf = fejer_pair(1.0)
    r1 = ef_balance(GenusCharacter(5, -3), fam, tf, 5.0)
    r2 = ef_balance(GenusCharacter(1, -15), fam, tf, 5.0)
    for k in ("conductor_term", "gamma_term", "even1", "even2"):
        assert getattr(r1, k) == getattr(r2, k)
    assert r1.odd_psi != r2.odd_psi
    json.loads(r1.dumps())
    with pytest.raises(ValueError):
        ef_balance(GenusCharacter(5, -4), fam, tf, 5.0)


def test_siegel_terms():
    tf = fejer_pair(1.0)
    L = log_scale(15, 1e5)
    assert siegel_term(tf, L, None) == 2 * float(tf.g_imag(np.array([L / (4 * math.pi)]))[0])
    assert siegel_term(tf, L, 1e-3) - siegel_term(tf, L, 0.0) == pytest.approx(pole_term(tf, L, 1e-3), rel=1e-12)
    sc = siegel_scaling(15, tf, 1e5)
    assert abs(sc.exponent - 1) < 0.05
    assert all(1 / 3 <= r <= 3 for r in sc.ratios)


def test_density_constant_block():
    qs = math.log(3) / 2 + math.log(5) / 4
    want = 2 * qs + 4 * ZETA2_LOGDERIV - math.log(4 * math.pi**2 * math.e**2) + 2 * EULER_GAMMA
    assert density_constant(15) == pytest.approx(want, rel=1e-14)
    assert density_constant(15, -1) - density_constant(15) == pytest.approx(-8 * ZETA2_LOGDERIV)


@pytest.mark.slow
@pytest.mark.parametrize("D", [4, 15])
def test_constant_block_from_exact_terms(D):
    rep = adjudicate_constant(D, fejer_pair(1.0))
    # the full block uses log q/(q + 1) with -4 zeta'(2)/zeta(2); S_even1 + Gamma alone uses q - 1
    assert rep.verdict == "q+1,-"
    assert rep.even1_verdict == "q-1"
    assert rep.separation > 5
