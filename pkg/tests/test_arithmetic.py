import math
import random
from fractions import Fraction
from math import gcd

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dp6a2 import arithmetic as ar


@given(st.integers(1, 10**7))
def test_factored_integer(n):
    f = ar.FactoredInteger.of(n)
    assert math.prod(p**e for p, e in f.factors) == n
    assert list(f.primes) == sorted(set(f.primes))
    assert f.mobius() == ar.mobius(n)
    assert f.omega() == len(f.primes)
    assert sum(ar.mobius(d) for d in f.divisors()) == (1 if n == 1 else 0)


def test_factored_integer_rejects_bad_input():
    with pytest.raises(ValueError):
        ar.FactoredInteger(6, ((3, 1), (2, 1)))
    with pytest.raises(ValueError):
        ar.FactoredInteger(6, ((2, 1),))


def test_primes_up_to():
    assert ar.primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert len(ar.primes_up_to(10**5)) == 9592


def test_phi_star():
    assert ar.phi_star([1]) == 1
    assert ar.phi_star([12]) == Fraction(1, 3)
    assert ar.phi_star([4, 6]) == Fraction(1, 2)


@pytest.mark.parametrize("eta,val", [
    ((1, 1, 1, 1), Fraction(1)),
    ((2, 1, 1, 1), Fraction(0)),
    ((3, 1, 1, 1), Fraction(2, 9)),
    ((1, 2, 2, 1), Fraction(0)),
])
def test_theta_examples(eta, val):
    assert ar.theta_closed(eta) == val
    assert ar.theta_bruteforce(eta) == val


@given(st.lists(st.integers(1, 10**4), min_size=4, max_size=4))
def test_theta_identity_random(eta):
    assert ar.theta_closed(eta) == ar.theta_bruteforce(eta)


def test_delta_examples():
    assert ar.delta(1) == 1.0
    assert ar.delta(2) == 0.0 and ar.delta(3) == 0.0
    assert ar.delta(4) == pytest.approx(2 ** (-4 / 3), rel=1e-15)
    assert ar.delta(8) == pytest.approx(1.0, rel=1e-15)


def test_delta_partial_sum_examples():
    assert ar.delta_partial_sum(1) == 1.0
    assert ar.delta_partial_sum(4) == pytest.approx(1 + 2 ** (-4 / 3), rel=1e-15)
    assert ar.delta_partial_sum(8) == pytest.approx(2 + 2 ** (-4 / 3), rel=1e-15)


def test_delta_partial_sum_matches_pointwise():
    B = 5000
    assert ar.delta_partial_sum(B) == pytest.approx(math.fsum(ar.delta(n) for n in range(1, B + 1)), rel=1e-13)


@settings(max_examples=200)
@given(st.integers(1, 10**4), st.integers(1, 10**4))
def test_delta_multiplicative(m, n):
    if gcd(m, n) != 1:
        return
    assert ar.delta(m * n) == pytest.approx(ar.delta(m) * ar.delta(n), rel=1e-12, abs=1e-300)


def test_zeta_classical():
    assert ar.zeta_real(2) == pytest.approx(math.pi**2 / 6, rel=1e-13)
    assert ar.zeta_real(4) == pytest.approx(math.pi**4 / 90, rel=1e-13)
    assert ar.zeta_real(1.001) == pytest.approx(1000.5772884760116, rel=1e-12)
    with pytest.raises(ValueError):
        ar.zeta_real(1.0)


@given(st.floats(1.0001, 60.0))
def test_zeta_against_mpmath(s):
    assert ar.zeta_real(s) == pytest.approx(float(mpmath.zeta(s)), rel=1e-12)


def test_E1_E2():
    z = ar.zeta_real
    assert ar.E1(2.0) == pytest.approx(z(5) * z(4) ** 2 * z(3), rel=1e-14)
    assert ar.E2(1.0) == pytest.approx(z(3) ** 4 * z(3) ** 2 / (z(2) ** 3 * z(2) ** 2 * z(2) * z(4)), rel=1e-14)
    with pytest.raises(ValueError):
        ar.E1(1.0)
    with pytest.raises(ValueError):
        ar.E2(0.8)


def test_pole_probe():
    s = 1.001
    assert (s - 1) ** 4 * ar.E1(s) == pytest.approx(1 / 72, rel=0.03)


def test_local_Dp_examples():
    assert ar.local_Dp(2, 0) == Fraction(13, 4)
    assert ar.local_Dp(3, 0) == Fraction(22, 9)
    assert ar.local_Dp(2, 1) == Fraction(707, 620)


@pytest.mark.parametrize("p,s", [(2, 1), (3, 1), (2, Fraction(1, 2)), (5, 0.25)])
def test_local_Dp_against_eta_sum(p, s):
    # D_p(s + 1/3) = sum_k Delta(p^k) p^(-k (s + 1/3)), truncated deep enough to converge
    series = math.fsum(ar.delta(p**k) * float(p) ** (-k * (float(s) + 1 / 3)) for k in range(0, 90))
    assert float(ar.local_Dp(p, s)) == pytest.approx(series, rel=1e-12)


def test_tau_p():
    assert ar.tau_p(2) == Fraction(13, 64)
    assert ar.tau_p(3) == Fraction(352, 729)
    for p in ar.primes_up_to(1000).tolist():
        assert (1 - Fraction(1, p)) ** 4 * ar.local_Dp(p, 0) == ar.tau_p(p)


def test_G12_local_chain():
    # G12_p(1) E2_p(1) = D_p(1/3) / E1_p(1) = tau_p, prime by prime
    for p in ar.primes_up_to(2000).tolist():
        assert ar.local_G12(p, 0.0) * ar.E2_local(p, 1.0) == pytest.approx(float(ar.tau_p(p)), rel=1e-13)
    assert 0 < ar.local_G12(2, 1.0) < math.inf


def test_E_locals_against_zeta():
    ps = ar.primes_up_to(20000).tolist()
    s = 1.5
    prod1 = math.exp(math.fsum(math.log(ar.E1_local(p, s)) for p in ps))
    assert prod1 == pytest.approx(ar.E1(s), rel=1e-4)


def test_tau_product_tail():
    a, b = ar.tau_product(10**4), ar.tau_product(10**5)
    assert abs(math.log(a / b)) <= ar.tau_tail_bound(10**4)
    assert abs(a - b) / b < 1e-4


def test_log_tau_expansion():
    for p in (1009, 10007, 100003):
        assert math.log(float(ar.tau_p(p))) * p * p == pytest.approx(-9.0, rel=0.01)


def test_predicted_constant():
    with pytest.raises(ValueError):
        ar.predicted_constant(999, 1.0)
    c1 = ar.predicted_constant(10**5, 23.66)
    c2 = ar.predicted_constant(2 * 10**5, 23.66)
    assert abs(c1 - c2) / c2 < 1e-4
    # alpha tau_inf prod tau_p = 6/432 * int F2 * prod tau_p = 2 * (prod tau_p / 144) * int F2
    assert c1 == pytest.approx(2 * ar.leading_residue_coefficient(10**5) * 23.66 / 6, rel=1e-14)


def test_G12_decay():
    ps = np.array([p for p in ar.primes_up_to(10**4).tolist() if p >= 100])
    dev = np.array([abs(ar.local_G12(int(p), 0.0) - 1) for p in ps])
    slope = np.polyfit(np.log(ps), np.log(dev), 1)[0]
    assert -slope >= 0.9


def test_M_leading_coefficient():
    Bs = [int(x) for x in np.logspace(4, 8, 17)]
    L = np.log(Bs)
    y = np.array([ar.delta_partial_sum(b) for b in Bs]) / np.array(Bs, float) ** (1 / 3)
    assert np.all(y > 0)
    X = np.column_stack([L**3, L**2, L, np.ones_like(L)])
    lead = np.linalg.lstsq(X, y, rcond=None)[0][0]
    assert lead == pytest.approx(ar.leading_residue_coefficient(10**5), rel=0.25)


def test_eta_iteration_counts():
    B = 10**4
    brute = sum(
        1
        for e1 in range(1, 11)
        for e2 in range(1, 101)
        for e3 in range(1, 22)
        for e4 in range(1, 22)
        if e1**4 * e2**2 * e3**3 * e4**3 <= B and ar.eta_coprime((e1, e2, e3, e4))
    )
    assert brute == sum(1 for _ in ar.iter_eta(B))


def test_random_theta_deterministic_seed():
    rng = random.Random(7)
    for _ in range(500):
        eta = tuple(rng.randint(1, 1000) for _ in range(4))
        assert ar.theta_closed(eta) == ar.theta_bruteforce(eta)
