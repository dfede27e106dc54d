"""Multiplicative number theory behind the height zeta function.

Everything that is an identity is computed in exact rational arithmetic
(:class:`fractions.Fraction`).  Floats appear only in the cube-root weight
of :func:`delta` and in the analytic probes (``zeta_real``, ``E1``, ``E2``,
``local_G12``).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd, prod

import numpy as np

log = logging.getLogger(__name__)

ALPHA = Fraction(1, 432)


# ---------------------------------------------------------------------------
# integers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactoredInteger:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"expected a positive integer, got {self.n}")
        primes = [p for p, _ in self.factors]
        if primes != sorted(set(primes)):
            raise ValueError("primes must be strictly increasing")
        if prod(p**e for p, e in self.factors) != self.n:
            raise ValueError(f"factorization does not multiply out to {self.n}")

    @classmethod
    def of(cls, n: int) -> "FactoredInteger":
        return cls(n, tuple(factorize(n)))

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def mobius(self) -> int:
        if any(e > 1 for _, e in self.factors):
            return 0
        return -1 if len(self.factors) % 2 else 1

    def omega(self) -> int:
        return len(self.factors)

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)

    def squarefree_divisors(self) -> list[int]:
        divs = [1]
        for p, _ in self.factors:
            divs += [d * p for d in divs]
        return sorted(divs)


@lru_cache(maxsize=1 << 16)
def _factorize_cached(n: int) -> tuple[tuple[int, int], ...]:
    out = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    d = 5
    step = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def factorize(n: int) -> list[tuple[int, int]]:
    """Trial-division factorization as a sorted list of ``(prime, exponent)``."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    return list(_factorize_cached(n))


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in _factorize_cached(n)]


def radical(n: int) -> int:
    return prod(prime_divisors(n))


def mobius(n: int) -> int:
    return FactoredInteger.of(n).mobius()


def omega(n: int) -> int:
    return len(_factorize_cached(n))


def primes_up_to(n: int) -> np.ndarray:
    """Sieve of Eratosthenes; returns an int64 array of primes <= n."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


# ---------------------------------------------------------------------------
# phi*, vartheta, Delta
# ---------------------------------------------------------------------------

def phi_star(ns) -> Fraction:
    """prod over p | gcd(ns) of (1 - 1/p); a single argument means phi*(a, a)."""
    ns = list(ns)
    if not ns or any(a < 1 for a in ns):
        raise ValueError("phi_star needs a nonempty list of positive integers")
    g = 0
    for a in ns:
        g = gcd(g, a)
    out = Fraction(1)
    for p in prime_divisors(g):
        out *= Fraction(p - 1, p)
    return out


def eta_coprime(eta) -> bool:
    """Pairwise coprimality of eta2, eta3, eta4."""
    _, e2, e3, e4 = eta
    return gcd(e2, e3) == 1 and gcd(e2, e4) == 1 and gcd(e3, e4) == 1


def _check_eta(eta):
    if len(eta) != 4 or min(eta) < 1:
        raise ValueError(f"eta must be four positive integers, got {eta!r}")


_ZERO = Fraction(0)


def theta_closed(eta) -> Fraction:
    """phi*(eta1) phi*(eta2) phi*(eta3) phi*(eta4) prod_{p | eta1, p not | eta2 eta3 eta4} (1 - 2/p)."""
    _check_eta(eta)
    if not eta_coprime(eta):
        return _ZERO
    num = den = 1
    for e in eta:
        for p in prime_divisors(e):
            num *= p - 1
            den *= p
    rest = eta[1] * eta[2] * eta[3]
    for p in prime_divisors(eta[0]):
        if rest % p:
            num *= p - 2
            den *= p
    return Fraction(num, den)


@lru_cache(maxsize=1 << 18)
def _mobius_over_k(n: int, avoid: int) -> tuple[int, int]:
    """sum of mu(k)/k over squarefree k | n with gcd(k, avoid) = 1, as (numerator, rad n)."""
    fn = FactoredInteger.of(n)
    rad = prod(fn.primes)
    num = 0
    for k in fn.squarefree_divisors():
        if gcd(k, avoid) == 1:
            num += (-1) ** len(prime_divisors(k)) * (rad // k)
    return num, rad


def theta_bruteforce(eta) -> Fraction:
    """The triple Moebius sum defining vartheta, evaluated term by term.

    sum_{k3 | eta1, (k3, eta2 eta3) = 1} mu(k3)/k3
        sum_{k2 | eta1 eta2, (k2, k3 eta4) = 1} mu(k2)/k2
        sum_{k1 | eta1 eta3 eta4} mu(k1)/k1
    """
    _check_eta(eta)
    if not eta_coprime(eta):
        return _ZERO
    e1, e2, e3, e4 = eta
    n1, d1 = _mobius_over_k(e1 * e3 * e4, 1)
    m = e1 * e2
    rad_m = radical(m)
    f1 = FactoredInteger.of(e1)
    r1 = prod(f1.primes)
    num = 0
    for k3 in f1.squarefree_divisors():
        if gcd(k3, e2 * e3) != 1:
            continue
        # the k2-coprimality only sees primes of eta1 eta2
        n2, _ = _mobius_over_k(m, gcd(rad_m, k3 * e4))
        num += (-1) ** len(prime_divisors(k3)) * (r1 // k3) * n2
    return Fraction(num * n1, r1 * rad_m * d1)


def _eta_factorizations(n: FactoredInteger):
    """All eta with eta1^4 eta2^2 eta3^3 eta4^3 == n."""
    per_prime = []
    for p, e in n.factors:
        opts = []
        for k1 in range(e // 4 + 1):
            for k2 in range((e - 4 * k1) // 2 + 1):
                r = e - 4 * k1 - 2 * k2
                if r % 3:
                    continue
                for k3 in range(r // 3 + 1):
                    opts.append((p, (k1, k2, k3, r // 3 - k3)))
        if not opts:
            return
        per_prime.append(opts)
    for choice in product(*per_prime):
        eta = [1, 1, 1, 1]
        for p, ks in choice:
            for i, k in enumerate(ks):
                eta[i] *= p**k
        yield tuple(eta)


def delta(n) -> float:
    """Delta(n): sum of vartheta(eta) (eta1/eta2)^(1/3) over eta1^4 eta2^2 eta3^3 eta4^3 = n."""
    fn = n if isinstance(n, FactoredInteger) else FactoredInteger.of(int(n))
    total = 0.0
    for eta in _eta_factorizations(fn):
        th = theta_closed(eta)
        if th:
            total += float(th) * (eta[0] / eta[1]) ** (1.0 / 3.0)
    return total


def iter_eta(B: int, coprime: bool = True):
    """Yield eta with eta1^4 eta2^2 eta3^3 eta4^3 <= B (pairwise coprime 2,3,4 by default)."""
    e1 = 1
    while e1**4 <= B:
        c1 = e1**4
        e2 = 1
        while c1 * e2 * e2 <= B:
            c2 = c1 * e2 * e2
            e3 = 1
            while c2 * e3**3 <= B:
                c3 = c2 * e3**3
                if not coprime or gcd(e2, e3) == 1:
                    e4 = 1
                    while c3 * e4**3 <= B:
                        if not coprime or (gcd(e2, e4) == 1 and gcd(e3, e4) == 1):
                            yield (e1, e2, e3, e4)
                        e4 += 1
                e3 += 1
            e2 += 1
        e1 += 1


def delta_partial_sum(B: int) -> float:
    """M(B) = sum_{n <= B} Delta(n), summed over eta-tuples rather than over n."""
    if B < 1:
        raise ValueError("B must be >= 1")
    terms = []
    for eta in iter_eta(B):
        th = theta_closed(eta)
        if th:
            terms.append(float(th) * (eta[0] / eta[1]) ** (1.0 / 3.0))
    # fixed-order summation keeps the result reproducible
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# zeta and the Euler products
# ---------------------------------------------------------------------------

# Bernoulli numbers B_2, B_4, ..., B_24
_BERN = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
    Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510), Fraction(43867, 798),
    Fraction(-174611, 330), Fraction(854513, 138), Fraction(-236364091, 2730),
]
_EM_COEF = [float(b / math.factorial(2 * k + 2)) for k, b in enumerate(_BERN)]


def zeta_real(s: float, N: int = 20) -> float:
    """Riemann zeta for real s > 1 by Euler-Maclaurin summation.

    Sum the first N-1 terms directly, then add the integral tail, the
    half-term and twelve Bernoulli corrections at N.  With N = 20 the
    truncation error is far below double precision for s in (1, 50].
    """
    s = float(s)
    if not s > 1.0:
        raise ValueError(f"zeta_real needs s > 1, got {s}")
    n = np.arange(1, N, dtype=float)
    head = math.fsum((n ** -s).tolist())
    tail = N ** (1.0 - s) / (s - 1.0) + 0.5 * N ** (-s)
    rising = s  # s (s+1) ... (s+2k-2)
    Npow = N ** (-s - 1.0)
    corr = 0.0
    for k, c in enumerate(_EM_COEF):
        term = c * rising * Npow
        corr += term
        rising *= (s + 2 * k + 1) * (s + 2 * k + 2)
        Npow /= N * N
        if abs(term) < 1e-18 * abs(head):
            break
    return head + tail + corr


def E1(s: float) -> float:
    """E1 at s, i.e. zeta(4(s-1)+1) zeta(3(s-1)+1)^2 zeta(2(s-1)+1).  Needs s > 1."""
    if not s > 1.0:
        raise ValueError(f"E1 has its pole at s = 1; need s > 1, got {s}")
    x = s - 1.0
    return zeta_real(4 * x + 1) * zeta_real(3 * x + 1) ** 2 * zeta_real(2 * x + 1)


def E2(s: float) -> float:
    """E2 at s (unshifted).  Every zeta argument must exceed 1, i.e. s > 5/6."""
    x = s - 1.0
    if not 6 * x + 2 > 1.0:
        raise ValueError(f"E2 by real Euler products needs s > 5/6, got {s}")
    z = zeta_real
    num = z(7 * x + 3) ** 4 * z(8 * x + 3) ** 2
    den = z(4 * x + 2) ** 3 * z(5 * x + 2) ** 2 * z(6 * x + 2) * z(10 * x + 4)
    return num / den


def _pow(p, e):
    # exact when e is an integer-valued Fraction, float otherwise
    if isinstance(e, Fraction) and e.denominator == 1:
        return Fraction(p) ** int(e)
    return float(p) ** float(e)


def _as_arg(s):
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return float(s)


def local_Dp(p: int, s=0):
    """Local factor D_p(s + 1/3) of the Dirichlet series of Delta.

    The argument is the shift ``s``: ``local_Dp(p, 0)`` is D_p(1/3).  Integer
    and Fraction inputs with integral exponents give exact Fractions.
    """
    s = _as_arg(s)
    one = Fraction(1) if isinstance(s, Fraction) else 1.0
    q = one - one / p
    a2 = one / (_pow(p, 2 * s + 1) - 1)
    a3 = one / (_pow(p, 3 * s + 1) - 1)
    a4 = one / (_pow(p, 4 * s + 1) - 1)
    return one + q * (a2 + 2 * a3 + (1 - one * 2 / p) * a4) + q * q * a4 * (a2 + 2 * a3)


def tau_p(p: int) -> Fraction:
    """p-adic density (1 - 1/p)^4 (1 + 4/p + 1/p^2), exact."""
    q = Fraction(1, p)
    return (1 - q) ** 4 * (1 + 4 * q + q * q)


def E1_local(p: int, s: float) -> float:
    """Euler factor of E1 at p, evaluated at argument s (unshifted)."""
    x = s - 1.0
    f = lambda a: 1.0 / (1.0 - float(p) ** -a)  # noqa: E731
    return f(4 * x + 1) * f(3 * x + 1) ** 2 * f(2 * x + 1)


def E2_local(p: int, s: float) -> float:
    x = s - 1.0
    g = lambda a: 1.0 - float(p) ** -a  # noqa: E731
    return (g(4 * x + 2) ** 3 * g(5 * x + 2) ** 2 * g(6 * x + 2) * g(10 * x + 4)) / (
        g(7 * x + 3) ** 4 * g(8 * x + 3) ** 2
    )


def local_G12(p: int, s: float) -> float:
    """Euler factor of G_{1,2}(s+1) = D(s+1/3) / (E1(s+1) E2(s+1)) at p."""
    s = float(s)
    return float(local_Dp(p, s)) / (E1_local(p, s + 1.0) * E2_local(p, s + 1.0))


def tau_product(prime_cutoff: int) -> float:
    """prod_{p <= cutoff} tau_p, via a fixed-order log sum."""
    ps = primes_up_to(prime_cutoff).astype(float)
    q = 1.0 / ps
    logs = 4.0 * np.log1p(-q) + np.log1p(4.0 * q + q * q)
    return math.exp(math.fsum(logs.tolist()))


def tau_tail_bound(prime_cutoff: int) -> float:
    """Bound on |log prod_{p > P} tau_p|.

    log tau_p = -9/p^2 + O(p^-3) and |log tau_p| <= 10/p^2 for p > 10; the sum
    of 1/p^2 over primes p > P is below 1/(P log P) for P >= 10.
    """
    P = max(prime_cutoff, 10)
    return 10.0 / (P * math.log(P))


def predicted_constant(prime_cutoff: int, tau_inf: float) -> float:
    """alpha * tau_inf * prod_{p <= cutoff} tau_p with alpha = 1/432."""
    if prime_cutoff < 1000:
        raise ValueError("prime_cutoff must be at least 1000")
    prod_tau = tau_product(prime_cutoff)
    log.info(
        "prod tau_p up to %d = %.12f (relative tail <= %.2e)",
        prime_cutoff, prod_tau, tau_tail_bound(prime_cutoff),
    )
    return float(ALPHA) * tau_inf * prod_tau


def leading_residue_coefficient(prime_cutoff: int = 10**5) -> float:
    """E2(1) G_{1,2}(1) / 144: M(B) / B^(1/3) is asymptotically this times a monic cubic in log B.

    E2(1) G_{1,2}(1) equals prod_p tau_p, which is what gets evaluated here.
    """
    return tau_product(prime_cutoff) / 144.0
