"""The universal torsor eta2 alpha1^2 + eta3 alpha2 + eta4 alpha3 = 0 over S.

Points of U with all coordinates nonzero correspond two-to-one (alpha1 -> -alpha1)
to integral torsor points in a coprimality normal form; ``torsor_count`` counts
the normal forms with alpha1 > 0 and height <= B.  Points with a zero coordinate
lie on three rational curves and are counted by ``zero_coordinate_count``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from .arithmetic import iter_eta, prime_divisors
from .surface import PlanePoint, SurfacePoint, normalize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TorsorPoint:
    eta: tuple[int, int, int, int]
    alpha: tuple[int, int, int]

    def __post_init__(self):
        if len(self.eta) != 4 or len(self.alpha) != 3:
            raise ValueError("a torsor point has four eta and three alpha coordinates")
        if 0 in self.eta:
            raise ValueError("eta coordinates must be nonzero")
        e1, e2, e3, e4 = self.eta
        a1, a2, a3 = self.alpha
        if e2 * a1 * a1 + e3 * a2 + e4 * a3 != 0:
            raise ValueError(f"{self} violates the torsor equation")

    def is_canonical(self) -> bool:
        e1, e2, e3, e4 = self.eta
        a1, a2, a3 = self.alpha
        return (
            min(self.eta) > 0
            and a1 * a2 * a3 != 0
            and gcd(a1, e1 * e3 * e4) == 1
            and gcd(a2, e1 * e2 * e4) == 1
            and gcd(a3, e1 * e2 * e3) == 1
            and gcd(e2, e3) == 1
            and gcd(e2, e4) == 1
            and gcd(e3, e4) == 1
        )


@dataclass(frozen=True)
class HeightNormalization:
    """Real scalings X3, X5, X6 of the height conditions; loop-bound bookkeeping only."""

    X3: float
    X5: float
    X6: float

    @classmethod
    def of(cls, eta, B) -> "HeightNormalization":
        e1, e2, e3, e4 = eta
        return cls(
            X3=(B * e1**2 * e2 * e4**3) ** (-1 / 3),
            X5=(e1**4 * e2**2 * e3**3 * e4**3 / B) ** (1 / 3),
            X6=(e1 * e2**2 / B) ** (1 / 3),
        )

    @staticmethod
    def cubes(eta, B) -> tuple[Fraction, Fraction, Fraction]:
        """Exact X3^3, X5^3, X6^3."""
        e1, e2, e3, e4 = eta
        return (
            Fraction(1, B * e1**2 * e2 * e4**3),
            Fraction(e1**4 * e2**2 * e3**3 * e4**3, B),
            Fraction(e1 * e2**2, B),
        )


def pi_vector(eta, alpha) -> tuple[int, ...]:
    e1, e2, e3, e4 = eta
    a1, a2, a3 = alpha
    return (
        a2 * a3,
        e1 * e2 * e3 * a1 * a2,
        e1 * e2 * e4 * a1 * a3,
        e1**2 * e2 * e3**2 * e4 * a2,
        e1**2 * e2 * e3 * e4**2 * a3,
        e1**4 * e2**2 * e3**3 * e4**3,
        e1**3 * e2**2 * e3**2 * e4**2 * a1,
    )


def pi_map(t: TorsorPoint) -> SurfacePoint:
    return SurfacePoint(normalize(pi_vector(t.eta, t.alpha)))


def section(p: PlanePoint) -> TorsorPoint:
    """An integral torsor point over phi(p), valid when no surface coordinate vanishes."""
    a, b, c = p.a, p.b, p.c
    w = a * b + c * c
    if b < 1 or a == 0 or c == 0 or w == 0:
        raise ValueError(f"{p} has a zero surface coordinate")
    return TorsorPoint((1, 1, b, 1), (c, a, -w))


# ---------------------------------------------------------------------------
# canonical representatives
# ---------------------------------------------------------------------------

def _act(eta, alpha, k):
    """Apply (k1, k2, k3, k4) in G_m^4; every k is a Fraction and results must be integral."""
    k1, k2, k3, k4 = k
    new_eta = [e * ki for e, ki in zip(eta, k)]
    a1, a2, a3 = alpha
    new_alpha = [
        a1 * k1 * k3 * k4,
        a2 * k1**2 * k2 * k3 * k4**2,
        a3 * k1**2 * k2 * k3**2 * k4,
    ]
    out = new_eta + new_alpha
    if any(v.denominator != 1 for v in out):
        raise ArithmeticError(f"torsor move {k} left the integral points")
    return tuple(int(v) for v in new_eta), tuple(int(v) for v in new_alpha)


def _move(eta, alpha):
    """One reduction move of the normal-form algorithm, or None at a fixpoint."""
    e1, e2, e3, e4 = eta
    a1, a2, a3 = alpha
    F = Fraction
    one = F(1)

    def first_prime(x, y):
        g = gcd(x, y)
        return prime_divisors(g)[0] if g > 1 else None

    # (alpha1, eta1 eta3 eta4) = 1
    if p := first_prime(a1, e1):
        return (F(1, p), F(p**3), one, one)
    if p := first_prime(a1, e3):
        return (one, F(p * p), F(1, p), one)
    if p := first_prime(a1, e4):
        return (one, F(p * p), one, F(1, p))
    # (alpha2, eta1 eta2 eta4) = 1
    if p := first_prime(a2, e1):
        return (F(1, p), one, F(p), one)
    if p := first_prime(a2, e4):
        return (one, one, F(p), F(1, p))
    if p := first_prime(a2, e2):
        return (one, F(1, p), one, one)
    # (alpha3, eta1 eta2 eta3) = 1
    if p := first_prime(a3, e1):
        return (F(1, p), one, one, F(p))
    if p := first_prime(a3, e3):
        return (F(p), F(1, p), F(1, p), one)
    if p := first_prime(gcd(e2, e3), e4):
        return (F(p * p), F(1, p), F(1, p), F(1, p))
    return None


def _potential(eta, alpha) -> tuple[int, int, int, int]:
    """Strictly decreases, lexicographically, under every move of ``_move``.

    Reading the multipliers off the torsor action: the alpha1-moves divide
    alpha1 by p; the alpha2-moves fix alpha1 and divide alpha2 by p; the
    alpha3-moves fix alpha1, alpha2 and divide alpha3 by p; the last move fixes
    every alpha and divides eta2 eta3 eta4 by p^3.
    """
    return (abs(alpha[0]), abs(alpha[1]), abs(alpha[2]), abs(eta[1] * eta[2] * eta[3]))


def canonicalize(t: TorsorPoint) -> TorsorPoint:
    """The unique coprimality normal form in the torsor fibre, with alpha1 > 0.

    Signs of eta are fixed first with k_i = -1; then prime-by-prime moves divide
    out every common factor listed in the normal form.  Negating alpha1 at the
    end is the involution x1, x2, x6 -> -x1, -x2, -x6 on the image point.
    """
    eta, alpha = t.eta, t.alpha
    if alpha[0] * alpha[1] * alpha[2] == 0:
        raise ValueError("canonicalize needs alpha1 alpha2 alpha3 != 0")
    for i in range(4):
        if eta[i] < 0:
            k = [Fraction(1)] * 4
            k[i] = Fraction(-1)
            eta, alpha = _act(eta, alpha, k)
    while (k := _move(eta, alpha)) is not None:
        before = _potential(eta, alpha)
        eta, alpha = _act(eta, alpha, k)
        if not _potential(eta, alpha) < before:
            raise RuntimeError(f"canonicalize made no progress on {t} with move {k}")
    if alpha[0] < 0:
        alpha = (-alpha[0], alpha[1], alpha[2])
    out = TorsorPoint(eta, alpha)
    assert out.is_canonical(), out
    return out


# ---------------------------------------------------------------------------
# T(B)
# ---------------------------------------------------------------------------

def _isqrt_floor_root(A: int, K: int, M: int) -> tuple[int, int] | None:
    """Integer x with A x^2 + K x <= M, as an interval [lo, hi], or None.  A > 0."""
    disc = K * K + 4 * A * M
    if disc < 0:
        return None
    r = isqrt(disc)
    f = lambda x: A * x * x + K * x  # noqa: E731
    hi = (-K + r) // (2 * A)
    while f(hi + 1) <= M:
        hi += 1
    while f(hi) > M:
        hi -= 1
    lo = -((K + r) // (2 * A))
    while f(lo - 1) <= M:
        lo -= 1
    while f(lo) > M:
        lo += 1
    if lo > hi:
        return None
    return lo, hi


def _alpha2_intervals(eta, a1, B):
    """Integer alpha2 satisfying every height condition, as at most two intervals."""
    e1, e2, e3, e4 = eta
    K = e2 * a1 * a1
    L1 = min(B // (e1 * e1 * e2 * e3 * e3 * e4), B // (e1 * e2 * e3 * a1))
    L2 = min(B // (e1 * e1 * e2 * e3 * e4), B // (e1 * e2 * a1))
    lo = max(-L1, -((L2 + K) // e3))
    hi = min(L1, (L2 - K) // e3)
    # |alpha2 alpha3| <= B  <=>  -B e4 <= e3 x^2 + K x <= B e4
    up = _isqrt_floor_root(e3, K, B * e4)
    if up is None:
        return []
    lo, hi = max(lo, up[0]), min(hi, up[1])
    if lo > hi:
        return []
    # e3 x^2 + K x <= -B e4 - 1 is the excluded middle
    mid = _isqrt_floor_root(e3, K, -B * e4 - 1)
    if mid is None:
        return [(lo, hi)]
    out = []
    if lo <= min(hi, mid[0] - 1):
        out.append((lo, min(hi, mid[0] - 1)))
    if max(lo, mid[1] + 1) <= hi:
        out.append((max(lo, mid[1] + 1), hi))
    return out


def _count_avoiding(lo: int, hi: int, forbidden) -> int:
    """#{j in [lo, hi] : j mod p not in F_p for every (p, F_p) in forbidden}.

    Inclusion-exclusion over the CRT combinations of forbidden residues.
    """
    if lo > hi:
        return 0
    terms = [(1, 0, 1)]
    for p, res in forbidden:
        new = []
        for m, r, sg in terms:
            inv = pow(m, -1, p)
            for f in res:
                # x = r mod m, x = f mod p
                x = r + m * (((f - r) * inv) % p)
                new.append((m * p, x, -sg))
        terms += new
    total = 0
    for m, r, sg in terms:
        total += sg * ((hi - r) // m - (lo - 1 - r) // m)
    return total


def _eta_setup(eta):
    e1, e2, e3, e4 = eta
    inv3 = pow(e3, -1, e4) if e4 > 1 else 0
    # primes constraining alpha2 through j (those not dividing e4), and alpha3 (not dividing e3)
    p2 = [p for p in prime_divisors(e1 * e2 * e4) if e4 % p]
    p3 = [p for p in prime_divisors(e1 * e2 * e3) if e3 % p]
    primes = sorted(set(p2) | set(p3))
    return inv3, set(p2), set(p3), primes


def _count_eta_alpha1(eta, a1, B, setup) -> int:
    """Number of alpha2 completing (eta, a1) to a counted torsor point."""
    e1, e2, e3, e4 = eta
    inv3, p2, p3, primes = setup
    K = e2 * a1 * a1
    # alpha2 = r + e4 j,  alpha3 = -(k0 + e3 j)
    r = (-K * inv3) % e4
    k0 = (K + e3 * r) // e4
    forbidden = []
    for p in primes:
        res = set()
        if p in p2:
            res.add((-r * pow(e4, -1, p)) % p)
        if p in p3:
            res.add((-k0 * pow(e3, -1, p)) % p)
        forbidden.append((p, tuple(res)))
    total = 0
    for lo, hi in _alpha2_intervals(eta, a1, B):
        jlo = -((r - lo) // e4)
        jhi = (hi - r) // e4
        if jlo > jhi:
            continue
        total += _count_avoiding(jlo, jhi, forbidden)
        # alpha2 = 0 or alpha3 = 0 passes the coprimality test only when the
        # corresponding modulus is 1; remove those by hand
        for j in {(-r) / e4, -k0 / e3}:
            if j != int(j):
                continue
            j = int(j)
            if jlo <= j <= jhi and _coprime_ok(r + e4 * j, -(k0 + e3 * j), eta):
                total -= 1
    return total


def _coprime_ok(a2, a3, eta) -> bool:
    e1, e2, e3, e4 = eta
    return gcd(a2, e1 * e2 * e4) == 1 and gcd(a3, e1 * e2 * e3) == 1


def _alpha1_max(eta, B) -> int:
    e1, e2, e3, e4 = eta
    # alpha1^2 e1^2 e2^2 e3 e4 <= 2B, and |pi6| <= B
    return min(isqrt(2 * B // (e1 * e1 * e2 * e2 * e3 * e4)), B // (e1**3 * e2**2 * e3**2 * e4**2))


def torsor_count(B: int) -> int:
    """T(B): canonical torsor points with alpha1 > 0 whose image has height <= B.

    For each eta and alpha1 the admissible alpha2 form at most two intervals
    intersected with one residue class mod eta4; the coprimality of alpha2 and
    alpha3 is counted exactly by inclusion-exclusion over residues.
    """
    B = int(B)
    if B < 1:
        raise ValueError("B must be >= 1")
    total = 0
    for eta in iter_eta(B):
        e1, e2, e3, e4 = eta
        setup = _eta_setup(eta)
        g = e1 * e3 * e4
        for a1 in range(1, _alpha1_max(eta, B) + 1):
            if g > 1 and gcd(a1, g) != 1:
                continue
            total += _count_eta_alpha1(eta, a1, B, setup)
    return total


def torsor_count_enumerate(B: int) -> int:
    """T(B) by walking every alpha2 in its residue class; reference for small B."""
    B = int(B)
    total = 0
    for eta in iter_eta(B):
        e1, e2, e3, e4 = eta
        for a1 in range(1, _alpha1_max(eta, B) + 1):
            if gcd(a1, e1 * e3 * e4) != 1:
                continue
            K = e2 * a1 * a1
            L = B // (e1 * e1 * e2 * e3 * e3 * e4)
            r = (-K * pow(e3, -1, e4)) % e4 if e4 > 1 else 0
            start = -L + ((r + L) % e4)
            for a2 in range(start, L + 1, e4):
                num = K + e3 * a2
                a3 = -num // e4
                if a2 == 0 or a3 == 0 or not _coprime_ok(a2, a3, eta):
                    continue
                if max(abs(v) for v in pi_vector(eta, (a1, a2, a3))) <= B:
                    total += 1
    return total


def torsor_points(B: int):
    """Yield every counted canonical torsor point (alpha1 > 0); small B only."""
    for eta in iter_eta(B):
        e1, e2, e3, e4 = eta
        for a1 in range(1, _alpha1_max(eta, B) + 1):
            if gcd(a1, e1 * e3 * e4) != 1:
                continue
            K = e2 * a1 * a1
            for lo, hi in _alpha2_intervals(eta, a1, B):
                for a2 in range(lo, hi + 1):
                    if (K + e3 * a2) % e4:
                        continue
                    a3 = -(K + e3 * a2) // e4
                    if a2 and a3 and _coprime_ok(a2, a3, eta):
                        yield TorsorPoint(eta, (a1, a2, a3))


# ---------------------------------------------------------------------------
# points with a zero coordinate
# ---------------------------------------------------------------------------

def _coprime_pairs(R: int) -> int:
    """#{(x, y) : 1 <= y <= R, |x| <= R, gcd(x, y) = 1}.

    x = 0 contributes only y = 1; the pairs with x > 0 number
    2 * sum_{n <= R} phi(n) - 1, and x < 0 mirrors them.
    """
    if R < 1:
        return 0
    phi = np.arange(R + 1, dtype=np.int64)
    for p in range(2, R + 1):
        if phi[p] == p:  # p is prime
            phi[p::p] -= phi[p::p] // p
    positive = 2 * int(phi[1:].sum()) - 1
    return 1 + 2 * positive


def _icbrt(n: int) -> int:
    r = round(n ** (1 / 3))
    while r**3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def zero_coordinate_curve_counts(B: int) -> dict[str, int]:
    """Points of height <= B on each of the curves c = 0, a = 0, ab + c^2 = 0.

    c = 0:         (-a^2 : 0 : 0 : ab : -ab : b^2 : 0),           gcd(a, b) = 1
    a = 0:         (0 : 0 : -c^3 : 0 : -bc^2 : b^3 : b^2 c),       gcd(b, c) = 1
    ab + c^2 = 0:  (0 : -u^3 : 0 : -u^2 v : 0 : v^3 : v^2 u),      gcd(u, v) = 1
    The three curves meet only in (0 : 0 : 0 : 0 : 0 : 1 : 0).
    """
    return {
        "A1": _coprime_pairs(isqrt(B)),
        "A2": _coprime_pairs(_icbrt(B)),
        "A3": _coprime_pairs(_icbrt(B)),
    }


def zero_coordinate_count(B: int) -> int:
    """N_zero(B): points of U with a zero coordinate and height <= B."""
    B = int(B)
    if B < 1:
        raise ValueError("B must be >= 1")
    c = zero_coordinate_curve_counts(B)
    return c["A1"] + c["A2"] + c["A3"] - 2


def zero_coordinate_points(B: int) -> set[tuple[int, ...]]:
    """The same points as a set of normalized tuples, built family by family."""
    out = set()
    R = isqrt(B)
    for b in range(1, R + 1):
        for a in range(-R, R + 1):
            if gcd(a, b) == 1:
                out.add(normalize((-a * a, 0, 0, a * b, -a * b, b * b, 0)))
    R = _icbrt(B)
    for v in range(1, R + 1):
        for u in range(-R, R + 1):
            if gcd(u, v) == 1:
                out.add(normalize((0, 0, -u**3, 0, -v * u * u, v**3, v * v * u)))
                out.add(normalize((0, -u**3, 0, -u * u * v, 0, v**3, v * v * u)))
    return {x for x in out if max(map(abs, x)) <= B}
