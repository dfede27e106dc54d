"""The surface S in P^6, its height, the plane parametrization, and point counts.

S is cut out by nine quadrics; its open subset U = S \\ {x5 = 0} is the image
of the plane chart (a : b : c) with b != 0 under seven cubic forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd

import numpy as np

from .arithmetic import prime_divisors


def quadric_residuals(x) -> tuple[int, ...]:
    """The nine quadrics defining S, evaluated at x, in row order."""
    x0, x1, x2, x3, x4, x5, x6 = x
    return (
        x3 * x3 + x0 * x5 + x1 * x6,
        x2 * x3 - x0 * x6,
        x1 * x2 + x0 * x3 + x0 * x4,
        x3 * x5 + x4 * x5 + x6 * x6,
        x2 * x5 - x4 * x6,
        x1 * x5 - x3 * x6,
        x4 * x4 + x0 * x5 + x2 * x6,
        x3 * x4 - x0 * x5,
        x1 * x4 - x0 * x6,
    )


def normalize(x) -> tuple[int, ...]:
    """Divide by the gcd and make the first nonzero coordinate positive."""
    g = 0
    for v in x:
        g = gcd(g, v)
    if g == 0:
        raise ValueError("the zero vector is not a projective point")
    out = [v // g for v in x]
    for v in out:
        if v:
            if v < 0:
                out = [-w for w in out]
            break
    return tuple(out)


@dataclass(frozen=True)
class SurfacePoint:
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != 7:
            raise ValueError("a point of P^6 has seven coordinates")
        if normalize(self.coords) != tuple(self.coords):
            raise ValueError(f"{self.coords} is not primitive and sign-normalized")
        if any(quadric_residuals(self.coords)):
            raise ValueError(f"{self.coords} does not lie on S")

    @classmethod
    def from_vector(cls, x) -> "SurfacePoint":
        return cls(normalize(x))

    @property
    def height(self) -> int:
        return max(abs(v) for v in self.coords)

    def has_zero_coordinate(self) -> bool:
        return 0 in self.coords


@dataclass(frozen=True)
class PlanePoint:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if gcd(gcd(self.a, self.b), self.c) != 1:
            raise ValueError(f"({self.a}:{self.b}:{self.c}) is not primitive")
        if self.b < 0:
            raise ValueError("plane points are normalized to b >= 0")


def height(x) -> int:
    coords = x.coords if isinstance(x, SurfacePoint) else x
    return max(abs(v) for v in coords)


def phi_vector(a: int, b: int, c: int) -> tuple[int, ...]:
    """The seven cubic forms at (a, b, c) = (x3, x5, x6), before any gcd division."""
    w = a * b + c * c
    return (-a * w, a * b * c, -c * w, a * b * b, -b * w, b**3, b * b * c)


def phi(p: PlanePoint) -> SurfacePoint:
    if p.b == 0:
        raise ValueError("phi only parametrizes U; b must be nonzero")
    return SurfacePoint(normalize(phi_vector(p.a, p.b, p.c)))


# ---------------------------------------------------------------------------
# direct enumeration of U(Q)
# ---------------------------------------------------------------------------
#
# Search box.  Let d be the gcd of the seven cubics at a primitive (a, b, c),
# b >= 1, and for a prime p write beta = v_p(b), gamma = v_p(c).  If p | d
# then p | b (from b^3) and p | c (from c(ab + c^2) = c^3 mod p), so p does
# not divide a.  From a(ab + c^2): v_p(d) <= v_p(ab + c^2) = min(beta, 2 gamma)
# unless beta = 2 gamma, and in that case abc bounds v_p(d) <= beta + gamma.
# Hence d | b * h_true where h_true = prod p^gamma over primes with
# beta = 2 gamma.  (d need not divide b: (1 : 4 : 2) has d = 8.)
#
# h_true divides h_max = the largest h with h^2 | b and h | c, so d <= b * h_max
# and H <= B forces, with h = h_max, b = h^2 m, c = h c':
#     h^3 m^2 <= B,   |a| h m <= B,   |c'| h^2 m <= B,
#     |a c'| <= B,    h |a m + c'^2| <= B   (so c'^2 <= 2B / h).
# Enumerating over h and accepting only triples with h == h_max, i.e. no prime
# p with p^2 | m and p | c', visits every triple exactly once.

_CHUNK = 1 << 21


def _bounded_triples(B: int):
    """Yield (h, m, a, c') int64 array batches covering the search box."""
    h = 1
    while h**3 <= B:
        m = 1
        while h**3 * m * m <= B:
            cmax = min(B // (h * h * m), math.isqrt(2 * B // h))
            amax = B // (h * m)
            lin = B // h
            cs = np.arange(-cmax, cmax + 1, dtype=np.int64)
            c2 = cs * cs
            # a m + c'^2 in [-lin, lin]
            lo = -((lin + c2) // m)
            hi = (lin - c2) // m
            cap = np.where(cs == 0, amax, np.minimum(amax, B // np.maximum(np.abs(cs), 1)))
            lo = np.maximum(lo, -cap)
            hi = np.minimum(hi, cap)
            n = np.maximum(hi - lo + 1, 0)
            keep = n > 0
            cs, lo, n = cs[keep], lo[keep], n[keep]
            start = 0
            while start < len(cs):
                # batch rows so that each batch has at most ~_CHUNK candidates
                csum = np.cumsum(n[start:])
                stop = start + max(1, int(np.searchsorted(csum, _CHUNK)))
                nn = n[start:stop]
                cc = np.repeat(cs[start:stop], nn)
                offs = np.arange(int(nn.sum()), dtype=np.int64) - np.repeat(np.cumsum(nn) - nn, nn)
                aa = np.repeat(lo[start:stop], nn) + offs
                yield h, m, aa, cc
                start = stop
            m += 1
        h += 1


def _squareful_radical(m: int) -> int:
    out = 1
    for p in prime_divisors(m):
        if m % (p * p) == 0:
            out *= p
    return out


def direct_count(B: int) -> tuple[int, int]:
    """Count U(Q) points of height <= B through the plane parametrization.

    Returns ``(N_U, N_zero)`` where N_zero counts those with a zero coordinate.
    """
    B = int(B)
    if B < 1:
        raise ValueError("B must be >= 1")
    if B > 3 * 10**9:
        # every cubic in the box is bounded by B^2 in absolute value
        raise OverflowError("direct_count uses int64 and is limited to B <= 3e9")
    total = 0
    zeros = 0
    for h, m, a, cp in _bounded_triples(B):
        b = h * h * m
        s = _squareful_radical(m)
        c = h * cp
        ok = np.gcd(np.gcd(a, b), c) == 1
        if s > 1:
            ok &= np.gcd(cp, s) == 1
        a, c = a[ok], c[ok]
        w = a * b + c * c
        coords = (-a * w, a * b * c, -c * w, a * (b * b), -b * w, c * (b * b))
        d = np.full(len(a), b**3, dtype=np.int64)
        hgt = np.full(len(a), b**3, dtype=np.int64)
        for v in coords:
            d = np.gcd(d, v)
            hgt = np.maximum(hgt, np.abs(v))
        inside = hgt <= B * d
        total += int(inside.sum())
        zeros += int((inside & ((a == 0) | (c == 0) | (w == 0))).sum())
    return total, zeros


def direct_points(B: int, box: int | None = None) -> set[tuple[int, ...]]:
    """All U(Q) points of height <= B, as normalized coordinate tuples.

    With ``box`` given, scan the naive box b <= box, |a|, |c| <= box instead of
    the pruned search; used to test that the pruning is sound.
    """
    out = set()
    if box is None:
        for h, m, a, cp in _bounded_triples(B):
            b = h * h * m
            s = _squareful_radical(m)
            for ai, ci in zip(a.tolist(), cp.tolist()):
                if s > 1 and gcd(ci, s) != 1:
                    continue
                c = h * ci
                if gcd(gcd(ai, b), c) != 1:
                    continue
                x = normalize(phi_vector(ai, b, c))
                if height(x) <= B:
                    out.add(x)
        return out
    for b in range(1, box + 1):
        for a in range(-box, box + 1):
            g = gcd(a, b)
            for c in range(-box, box + 1):
                if gcd(g, c) != 1:
                    continue
                x = normalize(phi_vector(a, b, c))
                if height(x) <= B:
                    out.add(x)
    return out


# ---------------------------------------------------------------------------
# points over F_p
# ---------------------------------------------------------------------------

def count_fp(p: int) -> int:
    """#S(F_p) by brute force over the seven standard affine charts of P^6.

    Chart i has x_i = 1 and x_j = 0 for j < i, so each projective point is
    visited exactly once.
    """
    if p < 2 or any(p % q == 0 for q in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"{p} is not prime")
    if p > 13:
        raise ValueError("count_fp is brute force over p^6 points; use p <= 13")
    total = 0
    for i in range(7):
        free = 6 - i
        if free == 0:
            pts = np.zeros((1, 0), dtype=np.int64)
        else:
            pts = np.indices((p,) * free, dtype=np.int64).reshape(free, -1).T
        n = len(pts)
        x = [np.zeros(n, dtype=np.int64) for _ in range(i)]
        x.append(np.ones(n, dtype=np.int64))
        x += [pts[:, k] for k in range(free)]
        on = np.ones(n, dtype=bool)
        for r in quadric_residuals(x):
            on &= (r % p) == 0
        total += int(on.sum())
    return total
