"""The real density tau_infinity, by two routes that share no code.

3D route:  tau_inf = 6 * int_0^1 F2(u) du, F2(u) = int_0^{1/u^2} F1(u, v) dv,
where F1(u, v) is the length of a set of t cut out by five inequalities.  F1
is exact (interval arithmetic); the two outer integrals use adaptive
Gauss-Kronrod (scipy.integrate.quad).

2D route:  tau_inf = int int dx3 dx6 / max(seven forms), over the plane.  For
fixed x6 the seven forms are polynomials of degree <= 2 in x3, so the inner
integral splits at their crossing points and each piece is integrated in
closed form.  The outer integral over x6 is a composite Gauss-Legendre rule
in log x6, refined until it stops moving.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

log = logging.getLogger(__name__)

CBRT2 = 2.0 ** (1.0 / 3.0)


class ConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# interval sets and F1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalSet:
    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        prev = None
        for lo, hi in self.intervals:
            if not lo <= hi:
                raise ValueError(f"bad interval [{lo}, {hi}]")
            if prev is not None and lo <= prev:
                raise ValueError("intervals must be disjoint and increasing")
            prev = hi

    @classmethod
    def of(cls, pieces) -> "IntervalSet":
        """Normalize arbitrary [lo, hi] pieces (empty ones dropped, overlaps merged)."""
        ps = sorted((lo, hi) for lo, hi in pieces if lo <= hi)
        merged: list[list[float]] = []
        for lo, hi in ps:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls(tuple((lo, hi) for lo, hi in merged))

    @property
    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet.of(out)

    def contains(self, x: float) -> bool:
        return any(lo <= x <= hi for lo, hi in self.intervals)


def _quad_roots(a: float, b: float, c: float) -> tuple[float, float] | None:
    """Real roots (r1 <= r2) of a t^2 + b t + c, a > 0, without cancellation."""
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b)) if b != 0 else -0.5 * sq
    if q == 0:
        return (0.0, 0.0)
    r1, r2 = q / a, c / q
    return (r1, r2) if r1 <= r2 else (r2, r1)


def t_constraint_sets(u: float, v: float) -> list[IntervalSet]:
    """The five per-inequality t-sets whose intersection has length F1(u, v)."""
    sets = []
    # |u t^2 + v^2 t| <= 1
    outer = _quad_roots(u, v * v, -1.0)
    inner = _quad_roots(u, v * v, 1.0)
    if inner is None or inner[0] == inner[1]:
        sets.append(IntervalSet.of([outer]))
    else:
        sets.append(IntervalSet.of([(outer[0], inner[0]), (inner[1], outer[1])]))
    w = u * v
    if w != 0:
        sets.append(IntervalSet.of([sorted((-1.0 / w, 1.0 / w))]))  # |uvt| <= 1
        sets.append(IntervalSet.of([sorted(((-1.0 - v**3) / w, (1.0 - v**3) / w))]))
    else:
        sets.append(IntervalSet.of([(-math.inf, math.inf)]))
        sets.append(IntervalSet.of([(-math.inf, math.inf)]))
    sets.append(IntervalSet.of([(-1.0 / (u * u), 1.0 / (u * u))]))  # |u^2 t| <= 1
    sets.append(IntervalSet.of([((-1.0 - u * v * v) / (u * u), (1.0 - u * v * v) / (u * u))]))
    return sets


def F1_set(u: float, v: float) -> IntervalSet:
    if not u > 0:
        raise ValueError("F1 needs u > 0")
    sets = t_constraint_sets(u, v)
    out = sets[0]
    for s in sets[1:]:
        out = out.intersect(s)
    return out


def F1(u: float, v: float) -> float:
    """Length of {t : |t(ut+v^2)|, |uvt|, |uvt+v^3|, |u^2 t|, |u^2 t+uv^2| <= 1}."""
    return F1_set(u, v).measure


def _v_breakpoints(u: float, vmax: float) -> list[float]:
    """Values of v in (0, vmax) where F1(u, .) may fail to be smooth."""
    cands = [(4.0 * u) ** 0.25, 1.0, u ** -0.5, u ** -0.5 * 2 ** -0.5]
    return sorted(v for v in cands if 0.0 < v < vmax)


def F2(u: float, tol: float = 1e-10) -> float:
    """int_0^{min(1/u^2, 2^(1/3))} F1(u, v) dv by adaptive Gauss-Kronrod."""
    if not 0 < u <= 1:
        raise ValueError("F2 is used on 0 < u <= 1")
    vmax = min(1.0 / (u * u), CBRT2)
    with warnings.catch_warnings():
        # the error estimate is checked below; quad's roundoff notice is noise here
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            lambda v: F1(u, v), 0.0, vmax, points=_v_breakpoints(u, vmax) or None,
            epsabs=tol, epsrel=tol, limit=400,
        )
    if not err <= max(1e-7, 100 * tol * max(1.0, abs(val))):
        raise ConvergenceError(f"F2({u}) quadrature error estimate {err:.2e}")
    return val


def F2_signed(u: float, tol: float = 1e-10) -> float:
    """int of F1(u, v) over -vmax <= v <= vmax, with no use of the v -> -v symmetry."""
    if not 0 < u <= 1:
        raise ValueError("F2 is used on 0 < u <= 1")
    vmax = min(1.0 / (u * u), CBRT2)
    pts = _v_breakpoints(u, vmax)
    pts = sorted([-p for p in pts] + [0.0] + pts)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            lambda v: F1(u, v), -vmax, vmax, points=pts,
            epsabs=tol, epsrel=tol, limit=800,
        )
    if not err <= max(1e-7, 100 * tol * max(1.0, abs(val))):
        raise ConvergenceError(f"F2_signed({u}) quadrature error estimate {err:.2e}")
    return val


def tau_infty_3d(tol: float = 1e-9, region: str = "half") -> float:
    """6 * int_0^1 F2(u) du, with u = w^2 to tame the u^(-1/2) endpoint.

    ``region="half"`` integrates v >= 0 with weight 6; ``region="signed"``
    integrates |u^2 v| <= 1 over both signs of v with weight 3.
    """
    if region == "half":
        inner, weight = F2, 6.0
    elif region == "signed":
        inner, weight = F2_signed, 3.0
    else:
        raise ValueError(f"unknown region {region!r}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            lambda w: 2.0 * w * inner(w * w, tol=tol * 1e-1), 0.0, 1.0,
            epsabs=tol, epsrel=tol, limit=200,
        )
    if not err <= max(1e-6, 1e3 * tol):
        raise ConvergenceError(f"tau_infty_3d error estimate {err:.2e}")
    return weight * val


# ---------------------------------------------------------------------------
# 2D route
# ---------------------------------------------------------------------------

def forms_2d(x3, x6):
    """The seven cubics on the chart x5 = 1."""
    return (
        x3 * x3 + x3 * x6 * x6,
        x3 * x6,
        x3 * x6 + x6**3,
        x3,
        x3 + x6 * x6,
        np.ones_like(np.asarray(x3, dtype=float)),
        np.broadcast_to(x6, np.shape(x3)).astype(float),
    )


def integrand_2d(x3, x6):
    return 1.0 / np.max(np.abs(np.array(forms_2d(np.asarray(x3, float), np.asarray(x6, float)))), axis=0)


def _poly_coeffs(x6: float) -> list[tuple[float, float, float]]:
    """Each form as (c2, c1, c0) in x3, for fixed x6."""
    s = x6 * x6
    return [
        (1.0, s, 0.0),
        (0.0, x6, 0.0),
        (0.0, x6, x6**3),
        (0.0, 1.0, 0.0),
        (0.0, 1.0, s),
        (0.0, 0.0, 1.0),
        (0.0, 0.0, x6),
    ]


def _real_roots(c2, c1, c0) -> list[float]:
    if c2 == 0:
        return [-c0 / c1] if c1 != 0 else []
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (c1 + math.copysign(sq, c1)) if c1 != 0 else -0.5 * sq
    out = [q / c2]
    if q != 0:
        out.append(c0 / q)
    return out


def _antideriv_inv_abs(c, x):
    """Antiderivative of 1/|P(x)| on an interval where P keeps its sign (sign applied by caller)."""
    c2, c1, c0 = c
    if c2 == 0 and c1 == 0:
        return x / c0
    if c2 == 0:
        return math.log(abs(c1 * x + c0)) / c1
    roots = sorted(_real_roots(c2, c1, c0))
    if len(roots) == 1 or roots[0] == roots[1]:
        return -1.0 / (c2 * (x - roots[0]))
    # 1/(c2 (x - r1)(x - r2)) by partial fractions
    r1, r2 = roots
    return (math.log(abs(x - r2)) - math.log(abs(x - r1))) / (c2 * (r2 - r1))


def inner_integral_2d(x6: float) -> float:
    """G(x6) = int_R dx3 / max_i |form_i(x3, x6)|, in closed form piece by piece."""
    polys = _poly_coeffs(x6)
    # candidate breakpoints: roots of P_i - P_j and P_i + P_j, and of each P_i
    pts = set()
    for i, a in enumerate(polys):
        for r in _real_roots(*a):
            pts.add(r)
        for b in polys[i + 1 :]:
            for sgn in (1.0, -1.0):
                d = (a[0] - sgn * b[0], a[1] - sgn * b[1], a[2] - sgn * b[2])
                if d[0] or d[1]:
                    pts.update(_real_roots(*d))
    pts = sorted(p for p in pts if math.isfinite(p))
    # the quadratic dominates beyond every crossing; its roots are 0 and -x6^2
    span = 2.0 * max([1.0, x6 * x6, abs(x6)] + [abs(p) for p in pts])
    pts = sorted(set(pts) | {-span, span})

    def val(c, x):
        return c[0] * x * x + c[1] * x + c[2]

    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 1e-300:
            continue
        mid = 0.5 * (lo + hi)
        k = max(range(7), key=lambda i: abs(val(polys[i], mid)))
        c = polys[k]
        sgn = math.copysign(1.0, val(c, mid))
        total += sgn * (_antideriv_inv_abs(c, hi) - _antideriv_inv_abs(c, lo))
    # tails |x3| > span, where the max is |x3 (x3 + x6^2)| and the
    # antiderivative of 1/(x (x + s)) is log(x / (x + s)) / s
    s = x6 * x6
    if s > 0:
        total += math.log1p(s / span) / s - math.log1p(-s / span) / s
    else:
        total += 2.0 / span
    return total


def _gl_panels(f, w_lo, w_hi, panel, order):
    xs, ws = np.polynomial.legendre.leggauss(order)
    edges = np.arange(w_lo, w_hi + panel * 0.5, panel)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        nodes = mid + half * xs
        total += half * math.fsum(wi * f(x) for wi, x in zip(ws, nodes))
    return total


def tau_infty_2d(rel_tol: float = 1e-6, w_lo: float = -30.0, w_hi: float = 30.0) -> float:
    """2 * int_0^inf G(x6) dx6 on a log grid x6 = e^w, refined until stable.

    Truncation: for x6 < e^w_lo the integrand is 1/max(...) <= 1 so the piece
    contributes at most 2 e^w_lo; for large x6, G(x6) <= 8 (1 + log x6) / x6^2,
    so the tail beyond e^w_hi is below 16 (2 + w_hi) e^-w_hi.  Both are < 1e-11
    for the default window.
    """
    f = lambda w: inner_integral_2d(math.exp(w)) * math.exp(w)  # noqa: E731
    tail = 2.0 * math.exp(w_lo) + 16.0 * (2.0 + w_hi) * math.exp(-w_hi)
    prev = None
    panel = 0.5
    for _ in range(6):
        cur = 2.0 * _gl_panels(f, w_lo, w_hi, panel, 12)
        if prev is not None and abs(cur - prev) <= rel_tol * abs(cur):
            log.info("tau_infty_2d: panel %.4g, change %.2e, tail bound %.2e",
                     panel, abs(cur - prev), tail)
            return float(cur)
        prev = cur
        panel /= 2
    raise ConvergenceError("tau_infty_2d did not stabilise")


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class DensityReport:
    tau_inf_3d: float
    tau_inf_2d: float
    F2_samples: list[tuple[float, float]] = field(default_factory=list)
    tolerance: float = 1e-3
    settings: dict = field(default_factory=dict)

    @property
    def relative_gap(self) -> float:
        return abs(self.tau_inf_3d - self.tau_inf_2d) / abs(self.tau_inf_2d)

    @property
    def agree(self) -> bool:
        return self.relative_gap <= self.tolerance

    def to_json(self) -> str:
        d = asdict(self)
        d["relative_gap"] = self.relative_gap
        d["agree"] = self.agree
        return json.dumps(d)


def density_report(quad_tol: float = 1e-9, samples=(0.01, 0.1, 0.25, 0.5, 1.0)) -> DensityReport:
    return DensityReport(
        tau_inf_3d=tau_infty_3d(quad_tol),
        tau_inf_2d=tau_infty_2d(),
        F2_samples=[(u, F2(u)) for u in samples],
        settings={"quad_tol": quad_tol, "log_window": [-30.0, 30.0]},
    )
