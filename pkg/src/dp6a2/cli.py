"""Batch front-end: counting, verification suites, the predicted constant, and the fit.

Exit status: 0 when every check passes, 1 when a check fails, 2 on bad
configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import metadata
from math import gcd

import numpy as np

from . import arithmetic as ar
from . import density as dn
from . import surface as sf
from . import torsor as tr
from .fit import AsymptoticFit, count_grid, log_grid

log = logging.getLogger("dp6a2")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
CSV_COLUMNS = ["B", "N_direct", "T", "N_zero", "N_torsor_total", "seconds_direct", "seconds_torsor"]


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0+local"


@dataclass
class RunReport:
    command: str
    parameters: dict
    results: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    version: str = field(default_factory=tool_version)
    passed: bool = True

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=_jsonable)


def _jsonable(x):
    # counts travel as decimal strings so no consumer rounds them through a double
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _exact(n: int) -> str:
    return str(int(n))


class Check:
    """Collects named pass/fail properties for a verification suite."""

    def __init__(self):
        self.items: list[dict] = []

    def add(self, name: str, ok: bool, detail=None, counterexample=None):
        entry = {"name": name, "passed": bool(ok)}
        if detail is not None:
            entry["detail"] = detail
        if not ok and counterexample is not None:
            entry["counterexample"] = repr(counterexample)
        self.items.append(entry)
        log.info("%s: %s", name, "pass" if ok else "FAIL")

    @property
    def passed(self) -> bool:
        return all(e["passed"] for e in self.items)


# ---------------------------------------------------------------------------
# count
# ---------------------------------------------------------------------------

def cmd_count(heights, method: str) -> RunReport:
    rep = RunReport("count", {"max_height": list(heights), "method": method})
    rows = []
    for B in heights:
        row = {"B": _exact(B)}
        if method in ("direct", "both"):
            t0 = time.perf_counter()
            N, _ = sf.direct_count(B)
            row["N_direct"] = _exact(N)
            row["seconds_direct"] = time.perf_counter() - t0
        if method in ("torsor", "both"):
            t0 = time.perf_counter()
            T = tr.torsor_count(B)
            Nz = tr.zero_coordinate_count(B)
            row["T"] = _exact(T)
            row["N_zero"] = _exact(Nz)
            row["N_torsor_total"] = _exact(2 * T + Nz)
            row["seconds_torsor"] = time.perf_counter() - t0
        if method == "both":
            row["equal"] = row["N_direct"] == row["N_torsor_total"]
            rep.passed &= row["equal"]
        rows.append(row)
    rep.results["rows"] = rows
    return rep


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _suite_identities(chk: Check, rng: random.Random):
    bad = None
    for eta in np.ndindex(12, 12, 12, 12):
        eta = tuple(int(v) + 1 for v in eta)
        if ar.theta_closed(eta) != ar.theta_bruteforce(eta):
            bad = eta
            break
    chk.add("theta closed form = Moebius sum, coordinates <= 12", bad is None, counterexample=bad)

    bad = next((p for p in ar.primes_up_to(1000).tolist()
                if (1 - Fraction(1, p)) ** 4 * ar.local_Dp(p, 0) != ar.tau_p(p)), None)
    chk.add("(1 - 1/p)^4 D_p(1/3) = tau_p, p <= 1000", bad is None, counterexample=bad)

    worst = 0.0
    for _ in range(200):
        m, n = rng.randint(1, 1000), rng.randint(1, 1000)
        if gcd(m, n) != 1:
            continue
        lhs, rhs = ar.delta(m * n), ar.delta(m) * ar.delta(n)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300) if rhs else abs(lhs))
    chk.add("Delta multiplicative on coprime pairs", worst <= 1e-12, detail={"max_rel_err": worst})

    worst = max(abs(ar.local_G12(p, 0.0) * ar.E2_local(p, 1.0) - float(ar.tau_p(p))) / float(ar.tau_p(p))
                for p in ar.primes_up_to(1000).tolist())
    chk.add("G12_p(1) E2_p(1) = tau_p", worst <= 1e-12, detail={"max_rel_err": worst})


def _suite_bijection(chk: Check, rng: random.Random):
    R = 12
    bad = None
    for b in range(1, R + 1):
        for a in range(-R, R + 1):
            for c in range(-R, R + 1):
                if gcd(gcd(a, b), c) != 1 or a == 0 or c == 0 or a * b + c * c == 0:
                    continue
                p = sf.PlanePoint(a, b, c)
                img = sf.phi(p).coords
                t = tr.canonicalize(tr.section(p))
                x = tr.pi_map(t).coords
                flip = sf.normalize((x[0], -x[1], -x[2], x[3], x[4], x[5], -x[6]))
                if (img not in (x, flip) or not t.is_canonical()
                        or tr.canonicalize(t) != t):
                    bad = (a, b, c)
                    break
            if bad:
                break
        if bad:
            break
    chk.add(f"canonicalize(section(p)) round-trips, max(|a|,b,|c|) <= {R}", bad is None,
            counterexample=bad)
    for B in (1, 10, 100, 1000):
        N, Nz_direct = sf.direct_count(B)
        T, Nz = tr.torsor_count(B), tr.zero_coordinate_count(B)
        chk.add(f"N_U({B}) = 2 T + N_zero", N == 2 * T + Nz and Nz == Nz_direct,
                detail={"N_U": _exact(N), "T": _exact(T), "N_zero": _exact(Nz)})


def _suite_fp(chk: Check, rng: random.Random):
    for p in (2, 3, 5, 7, 11, 13):
        n = sf.count_fp(p)
        chk.add(f"#S(F_{p}) = (p+1)^2", n == (p + 1) ** 2, detail={"count": n})


def _suite_density(chk: Check, rng: random.Random, quad_tol: float = 1e-7):
    rep = dn.density_report(quad_tol)
    chk.add("tau_inf by the 3d and 2d routes agree to 1e-3", rep.agree,
            detail={"tau_inf_3d": rep.tau_inf_3d, "tau_inf_2d": rep.tau_inf_2d,
                    "relative_gap": rep.relative_gap})


def _suite_bounds(chk: Check, rng: random.Random):
    worst, ratio = None, 0.0
    for u in np.linspace(0.01, 1.0, 100):
        for v in np.linspace(0.0, dn.CBRT2, 100):
            r = dn.F1(u, v) * math.sqrt(u) / 2.0
            if r > ratio:
                worst, ratio = (float(u), float(v)), r
    chk.add("F1(u, v) <= 2/sqrt(u) on a 100x100 grid", ratio <= 1 + 1e-12,
            detail={"max F1 sqrt(u) / 2": ratio, "at": worst}, counterexample=worst)
    chk.add("F1(u, v) <= 2 sqrt(2)/sqrt(u) on a 100x100 grid", ratio <= math.sqrt(2) + 1e-12,
            detail={"max F1 sqrt(u) / 2": ratio}, counterexample=worst)
    for u in (0.01, 0.1, 0.5, 1.0):
        val = dn.F2(u)
        chk.add(f"F2({u}) <= 4/sqrt(u)", val <= 4.0 / math.sqrt(u), detail={"F2": val})
    B = 30
    pruned = sf.direct_points(B)
    naive = sf.direct_points(B, box=2 * B)
    chk.add(f"pruned search box is complete at B = {B}", pruned == naive,
            counterexample=sorted(naive - pruned)[:3])


SUITES = {
    "identities": _suite_identities,
    "bijection": _suite_bijection,
    "fp": _suite_fp,
    "density": _suite_density,
    "bounds": _suite_bounds,
}


def cmd_verify(suite: str, quad_tol: float = 1e-7, seed: int = 0) -> RunReport:
    rep = RunReport("verify", {"suite": suite, "seed": seed})
    chk = Check()
    rng = random.Random(seed)
    t0 = time.perf_counter()
    if suite == "density":
        _suite_density(chk, rng, quad_tol)
    else:
        SUITES[suite](chk, rng)
    rep.timings["seconds"] = time.perf_counter() - t0
    rep.results["checks"] = chk.items
    rep.passed = chk.passed
    return rep


# ---------------------------------------------------------------------------
# constant and fit
# ---------------------------------------------------------------------------

def cmd_constant(prime_cutoff: int, quad_tol: float) -> RunReport:
    if prime_cutoff < 1000:
        raise ValueError("--primes-up-to must be at least 1000")
    rep = RunReport("constant", {"primes_up_to": prime_cutoff, "quad_tol": quad_tol})
    t0 = time.perf_counter()
    t3 = dn.tau_infty_3d(quad_tol)
    rep.timings["tau_inf_3d"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    t2 = dn.tau_infty_2d()
    rep.timings["tau_inf_2d"] = time.perf_counter() - t0
    prod_tau = ar.tau_product(prime_cutoff)
    rep.results = {
        "alpha": ar.ALPHA,
        "tau_inf_3d": t3,
        "tau_inf_2d": t2,
        "tau_p_2": ar.tau_p(2),
        "prod_tau_p": prod_tau,
        "prod_tau_p_relative_tail_bound": ar.tau_tail_bound(prime_cutoff),
        "c": ar.predicted_constant(prime_cutoff, t3),
    }
    rep.passed = bool(abs(t3 - t2) <= 1e-3 * abs(t2))
    return rep


def fit_report(grid, counts, prime_cutoff: int = 10**5, tau_inf: float | None = None) -> dict:
    B = np.asarray(grid, dtype=float)
    N = np.asarray([float(n) for n in counts])
    if tau_inf is None:
        tau_inf = dn.tau_infty_2d()
    predicted = ar.predicted_constant(prime_cutoff, tau_inf)
    free = AsymptoticFit().fit(B, N)
    pinned = AsymptoticFit(leading=predicted).fit(B, N)
    return {
        "c_fit": free.c_,
        "c_fit_stderr": free.c_stderr_,
        "c_predicted": predicted,
        "c_ratio": free.c_ / predicted,
        "monic_coefficients": list(free.monic_coefficients_),
        "condition_number": free.condition_number_,
        "max_abs_residual_over_B^0.925": float(np.max(np.abs(free.scaled_residuals_))),
        "pinned_lower_coefficients": [float(v) for v in pinned.coef_[1:]],
        "pinned_max_abs_residual_over_B^0.925": float(np.max(np.abs(pinned.scaled_residuals_))),
    }


def cmd_fit(grid) -> RunReport:
    rep = RunReport("fit", {"grid": list(grid)})
    t0 = time.perf_counter()
    counts, seconds = count_grid(grid)
    rep.timings["counting"] = time.perf_counter() - t0
    rep.timings["per_height"] = {str(k): v for k, v in seconds.items()}
    rep.results = fit_report(grid, counts)
    rep.results["counts"] = {str(b): _exact(n) for b, n in zip(grid, counts)}
    return rep


# ---------------------------------------------------------------------------
# argument handling and output
# ---------------------------------------------------------------------------

def parse_grid(text: str) -> list[int]:
    """Either 'lo:hi:n' (log-spaced) or a comma-separated list of heights."""
    if ":" in text:
        lo, hi, n = (int(float(v)) for v in text.split(":"))
        return log_grid(lo, hi, n)
    return sorted({int(float(v)) for v in text.split(",") if v.strip()})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this path instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=1,
                        help="worker count; the computations run serially on this build")
    common.add_argument("-v", "--verbose", action="store_true")
    ap = argparse.ArgumentParser(prog="dp6a2", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[common], help="count points of bounded height")
    p.add_argument("--max-height", type=int, nargs="+", required=True)
    p.add_argument("--method", choices=("direct", "torsor", "both"), default="both")

    p = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.add_argument("--quad-tol", type=float, default=1e-7)

    p = sub.add_parser("constant", parents=[common], help="assemble the predicted leading constant")
    p.add_argument("--primes-up-to", type=int, default=10**5)
    p.add_argument("--quad-tol", type=float, default=1e-8)

    p = sub.add_parser("fit", parents=[common], help="fit counts to c B (cubic in log B)")
    p.add_argument("--grid", type=parse_grid, default="10000:10000000:8")
    return ap


def _to_csv(rep: RunReport) -> str:
    buf = io.StringIO()
    if rep.command == "count":
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for row in rep.results["rows"]:
            w.writerow({k: row.get(k, "") for k in CSV_COLUMNS})
    else:
        w = csv.writer(buf)
        w.writerow(["key", "value"])
        for k, v in rep.results.items():
            w.writerow([k, json.dumps(v, default=_jsonable)])
    return buf.getvalue()


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.threads < 1:
        ap.error("--threads must be >= 1")
    if args.threads > 1:
        log.warning("--threads=%d requested; running serially", args.threads)
    try:
        if args.command == "count":
            if any(B < 1 for B in args.max_height):
                raise ValueError("--max-height values must be >= 1")
            rep = cmd_count(args.max_height, args.method)
        elif args.command == "verify":
            rep = cmd_verify(args.suite, args.quad_tol)
        elif args.command == "constant":
            rep = cmd_constant(args.primes_up_to, args.quad_tol)
        else:
            rep = cmd_fit(args.grid)
    except (ValueError, OverflowError) as exc:
        print(f"dp6a2: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep.parameters["threads"] = args.threads
    text = rep.to_json() if args.format == "json" else _to_csv(rep)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
