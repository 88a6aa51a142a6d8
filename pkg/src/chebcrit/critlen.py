"""Critical-length estimation for the trig-polynomial space of index n.

The critical length is the least positive zero over the admissible minors
w_j (j = n+1 .. 2n+1) of the canonical basis.  The top minor (j = 2n+1) is
f_n itself, whose first zero is the Bessel zero j_{n+1/2,1}, so the
estimate is always bounded by that reference value; the conjecture under
exploration is that the estimate *equals* the reference.  That equality is
a theorem for n <= 2 and open for n >= 3: the scan asserts nothing for
open cases, it reports.

Each minor is scanned on (eps, cap) with a fixed base step tied to the
problem scale, sign changes are refined by halving plus bisection, and
sub-noise dips without a sign change are surfaced as "indeterminate"
rather than being counted as zeros.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .bessel import bessel_zero
from .determinants import admissible_j, minor_values, wronskian_minor
from .errors import UsageError
from .rootfind import refine_bracket

#: scan starts at this offset from 0 (minors vanish to high order at 0)
EPSILON = 1e-3

#: base scan resolution: reference / SCAN_DIVISIONS
SCAN_DIVISIONS = 512

#: |value| below NOISE_FLOOR * (running scale) without a sign change is
#: reported as indeterminate instead of being resolved by fiat
NOISE_FLOOR = 1e-12

#: conjecture-consistency gap threshold for the report flag
GAP_TOL = 1e-6

MAX_CONJECTURE_N = 6


@dataclass
class PerJResult:
    j: int
    first_zero: float | None
    search_cap: float
    indeterminate: bool = False
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "j": self.j,
            "first_zero": self.first_zero,
            "search_cap": self.search_cap,
            "indeterminate": self.indeterminate,
            "note": self.note,
        }


@dataclass
class CritLenReport:
    n: int
    per_j: list[PerJResult]
    estimate: float
    reference: float
    gap: float
    conjecture_consistent: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "per_j": [r.as_dict() for r in self.per_j],
            "estimate": self.estimate,
            "reference": self.reference,
            "gap": self.gap,
            "conjecture_consistent": self.conjecture_consistent,
        }


def _scan_one_minor(n: int, j: int, xs: list[float], vals: list[float],
                    cap: float, tol: float) -> PerJResult:
    """Locate the first zero of minor j from precomputed scan values."""
    f = lambda t: wronskian_minor(n, j, t)
    running_scale = 0.0
    for i, v in enumerate(vals):
        running_scale = max(running_scale, abs(v))
        if v == 0.0:
            return PerJResult(j, xs[i], cap, note="scan landed on an exact zero")
        if i > 0 and vals[i - 1] * v < 0:
            lo, hi = xs[i - 1], xs[i]
            flo = vals[i - 1]
            # three rounds of halving around the sign change before bisection
            for _ in range(3):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if fm == 0.0:
                    return PerJResult(j, mid, cap)
                if flo * fm < 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            res = refine_bracket(f, lo, hi, xtol=tol)
            return PerJResult(j, res.value, cap)
        if (0 < i < len(vals) - 1 and abs(v) < NOISE_FLOOR * running_scale
                and vals[i - 1] * vals[i + 1] > 0):
            return PerJResult(j, None, cap, indeterminate=True,
                              note=f"|minor| dipped to {v:.3e} near x={xs[i]:.6g} "
                                   f"without a sign change")
    return PerJResult(j, None, cap, note="no sign change below the cap")


def estimate_critical_length(n: int, cap: float | None = None,
                             tol: float = 1e-10) -> CritLenReport:
    """Scan every admissible minor for its first zero; the minimum is the
    critical-length estimate, reported against the Bessel reference.

    The estimate can only be trusted as an upper bound in general: for
    n >= 3 equality with the reference is an open question and the report
    never asserts it (the conjecture_consistent flag is descriptive).
    """
    if not isinstance(n, int) or n < 0:
        raise UsageError("n must be a non-negative integer")
    if tol <= 0:
        raise UsageError("tol must be positive")
    reference = bessel_zero(n + 0.5, 1).value
    if cap is None:
        cap = 1.5 * reference
    if cap <= EPSILON:
        raise UsageError(f"cap must exceed the scan offset {EPSILON}")
    js = list(admissible_j(n))
    step = reference / SCAN_DIVISIONS
    count = max(2, int(math.ceil((cap - EPSILON) / step)) + 1)
    xs = [min(EPSILON + i * step, cap) for i in range(count)]
    columns: dict[int, list[float]] = {j: [] for j in js}
    for x in xs:
        row = minor_values(n, x, js)
        for j in js:
            columns[j].append(row[j])
    threads = _parallelism()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_scan_one_minor, n, j, xs, columns[j], cap, tol)
                       for j in js]
            per_j = [f.result() for f in futures]
    else:
        per_j = [_scan_one_minor(n, j, xs, columns[j], cap, tol) for j in js]
    zeros = [r.first_zero for r in per_j if r.first_zero is not None]
    estimate = min(zeros) if zeros else math.inf
    gap = estimate - reference
    consistent = abs(gap) <= GAP_TOL
    return CritLenReport(n=n, per_j=per_j, estimate=estimate,
                         reference=reference, gap=gap,
                         conjecture_consistent=consistent)


def conjecture_scan(n_max: int) -> list[CritLenReport]:
    """Reports for n = 0..n_max (exploratory output, nothing asserted)."""
    if not isinstance(n_max, int) or not 0 <= n_max <= MAX_CONJECTURE_N:
        raise UsageError(f"n_max must be an integer in [0, {MAX_CONJECTURE_N}]")
    return [estimate_critical_length(n) for n in range(n_max + 1)]


def _parallelism() -> int:
    raw = os.environ.get("CRITLEN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
