"""Wronskian determinants of the canonical basis of the trig-polynomial space.

The space spanned by x^k sin x and x^k cos x for k = 0..n has dimension
2n+2 and a canonical basis u_0, ..., u_{2n+1} with u_k = f_n^(2n+1-k),
where f_n is the n-th spherical function: u_k vanishes to exact order k at
the origin.  The critical length of the space is the least positive zero
over j > (2n+1)/2 of the minors

    w_{j}(x) = det W(u_j, ..., u_{2n+1})(x),

where the Wronskian matrix W carries the functions left-to-right in basis
order (derivative order decreasing) and differentiates downwards.  With
that column order the two small cases reduce to the named determinants

    j = 2n:    v(f) = f'^2 - f'' f
    j = 2n-1:  w(f) = det [[f'', f', f], [f''', f'', f'], [f'''', f''', f'']]

and w(f) equals minus the determinant of the 3x3 Hankel matrix of f.

Two independent evaluation routes are provided and cross-checked in tests:
a numeric route (exact ring derivatives, validated extended-precision entry
evaluation, LU with partial pivoting) and a fully symbolic route (cofactor
expansion in the ring, then validated evaluation).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

from mpmath import mp

from .errors import NumericalFailure, UsageError
from .trigpoly import (
    TrigPoly,
    derivatives,
    fn_derivatives,
    tp_add,
    tp_const,
    tp_eval,
    tp_eval_mp,
    tp_mul,
    tp_neg,
    tp_sub,
    tp_zero,
)

#: symbolic_minor cofactor expansion is budgeted for n <= 6 (the matrix is
#: (2n+2-j)-square and coefficients grow combinatorially).
MAX_SYMBOLIC_N = 6

#: LU declares a determinant zero when the scaled pivot drops below this.
PIVOT_FLOOR = 1e-300

_MP_LOCK = threading.RLock()


# ----------------------------------------------------------------------
# derivative stacks
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DerivStack:
    """Values (f(x), f'(x), ..., f^(m)(x)) at a point, m >= 2."""

    x: float
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 3:
            raise UsageError("a derivative stack needs at least (f, f', f'')")
        if not all(math.isfinite(v) for v in self.values):
            raise UsageError("stack values must be finite")
        if not math.isfinite(self.x):
            raise UsageError("stack abscissa must be finite")

    @property
    def m(self) -> int:
        return len(self.values) - 1

    def require(self, m: int, what: str) -> None:
        if self.m < m:
            raise UsageError(f"{what} needs a stack of depth m >= {m}, got {self.m}")


def stack_from_trigpoly(f: TrigPoly, x: float, m: int) -> DerivStack:
    """Exact-derivative stack of a ring element, evaluated with validation."""
    if m < 2:
        raise UsageError("stack depth m must be >= 2")
    derivs = derivatives(f, m)
    return DerivStack(float(x), tuple(tp_eval(d, x) for d in derivs))


def stack_from_spherical(n: int, x: float, m: int) -> DerivStack:
    if m < 2:
        raise UsageError("stack depth m must be >= 2")
    derivs = fn_derivatives(n, m)
    return DerivStack(float(x), tuple(tp_eval(d, x) for d in derivs))


def richardson_stack(f: Callable[[float], float], x: float, m: int, *,
                     rel_step: float = 1e-2, levels: int = 4) -> DerivStack:
    """Derivative stack for a plain callable via Richardson extrapolation.

    Central differences with ``levels`` step halvings starting from
    rel_step * max(|x|, 1).  Only for functions without an exact route;
    accuracy degrades with the order, so identity checks against such
    stacks belong to the relaxed (1e-7) tolerance class.
    """
    if m < 2:
        raise UsageError("stack depth m must be >= 2")
    x = float(x)
    values = [f(x)]
    h0 = rel_step * max(abs(x), 1.0)
    for order in range(1, m + 1):
        values.append(_richardson_derivative(f, x, order, h0, levels))
    return DerivStack(x, tuple(values))


def _central_diff(f, x, order, h):
    # classic central stencils up to order 5
    if order == 1:
        return (f(x + h) - f(x - h)) / (2 * h)
    if order == 2:
        return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)
    if order == 3:
        return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h ** 3)
    if order == 4:
        return (f(x + 2 * h) - 4 * f(x + h) + 6 * f(x) - 4 * f(x - h) + f(x - 2 * h)) / h ** 4
    if order == 5:
        return (f(x + 3 * h) - 4 * f(x + 2 * h) + 5 * f(x + h)
                - 5 * f(x - h) + 4 * f(x - 2 * h) - f(x - 3 * h)) / (2 * h ** 5)
    raise UsageError("difference stencils implemented up to order 5")


def _richardson_derivative(f, x, order, h0, levels):
    # central stencils have error O(h^2); Richardson table in powers of 4
    tab = [_central_diff(f, x, order, h0 / 2 ** i) for i in range(levels)]
    for col in range(1, levels):
        fac = 4.0 ** col
        tab = [(fac * tab[i + 1] - tab[i]) / (fac - 1.0)
               for i in range(len(tab) - 1)]
    return tab[0]


# ----------------------------------------------------------------------
# the named small determinants
# ----------------------------------------------------------------------

def v_det(s: DerivStack) -> float:
    """v(f) = f'(x)^2 - f''(x) f(x), the 2x2 Wronskian of (f', f)."""
    s.require(2, "v_det")
    f, f1, f2 = s.values[0], s.values[1], s.values[2]
    return f1 * f1 - f2 * f


def w_det(s: DerivStack) -> float:
    """The 3x3 determinant with rows (f'',f',f), (f''',f'',f'), (f'''',f''',f'')."""
    s.require(4, "w_det")
    f, f1, f2, f3, f4 = s.values[:5]
    return (f2 * (f2 * f2 - f3 * f1)
            - f1 * (f3 * f2 - f4 * f1)
            + f * (f3 * f3 - f4 * f2))


def hankel_det(s: DerivStack) -> float:
    """det of the Hankel matrix [[f,f',f''],[f',f'',f'''],[f'',f''',f'''']] = -w(f).

    Computed directly (not as -w_det) so the sign relation is testable.
    """
    s.require(4, "hankel_det")
    f, f1, f2, f3, f4 = s.values[:5]
    return (f * (f2 * f4 - f3 * f3)
            - f1 * (f1 * f4 - f3 * f2)
            + f2 * (f1 * f3 - f2 * f2))


def w_prime_det(s: DerivStack) -> float:
    """w'(x) from the stack: the last row of w differentiates to (f^(5),f'''',f''')."""
    s.require(5, "w_prime_det")
    f, f1, f2, f3, f4, f5 = s.values[:6]
    return (f2 * (f2 * f3 - f4 * f1)
            - f1 * (f3 * f3 - f5 * f1)
            + f * (f3 * f4 - f5 * f2))


# ----------------------------------------------------------------------
# canonical basis and Wronskian minors
# ----------------------------------------------------------------------

def admissible_j(n: int) -> range:
    """Integer j with (2n+1)/2 < j <= 2n+1, i.e. n+1 .. 2n+1."""
    return range(n + 1, 2 * n + 2)


def canonical_basis(n: int) -> tuple[TrigPoly, ...]:
    """(u_0, ..., u_{2n+1}) with u_k = f_n^(2n+1-k); u_k vanishes to order k at 0."""
    derivs = fn_derivatives(n, 2 * n + 1)
    return tuple(derivs[2 * n + 1 - k] for k in range(2 * n + 2))


def _check_minor_args(n: int, j: int) -> int:
    if not isinstance(n, int) or n < 0:
        raise UsageError("n must be a non-negative integer")
    if not isinstance(j, int) or not (2 * n + 1 < 2 * j <= 2 * (2 * n + 1)):
        raise UsageError(
            f"j must be an integer with (2n+1)/2 < j <= 2n+1; got j={j} for n={n}")
    return 2 * n + 2 - j  # matrix size


@lru_cache(maxsize=None)
def _minor_entry_grid(n: int, j: int) -> tuple[tuple[TrigPoly, ...], ...]:
    """Exact ring elements of W(u_j..u_{2n+1}): entry (r, t) = f_n^(2n+1-j-t+r)."""
    size = _check_minor_args(n, j)
    top = 2 * n + 1 - j  # derivative order of the leftmost column's head
    derivs = fn_derivatives(n, 2 * top)
    return tuple(
        tuple(derivs[top - t + r] for t in range(size))
        for r in range(size)
    )


_ENTRY_RTOL = 1e-30
_DET_ABS_FLOOR = "1e-25"  # times the Hadamard scale


def _lu_det(rows) -> tuple:
    """Determinant by LU with scaled partial pivoting at the current precision.

    Returns (det, hadamard) where hadamard is the product of row norms, the
    natural scale for declaring a determinant numerically zero.  A scaled
    pivot below PIVOT_FLOOR short-circuits to det = 0 (design decision: the
    matrices are tiny, precision lives in the entries).
    """
    a = [list(r) for r in rows]
    nrows = len(a)
    scales = [max(abs(x) for x in r) for r in a]
    if any(s == 0 for s in scales):
        return mp.mpf(0), mp.mpf(0)
    hadamard = mp.mpf(1)
    for r in a:
        hadamard *= mp.sqrt(sum(x * x for x in r))
    det = mp.mpf(1)
    for col in range(nrows):
        piv = max(range(col, nrows), key=lambda r: abs(a[r][col]) / scales[r])
        if abs(a[piv][col]) / scales[piv] < mp.mpf(PIVOT_FLOOR):
            return mp.mpf(0), hadamard
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            scales[col], scales[piv] = scales[piv], scales[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, nrows):
            factor = a[r][col] * inv
            if factor:
                for c in range(col, nrows):
                    a[r][c] -= factor * a[col][c]
    return det, hadamard


def _validated_lu(entry_rows, *, rtol: float = 1e-13) -> float:
    """LU determinant validated by recomputation at doubled precision.

    The entries are already certified to _ENTRY_RTOL relative error, so the
    doubling certifies the elimination roundoff.  Agreement is accepted
    relatively at rtol, or absolutely at 1e-25 of the Hadamard scale: near
    a zero of the determinant relative agreement is unattainable, while the
    absolute floor keeps sign queries meaningful far below any bisection
    resolution used on these minors.
    """
    dps = 40
    with _MP_LOCK, mp.workdps(dps):
        d_prev, had = _lu_det(entry_rows)
    while dps <= 1280:
        dps *= 2
        with _MP_LOCK, mp.workdps(dps):
            d_next, had = _lu_det(entry_rows)
            gap = abs(d_next - d_prev)
            if gap <= mp.mpf(rtol) * abs(d_next) or gap <= had * mp.mpf(_DET_ABS_FLOOR):
                return float(d_next)
        d_prev = d_next
    raise NumericalFailure("minor evaluation did not stabilize")


def wronskian_minor(n: int, j: int, x: float) -> float:
    """det W(u_j, ..., u_{2n+1})(x) for the canonical basis of the space.

    Entries are differentiated exactly in the ring and evaluated to a
    certified 1e-30 relative error; the determinant is taken by LU with
    scaled partial pivoting and validated by recomputation at doubled
    precision.
    """
    _check_minor_args(n, j)
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise UsageError("wronskian_minor needs finite x > 0")
    grid = _minor_entry_grid(n, j)
    if len(grid) == 1:
        return tp_eval(grid[0][0], x)
    entries = [[tp_eval_mp(tp, x, _ENTRY_RTOL) for tp in row] for row in grid]
    return _validated_lu(entries)


def minor_values(n: int, x: float, js: Iterable[int] | None = None) -> dict[int, float]:
    """All admissible minors at one abscissa, sharing the entry evaluations.

    Equivalent to {j: wronskian_minor(n, j, x)} but evaluates each
    derivative of f_n only once; this is what the critical-length scan
    uses per grid point.
    """
    if js is None:
        js = admissible_j(n)
    js = sorted(set(js))
    for j in js:
        _check_minor_args(n, j)
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise UsageError("minor_values needs finite x > 0")
    derivs = fn_derivatives(n, 2 * n + 1)
    vals = [tp_eval_mp(d, x, _ENTRY_RTOL) for d in derivs]
    out = {}
    for j in js:
        size = 2 * n + 2 - j
        top = 2 * n + 1 - j
        if size == 1:
            out[j] = float(vals[top])
            continue
        rows = [[vals[top - t + r] for t in range(size)] for r in range(size)]
        out[j] = _validated_lu(rows)
    return out


# ----------------------------------------------------------------------
# symbolic route
# ----------------------------------------------------------------------

def _symbolic_det(grid) -> TrigPoly:
    """Cofactor expansion along the first column, memoized on row subsets."""
    size = len(grid)
    memo: dict[tuple[int, tuple[int, ...]], TrigPoly] = {}

    def expand(col: int, rows: tuple[int, ...]) -> TrigPoly:
        if col == size:
            return tp_const(1)
        key = (col, rows)
        got = memo.get(key)
        if got is not None:
            return got
        acc = tp_zero()
        for idx, r in enumerate(rows):
            sub = expand(col + 1, rows[:idx] + rows[idx + 1:])
            term = tp_mul(grid[r][col], sub)
            acc = tp_add(acc, term if idx % 2 == 0 else tp_neg(term))
        memo[key] = acc
        return acc

    return expand(0, tuple(range(size)))


@lru_cache(maxsize=None)
def symbolic_minor(n: int, j: int) -> TrigPoly:
    """The minor det W(u_j, ..., u_{2n+1}) expanded exactly in the ring."""
    _check_minor_args(n, j)
    if n > MAX_SYMBOLIC_N:
        raise UsageError(
            f"symbolic minors are budgeted for n <= {MAX_SYMBOLIC_N}, got n={n}")
    return _symbolic_det(_minor_entry_grid(n, j))


@lru_cache(maxsize=None)
def symbolic_v(n: int) -> TrigPoly:
    """v(f_n) = f_n'^2 - f_n'' f_n as an exact ring element."""
    f, f1, f2 = fn_derivatives(n, 2)[:3]
    return tp_sub(tp_mul(f1, f1), tp_mul(f2, f))


@lru_cache(maxsize=None)
def symbolic_w(n: int) -> TrigPoly:
    """w(f_n) (the 3x3 determinant above) as an exact ring element."""
    f, f1, f2, f3, f4 = fn_derivatives(n, 4)[:5]
    t1 = tp_mul(f2, tp_sub(tp_mul(f2, f2), tp_mul(f3, f1)))
    t2 = tp_mul(f1, tp_sub(tp_mul(f3, f2), tp_mul(f4, f1)))
    t3 = tp_mul(f, tp_sub(tp_mul(f3, f3), tp_mul(f4, f2)))
    return tp_add(tp_sub(t1, t2), t3)
