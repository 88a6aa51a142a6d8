"""Adaptive Simpson quadrature with a Richardson error estimate.

The interval is bisected recursively; on each subinterval the coarse
Simpson value S1 is compared against the two-panel refinement S2, the
classical estimate err = (S2 - S1)/15 decides acceptance, and the accepted
value is the Richardson-extrapolated S2 + (S2 - S1)/15.  Tolerances are
distributed to subintervals by halving.  A node is also accepted once its
error estimate reaches the double-precision roundoff floor of the local
panel magnitude, so requesting a tolerance far below what doubles can
express degrades gracefully instead of exhausting the subdivision budget.
"""

from __future__ import annotations

from typing import Callable

from .errors import NumericalFailure

_MAX_DEPTH = 48
_ROUNDOFF = 1e-15


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, *,
                     abs_tol: float, max_depth: int = _MAX_DEPTH) -> float:
    """Integral of f over [a, b] with estimated absolute error <= abs_tol
    (or <= the roundoff floor of the integrand magnitude, if larger)."""
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, abs_tol=abs_tol, max_depth=max_depth)
    if abs_tol <= 0:
        raise NumericalFailure("abs_tol must be positive")
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    s2 = left + right
    err = (s2 - whole) / 15.0
    mag = (b - a) / 6.0 * (abs(fa) + 4.0 * abs(flm) + 2.0 * abs(fm)
                           + 4.0 * abs(frm) + abs(fb))
    if abs(err) <= max(tol, _ROUNDOFF * mag):
        return s2 + err
    if depth <= 0:
        raise NumericalFailure(
            f"adaptive Simpson exhausted the subdivision budget on "
            f"[{a}, {b}] (estimated error {abs(err):.3e} > {tol:.3e})")
    half = 0.5 * tol
    return (_simpson_rec(f, a, m, fa, flm, fm, left, half, depth - 1)
            + _simpson_rec(f, m, b, fm, frm, fb, right, half, depth - 1))


def cumulative_integrals(f: Callable[[float], float], a: float, xs, *,
                         rel_tol: float = 1e-12) -> list[float]:
    """Integrals from a to each x of the ascending sequence xs, incrementally.

    Each new segment is integrated once and accumulated, so evaluating an
    integral identity over a whole grid costs a single pass.  The segment
    tolerance follows the running magnitude of the accumulated integral
    (with a one-panel probe bootstrapping the scale), keeping the total
    relative error near rel_tol * len(xs) for integrands of one sign.
    """
    out = []
    total = 0.0
    prev = a
    scale = 0.0
    for x in xs:
        if x < prev:
            raise NumericalFailure("cumulative_integrals needs ascending points")
        if x > prev:
            probe = abs((x - prev) / 6.0
                        * (f(prev) + 4.0 * f(0.5 * (prev + x)) + f(x)))
            seg_scale = max(scale, probe)
            tol = rel_tol * seg_scale if seg_scale > 0 else 1e-280
            total += adaptive_simpson(f, prev, x, abs_tol=tol)
            scale = max(scale, abs(total))
            prev = x
        out.append(total)
    return out
