"""Exact arithmetic in the ring of trigonometric polynomials.

Elements are finite sums

    sum_k  A_k(x) * cos(k x) + B_k(x) * sin(k x),      k = 0, 1, 2, ...

with rational polynomial coefficients A_k, B_k.  The ring is closed under
addition, multiplication (product-to-sum reduction) and differentiation,
which is exactly what is needed to construct the spherical functions f_n
and all of their derivatives without rounding: the canonical form of an
element is unique, so structural identities (ODEs, derivative recurrences,
Wronskian expansions) can be checked by exact cancellation to the zero
element.

Numeric evaluation is a separate concern: the closed forms have integer
coefficients that grow like (2n+1)!! while the function values near x = 0
vanish to high order, so a fixed-precision sum loses every significant
digit.  ``tp_eval`` therefore evaluates with adaptive working precision
(mpmath) against a running magnitude bound, and switches to an exact
Maclaurin expansion below a small radius where the cancellation is worst.
Values returned as ``float`` are correct to ~1 ulp whenever they are
representable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from mpmath import mp

from .errors import NumericalFailure, UsageError

Rational = Fraction
Poly = tuple  # coefficient tuples of Fraction, index = power of x

#: Largest n accepted by :func:`spherical_fn`; coefficient growth is ~(2n+1)!!.
MAX_SPHERICAL_N = 16

#: Below this |x|, tp_eval uses the exact Maclaurin expansion instead of the
#: harmonic form (the harmonic form cancels catastrophically near 0).
MACLAURIN_RADIUS = 1e-2

_MACLAURIN_EXTRA_TERMS = 64
_VANISHING_ORDER_CAP = 600
_EVAL_START_DPS = 40
_EVAL_MAX_DPS = 5000
_EVAL_RTOL = 1e-17
_EVAL_RTOL_FLOOR = 1e-30

# mpmath's global context is process-wide mutable state; serialize access so
# that grid scans may run under a thread pool.
_MP_LOCK = threading.RLock()


# ----------------------------------------------------------------------
# polynomial coefficient tuples (index = power of x)
# ----------------------------------------------------------------------

def _poly(coeffs: Iterable) -> tuple[Fraction, ...]:
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def poly_add(a, b):
    n = max(len(a), len(b))
    return _poly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                  for i in range(n)])


def poly_neg(a):
    return tuple(-c for c in a)


def poly_scale(a, s: Fraction):
    if s == 0:
        return ()
    return tuple(c * s for c in a)


def poly_mul(a, b):
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _poly(out)


def poly_diff(a):
    return _poly([i * a[i] for i in range(1, len(a))])


# ----------------------------------------------------------------------
# TrigPoly
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TrigPoly:
    """Canonical element of the ring: harmonics sorted by frequency k.

    ``terms`` holds triples (k, cos_coeffs, sin_coeffs).  Invariants of the
    canonical form: no triple with both parts empty, no trailing zero
    polynomial coefficients, k = 0 carries an empty sin part.  Structural
    equality of canonical forms is equality of functions.
    """

    terms: tuple[tuple[int, tuple[Fraction, ...], tuple[Fraction, ...]], ...]

    @property
    def harmonics(self) -> Mapping[int, tuple[tuple[Fraction, ...], tuple[Fraction, ...]]]:
        return {k: (c, s) for k, c, s in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    def max_degree(self) -> int:
        d = 0
        for _, c, s in self.terms:
            d = max(d, len(c) - 1, len(s) - 1)
        return d

    def max_harmonic(self) -> int:
        return self.terms[-1][0] if self.terms else 0

    # operator sugar; the module-level tp_* functions are the primary API
    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        return tp_add(self, other)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return tp_add(self, tp_neg(other))

    def __neg__(self) -> "TrigPoly":
        return tp_neg(self)

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        return tp_mul(self, other)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TrigPoly({format_trigpoly(self)})"


def _make(harmonics: dict) -> TrigPoly:
    terms = []
    for k in sorted(harmonics):
        c, s = harmonics[k]
        c = _poly(c)
        s = () if k == 0 else _poly(s)
        if c or s:
            terms.append((k, c, s))
    return TrigPoly(tuple(terms))


def tp_zero() -> TrigPoly:
    return TrigPoly(())


def tp_from_poly(coeffs) -> TrigPoly:
    """Plain polynomial in x (the k = 0 harmonic)."""
    return _make({0: (coeffs, ())})


def tp_const(c) -> TrigPoly:
    return tp_from_poly([c])


def tp_x(power: int = 1) -> TrigPoly:
    return tp_from_poly([0] * power + [1])


def tp_term(k: int, cos_coeffs=(), sin_coeffs=()) -> TrigPoly:
    """A(x)*cos(kx) + B(x)*sin(kx) for a single frequency k >= 0."""
    if k < 0:
        raise UsageError("harmonic frequency must be non-negative")
    return _make({k: (cos_coeffs, sin_coeffs)})


def tp_sin() -> TrigPoly:
    return tp_term(1, (), (1,))


def tp_cos() -> TrigPoly:
    return tp_term(1, (1,), ())


# ----------------------------------------------------------------------
# ring operations
# ----------------------------------------------------------------------

def tp_add(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    acc: dict[int, list] = {k: [c, s] for k, c, s in a.terms}
    for k, c, s in b.terms:
        if k in acc:
            acc[k][0] = poly_add(acc[k][0], c)
            acc[k][1] = poly_add(acc[k][1], s)
        else:
            acc[k] = [c, s]
    return _make({k: (v[0], v[1]) for k, v in acc.items()})


def tp_neg(a: TrigPoly) -> TrigPoly:
    return TrigPoly(tuple((k, poly_neg(c), poly_neg(s)) for k, c, s in a.terms))


def tp_sub(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    return tp_add(a, tp_neg(b))


def tp_scale(a: TrigPoly, s) -> TrigPoly:
    s = Fraction(s)
    if s == 0:
        return tp_zero()
    return TrigPoly(tuple((k, poly_scale(c, s), poly_scale(ss, s))
                          for k, c, ss in a.terms))


_HALF = Fraction(1, 2)


def tp_mul(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    """Exact product, reduced to canonical form.

    Uses the product-to-sum rules
        cos j cos k = (cos(j-k) + cos(j+k)) / 2
        sin j sin k = (cos(j-k) - cos(j+k)) / 2
        sin j cos k = (sin(j+k) + sin(j-k)) / 2
    with cos(-m) = cos m and sin(-m) = -sin m.
    """
    acc: dict[int, list] = {}

    def add_cos(m: int, p):
        if not p:
            return
        if m < 0:
            m = -m
        slot = acc.setdefault(m, [(), ()])
        slot[0] = poly_add(slot[0], p)

    def add_sin(m: int, p):
        if not p:
            return
        if m == 0:
            return
        if m < 0:
            m, p = -m, poly_neg(p)
        slot = acc.setdefault(m, [(), ()])
        slot[1] = poly_add(slot[1], p)

    for j, cj, sj in a.terms:
        for k, ck, sk in b.terms:
            if cj and ck:
                p = poly_scale(poly_mul(cj, ck), _HALF)
                add_cos(j - k, p)
                add_cos(j + k, p)
            if sj and sk:
                p = poly_scale(poly_mul(sj, sk), _HALF)
                add_cos(j - k, p)
                add_cos(j + k, poly_neg(p))
            if cj and sk:
                p = poly_scale(poly_mul(cj, sk), _HALF)
                add_sin(j + k, p)
                add_sin(j - k, poly_neg(p))
            if sj and ck:
                p = poly_scale(poly_mul(sj, ck), _HALF)
                add_sin(j + k, p)
                add_sin(j - k, p)
    return _make({k: (v[0], v[1]) for k, v in acc.items()})


def tp_diff(a: TrigPoly, order: int = 1) -> TrigPoly:
    """Exact derivative (d/dx), applied ``order`` times."""
    if order < 0:
        raise UsageError("derivative order must be non-negative")
    out = a
    for _ in range(order):
        out = _diff_once(out)
    return out


@lru_cache(maxsize=1024)
def _diff_once(a: TrigPoly) -> TrigPoly:
    # d/dx [A cos kx + B sin kx] = (A' + kB) cos kx + (B' - kA) sin kx
    acc = {}
    for k, c, s in a.terms:
        dc = poly_add(poly_diff(c), poly_scale(s, Fraction(k)))
        ds = poly_add(poly_diff(s), poly_scale(c, Fraction(-k)))
        acc[k] = (dc, ds)
    return _make(acc)


def derivatives(a: TrigPoly, m: int) -> tuple[TrigPoly, ...]:
    """(a, a', ..., a^(m)) as exact ring elements."""
    out = [a]
    for _ in range(m):
        out.append(_diff_once(out[-1]))
    return tuple(out)


# ----------------------------------------------------------------------
# spherical functions f_n
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _spherical(n: int) -> TrigPoly:
    if n == 0:
        return tp_sin()
    if n == 1:
        # sin x - x cos x
        return tp_term(1, (0, -1), (1,))
    # f_n = (2n-1) f_{n-1} - x^2 f_{n-2}
    return tp_sub(tp_scale(_spherical(n - 1), 2 * n - 1),
                  tp_mul(tp_x(2), _spherical(n - 2)))


def spherical_fn(n: int, max_n: int = MAX_SPHERICAL_N) -> TrigPoly:
    """The n-th spherical function P(x) sin x + Q(x) cos x.

    Built by the three-term recurrence f_0 = sin x, f_1 = sin x - x cos x,
    f_{n+1} = (2n+1) f_n - x^2 f_{n-1}, which keeps all coefficients as
    exact integers.  f_n equals sqrt(pi/2) * x^(n+1/2) * J_{n+1/2}(x) and
    vanishes to order 2n+1 at x = 0.
    """
    if not isinstance(n, int) or n < 0:
        raise UsageError("n must be a non-negative integer")
    if n > max_n:
        raise UsageError(f"n={n} exceeds the configured maximum {max_n}")
    return _spherical(n)


@lru_cache(maxsize=None)
def fn_derivatives(n: int, m: int) -> tuple[TrigPoly, ...]:
    """(f_n, f_n', ..., f_n^(m)) for the n-th spherical function."""
    return derivatives(spherical_fn(n), m)


# ----------------------------------------------------------------------
# Maclaurin expansion (exact rational Taylor coefficients at 0)
# ----------------------------------------------------------------------

@lru_cache(maxsize=512)
def maclaurin(a: TrigPoly, count: int) -> tuple[Fraction, ...]:
    """The first ``count`` Taylor coefficients of ``a`` at x = 0, exactly."""
    out = [Fraction(0)] * count
    for k, cpart, spart in a.terms:
        if k == 0:
            for i, ci in enumerate(cpart[:count]):
                out[i] += ci
            continue
        tm = Fraction(1)  # k^m / m!
        for m in range(count):
            if m > 0:
                tm = tm * k / m
            if m % 2 == 0:
                sgn = -1 if (m // 2) % 2 else 1
                part = cpart
            else:
                sgn = -1 if ((m - 1) // 2) % 2 else 1
                part = spart
            if not part:
                continue
            t = sgn * tm
            for i, ci in enumerate(part):
                if ci and i + m < count:
                    out[i + m] += ci * t
    return tuple(out)


def vanishing_order(a: TrigPoly) -> int:
    """Order of the zero of ``a`` at x = 0 (0 when a(0) != 0).

    Raises UsageError for the zero element and NumericalFailure if no
    nonzero Taylor coefficient is found below the safety cap.
    """
    if a.is_zero():
        raise UsageError("the zero element has no vanishing order")
    count = 8
    while count <= _VANISHING_ORDER_CAP:
        coeffs = maclaurin(a, count)
        for i, c in enumerate(coeffs):
            if c != 0:
                return i
        count *= 2
    raise NumericalFailure(
        f"no nonzero Maclaurin coefficient below order {_VANISHING_ORDER_CAP}")


# ----------------------------------------------------------------------
# numeric evaluation
# ----------------------------------------------------------------------

def _horner_mp(coeffs, xm, ax):
    """Horner evaluation in mpf; returns (value, sum of |term| magnitudes)."""
    acc = mp.mpf(0)
    mag = mp.mpf(0)
    for c in reversed(coeffs):
        cm = mp.mpf(c.numerator) / c.denominator
        acc = acc * xm + cm
        mag = mag * ax + abs(cm)
    return acc, mag


def _eval_harmonic_mp(a: TrigPoly, x: float):
    """Evaluate at the current working precision.

    Returns (value, rounding_bound) where rounding_bound conservatively
    covers the accumulated roundoff of the harmonic-form sum at this
    precision.
    """
    xm = mp.mpf(x)
    ax = abs(xm)
    total = mp.mpf(0)
    mag = mp.mpf(0)
    for k, cpart, spart in a.terms:
        if k == 0:
            v, m_ = _horner_mp(cpart, xm, ax)
            total += v
            mag += m_
            continue
        if cpart:
            v, m_ = _horner_mp(cpart, xm, ax)
            total += v * mp.cos(k * xm)
            mag += m_
        if spart:
            v, m_ = _horner_mp(spart, xm, ax)
            total += v * mp.sin(k * xm)
            mag += m_
    ops = a.max_degree() + 8 * len(a.terms) + 16
    bound = mag * mp.mpf(10) ** (-mp.dps) * ops
    return total, bound


def _eval_adaptive_mp(a: TrigPoly, x: float, rtol: float):
    """mpf value certified to the requested relative error, escalating precision."""
    # A pure polynomial can be evaluated exactly in the rationals, which also
    # covers exact zeros at rational points (the harmonic route cannot
    # certify a true zero).
    if all(k == 0 for k, _, _ in a.terms):
        fx = Fraction(x)
        val = Fraction(0)
        for _, cpart, _ in a.terms:
            p = Fraction(0)
            for c in reversed(cpart):
                p = p * fx + c
            val += p
        with _MP_LOCK, mp.workdps(40):
            return mp.mpf(val.numerator) / val.denominator
    dps = _EVAL_START_DPS
    while dps <= _EVAL_MAX_DPS:
        with _MP_LOCK, mp.workdps(dps):
            total, bound = _eval_harmonic_mp(a, x)
            if bound == 0 or bound <= abs(total) * mp.mpf(rtol):
                return total
        dps *= 2
    raise NumericalFailure(
        f"evaluation at x={x!r} did not certify below {_EVAL_MAX_DPS} digits")


def _eval_maclaurin_mp(a: TrigPoly, x: float, denom_power: int = 0):
    """Evaluate a(x)/x^denom_power near 0 from the exact Maclaurin series.

    Returns an mpf good to ~1e-33 relative (50-digit working precision and
    a verified term decay), or None when the decay check fails and the
    caller must fall back to the adaptive harmonic route.
    """
    m0 = vanishing_order(a)
    if denom_power and m0 < denom_power and x == 0.0:
        raise UsageError(
            f"a/x^{denom_power} is singular at 0 (vanishing order {m0})")
    count = m0 + _MACLAURIN_EXTRA_TERMS
    coeffs = maclaurin(a, count)
    with _MP_LOCK, mp.workdps(50):
        if x == 0.0:
            if m0 > denom_power:
                return mp.mpf(0)
            c = coeffs[m0]
            return mp.mpf(c.numerator) / c.denominator
        xm = mp.mpf(x)
        xp = xm ** (m0 - denom_power)
        total = mp.mpf(0)
        last = mp.mpf(0)
        for j in range(m0, count):
            c = coeffs[j]
            if c:
                last = mp.mpf(c.numerator) / c.denominator * xp
                total += last
            xp *= xm
        if total != 0 and abs(last) > abs(total) * mp.mpf(2) ** -110:
            return None  # decay not established at this radius
        return total


def tp_eval(a: TrigPoly, x: float) -> float:
    """Numeric value of ``a`` at ``x``, correct to ~1 ulp of the result.

    Evaluation is self-validating: the harmonic form is summed with
    adaptive working precision until a running magnitude bound certifies
    the relative error, and below |x| = MACLAURIN_RADIUS the exact
    Maclaurin expansion is used instead (there the harmonic form cancels
    to a value exponentially smaller than its terms).
    """
    x = float(x)
    if x != x or x in (float("inf"), float("-inf")):
        raise UsageError("x must be finite")
    if a.is_zero():
        return 0.0
    if x == 0.0:
        val = sum((c[0] for _, c, _ in a.terms if c), Fraction(0))
        return float(val)
    if abs(x) < MACLAURIN_RADIUS:
        got = _eval_maclaurin_mp(a, x)
        if got is not None:
            return _to_float(got, x)
    return _to_float(_eval_adaptive_mp(a, x, _EVAL_RTOL), x)


def tp_eval_mp(a: TrigPoly, x: float, rtol: float = _EVAL_RTOL):
    """Like tp_eval but returns the certified mpf (for determinant entries).

    rtol is clamped at 1e-30; the Maclaurin route near 0 is good to ~1e-33.
    """
    rtol = max(float(rtol), _EVAL_RTOL_FLOOR)
    if a.is_zero():
        return mp.mpf(0)
    if abs(x) < MACLAURIN_RADIUS and x != 0.0:
        got = _eval_maclaurin_mp(a, x)
        if got is not None:
            return got
    if x == 0.0:
        val = sum((c[0] for _, c, _ in a.terms if c), Fraction(0))
        with _MP_LOCK, mp.workdps(40):
            return mp.mpf(val.numerator) / val.denominator
    return _eval_adaptive_mp(a, x, rtol)


def tp_eval_over_power(a: TrigPoly, power: int, x: float) -> float:
    """a(x) / x^power with the removable singularity at 0 resolved exactly.

    Used for integrands like f_n^2 / t^(2n+3) whose factors vanish/blow up
    separately but whose ratio extends continuously to 0.
    """
    if power < 0:
        raise UsageError("power must be non-negative")
    x = float(x)
    if a.is_zero():
        if x == 0.0 and power > 0:
            raise UsageError("0/0 at x=0 for the zero element")
        return 0.0
    if abs(x) < MACLAURIN_RADIUS:
        got = _eval_maclaurin_mp(a, x, denom_power=power)
        if got is not None:
            return _to_float(got, x)
    return tp_eval(a, x) / x ** power


def _to_float(v, x: float) -> float:
    out = float(v)
    if out != out or out in (float("inf"), float("-inf")):
        raise NumericalFailure(f"value at x={x!r} overflows double precision")
    return out


# ----------------------------------------------------------------------
# serialization / formatting
# ----------------------------------------------------------------------

def _rat_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def to_json_dict(a: TrigPoly) -> dict:
    """JSON form: {harmonic k: {"cos": [rational strings], "sin": [...]}}."""
    return {
        str(k): {"cos": [_rat_str(c) for c in cpart],
                 "sin": [_rat_str(c) for c in spart]}
        for k, cpart, spart in a.terms
    }


def from_json_dict(d: Mapping) -> TrigPoly:
    acc = {}
    for key, parts in d.items():
        k = int(key)
        acc[k] = ([Fraction(s) for s in parts.get("cos", ())],
                  [Fraction(s) for s in parts.get("sin", ())])
    return _make(acc)


def _poly_str(p, var="x") -> str:
    if not p:
        return "0"
    bits = []
    for i, c in enumerate(p):
        if c == 0:
            continue
        if i == 0:
            bits.append(str(c))
            continue
        power = var if i == 1 else f"{var}^{i}"
        if c == 1:
            bits.append(power)
        elif c == -1:
            bits.append(f"-{power}")
        else:
            bits.append(f"{c}*{power}")
    return " + ".join(bits).replace("+ -", "- ")


def format_trigpoly(a: TrigPoly) -> str:
    """Human-readable rendering, e.g. '(3 - x^2)*sin(x) + (-3*x)*cos(x)'."""
    if a.is_zero():
        return "0"
    bits = []
    for k, cpart, spart in a.terms:
        if k == 0:
            if cpart:
                bits.append(f"({_poly_str(cpart)})")
            continue
        arg = "x" if k == 1 else f"{k}*x"
        if cpart:
            bits.append(f"({_poly_str(cpart)})*cos({arg})")
        if spart:
            bits.append(f"({_poly_str(spart)})*sin({arg})")
    return " + ".join(bits)
