"""Determinant evaluators: named small determinants, minors, dual paths."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from chebcrit.bessel import fn_zero
from chebcrit.determinants import (
    DerivStack,
    admissible_j,
    canonical_basis,
    hankel_det,
    minor_values,
    richardson_stack,
    stack_from_spherical,
    stack_from_trigpoly,
    symbolic_minor,
    symbolic_v,
    symbolic_w,
    v_det,
    w_det,
    w_prime_det,
    wronskian_minor,
)
from chebcrit.errors import UsageError
from chebcrit.trigpoly import (
    maclaurin,
    spherical_fn,
    tp_add,
    tp_diff,
    tp_eval,
    tp_from_poly,
    tp_mul,
    tp_sin,
    tp_term,
    vanishing_order,
)


# ---------------------------------------------------------------- v_det / w_det

def test_v_of_f0_is_one():
    for x in (0.4, 1.0, 2.9, 17.0):
        s = stack_from_spherical(0, x, 2)
        assert abs(v_det(s) - 1.0) <= 1e-14


def test_v_with_vanishing_f():
    s = DerivStack(1.0, (0.0, 3.0, -7.0))
    assert v_det(s) == 9.0


def test_v_of_power_function():
    # v(x^3) at x=2: alpha x^(2 alpha - 2) = 3 * 2^4 = 48
    s = DerivStack(2.0, (8.0, 12.0, 12.0))
    assert v_det(s) == 48.0


def test_w_of_sin_vanishes():
    s = stack_from_spherical(0, 1.0, 4)
    assert abs(w_det(s)) <= 1e-15


def test_w_of_f1_vanishes_at_first_zero():
    z = fn_zero(1, 1).value
    s = stack_from_spherical(1, z, 4)
    assert abs(w_det(s)) <= 1e-9


def test_w_plus_hankel_is_zero():
    rng = random.Random(99)
    for _ in range(30):
        vals = tuple(rng.uniform(-4, 4) for _ in range(5))
        s = DerivStack(1.0, vals)
        w = w_det(s)
        h = hankel_det(s)
        assert abs(w + h) <= 1e-13 * max(1.0, abs(w))


def test_w_prime_matches_symbolic_derivative():
    for n in (1, 2, 4):
        wp = tp_diff(symbolic_w(n))
        for x in (0.8, 2.5, 6.0):
            s = stack_from_spherical(n, x, 5)
            want = tp_eval(wp, x)
            assert abs(w_prime_det(s) - want) <= 1e-11 * max(1.0, abs(want))


def test_stack_depth_validation():
    s = DerivStack(1.0, (1.0, 2.0, 3.0))
    with pytest.raises(UsageError):
        w_det(s)
    with pytest.raises(UsageError):
        DerivStack(1.0, (1.0, 2.0))


# ---------------------------------------------------------------- minors

def test_minor_top_j_is_fn():
    for n in (0, 1, 3):
        x = 2.2
        got = wronskian_minor(n, 2 * n + 1, x)
        assert abs(got - tp_eval(spherical_fn(n), x)) <= 1e-13 * max(1.0, abs(got))


def test_minor_2n_is_v():
    for n in (1, 2, 4):
        x = 1.7
        got = wronskian_minor(n, 2 * n, x)
        want = v_det(stack_from_spherical(n, x, 2))
        assert abs(got - want) <= 1e-11 * max(1.0, abs(want))


def test_minor_2n_minus_1_equals_w_with_positive_sign():
    # measured sign between the j = 2n-1 minor and w(f_n) is +1 (n >= 2;
    # for n = 1 that index falls outside the admissible range)
    for n in (2, 3, 4, 5, 6):
        x = 1.0
        got = wronskian_minor(n, 2 * n - 1, x)
        want = w_det(stack_from_spherical(n, x, 4))
        assert abs(got - want) <= 1e-10 * max(abs(want), 1e-30)
        assert got * want > 0


def test_minor_argument_validation():
    with pytest.raises(UsageError):
        wronskian_minor(2, 2, 1.0)  # j <= (2n+1)/2
    with pytest.raises(UsageError):
        wronskian_minor(2, 6, 1.0)  # j > 2n+1
    with pytest.raises(UsageError):
        wronskian_minor(2, 3, 0.0)  # x must be positive


def test_admissible_range():
    assert list(admissible_j(0)) == [1]
    assert list(admissible_j(2)) == [3, 4, 5]


def test_minor_values_batch_matches_single():
    n, x = 3, 2.4
    batch = minor_values(n, x)
    assert sorted(batch) == list(admissible_j(n))
    for j, val in batch.items():
        single = wronskian_minor(n, j, x)
        assert abs(val - single) <= 1e-12 * max(1.0, abs(single))


# ---------------------------------------------------------------- symbolic route

def test_symbolic_minor_n1_j2_closed_form():
    # v(f_1) = cos(2x)/2 + x^2 - 1/2
    got = symbolic_minor(1, 2)
    expected = tp_add(tp_term(2, (Fraction(1, 2),), ()),
                      tp_from_poly((Fraction(-1, 2), 0, 1)))
    assert got == expected
    assert got == symbolic_v(1)


def test_symbolic_minor_n0_is_sin():
    assert symbolic_minor(0, 1) == tp_sin()


def test_symbolic_vs_numeric_dual_path():
    n, j = 2, 3
    sym = symbolic_minor(n, j)
    for i in range(200):
        x = 0.05 + (30.0 - 0.05) * i / 199.0
        a = tp_eval(sym, x)
        b = wronskian_minor(n, j, x)
        assert abs(a - b) <= 1e-10 * max(abs(a), abs(b), 1e-30), (x, a, b)


def test_symbolic_w_equals_minor():
    for n in (2, 3):
        assert symbolic_minor(n, 2 * n - 1) == symbolic_w(n)


def test_symbolic_budget():
    with pytest.raises(UsageError):
        symbolic_minor(7, 10)


# ---------------------------------------------------------------- canonical basis

def test_canonical_basis_vanishing_orders():
    for n in range(1, 7):
        basis = canonical_basis(n)
        assert len(basis) == 2 * n + 2
        for k, b in enumerate(basis):
            assert vanishing_order(b) == k
            coeffs = maclaurin(b, k + 1)
            assert all(c == 0 for c in coeffs[:k])


# ---------------------------------------------------------------- richardson stacks

def test_product_rule_for_v():
    # v(fg) = v(f) g^2 + f^2 v(g), pointwise on random ring elements
    rng = random.Random(4242)
    gens = [tp_sin(), tp_term(1, (0, 1), ()), tp_from_poly((1, Fraction(1, 2)))]
    for _ in range(8):
        f = tp_add(rng.choice(gens), rng.choice(gens))
        g = tp_mul(rng.choice(gens), rng.choice(gens))
        fg = tp_mul(f, g)
        for x in (0.7, 2.3, 11.0):
            vf = v_det(stack_from_trigpoly(f, x, 2))
            vg = v_det(stack_from_trigpoly(g, x, 2))
            vfg = v_det(stack_from_trigpoly(fg, x, 2))
            fx = tp_eval(f, x)
            gx = tp_eval(g, x)
            rhs = vf * gx * gx + fx * fx * vg
            assert abs(vfg - rhs) <= 1e-11 * max(1.0, abs(vfg), abs(rhs))


def test_richardson_stack_on_sin():
    # difference noise grows like eps/h^order; order 3 at h ~ 1e-3 sits near 5e-8
    s = richardson_stack(math.sin, 0.7, 3)
    exact = (math.sin(0.7), math.cos(0.7), -math.sin(0.7), -math.cos(0.7))
    for got, want in zip(s.values, exact):
        assert abs(got - want) <= 5e-7
