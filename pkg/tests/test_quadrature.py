"""Adaptive Simpson sanity checks against closed-form integrals."""

from __future__ import annotations

import math

import pytest

from chebcrit.errors import NumericalFailure
from chebcrit.quadrature import adaptive_simpson, cumulative_integrals


def test_polynomial_exact():
    got = adaptive_simpson(lambda t: t * t, 0.0, 1.0, abs_tol=1e-12)
    assert abs(got - 1.0 / 3.0) <= 1e-12


def test_sine_hump():
    got = adaptive_simpson(math.sin, 0.0, math.pi, abs_tol=1e-11)
    assert abs(got - 2.0) <= 1e-11


def test_oscillatory():
    got = adaptive_simpson(lambda t: math.sin(10 * t) ** 2, 0.0, 4.0, abs_tol=1e-10)
    want = 2.0 - math.sin(80.0) / 40.0  # int sin^2(10t) = t/2 - sin(20t)/40
    assert abs(got - want) <= 1e-10


def test_orientation():
    a = adaptive_simpson(math.exp, 0.0, 1.0, abs_tol=1e-12)
    b = adaptive_simpson(math.exp, 1.0, 0.0, abs_tol=1e-12)
    assert abs(a + b) <= 1e-14


def test_subdivision_budget():
    with pytest.raises(NumericalFailure):
        adaptive_simpson(lambda t: math.sin(1.0 / (t + 1e-9)), 0.0, 1.0,
                         abs_tol=1e-14, max_depth=4)


def test_cumulative_matches_single_calls():
    xs = [0.5, 1.0, 2.0, 3.5, 7.0]
    cum = cumulative_integrals(lambda t: t * math.exp(-t), 0.0, xs, rel_tol=1e-13)
    for x, got in zip(xs, cum):
        want = 1.0 - (1.0 + x) * math.exp(-x)
        assert abs(got - want) <= 1e-12 * max(1.0, want)


def test_cumulative_with_tiny_head_segment():
    # integrand ~ t^13 near 0: the first segments are far below double scale
    xs = [1e-3, 1e-2, 0.1, 1.0]
    cum = cumulative_integrals(lambda t: t ** 13, 0.0, xs, rel_tol=1e-12)
    for x, got in zip(xs, cum):
        want = x ** 14 / 14.0
        assert abs(got - want) <= 1e-10 * want
