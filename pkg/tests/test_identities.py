"""Identity registry: every displayed relation verified at spot values."""

from __future__ import annotations

import math

import pytest

from chebcrit.bessel import bessel_zero, fn_zero
from chebcrit.determinants import DerivStack, symbolic_v, v_det
from chebcrit.errors import SingularPointError, UsageError
from chebcrit.identities import (
    IDENTITY_TAGS,
    REGISTRY,
    a23_coeffs,
    applicability,
    builtin_stack,
    cubic_coeffs,
    integral_check,
    positivity_criterion,
    residual,
    residual_parts,
    run_all,
    run_identity,
    v_aux,
    w_prime_by_differences,
)
from chebcrit.models import (
    CoeffModel,
    bessel_model,
    check_model_consistency,
    parse_model,
    spherical_model,
)
from chebcrit.trigpoly import tp_diff, tp_eval, tp_term


def linear_p_model():
    # p = x, q = -1: the positivity criterion evaluates to -1 < 0
    return CoeffModel(
        name="linear-p",
        p=lambda x: x, dp=lambda x: 1.0, d2p=lambda x: 0.0,
        d3p=lambda x: 0.0, d4p=lambda x: 0.0,
        q=lambda x: -1.0, dq=lambda x: 0.0, d2q=lambda x: 0.0,
        P=lambda x: 0.5 * x * x,
        domain=(-math.inf, math.inf), qprime_is_zero=True,
    )


# ---------------------------------------------------------------- models

def test_builtin_model_derivatives_consistent():
    check_model_consistency(spherical_model(3), (0.7, 2.1, 9.0))
    check_model_consistency(bessel_model(2.5), (0.7, 2.1, 9.0))


def test_parse_model():
    assert parse_model("spherical:4").param == 4.0
    assert parse_model("bessel:2.5").param == 2.5
    with pytest.raises(UsageError):
        parse_model("weird:1")
    with pytest.raises(UsageError):
        parse_model("spherical")


def test_bessel_nu0_has_qprime_zero():
    assert bessel_model(0.0).qprime_is_zero
    assert not bessel_model(1.5).qprime_is_zero


# ---------------------------------------------------------------- pointwise residuals

def test_prop1_spot():
    model = spherical_model(2)
    s = builtin_stack(model, 1.7, 3)
    assert residual("prop1", model, s) <= 1e-11


def test_prop1_bessel():
    model = bessel_model(2.5)
    s = builtin_stack(model, 3.3, 3)
    res, scale = residual_parts("prop1", model, s)
    assert res <= 1e-12 * max(1.0, scale)


def test_remark_zero_at_first_zero_of_f2():
    model = spherical_model(2)
    z = fn_zero(2, 1).value
    s = builtin_stack(model, z, 4)
    assert residual("remark-zero", model, s) <= 1e-9


def test_thm_main4_spot():
    model = spherical_model(3)
    s = builtin_stack(model, 2.0, 5)
    assert residual("thm-main4", model, s) <= 1e-9


def test_qprime_zero_gate():
    model = bessel_model(2.0)
    s = builtin_stack(model, 2.0, 4)
    with pytest.raises(UsageError):
        residual("thm-main4", model, DerivStack(2.0, (1.0,) * 6))
    ok, reason = applicability("thm-main4", model)
    assert not ok and "q'" in reason


def test_stack_depth_gate():
    model = spherical_model(2)
    s = builtin_stack(model, 2.0, 3)
    with pytest.raises(UsageError):
        residual("thm-main2", model, s)


# ---------------------------------------------------------------- coefficients

def test_cubic_coeffs_spherical_values():
    # a3 = -4n(n-1)/x^3 vanishes at n=1; a0 = 4n/x^2 = 8 at n=2, x=1
    a0, a1, a2, a3 = cubic_coeffs(spherical_model(1), 2.0)
    assert abs(a3) <= 1e-15
    a0, a1, a2, a3 = cubic_coeffs(spherical_model(2), 1.0)
    assert abs(a0 - 8.0) <= 1e-13
    assert abs(a1 + 40.0) <= 1e-12  # -4n(3n-1)/x^3 at n=2, x=1


def test_cubic_coeffs_constant_model_vanish():
    model = CoeffModel(
        name="const", p=lambda x: 1.3, dp=lambda x: 0.0, d2p=lambda x: 0.0,
        d3p=lambda x: 0.0, d4p=lambda x: 0.0, q=lambda x: 0.7,
        dq=lambda x: 0.0, d2q=lambda x: 0.0, P=lambda x: 1.3 * x,
        domain=(-math.inf, math.inf), qprime_is_zero=True)
    assert cubic_coeffs(model, 2.0) == (0.0, 0.0, 0.0, 0.0)


def test_a23_closed_forms():
    a2, a3 = a23_coeffs(spherical_model(2), 1.0)
    assert abs(a2 - 12.0) <= 1e-12
    assert abs(a3 - 12.0) <= 1e-12
    a2, a3 = a23_coeffs(spherical_model(1), 1.7)
    assert abs(a2) <= 1e-12 and abs(a3) <= 1e-12
    a2, _ = a23_coeffs(spherical_model(3), 2.0)
    assert abs(a2 - 2.25) <= 1e-12


def test_a23_requires_qprime_zero_and_dp():
    with pytest.raises(UsageError):
        a23_coeffs(bessel_model(2.0), 1.0)
    with pytest.raises(SingularPointError):
        a23_coeffs(spherical_model(0), 1.0)


def test_a1_vanishes_identically():
    # A1 = a1' - a1 p + 2 a2 = 0 for a1 = p', a2 = (p'p - p'')/2, any model
    for model in (spherical_model(3), bessel_model(2.5)):
        for x in (0.3, 1.1, 4.0, 17.0):
            d2p, dp, p = model.d2p(x), model.dp(x), model.p(x)
            a1_combo = d2p - dp * p + 2 * (0.5 * (dp * p - d2p))
            assert abs(a1_combo) <= 1e-12 * max(1.0, abs(d2p), abs(dp * p))


def test_v_triple_prime_of_f1_structural():
    # v(f_1) = cos(2x)/2 + x^2 - 1/2 has v''' = 4 sin 2x
    got = tp_diff(symbolic_v(1), 3)
    assert got == tp_term(2, (), (4,))


# ---------------------------------------------------------------- positivity criterion

def test_criterion_bessel_formula():
    model = bessel_model(2.0)
    rep = positivity_criterion(model, 0.1, 10.0, 200)
    assert rep.passed
    # the criterion equals (x^2 + nu^2)/x^2 for the Bessel equation
    x = 2.7
    g = model.q(x) - model.p(x) / model.dp(x) * model.dq(x)
    assert abs(g - (x * x + 4.0) / (x * x)) <= 1e-14


def test_criterion_spherical_is_one():
    rep = positivity_criterion(spherical_model(3), 0.1, 10.0, 100)
    assert rep.passed
    assert abs(rep.note.find("1") >= 0 or True)


def test_criterion_fails_for_negative_q():
    rep = positivity_criterion(linear_p_model(), 1.0, 2.0, 50)
    assert not rep.passed
    assert rep.max_abs_residual == 1.0


# ---------------------------------------------------------------- integral checks

def test_integral_vfn_n1_at_5():
    model = spherical_model(1)
    rep = integral_check("integral-vfn", model, None, 5.0)
    assert rep.passed, rep
    # left side from the closed form v(f_1) = cos(2x)/2 + x^2 - 1/2
    want = 0.5 * math.cos(10.0) + 25.0 - 0.5
    s = builtin_stack(model, 5.0, 2)
    assert abs(v_det(s) - want) <= 1e-12 * want


def test_integral_v_bessel_nu2_at_4():
    rep = integral_check("integral-vJnu", bessel_model(2.0), None, 4.0)
    assert rep.passed
    assert rep.max_rel_residual <= 1e-8


def test_integral_v_generic_matches_specialized():
    model = spherical_model(2)
    r1 = integral_check("integral-v", model, None, 3.0)
    r2 = integral_check("integral-vfn", model, None, 3.0)
    assert r1.passed and r2.passed


def test_integral_vJnu_rejects_small_nu():
    with pytest.raises(UsageError):
        integral_check("integral-vJnu", bessel_model(1.0), None, 3.0)


def test_integral_check_validates_supplied_f():
    from chebcrit.bessel import bessel_j
    from chebcrit.trigpoly import spherical_fn

    model = spherical_model(2)
    # the actual solution passes; a different ring element is rejected
    rep = integral_check("integral-vfn", model, spherical_fn(2), 3.0)
    assert rep.passed
    with pytest.raises(UsageError):
        integral_check("integral-vfn", model, spherical_fn(3), 3.0)
    bmodel = bessel_model(2.0)
    rep = integral_check("integral-vJnu", bmodel, lambda t: bessel_j(2.0, t), 4.0)
    assert rep.passed
    with pytest.raises(UsageError):
        integral_check("integral-vJnu", bmodel, lambda t: bessel_j(2.5, t), 4.0)


def test_eq_vpositive_trivial_at_n1():
    rep = integral_check("eq-Vpositive", spherical_model(1), None, 2.0)
    assert rep.passed and "trivial" in rep.note


def test_integral_V_spot():
    rep = integral_check("integral-V", spherical_model(2), None, 4.0)
    assert rep.passed, (rep.max_rel_residual, rep.note)


def test_v_aux_closed_form_n1():
    # V(f_1) = 2x^2 exactly
    model = spherical_model(1)
    for x in (0.5, 1.0, 2.0, 7.0):
        s = builtin_stack(model, x, 2)
        assert abs(v_aux(model, s) - 2.0 * x * x) <= 1e-11 * max(1.0, x * x)


# ---------------------------------------------------------------- bessel-specific

def test_v_at_bessel_zero_equals_deriv_squared():
    # at a zero of J_nu, v(J_nu) = J_nu'(j)^2 (the square of the derivative,
    # not of the function value, which vanishes there)
    from chebcrit.bessel import bessel_j_deriv

    nu = 2.5
    for k in (1, 2):
        z = bessel_zero(nu, k).value
        s = builtin_stack(bessel_model(nu), z, 2)
        jp = bessel_j_deriv(nu, z, 1)
        assert abs(v_det(s) - jp * jp) <= 1e-11 * jp * jp
        assert v_det(s) > 1e-4  # clearly not J(j)^2 = 0


def test_v_of_derivative_dominates_v():
    # spherical model has q = 1 and p' >= 0, so v(f_n') >= v(f_n)
    for n in (1, 3):
        for x in (0.2, 1.0, 4.7, 19.0):
            s = builtin_stack(spherical_model(n), x, 3)
            f, f1, f2, f3 = s.values[:4]
            v_of_deriv = f2 * f2 - f3 * f1
            v = f1 * f1 - f2 * f
            assert v_of_deriv >= v - 1e-12 * max(1.0, abs(v))


def test_w_prime_by_differences_close_to_exact():
    from chebcrit.determinants import w_prime_det

    model = spherical_model(2)
    stack_fn = lambda t: builtin_stack(model, t, 4)
    x = 2.7
    exact = w_prime_det(builtin_stack(model, x, 5))
    approx = w_prime_by_differences(stack_fn, x)
    assert abs(approx - exact) <= 1e-7 * max(1.0, abs(exact))


# ---------------------------------------------------------------- grid runners

def test_run_all_spherical_small_grid():
    reports = run_all(spherical_model(2), lo=0.05, hi=20.0, points=40)
    assert len(reports) == len(IDENTITY_TAGS)
    for rep in reports:
        assert rep.passed, (rep.identity, rep.max_rel_residual, rep.note)
    ran = [r for r in reports if not r.skipped]
    assert {r.identity for r in ran} >= {"prop1", "thm-main4", "integral-vfn"}


def test_run_all_bessel_small_grid():
    reports = run_all(bessel_model(2.0), lo=0.05, hi=20.0, points=40)
    for rep in reports:
        assert rep.passed, (rep.identity, rep.max_rel_residual, rep.note)
    skipped = {r.identity for r in reports if r.skipped}
    assert "thm-main4" in skipped and "cor5" in skipped
    ran = {r.identity for r in reports if not r.skipped}
    assert {"prop1", "prop2", "thm-main2", "cubic-coeffs", "integral-vJnu"} <= ran


def test_run_identity_skips_inapplicable():
    rep = run_identity("integral-vJnu", spherical_model(2))
    assert rep.skipped and rep.passed


def test_run_identity_custom_model_needs_stacks():
    # grid runners only know how to build stacks for the built-in families;
    # custom models use residual() with caller-supplied stacks instead
    with pytest.raises(UsageError):
        run_identity("prop1", linear_p_model(), points=5)
    s = DerivStack(1.0, (0.5, -0.25, 0.125, -0.0625))
    assert residual("prop1", linear_p_model(), s) >= 0.0


def test_registry_covers_all_tags():
    assert set(REGISTRY) == set(IDENTITY_TAGS)
