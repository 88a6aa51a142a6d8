"""ODE coefficient models: the data (p, q) of f'' + p f' + q f = 0.

Every identity in the registry is parameterized by such a model together
with derivatives of p up to the fourth and of q up to the second, plus an
antiderivative P of p.  Derivatives are supplied analytically, not by
differences: the identities involve quotients in p' where difference noise
would dominate the residual budget.

Built-ins:
  spherical n:  p = -2n/x, q = 1          (solved by f_n; q' = 0)
  bessel nu:    p = 1/x,  q = 1 - nu^2/x^2 (solved by J_nu; q' = 0 iff nu = 0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import UsageError

Fn = Callable[[float], float]


@dataclass(frozen=True)
class CoeffModel:
    name: str
    p: Fn
    dp: Fn
    d2p: Fn
    d3p: Fn
    d4p: Fn
    q: Fn
    dq: Fn
    d2q: Fn
    P: Fn
    domain: tuple[float, float]
    qprime_is_zero: bool
    family: str = "custom"      # "spherical" | "bessel" | "custom"
    param: float = float("nan")  # n or nu for the built-in families

    def require_qprime_zero(self, what: str) -> None:
        if not self.qprime_is_zero:
            raise UsageError(f"{what} requires a model with q' = 0 "
                             f"(model {self.name} has q' != 0)")

    def check_domain(self, x: float) -> None:
        a, b = self.domain
        if not (a < x < b):
            raise UsageError(f"x={x} outside the domain ({a}, {b}) of {self.name}")


def spherical_model(n: int) -> CoeffModel:
    """p = -2n/x, q = 1 on (0, inf); f_n solves the equation."""
    if not isinstance(n, int) or n < 0:
        raise UsageError("spherical model needs integer n >= 0")
    c = -2.0 * n
    return CoeffModel(
        name=f"spherical:{n}",
        p=lambda x: c / x,
        dp=lambda x: -c / x ** 2,
        d2p=lambda x: 2.0 * c / x ** 3,
        d3p=lambda x: -6.0 * c / x ** 4,
        d4p=lambda x: 24.0 * c / x ** 5,
        q=lambda x: 1.0,
        dq=lambda x: 0.0,
        d2q=lambda x: 0.0,
        P=lambda x: c * math.log(x),
        domain=(0.0, math.inf),
        qprime_is_zero=True,
        family="spherical",
        param=float(n),
    )


def bessel_model(nu: float) -> CoeffModel:
    """p = 1/x, q = 1 - nu^2/x^2 on (0, inf); J_nu solves the equation."""
    nu = float(nu)
    if not math.isfinite(nu) or nu < 0:
        raise UsageError("bessel model needs finite nu >= 0")
    n2 = nu * nu
    return CoeffModel(
        name=f"bessel:{nu:g}",
        p=lambda x: 1.0 / x,
        dp=lambda x: -1.0 / x ** 2,
        d2p=lambda x: 2.0 / x ** 3,
        d3p=lambda x: -6.0 / x ** 4,
        d4p=lambda x: 24.0 / x ** 5,
        q=lambda x: 1.0 - n2 / x ** 2,
        dq=lambda x: 2.0 * n2 / x ** 3,
        d2q=lambda x: -6.0 * n2 / x ** 4,
        P=lambda x: math.log(x),
        domain=(0.0, math.inf),
        qprime_is_zero=(nu == 0.0),
        family="bessel",
        param=nu,
    )


def parse_model(text: str) -> CoeffModel:
    """Parse 'spherical:<n>' or 'bessel:<nu>' (the CLI model syntax)."""
    head, sep, tail = text.partition(":")
    if not sep:
        raise UsageError(f"model must look like spherical:<n> or bessel:<nu>, got {text!r}")
    if head == "spherical":
        try:
            n = int(tail)
        except ValueError as exc:
            raise UsageError(f"bad spherical index {tail!r}") from exc
        return spherical_model(n)
    if head == "bessel":
        try:
            nu = float(tail)
        except ValueError as exc:
            raise UsageError(f"bad bessel order {tail!r}") from exc
        return bessel_model(nu)
    raise UsageError(f"unknown model family {head!r}")


def check_model_consistency(model: CoeffModel, xs, rtol: float = 1e-6) -> None:
    """Spot-check the analytic derivatives against central differences.

    Raises UsageError on the first inconsistency; used when accepting
    custom models and in the test suite for the built-ins.
    """
    pairs = [
        (model.p, model.dp, "p'"),
        (model.dp, model.d2p, "p''"),
        (model.d2p, model.d3p, "p'''"),
        (model.d3p, model.d4p, "p''''"),
        (model.q, model.dq, "q'"),
        (model.dq, model.d2q, "q''"),
        (model.P, model.p, "P'"),
    ]
    for x in xs:
        model.check_domain(x)
        h = 1e-5 * max(abs(x), 1.0)
        for f, df, label in pairs:
            approx = (f(x + h) - f(x - h)) / (2.0 * h)
            want = df(x)
            scale = max(abs(want), abs(f(x)) / max(abs(x), 1e-3), 1e-9)
            if abs(approx - want) > rtol * scale:
                raise UsageError(
                    f"{model.name}: {label}({x}) = {want} disagrees with the "
                    f"central difference {approx}")
