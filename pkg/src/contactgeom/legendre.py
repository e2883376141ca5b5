"""Constructors for Legendre curves.

Built-ins are the two closed-form examples in the n3 chart.  The q3
generator turns an angle function psi(s) into the Legendre curve with

    x = mu,  y' = sin(psi)/mu,  z' = 2 sin(psi),  mu^2 = 2 * int cos(psi),

which satisfies the Legendre and unit-speed conditions by construction.
Positions come from Simpson prefix tables; derivative closures up to
order 3 are exact in psi, psi', psi'' and mu, so no differentiation of
quadrature output ever happens.  The y and z integration constants are
fixed at the interval start (translations in y and z are isometries of
the chart metric).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .curve import CallableCurve
from .errors import HypothesisError, ValidationError
from .quadrature import PrefixIntegral


def builtin_legendre(name):
    """The two example curves: upsilon1(s) = (1, s, 0) on all of R and
    upsilon2(s) = (-ln s, 1/2, ln s) on s > 0."""
    if name == "upsilon1":
        zero = np.zeros(3)
        return CallableCurve(
            funcs=[
                lambda s: np.array([1.0, s, 0.0]),
                lambda s: np.array([0.0, 1.0, 0.0]),
                lambda s: zero.copy(),
                lambda s: zero.copy(),
            ],
            domain=(-np.inf, np.inf),
            label="upsilon1",
            default_interval=(-2.0, 2.0),
        )
    if name == "upsilon2":
        return CallableCurve(
            funcs=[
                lambda s: np.array([-np.log(s), 0.5, np.log(s)]),
                lambda s: np.array([-1.0 / s, 0.0, 1.0 / s]),
                lambda s: np.array([1.0 / s ** 2, 0.0, -1.0 / s ** 2]),
                lambda s: np.array([-2.0 / s ** 3, 0.0, 2.0 / s ** 3]),
            ],
            domain=(0.0, np.inf),
            label="upsilon2",
            default_interval=(0.5, 5.0),
        )
    raise ValidationError(f"unknown builtin Legendre curve {name!r}")


@dataclass(frozen=True)
class AngleFunction:
    """Differentiable angle psi(s) driving the q3 generator."""

    psi: ex.Expr
    s0: float = 0.0

    @classmethod
    def from_text(cls, text, s0=0.0):
        return cls(psi=ex.parse(text), s0=float(s0))

    def derivatives(self):
        d1 = ex.differentiate(self.psi, "s")
        d2 = ex.differentiate(d1, "s")
        return self.psi, d1, d2


class GeneratedLegendreCurve(CallableCurve):
    """Output of the q3 generator; keeps mu and the angle closures around
    for the closed-form curvature/torsion path."""

    def __init__(self, funcs, domain, angle, mu_fn, psi_fns, label):
        super().__init__(funcs, domain, label, default_interval=domain)
        self.angle = angle
        self.mu = mu_fn
        self.psi_fns = psi_fns


def generate_legendre_q3(angle, interval, n_nodes=4096, n_check=512,
                         label=None):
    """Legendre curve in the q3 chart from an angle function.

    `angle` is an AngleFunction or expression text (then s0 defaults to
    0).  Fails if mu^2 = 2 * int_{s0}^{s} cos(psi) is not strictly
    positive across the requested interval (the curve would leave the
    chart x > 0)."""
    if isinstance(angle, str):
        angle = AngleFunction.from_text(angle)
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValidationError("empty generation interval")
    psi0, psi1, psi2 = angle.derivatives()

    def psi_v(arr):
        return np.asarray(psi0.eval(s=arr), dtype=float)

    cos_prefix = PrefixIntegral(lambda t: np.cos(psi_v(t)), angle.s0,
                                min(angle.s0, lo), hi, n_nodes)

    def mu2(s):
        return 2.0 * cos_prefix(s)

    check = np.linspace(lo, hi, n_check)
    vals = np.array([mu2(s) for s in check])
    if vals.min() <= 0.0:
        bad = float(check[int(np.argmin(vals))])
        raise HypothesisError(
            f"mu^2 = 2 int cos(psi) is not positive on the interval "
            f"(mu^2({bad:.6g}) = {vals.min():.6g}); the generated curve "
            "would leave the chart x > 0")

    def mu(s):
        v = mu2(s)
        if v <= 0.0:
            raise HypothesisError(f"mu^2({s}) = {v:.6g} <= 0")
        return np.sqrt(v)

    y_prefix = PrefixIntegral(
        lambda t: np.sin(psi_v(t)) / np.array([mu(u) for u in np.atleast_1d(t)]),
        lo, lo, hi, n_nodes)
    z_prefix = PrefixIntegral(lambda t: 2.0 * np.sin(psi_v(t)), lo, lo, hi, n_nodes)

    def at(s):
        p0 = float(psi0.eval(s=s))
        return np.cos(p0), np.sin(p0), float(psi1.eval(s=s)), float(psi2.eval(s=s))

    def pos(s):
        return np.array([mu(s), y_prefix(s), z_prefix(s)])

    def d1(s):
        c, si, _, _ = at(s)
        u = mu(s)
        return np.array([c / u, si / u, 2.0 * si])

    def d2(s):
        c, si, p1, _ = at(s)
        u = mu(s)
        return np.array([
            -p1 * si / u - c * c / u ** 3,
            p1 * c / u - si * c / u ** 3,
            2.0 * p1 * c,
        ])

    def d3(s):
        c, si, p1, p2 = at(s)
        u = mu(s)
        return np.array([
            -p2 * si / u - p1 * p1 * c / u + 3.0 * p1 * si * c / u ** 3
            + 3.0 * c ** 3 / u ** 5,
            p2 * c / u - p1 * p1 * si / u - 2.0 * p1 * c * c / u ** 3
            + p1 * si * si / u ** 3 + 3.0 * si * c * c / u ** 5,
            2.0 * p2 * c - 2.0 * p1 * p1 * si,
        ])

    return GeneratedLegendreCurve(
        funcs=[pos, d1, d2, d3],
        domain=(lo, hi),
        angle=angle,
        mu_fn=mu,
        psi_fns=(psi0, psi1, psi2),
        label=label or f"legendre[psi={psi0}]",
    )


@dataclass(frozen=True)
class K2Data:
    kappa_signed: float
    kappa: float
    tau: float


def kappa_tau_k2(gen: GeneratedLegendreCurve, s, kappa_floor=0.0):
    """Closed-form kappa = psi' + sin(psi)/mu^2 and tau = 1/mu^2 of a
    generated curve.  kappa is reported both signed (as the formula
    stands) and absolute; values with kappa_signed <= kappa_floor raise,
    flagging geodesic or orientation-degenerate samples."""
    psi0, psi1, _ = gen.psi_fns
    u2 = gen.mu(s) ** 2
    kappa_signed = float(psi1.eval(s=s)) + np.sin(float(psi0.eval(s=s))) / u2
    if kappa_signed <= kappa_floor:
        raise HypothesisError(
            f"kappa = psi' + sin(psi)/mu^2 = {kappa_signed:.6g} <= {kappa_floor} "
            f"at s={s} (geodesic or orientation-degenerate sample)")
    return K2Data(kappa_signed=kappa_signed, kappa=abs(kappa_signed), tau=1.0 / u2)
