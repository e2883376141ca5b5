"""Parametrized curves in a chart with derivative evaluators up to order 3.

Three curve flavours share one interface: expression-backed (exact
symbolic derivatives), closure-backed (built-ins, generated curves,
geodesics) and CSV-sampled (5-point finite-difference stencils on a
uniform parameter grid).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import expr as ex
from .connection import christoffel
from .errors import HypothesisError, ValidationError
from .manifold import as_point
from .quadrature import PrefixIntegral


class Curve:
    """Base: open parameter domain, point/derivative evaluators."""

    def __init__(self, domain, label="curve", default_interval=None):
        self.s_min, self.s_max = float(domain[0]), float(domain[1])
        if not self.s_min < self.s_max:
            raise ValidationError("empty curve domain")
        self.label = label
        self.default_interval = default_interval or (
            max(self.s_min, -2.0), min(self.s_max, 2.0))

    def check_param(self, s):
        s = float(s)
        if not (self.s_min < s < self.s_max):
            raise ValidationError(
                f"parameter {s} outside domain ({self.s_min}, {self.s_max}) of {self.label}")
        return s

    def point(self, s):
        raise NotImplementedError

    def derivative(self, s, order=1):
        raise NotImplementedError

    def velocity(self, s):
        return self.derivative(s, 1)

    def acceleration(self, s):
        return self.derivative(s, 2)


class ExpressionCurve(Curve):
    """Components given as expression strings or ASTs in the variable s."""

    def __init__(self, components, domain=(-np.inf, np.inf), label="curve",
                 default_interval=None):
        super().__init__(domain, label, default_interval)
        asts = [c if isinstance(c, ex.Expr) else ex.parse(str(c)) for c in components]
        if len(asts) != 3:
            raise ValidationError("a curve needs exactly 3 components")
        self._orders = [asts]
        for _ in range(3):
            self._orders.append([ex.differentiate(a, "s") for a in self._orders[-1]])

    def point(self, s):
        s = self.check_param(s)
        return np.array([float(a.eval(s=s)) for a in self._orders[0]])

    def derivative(self, s, order=1):
        s = self.check_param(s)
        return np.array([float(a.eval(s=s)) for a in self._orders[order]])


class CallableCurve(Curve):
    """Components and derivatives supplied as closures s -> (3,)."""

    def __init__(self, funcs, domain, label="curve", default_interval=None):
        super().__init__(domain, label, default_interval)
        if len(funcs) != 4:
            raise ValidationError("need closures for orders 0..3")
        self._funcs = list(funcs)

    def point(self, s):
        return np.asarray(self._funcs[0](self.check_param(s)), dtype=float)

    def derivative(self, s, order=1):
        return np.asarray(self._funcs[order](self.check_param(s)), dtype=float)


class SampledCurve(Curve):
    """Curve known only at uniform samples (s_i, x_i, y_i, z_i); derivatives
    via 5-point central stencils, so evaluation is restricted to samples
    at least two steps from the ends."""

    def __init__(self, s_values, points, label="sampled"):
        s_values = np.asarray(s_values, dtype=float)
        points = np.asarray(points, dtype=float)
        if s_values.ndim != 1 or len(s_values) < 7:
            raise ValidationError("need at least 7 samples")
        steps = np.diff(s_values)
        if steps.min() <= 0:
            raise ValidationError("sample parameters must be strictly increasing")
        if np.ptp(steps) > 1e-6 * steps.mean():
            raise ValidationError("sample parameters must be uniform")
        self.h = float(steps.mean())
        self.s_values = s_values
        self.points_arr = points
        super().__init__((s_values[2] - 0.5 * self.h, s_values[-3] + 0.5 * self.h),
                         label, (s_values[2], s_values[-3]))

    def _index(self, s):
        s = self.check_param(s)
        i = int(round((s - self.s_values[0]) / self.h))
        if abs(self.s_values[i] - s) > 1e-9 * max(1.0, abs(s)):
            raise ValidationError(
                f"sampled curve can only be evaluated at its samples (got {s})")
        return i

    def grid(self):
        return self.s_values[2:-2]

    def point(self, s):
        return self.points_arr[self._index(s)].copy()

    def derivative(self, s, order=1):
        i = self._index(s)
        f = self.points_arr
        h = self.h
        fm2, fm1, f0, fp1, fp2 = f[i - 2], f[i - 1], f[i], f[i + 1], f[i + 2]
        if order == 1:
            return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h)
        if order == 2:
            return (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h)
        if order == 3:
            return (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h ** 3)
        raise ValidationError(f"unsupported derivative order {order}")


@dataclass(frozen=True)
class CurveSample:
    s: float
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    m: float
    speed2: float


def sample(M, curve, s):
    """Evaluate position, velocity, acceleration, m = eta(v') and
    g(v', v') at parameter s (validates chart membership)."""
    p = curve.point(s)
    p = M.require_inside(p)
    v = curve.velocity(s)
    if float(v @ v) == 0.0:
        raise ValidationError(f"curve {curve.label} is not regular at s={s}")
    return CurveSample(
        s=float(s),
        position=p,
        velocity=v,
        acceleration=curve.acceleration(s),
        m=float(M.eta(p) @ v),
        speed2=float(v @ M.metric(p) @ v),
    )


def uniform_grid(a, b, n=401, inset_rel=1e-6):
    """Uniform grid with endpoints inset to keep stencils inside."""
    if n < 2 or not b > a:
        raise ValidationError("need n >= 2 grid points and b > a")
    inset = inset_rel * (b - a)
    return np.linspace(a + inset, b - inset, n)


@dataclass(frozen=True)
class LegendreReport:
    is_legendre: bool
    max_abs_m: float
    tol: float
    extra_residuals: dict = field(default_factory=dict)


def is_legendre(M, curve, grid, tol=1e-8):
    """max |eta(v')| over the grid, plus the chart-specific closed-form
    characterization residuals for the two built-ins (their second
    residual is the unit-speed condition, reported separately)."""
    if len(grid) == 0:
        raise ValidationError("empty grid")
    max_m = 0.0
    r1 = r2 = 0.0
    for s in grid:
        cs = sample(M, curve, s)
        max_m = max(max_m, abs(cs.m))
        (u1, _, u3) = cs.position
        (d1, d2, d3) = cs.velocity
        if M.name == "n3":
            y = cs.position[1]
            r1 = max(r1, abs(2.0 * d1 * y + d3))
            r2 = max(r2, abs(d1 * d1 + d2 * d2 - np.exp(-2.0 * u3)))
        elif M.name == "q3":
            r1 = max(r1, abs(d3 - 2.0 * u1 * d2))
            r2 = max(r2, abs(d1 * d1 + d2 * d2 - 1.0 / (u1 * u1)))
    extra = {}
    if M.name in ("n3", "q3"):
        extra = {"legendre_condition": r1, "unit_speed_condition": r2}
    return LegendreReport(is_legendre=max_m < tol, max_abs_m=max_m, tol=tol,
                          extra_residuals=extra)


def is_unit_speed(M, curve, grid, tol=1e-8):
    if len(grid) == 0:
        raise ValidationError("empty grid")
    dev = max(abs(sample(M, curve, s).speed2 - 1.0) for s in grid)
    return dev < tol, dev


class ReparametrizedCurve(Curve):
    """Unit-speed reparametrization t -> base(s(t)) with dt/ds = sqrt|g(v',v')|."""

    def __init__(self, M, base, s0, s_lo, s_hi, n_nodes=4096):
        self.M = M
        self.base = base
        self._speed_cache = {}
        self._s_of_cache = {}

        def root_speed(arr):
            return np.array([np.sqrt(abs(self._speed2(s))) for s in np.atleast_1d(arr)])

        self.arclen = PrefixIntegral(root_speed, s0, s_lo, s_hi, n_nodes)
        super().__init__((self.arclen(s_lo), self.arclen(s_hi)),
                         label=f"{base.label}|unit-speed",
                         default_interval=(self.arclen(s_lo), self.arclen(s_hi)))
        self._lo, self._hi = s_lo, s_hi

    def _speed2(self, s):
        key = round(float(s), 14)
        if key not in self._speed_cache:
            p = self.base.point(s)
            v = self.base.velocity(s)
            self._speed_cache[key] = float(v @ self.M.metric(p) @ v)
        return self._speed_cache[key]

    def s_of(self, t):
        t = self.check_param(t)
        key = round(t, 14)
        if key not in self._s_of_cache:
            self._s_of_cache[key] = brentq(lambda s: self.arclen(s) - t,
                                           self._lo, self._hi, xtol=1e-14)
        return self._s_of_cache[key]

    def point(self, t):
        return self.base.point(self.s_of(t))

    def derivative(self, t, order=1):
        s = self.s_of(t)

        def F(u):
            return 1.0 / np.sqrt(abs(self._speed2(u)))

        h = 1e-3 * max(1.0, abs(s))
        h = min(h, 0.25 * (self._hi - self._lo))
        u = s + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        if u[0] < self._lo or u[-1] > self._hi:
            shift = max(self._lo - u[0], 0.0) - max(u[-1] - self._hi, 0.0)
            u = u + shift
        Fv = np.array([F(x) for x in u])
        Fs = F(s)
        dF = (-Fv[4] + 8.0 * Fv[3] - 8.0 * Fv[1] + Fv[0]) / (12.0 * h)
        d2F = (-Fv[4] + 16.0 * Fv[3] - 30.0 * F(s) + 16.0 * Fv[1] - Fv[0]) / (12.0 * h * h)
        sp = Fs
        spp = dF * Fs
        sppp = (d2F * Fs + dF * dF) * Fs
        b1 = self.base.derivative(s, 1)
        if order == 1:
            return b1 * sp
        b2 = self.base.derivative(s, 2)
        if order == 2:
            return b2 * sp * sp + b1 * spp
        b3 = self.base.derivative(s, 3)
        if order == 3:
            return b3 * sp ** 3 + 3.0 * b2 * sp * spp + b1 * sppp
        raise ValidationError(f"unsupported derivative order {order}")


def reparametrize_arclength(M, curve, s0, grid):
    """Numeric arc-length reparametrization; requires g(v', v') of one
    sign and bounded away from zero on the grid."""
    if len(grid) < 2:
        raise ValidationError("need at least two grid points")
    speeds = np.array([sample(M, curve, s).speed2 for s in grid])
    if np.any(np.abs(speeds) < 1e-10) or (speeds.max() > 0) != (speeds.min() > 0):
        raise HypothesisError(
            "curve is not uniformly spacelike or timelike on the grid "
            "(null or sign-changing g(v', v'))")
    return ReparametrizedCurve(M, curve, float(s0), float(grid[0]), float(grid[-1]))


class GeodesicCurve(Curve):
    """Dense solution of the geodesic equation; order-3 derivatives via a
    central difference of the ODE right-hand side."""

    def __init__(self, M, sol, span, label="geodesic", source="auto"):
        super().__init__(span, label, default_interval=span)
        self.M = M
        self.sol = sol
        self.source = source

    def point(self, s):
        return self.sol(self.check_param(s))[:3]

    def _acc(self, s):
        y = self.sol(s)
        p, v = y[:3], y[3:]
        G = christoffel(self.M, p, source=self.source)
        return -np.einsum("kij,i,j->k", G, v, v)

    def derivative(self, s, order=1):
        s = self.check_param(s)
        if order == 1:
            return self.sol(s)[3:]
        if order == 2:
            return self._acc(s)
        if order == 3:
            h = 1e-4
            return (self._acc(s + h) - self._acc(s - h)) / (2.0 * h)
        raise ValidationError(f"unsupported derivative order {order}")


def geodesic(M, p0, v0, span, s_init=0.0, label="geodesic", source="auto",
             max_step=np.inf):
    """Integrate the geodesic with position p0 and velocity v0 at s_init.

    Pass a small max_step when the dense output will be differenced at
    high accuracy: it bounds the interpolation error between steps."""
    p0 = M.require_inside(as_point(p0))
    v0 = np.asarray(v0, dtype=float).reshape(3)
    lo, hi = float(span[0]), float(span[1])
    if not lo <= s_init <= hi:
        raise ValidationError("s_init must lie inside the integration span")

    def rhs(s, y):
        p, v = y[:3], y[3:]
        G = christoffel(M, p, source=source)
        return np.concatenate([v, -np.einsum("kij,i,j->k", G, v, v)])

    y0 = np.concatenate([p0, v0])
    parts = {}
    for a, b, key in ((s_init, hi, "fwd"), (s_init, lo, "bwd")):
        if a == b:
            continue
        sol = solve_ivp(rhs, (a, b), y0, method="DOP853", rtol=1e-12, atol=1e-12,
                        dense_output=True, max_step=max_step)
        if not sol.success:
            raise HypothesisError(f"geodesic integration failed: {sol.message}")
        parts[key] = sol.sol

    def dense(s):
        if s >= s_init and "fwd" in parts:
            return parts["fwd"](s)
        if s < s_init and "bwd" in parts:
            return parts["bwd"](s)
        return parts["fwd" if "fwd" in parts else "bwd"](s)

    return GeodesicCurve(M, dense, span, label=label, source=source)


# ---------------------------------------------------------------------------
# CSV interchange (s, x, y, z; extra columns ignored)


def curve_from_csv(path, label=None):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = [c.strip().lower() for c in header]
        try:
            idx = [cols.index(c) for c in ("s", "x", "y", "z")]
        except ValueError:
            raise ValidationError(f"{path}: header must contain s,x,y,z columns") from None
        rows = [[float(row[i]) for i in idx] for row in reader if row]
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    arr = np.array(rows)
    return SampledCurve(arr[:, 0], arr[:, 1:4], label=label or str(path))


def curve_to_csv(curve, grid, path, extra_columns=None):
    """Write (s, x, y, z) rows; extra_columns maps name -> per-sample list."""
    extra = extra_columns or {}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "x", "y", "z", *extra.keys()])
        for k, s in enumerate(grid):
            p = curve.point(s)
            writer.writerow([f"{v:.12g}" for v in (s, *p)]
                            + [f"{extra[name][k]:.12g}" for name in extra])
