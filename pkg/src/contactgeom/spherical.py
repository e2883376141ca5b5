"""Osculating spheres and the spherical characterization of Legendre
curves in quasi-Sasakian charts.

Everything here works at the level of the frame identities: the center
offset (1/theta, -theta'/(theta^2 |alpha|)) in the N-B plane, the signed
squared radius, and the scalar residual

    R(s) = (theta'/(theta^2 |alpha|))' - eps |alpha| / theta

whose vanishing characterizes spherical curves (away from the excluded
theta profiles).  Derivatives of theta are always taken numerically, so
the residual path stays independent of how a theta profile was produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .connection import alpha_beta, xi_derivative_of_alpha
from .curve import sample
from .errors import GeodesicPointError, HypothesisError, ValidationError
from .frenet import (KAPPA_MIN, covariant_along, frenet_direct,
                     reeb_legendre_frame_vector, theta_scalar)
from .quadrature import PrefixIntegral

_TINY = 1e-12


def _d5(fn, s, h):
    f = [fn(s + k * h) for k in (-2, -1, 1, 2)]
    return (-f[3] + 8.0 * f[2] - 8.0 * f[1] + f[0]) / (12.0 * h)


def _curve_step(curve, s, h):
    """Stencil step shrunk so nested 5-point stencils stay inside the
    curve domain (two layers reach +-4h around s)."""
    room = min(s - curve.s_min, curve.s_max - s) / 5.5
    return max(min(h * max(1.0, abs(s)), room), 1e-7)


def euclidean_spherical_residual(kappa_fn, tau_fn, s, h=1e-3):
    """Residual of the flat-space spherical condition
    tau/kappa + ((1/tau) (1/kappa)')' = 0."""
    def rho(u):
        k = kappa_fn(u)
        if abs(k) < _TINY:
            raise HypothesisError(f"kappa vanishes near s={u}")
        return 1.0 / k

    def w(u):
        t = tau_fn(u)
        if abs(t) < _TINY:
            raise HypothesisError(f"tau vanishes near s={u}")
        return _d5(rho, u, h) / t

    return tau_fn(s) * rho(s) + _d5(w, s, h)


@dataclass(frozen=True)
class ThetaSolution:
    """Closed-form 1/theta profile: A1 cos z + A2 sin z (spacelike Reeb)
    or B1 cosh z + B2 sinh z (timelike Reeb), z(s) = int_{s0}^{s} |alpha|."""

    kind: str
    c1: float
    c2: float
    s0: float
    alpha_abs: object
    z: PrefixIntegral
    restricted_to: tuple
    interval: tuple

    def _check(self, s):
        lo, hi = self.restricted_to
        if not lo <= s <= hi:
            raise HypothesisError(
                f"s={s} outside the zero-free subinterval {self.restricted_to} "
                "of this solution (1/theta crosses zero)")

    def y(self, s):
        self._check(s)
        zz = self.z(s)
        if self.kind == "spacelike_trig":
            return self.c1 * np.cos(zz) + self.c2 * np.sin(zz)
        return self.c1 * np.cosh(zz) + self.c2 * np.sinh(zz)

    def y_prime(self, s):
        self._check(s)
        zz = self.z(s)
        a = abs(float(np.atleast_1d(self.alpha_abs(np.array([s])))[0]))
        if self.kind == "spacelike_trig":
            return (-self.c1 * np.sin(zz) + self.c2 * np.cos(zz)) * a
        return (self.c1 * np.sinh(zz) + self.c2 * np.cosh(zz)) * a

    def theta(self, s):
        yv = self.y(s)
        if abs(yv) < _TINY:
            raise HypothesisError(f"theta blows up at s={s} (1/theta = {yv:.3g})")
        return 1.0 / yv

    def __call__(self, s):
        return self.theta(s)


def theta_solution(kind, c1, c2, alpha_fn, s0, interval, n_nodes=4096):
    """Construct the closed-form solution profile of the spherical ODE.

    alpha_fn must accept numpy arrays; its absolute value is used.  For
    the timelike kind, |B1| = |B2| is rejected (that profile is the
    excluded exponential).  The returned solution is restricted to the
    largest zero-free subinterval of 1/theta containing s0 (or the
    interval start when s0 lies outside)."""
    if kind not in ("spacelike_trig", "timelike_hyp"):
        raise ValidationError(f"unknown theta solution kind {kind!r}")
    c1, c2 = float(c1), float(c2)
    if kind == "timelike_hyp" and abs(abs(c1) - abs(c2)) <= 1e-12 * max(abs(c1), abs(c2), 1.0):
        raise ValidationError(
            "timelike solutions need B1 != +-B2 (otherwise 1/theta is the "
            "excluded exponential of int |alpha|)")
    lo, hi = float(interval[0]), float(interval[1])

    def alpha_abs(arr):
        return np.abs(np.asarray(alpha_fn(arr), dtype=float))

    z = PrefixIntegral(alpha_abs, float(s0), min(lo, float(s0)), max(hi, float(s0)),
                       n_nodes)
    sol = ThetaSolution(kind=kind, c1=c1, c2=c2, s0=float(s0),
                        alpha_abs=alpha_abs, z=z, restricted_to=(lo, hi),
                        interval=(lo, hi))
    # find the zero-free subinterval of y around the anchor
    grid = np.linspace(lo, hi, 2048)
    yv = np.array([sol.y(s) for s in grid])
    anchor = float(np.clip(s0, lo, hi))
    ai = int(np.argmin(np.abs(grid - anchor)))
    if abs(yv[ai]) < _TINY:
        ai = int(np.argmax(np.abs(yv)))
    sign = np.sign(yv[ai])
    i0 = ai
    while i0 > 0 and np.sign(yv[i0 - 1]) == sign:
        i0 -= 1
    i1 = ai
    while i1 < len(grid) - 1 and np.sign(yv[i1 + 1]) == sign:
        i1 += 1
    restricted = (float(grid[i0]), float(grid[i1]))
    return ThetaSolution(kind=kind, c1=c1, c2=c2, s0=float(s0),
                         alpha_abs=alpha_abs, z=z, restricted_to=restricted,
                         interval=(lo, hi))


def spherical_residual_q3(theta_fn, alpha_fn, epsilon, s, h=1e-3):
    """Residual of (theta'/(theta^2 |alpha|))' - eps |alpha|/theta at s,
    with all derivatives of theta taken by 5-point stencils."""
    def alpha_abs(u):
        a = abs(float(np.atleast_1d(alpha_fn(np.array([u])))[0]))
        if a < _TINY:
            raise HypothesisError(f"alpha vanishes near s={u}")
        return a

    def theta_at(u):
        t = float(theta_fn(u))
        if abs(t) < _TINY:
            raise HypothesisError(f"theta vanishes near s={u}")
        return t

    def w(u):
        t = theta_at(u)
        return _d5(theta_at, u, h) / (t * t * alpha_abs(u))

    return _d5(w, s, h) - epsilon * alpha_abs(s) / theta_at(s)


def spherical_residual_q3_rewritten(theta_fn, alpha_fn, epsilon, s, h=1e-3):
    """The equivalent rewritten form ((1/theta)' / |alpha|)' + eps |alpha|/theta
    (the negative of spherical_residual_q3, computed independently)."""
    def alpha_abs(u):
        a = abs(float(np.atleast_1d(alpha_fn(np.array([u])))[0]))
        if a < _TINY:
            raise HypothesisError(f"alpha vanishes near s={u}")
        return a

    def rho(u):
        t = float(theta_fn(u))
        if abs(t) < _TINY:
            raise HypothesisError(f"theta vanishes near s={u}")
        return 1.0 / t

    def w(u):
        return _d5(rho, u, h) / alpha_abs(u)

    return _d5(w, s, h) + epsilon * alpha_abs(s) * rho(s)


def radius2_signed_profile(theta_fn, alpha_fn, epsilon, grid, h=1e-3):
    """(1/theta)^2 + eps (theta'/(theta^2 |alpha|))^2 along a grid."""
    out = []
    for s in grid:
        t = float(theta_fn(s))
        if abs(t) < _TINY:
            raise HypothesisError(f"theta vanishes at s={s}")
        a = abs(float(np.atleast_1d(alpha_fn(np.array([s])))[0]))
        dt = _d5(lambda u: float(theta_fn(u)), s, h)
        w = dt / (t * t * a)
        out.append(1.0 / t ** 2 + epsilon * w * w)
    return np.array(out)


@dataclass(frozen=True)
class OsculatingData:
    s: float
    center_offset_N: float
    center_offset_B: float
    radius2_signed: float
    center_chart: np.ndarray
    theta: float
    theta_prime: float
    alpha_abs: float


def _point_checks(M, curve, s, source, legendre_tol, beta_tol):
    cs = sample(M, curve, s)
    if abs(cs.m) > legendre_tol:
        raise HypothesisError(f"curve is not Legendre at s={s} (eta(v') = {cs.m:.3g})")
    ab = alpha_beta(M, cs.position, source=source)
    if abs(ab.beta) > beta_tol:
        raise HypothesisError(
            f"structure is not quasi-Sasakian at the curve point "
            f"(beta = {ab.beta:.3g})")
    if abs(ab.alpha) < _TINY:
        raise HypothesisError(f"alpha vanishes at s={s}")
    return cs, ab


def osculating_sphere(M, curve, s, source="auto", h=1e-3,
                      legendre_tol=1e-6, beta_tol=1e-8):
    """Osculating sphere data of a non-geodesic Legendre curve at s.

    center_chart adds the frame displacement to the chart coordinates of
    the curve point; it is an extrinsic convenience only - the frame
    coefficients and radius2_signed carry the geometric content."""
    cs, ab = _point_checks(M, curve, s, source, legendre_tol, beta_tol)
    theta = theta_scalar(M, curve, s, source=source)
    if abs(theta) < max(_TINY, KAPPA_MIN):
        raise HypothesisError(
            f"theta = {theta:.3g} at s={s}: osculating system is singular "
            "(g(c - v, N) = 1/theta)")
    dtheta = _d5(lambda u: theta_scalar(M, curve, u, source=source), s,
                 _curve_step(curve, s, h))
    a = abs(ab.alpha)
    rho = 1.0 / theta
    woff = dtheta / (theta * theta * a)
    b_ref = reeb_legendre_frame_vector(M, curve, s, source=source)
    fd = frenet_direct(M, curve, s, b_orient=b_ref, source=source, h=h)
    center = cs.position + rho * fd.N - woff * fd.B
    return OsculatingData(
        s=float(s), center_offset_N=float(rho), center_offset_B=float(-woff),
        radius2_signed=float(rho * rho + M.epsilon * woff * woff),
        center_chart=center, theta=float(theta), theta_prime=float(dtheta),
        alpha_abs=float(a),
    )


def center_variation(M, curve, s, source="auto", h=1e-3,
                     legendre_tol=1e-6, beta_tol=1e-8):
    """Pseudo-norm of the covariant derivative of the osculating center
    along the curve (an independent numeric path for the center-constancy
    condition; equals |spherical residual| when the frame identities hold)."""
    _point_checks(M, curve, s, source, legendre_tol, beta_tol)
    base = osculating_sphere(M, curve, s, source=source, h=h,
                             legendre_tol=legendre_tol, beta_tol=beta_tol)
    b_ref = reeb_legendre_frame_vector(M, curve, s, source=source)
    fd0 = frenet_direct(M, curve, s, b_orient=b_ref, source=source, h=h)

    def offset_field(u):
        theta = theta_scalar(M, curve, u, source=source)
        dtheta = _d5(lambda v: theta_scalar(M, curve, v, source=source), u,
                     _curve_step(curve, u, h))
        a = abs(alpha_beta(M, curve.point(u), source=source).alpha)
        fdu = frenet_direct(M, curve, u, b_orient=fd0.B, source=source, h=h)
        return fdu.N / theta - dtheta / (theta * theta * a) * fdu.B

    cs = sample(M, curve, s)
    dc = cs.velocity + covariant_along(M, curve, s, offset_field, source=source, h=h)
    gm = M.metric(cs.position)
    norm_g = float(np.sqrt(abs(dc @ gm @ dc)))
    b_coeff = float(dc @ gm @ fd0.B) / float(fd0.B @ gm @ fd0.B)
    return norm_g, b_coeff, base


@dataclass(frozen=True)
class SphericalClassification:
    verdict: str
    max_abs_residual: float
    min_abs_residual: float
    residual_profile: list = field(repr=False)
    hypothesis: dict = field(default_factory=dict)
    center_variation_max: float | None = None


def classify_spherical(M, curve, grid, tol=1e-6, source="auto", h=1e-3,
                       exclusion_tol=1e-6, check_centers=True):
    """Classify a non-geodesic Legendre curve in a quasi-Sasakian chart as
    spherical / not_spherical, or flag the excluded theta profiles
    (constant theta for spacelike Reeb, exponential for timelike)."""
    if len(grid) < 7:
        raise ValidationError("need at least 7 grid points")
    eps = M.epsilon
    # hypothesis checks on a thinned subset
    subset = grid[:: max(1, len(grid) // 8)]
    for s in subset:
        cs, ab = _point_checks(M, curve, s, source, 1e-6, 1e-6)
        if abs(xi_derivative_of_alpha(M, cs.position, source=source)) > 1e-6:
            raise HypothesisError("structure is not quasi-Sasakian (xi(alpha) != 0)")

    thetas = np.array([theta_scalar(M, curve, s, source=source) for s in grid])
    alphas = np.array([abs(alpha_beta(M, curve.point(s), source=source).alpha)
                       for s in grid])
    if np.any(np.abs(thetas) < KAPPA_MIN):
        raise GeodesicPointError("theta (= kappa) vanishes on the grid")
    if np.any(alphas < _TINY):
        raise HypothesisError("alpha vanishes on the grid")

    hypothesis = {}
    scale = float(np.abs(thetas).max())
    if eps == 1:
        const_dev = float(np.ptp(thetas)) / max(scale, 1.0)
        hypothesis["theta_constant_deviation"] = const_dev
        if const_dev < exclusion_tol:
            return SphericalClassification(
                verdict="excluded_case", max_abs_residual=float("nan"),
                min_abs_residual=float("nan"), residual_profile=[],
                hypothesis={**hypothesis, "excluded": "constant theta with spacelike Reeb"})
    else:
        smid = float(grid[len(grid) // 2])
        zpre = PrefixIntegral(
            lambda arr: np.array(
                [abs(alpha_beta(M, curve.point(float(u)), source=source).alpha)
                 for u in np.atleast_1d(arr)]),
            smid, float(grid[0]), float(grid[-1]), 512)
        if np.any(thetas <= 0) and np.any(thetas >= 0):
            exp_dev = float("inf")  # sign change: certainly not exponential
        else:
            logt = np.log(np.abs(thetas))
            logmid = np.interp(smid, grid, logt)
            zz = np.array([zpre(s) for s in grid])
            exp_dev = min(float(np.abs(logt - logmid - zz).max()),
                          float(np.abs(logt - logmid + zz).max()))
        hypothesis["theta_exponential_deviation"] = exp_dev
        if exp_dev < exclusion_tol:
            return SphericalClassification(
                verdict="excluded_case", max_abs_residual=float("nan"),
                min_abs_residual=float("nan"), residual_profile=[],
                hypothesis={**hypothesis,
                            "excluded": "exponential theta with timelike Reeb"})

    def theta_at(u):
        return theta_scalar(M, curve, u, source=source)

    def alpha_at(arr):
        return np.array([alpha_beta(M, curve.point(float(u)), source=source).alpha
                         for u in np.atleast_1d(arr)])

    profile = []
    for s in grid:
        r = spherical_residual_q3(theta_at, alpha_at, eps, s,
                                  h=_curve_step(curve, s, h))
        profile.append((float(s), float(r)))
    absr = np.array([abs(r) for _, r in profile])
    verdict = "spherical" if absr.max() < tol else "not_spherical"

    cvar = None
    if check_centers:
        cvar = 0.0
        for s in subset:
            norm_g, _, _ = center_variation(M, curve, s, source=source, h=h)
            cvar = max(cvar, norm_g)
    return SphericalClassification(
        verdict=verdict, max_abs_residual=float(absr.max()),
        min_abs_residual=float(absr.min()), residual_profile=profile,
        hypothesis=hypothesis, center_variation_max=cvar)
