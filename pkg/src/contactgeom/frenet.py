"""Pseudo-metric Frenet apparatus along curves.

Conventions.  kappa = sqrt|g(nabla_T T, nabla_T T)|; causal signs of N
and B ride along as signN, signB.  The binormal orientation is a gauge:
the default orientation at a point makes tau_signed >= 0 (the convention
under which the published component formulas are stated); sweeps and
residual checks pass an explicit `b_orient` so neighbouring frames stay
on one smooth branch.  tau = |tau_signed| always.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import alpha_beta, christoffel
from .curve import sample
from .errors import DegenerateFrameError, GeodesicPointError, HypothesisError
from .manifold import StructureTensors

KAPPA_MIN = 1e-7
DELTA_MIN = 1e-7
UNIT_SPEED_TOL = 1e-6


def _fd_step(curve, s, h=1e-3):
    """Step for 5-point stencils, shrunk near the domain ends."""
    h = h * max(1.0, abs(s))
    room = min(s - curve.s_min, curve.s_max - s) / 2.5
    return max(min(h, room), 1e-7)


def _stencil(fn, s, h):
    """5-point first derivative of a vector function of s."""
    f = [fn(s + k * h) for k in (-2, -1, 1, 2)]
    return (-f[3] + 8.0 * f[2] - 8.0 * f[1] + f[0]) / (12.0 * h)


def _scalar_stencil(fn, s, h):
    f = [fn(s + k * h) for k in (-2, -1, 1, 2)]
    return (-f[3] + 8.0 * f[2] - 8.0 * f[1] + f[0]) / (12.0 * h)


def nabla_TT(M, curve, s, source="auto"):
    """Covariant acceleration nabla_{v'} v' (exact, no differencing)."""
    cs = sample(M, curve, s)
    G = christoffel(M, cs.position, source=source)
    return cs.acceleration + np.einsum("kij,i,j->k", G, cs.velocity, cs.velocity)


def covariant_along(M, curve, s, field_fn, source="auto", h=1e-3):
    """nabla_{v'} F for a field F(s) given along the curve: dF/ds + Gamma(v', F)."""
    cs = sample(M, curve, s)
    step = _fd_step(curve, s, h)
    dF = _stencil(field_fn, s, step)
    G = christoffel(M, cs.position, source=source)
    return dF + np.einsum("kij,i,j->k", G, cs.velocity, field_fn(s))


def _require_unit_speed(cs, label):
    if abs(cs.speed2 - 1.0) > UNIT_SPEED_TOL:
        raise HypothesisError(
            f"{label}: curve is not unit-speed at s={cs.s} (g(v',v')={cs.speed2:.6g})")


@dataclass(frozen=True)
class FrenetData:
    s: float
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: float
    tau: float
    tau_signed: float
    signN: int
    signB: int


def frenet_direct(M: StructureTensors, curve, s, kappa_min=KAPPA_MIN,
                  b_orient=None, source="auto", h=1e-3):
    """Frame, curvature and torsion straight from covariant derivatives."""
    cs = sample(M, curve, s)
    _require_unit_speed(cs, "frenet_direct")
    gm = M.metric(cs.position)
    T = cs.velocity
    A = nabla_TT(M, curve, s, source=source)
    qA = float(A @ gm @ A)
    kappa = np.sqrt(abs(qA))
    a_len = float(np.linalg.norm(A))
    if a_len > 10.0 * kappa_min and abs(qA) < 1e-14 * a_len * a_len:
        raise DegenerateFrameError(
            f"lightlike normal direction at s={s} (|g(A,A)| ~ 0, |A| = {a_len:.3g})")
    if kappa < kappa_min:
        raise GeodesicPointError(f"geodesic point at s={s} (kappa = {kappa:.3g})")
    N = A / kappa
    gNN = float(N @ gm @ N)

    def n_field(u):
        a = nabla_TT(M, curve, u, source=source)
        return a / np.sqrt(abs(float(a @ M.metric(curve.point(u)) @ a)))

    dTN = covariant_along(M, curve, s, n_field, source=source, h=h)
    R = dTN - float(dTN @ gm @ T) * T
    qR = float(R @ gm @ R)
    r_len = float(np.linalg.norm(R))
    if r_len < 1e-9:
        # torsion-free point: complete the frame g-orthogonally to T and N
        rows = np.vstack([gm @ T, gm @ N])
        _, _, vt = np.linalg.svd(rows)
        w = vt[2]
        qW = float(w @ gm @ w)
        if abs(qW) < 1e-12:
            raise DegenerateFrameError(f"cannot complete frame at s={s}")
        B = w / np.sqrt(abs(qW))
        tau_signed = 0.0
    else:
        if abs(qR) < 1e-12 * r_len * r_len:
            raise DegenerateFrameError(f"lightlike binormal direction at s={s}")
        B = R / np.sqrt(abs(qR))
        tau_signed = M.epsilon * float(R @ gm @ B) / float(B @ gm @ B)
    if b_orient is not None:
        if float(B @ np.asarray(b_orient)) < 0.0:
            B = -B
            tau_signed = -tau_signed
    elif tau_signed < 0.0:
        B = -B
        tau_signed = -tau_signed
    return FrenetData(
        s=float(s), T=T, N=N, B=B,
        kappa=float(kappa), tau=abs(tau_signed), tau_signed=float(tau_signed),
        signN=int(np.sign(gNN)), signB=int(np.sign(float(B @ gm @ B))),
    )


def frenet_sweep(M, curve, grid, source="auto", **kw):
    """Frames along a grid with binormal orientation stitched for
    continuity; entries are FrenetData or the exception that flagged the
    sample."""
    out = []
    prev_b = None
    for s in grid:
        try:
            fd = frenet_direct(M, curve, s, b_orient=prev_b, source=source, **kw)
            prev_b = fd.B
            out.append(fd)
        except (GeodesicPointError, DegenerateFrameError, HypothesisError) as err:
            out.append(err)
    return out


def frenet_equation_residuals(M, curve, s, data=None, source="auto", h=1e-3):
    """Norms of the three Frenet-Serret equation defects at s."""
    fd = data or frenet_direct(M, curve, s, source=source, h=h)
    gm = M.metric(curve.point(s))
    A = nabla_TT(M, curve, s, source=source)
    res1 = float(np.linalg.norm(A - fd.kappa * fd.N))

    def n_field(u):
        a = nabla_TT(M, curve, u, source=source)
        return a / np.sqrt(abs(float(a @ M.metric(curve.point(u)) @ a)))

    def b_field(u):
        return frenet_direct(M, curve, u, b_orient=fd.B, source=source, h=h).B

    dTN = covariant_along(M, curve, s, n_field, source=source, h=h)
    res2 = float(np.linalg.norm(dTN + fd.kappa * fd.T - M.epsilon * fd.tau_signed * fd.B))
    dTB = covariant_along(M, curve, s, b_field, source=source, h=h)
    res3 = float(np.linalg.norm(dTB + fd.tau_signed * fd.N))
    return res1, res2, res3


def frame_orthonormality_residual(M, fd: FrenetData, p):
    """Max defect of the pseudo-orthonormality relations of {T, N, B}."""
    gm = M.metric(p)
    vals = [
        abs(float(fd.T @ gm @ fd.T) - 1.0),
        abs(float(fd.T @ gm @ fd.N)),
        abs(float(fd.T @ gm @ fd.B)),
        abs(float(fd.N @ gm @ fd.B)),
        abs(abs(float(fd.N @ gm @ fd.N)) - 1.0),
        abs(abs(float(fd.B @ gm @ fd.B)) - 1.0),
    ]
    return max(vals)


# ---------------------------------------------------------------------------
# Legendre closed-form curvature/torsion


@dataclass(frozen=True)
class LegendreKT:
    kappa: float
    tau: float
    theta: float
    c_signed: float
    tau_alt: float | None  # variant with the signed denominator eps b^2 + theta^2


def theta_scalar(M, curve, s, source="auto"):
    """theta = g(nabla_{v'} v', phi v')."""
    cs = sample(M, curve, s)
    A = nabla_TT(M, curve, s, source=source)
    return float(A @ M.metric(cs.position) @ (M.phi(cs.position) @ cs.velocity))


def legendre_kappa_tau(M, curve, s, source="auto", h=1e-3,
                       legendre_tol=1e-6, kappa_min=KAPPA_MIN):
    """Closed-form kappa = sqrt|theta^2 + eps beta^2| and
    tau = |alpha + (beta theta' - beta' theta)/kappa^2| for Legendre curves."""
    cs = sample(M, curve, s)
    _require_unit_speed(cs, "legendre_kappa_tau")
    if abs(cs.m) > legendre_tol:
        raise HypothesisError(f"curve is not Legendre at s={s} (eta(v') = {cs.m:.3g})")
    eps = M.epsilon
    ab = alpha_beta(M, cs.position, source=source)
    theta = theta_scalar(M, curve, s, source=source)
    kappa2 = abs(theta * theta + eps * ab.beta * ab.beta)
    kappa = np.sqrt(kappa2)
    if kappa < kappa_min:
        raise GeodesicPointError(f"geodesic point at s={s} (kappa = {kappa:.3g})")
    step = _fd_step(curve, s, h)
    dtheta = _scalar_stencil(lambda u: theta_scalar(M, curve, u, source=source), s, step)
    dbeta = _scalar_stencil(
        lambda u: alpha_beta(M, curve.point(u), source=source).beta, s, step)
    c = ab.alpha + (ab.beta * dtheta - dbeta * theta) / kappa2
    denom_alt = eps * ab.beta * ab.beta + theta * theta
    tau_alt = None
    if abs(denom_alt) > 1e-12:
        tau_alt = abs(ab.alpha + (ab.beta * dtheta - dbeta * theta) / denom_alt)
    return LegendreKT(kappa=float(kappa), tau=abs(c), theta=theta,
                      c_signed=float(c), tau_alt=tau_alt)


def reeb_legendre_frame_vector(M, curve, s, source="auto"):
    """The binormal orientation the Reeb decomposition formulas presume:
    eps (theta xi + eps beta phi v') / kappa."""
    cs = sample(M, curve, s)
    eps = M.epsilon
    ab = alpha_beta(M, cs.position, source=source)
    theta = theta_scalar(M, curve, s, source=source)
    kappa = np.sqrt(abs(theta * theta + eps * ab.beta * ab.beta))
    xi = M.xi(cs.position)
    phiT = M.phi(cs.position) @ cs.velocity
    return eps * (theta * xi + eps * ab.beta * phiT) / kappa


@dataclass(frozen=True)
class ReebLegendreData:
    coeff_N: float
    coeff_B: float
    residual: float


def reeb_decomposition_legendre(M, curve, s, source="auto", h=1e-3):
    """xi = coeff_N N + coeff_B B with coeff_N = -eps beta/kappa and
    coeff_B = eps theta/kappa; the reconstruction defect is evaluated in
    the frame oriented by the formula's own binormal."""
    cs = sample(M, curve, s)
    eps = M.epsilon
    ab = alpha_beta(M, cs.position, source=source)
    lk = legendre_kappa_tau(M, curve, s, source=source, h=h)
    coeff_n = -eps * ab.beta / lk.kappa
    coeff_b = eps * lk.theta / lk.kappa
    b_ref = reeb_legendre_frame_vector(M, curve, s, source=source)
    fd = frenet_direct(M, curve, s, b_orient=b_ref, source=source, h=h)
    xi = M.xi(cs.position)
    residual = float(np.linalg.norm(xi - coeff_n * fd.N - coeff_b * fd.B))
    return ReebLegendreData(coeff_N=float(coeff_n), coeff_B=float(coeff_b),
                            residual=residual)


# ---------------------------------------------------------------------------
# V-frame (general eta(v') = m) machinery


@dataclass(frozen=True)
class PhiFrameData:
    s: float
    m: float
    delta: float
    theta: float
    theta1: float
    V1: np.ndarray
    V2: np.ndarray
    V3: np.ndarray


def m_prime(M, curve, s):
    """Exact d/ds of m(s) = eta(v') when eta partials are available,
    else a 5-point stencil."""
    cs = sample(M, curve, s)
    if M.eta_partials is not None:
        de = M.eta_partials(cs.position)  # [l, i] = d_l eta_i
        return float(cs.velocity @ de @ cs.velocity + M.eta(cs.position) @ cs.acceleration)
    step = _fd_step(curve, s)
    return _scalar_stencil(lambda u: sample(M, curve, u).m, s, step)


def vframe(M, curve, s, delta_min=DELTA_MIN, source="auto"):
    """Orthonormal frame V1 = v', V2 = phi v'/delta, V3 = (xi - eps m v')/delta."""
    cs = sample(M, curve, s)
    _require_unit_speed(cs, "vframe")
    eps = M.epsilon
    delta2 = 1.0 - eps * cs.m * cs.m
    delta = np.sqrt(abs(delta2))
    if delta < delta_min:
        raise DegenerateFrameError(
            f"delta ~ 0 at s={s} (|m| = {abs(cs.m):.6g}); "
            "the frame degenerates and the curve is necessarily geodesic here")
    phiT = M.phi(cs.position) @ cs.velocity
    xi = M.xi(cs.position)
    theta = theta_scalar(M, curve, s, source=source)
    return PhiFrameData(
        s=float(s), m=cs.m, delta=float(delta), theta=theta,
        theta1=float(theta / delta2),
        V1=cs.velocity, V2=phiT / delta, V3=(xi - eps * cs.m * cs.velocity) / delta,
    )


def xi_vframe_residual(M, curve, s):
    """Defect of xi = eps (m V1 + delta V3)."""
    vf = vframe(M, curve, s)
    xi = M.xi(curve.point(s))
    eps = M.epsilon
    return float(np.linalg.norm(xi - eps * (vf.m * vf.V1 + vf.delta * vf.V3)))


def vframe_derivative_residuals(M, curve, s, source="auto", h=1e-3):
    """Defect norms of the three covariant-derivative formulas for the
    V-frame legs, using alpha, beta from the connection module."""
    vf = vframe(M, curve, s, source=source)
    cs = sample(M, curve, s)
    ab = alpha_beta(M, cs.position, source=source)
    eps = M.epsilon
    mp = m_prime(M, curve, s)
    b2 = ab.beta * vf.delta - mp / vf.delta
    a2 = vf.delta * vf.theta1
    amt = ab.alpha + vf.m * vf.theta1

    d1 = covariant_along(M, curve, s, lambda u: vframe(M, curve, u, source=source).V1,
                         source=source, h=h)
    d2 = covariant_along(M, curve, s, lambda u: vframe(M, curve, u, source=source).V2,
                         source=source, h=h)
    d3 = covariant_along(M, curve, s, lambda u: vframe(M, curve, u, source=source).V3,
                         source=source, h=h)
    r1 = np.linalg.norm(d1 - (a2 * vf.V2 - b2 * vf.V3))
    r2 = np.linalg.norm(d2 - (-a2 * vf.V1 + amt * vf.V3))
    r3 = np.linalg.norm(d3 - eps * (b2 * vf.V1 - amt * vf.V2))
    return float(r1), float(r2), float(r3)


@dataclass(frozen=True)
class GeneralKT:
    kappa: float
    tau: float
    c_signed: float


def general_kappa_tau(M, curve, s, source="auto", h=1e-3, kappa_min=KAPPA_MIN):
    """kappa = delta sqrt|theta1^2 + eps (beta - m'/delta^2)^2| and the
    matching torsion formula for a unit-speed curve with eta(v') = m."""
    vf = vframe(M, curve, s, source=source)
    cs = sample(M, curve, s)
    ab = alpha_beta(M, cs.position, source=source)
    eps = M.epsilon
    delta2 = vf.delta * vf.delta
    mp = m_prime(M, curve, s)
    w = ab.beta - mp / delta2
    D = vf.theta1 * vf.theta1 + eps * w * w
    kappa = vf.delta * np.sqrt(abs(D))
    if kappa < kappa_min:
        raise GeodesicPointError(f"geodesic point at s={s} (kappa = {kappa:.3g})")
    if abs(D) < 1e-10:
        raise HypothesisError(f"torsion formula singular at s={s} "
                              f"(theta1^2 + eps(beta - m'/delta^2)^2 = {D:.3g})")
    step = _fd_step(curve, s, h)

    def theta1_at(u):
        return vframe(M, curve, u, source=source).theta1

    def beta_at(u):
        return alpha_beta(M, curve.point(u), source=source).beta

    def ratio_at(u):
        vfu = vframe(M, curve, u, source=source)
        return m_prime(M, curve, u) * vfu.theta1 / (vfu.delta * vfu.delta)

    dtheta1 = _scalar_stencil(theta1_at, s, step)
    dbeta = _scalar_stencil(beta_at, s, step)
    dratio = _scalar_stencil(ratio_at, s, step)
    numer = (ab.beta * dtheta1 - dbeta * vf.theta1) - 2.0 * mp * dtheta1 / delta2 + dratio
    c = ab.alpha + vf.m * vf.theta1 + numer / D
    return GeneralKT(kappa=float(kappa), tau=abs(c), c_signed=float(c))


@dataclass(frozen=True)
class ReebGeneralData:
    m: float
    etaN: float
    etaB: float
    residual: float
    identity_residual: float
    proj_N: float
    proj_B: float


def reeb_decomposition_general(M, curve, s, source="auto", h=1e-3):
    """Coefficients of xi = eps(m T + etaN N) + etaB B with
    etaN = (m' - beta delta^2)/kappa, etaB = eps sgn(tau) delta^2 theta1 / kappa,
    evaluated against the direct frame oriented consistently with the
    formulas; proj_N, proj_B are the raw metric projections of xi."""
    vf = vframe(M, curve, s, source=source)
    cs = sample(M, curve, s)
    ab = alpha_beta(M, cs.position, source=source)
    eps = M.epsilon
    gkt = general_kappa_tau(M, curve, s, source=source, h=h)
    mp = m_prime(M, curve, s)
    delta2 = vf.delta * vf.delta
    sgn_tau = 1.0 if gkt.c_signed >= 0.0 else -1.0
    # binormal branch the formulas live on: sgn(c) (b2 V2 + eps a2 V3)/kappa
    b2 = ab.beta * vf.delta - mp / vf.delta
    a2 = vf.delta * vf.theta1
    b_ref = sgn_tau * (b2 * vf.V2 + eps * a2 * vf.V3) / gkt.kappa
    fd = frenet_direct(M, curve, s, b_orient=b_ref, source=source, h=h)
    etaN = (mp - ab.beta * delta2) / fd.kappa
    etaB = eps * sgn_tau * delta2 * vf.theta1 / fd.kappa
    gm = M.metric(cs.position)
    xi = M.xi(cs.position)
    residual = float(np.linalg.norm(xi - eps * (vf.m * fd.T + etaN * fd.N) - etaB * fd.B))
    identity = abs(etaB * etaB + eps * etaN * etaN - delta2)
    proj_n = float(xi @ gm @ fd.N) / float(fd.N @ gm @ fd.N)
    proj_b = float(xi @ gm @ fd.B) / float(fd.B @ gm @ fd.B)
    return ReebGeneralData(m=vf.m, etaN=float(etaN), etaB=float(etaB),
                           residual=residual, identity_residual=float(identity),
                           proj_N=proj_n, proj_B=proj_b)


# ---------------------------------------------------------------------------
# null curves (timelike Reeb field, eps = -1)


@dataclass(frozen=True)
class NullFrameData:
    s: float
    T: np.ndarray
    U: np.ndarray
    V: np.ndarray
    h: float
    kappa1: float
    tau1: float
    pair_residuals: dict
    equation_residuals: tuple


def _null_frame_vectors(M, curve, s, null_tol):
    cs = sample(M, curve, s)
    gm = M.metric(cs.position)
    T = cs.velocity
    n2 = float(T @ T)
    if abs(cs.speed2) > null_tol * max(1.0, n2):
        raise HypothesisError(f"curve is not null at s={s} (g(v',v') = {cs.speed2:.3g})")
    eta_T = float(M.eta(cs.position) @ T)
    phiT = M.phi(cs.position) @ T
    q_phi = float(phiT @ gm @ phiT)
    if q_phi > 1e-10 * max(1.0, float(phiT @ phiT)):
        U = phiT / np.sqrt(q_phi)
    else:
        # screen seed degenerate; fall back to the g-orthogonal complement
        _, _, vt = np.linalg.svd((gm @ T).reshape(1, 3))
        cands = [vt[1], vt[2]]
        best, best_q = None, 0.0
        for w in cands:
            qw = float(w @ gm @ w)
            if qw > best_q:
                best, best_q = w, qw
        if best is None or best_q < 1e-10:
            raise DegenerateFrameError(
                f"no spacelike screen direction at s={s} "
                f"(eta(v') = {eta_T:.3g}; phi v' and xi are degenerate seeds)")
        U = best / np.sqrt(best_q)
    rows = np.vstack([gm @ T, gm @ U])
    v0, *_ = np.linalg.lstsq(rows, np.array([-1.0, 0.0]), rcond=None)
    V = v0 + 0.5 * float(v0 @ gm @ v0) * T
    return cs, gm, T, U, V


def build_null_frame(M, curve, s, null_tol=1e-8, source="auto", h=1e-3):
    """Null frame {T, U, V} with g(U,U)=1, g(T,V)=-1, remaining pairings
    zero, plus the generalized curvature/torsion scalars."""
    if M.epsilon != -1:
        raise HypothesisError("null curves need a timelike Reeb field (epsilon = -1)")
    cs, gm, T, U, V = _null_frame_vectors(M, curve, s, null_tol)
    pair = {
        "g(U,U)-1": abs(float(U @ gm @ U) - 1.0),
        "g(T,T)": abs(float(T @ gm @ T)),
        "g(V,V)": abs(float(V @ gm @ V)),
        "g(T,V)+1": abs(float(T @ gm @ V) + 1.0),
        "g(T,U)": abs(float(T @ gm @ U)),
        "g(U,V)": abs(float(U @ gm @ V)),
    }
    A = nabla_TT(M, curve, s, source=source)
    h_fun = -float(A @ gm @ V)
    kappa1 = float(A @ gm @ U)

    def u_field(u):
        return _null_frame_vectors(M, curve, u, null_tol)[3]

    def v_field(u):
        return _null_frame_vectors(M, curve, u, null_tol)[4]

    dTU = covariant_along(M, curve, s, u_field, source=source, h=h)
    tau1 = float(dTU @ gm @ V)
    eq1 = float(np.linalg.norm(A - h_fun * T - kappa1 * U))
    eq2 = float(np.linalg.norm(dTU + tau1 * T - kappa1 * V))
    dTV = covariant_along(M, curve, s, v_field, source=source, h=h)
    eq3 = float(np.linalg.norm(dTV + h_fun * V + tau1 * U))
    return NullFrameData(s=float(s), T=T, U=U, V=V, h=h_fun, kappa1=kappa1,
                         tau1=tau1, pair_residuals=pair,
                         equation_residuals=(eq1, eq2, eq3))


@dataclass(frozen=True)
class NullGeodesicReport:
    max_abs_b3: float
    max_abs_c3: float
    max_abs_m: float
    proportionality_defect: float
    is_legendre_input: bool


def null_legendre_geodesic_check(M, curve, grid, tol=1e-8, source="auto"):
    """Decompose nabla_{v'} v' = a3 T + b3 U + c3 V along the grid and
    report max |b3| (zero for null Legendre curves, which are geodesics)
    plus the proportionality defect against T.  Runs diagnostically even
    when the supplied curve is not Legendre."""
    if len(grid) == 0:
        raise HypothesisError("empty grid")
    max_b3 = max_c3 = max_m = defect = 0.0
    for s in grid:
        cs, gm, T, U, V = _null_frame_vectors(M, curve, s, null_tol=1e-6)
        A = nabla_TT(M, curve, s, source=source)
        b3 = float(A @ gm @ U)
        c3 = -float(A @ gm @ T)
        a3 = -float(A @ gm @ V)
        max_b3 = max(max_b3, abs(b3))
        max_c3 = max(max_c3, abs(c3))
        max_m = max(max_m, abs(cs.m))
        defect = max(defect, float(np.linalg.norm(A - a3 * T)))
    return NullGeodesicReport(max_abs_b3=max_b3, max_abs_c3=max_c3, max_abs_m=max_m,
                              proportionality_defect=defect,
                              is_legendre_input=max_m < tol)
