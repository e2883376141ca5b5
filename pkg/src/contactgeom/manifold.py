"""Almost contact pseudo-metric 3-manifolds on a single chart of R^3.

A structure is the tuple (phi, xi, eta, g, epsilon) given as pointwise
evaluators in the coordinate frame (d1, d2, d3).  Index conventions used
throughout the package:

    metric(p)[i, j]            = g_ij
    phi(p)[k, j]               = k-component of phi(d_j)
    metric_partials(p)[l, i, j] = d_l g_ij
    phi_partials(p)[l, k, j]    = d_l phi^k_j
    eta_partials(p)[l, i]       = d_l eta_i
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import expr as ex
from .errors import ChartDomainError, ValidationError


def as_point(p):
    """Coerce to a (3,) float array."""
    a = np.asarray(p, dtype=float).reshape(3)
    return a


@dataclass(frozen=True)
class TangentVector:
    """Vector in the coordinate frame attached to a chart point."""

    components: np.ndarray
    base: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float).reshape(3))
        object.__setattr__(self, "base", as_point(self.base))
        if not np.all(np.isfinite(self.components)):
            raise ValidationError("tangent vector components must be finite")


@dataclass(frozen=True)
class StructureTensors:
    """Chart-level (phi, xi, eta, g, epsilon) with optional exact partials
    and a closed-form Christoffel table (built-ins carry both)."""

    name: str
    epsilon: int
    metric: Callable[[np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], np.ndarray]
    xi: Callable[[np.ndarray], np.ndarray]
    eta: Callable[[np.ndarray], np.ndarray]
    chart_domain: Callable[[np.ndarray], bool]
    metric_partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    phi_partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eta_partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    xi_partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    christoffel_closed: Optional[Callable[[np.ndarray], np.ndarray]] = None
    probe_box: tuple = ((-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5))

    def require_inside(self, p):
        p = as_point(p)
        if not self.chart_domain(p):
            raise ChartDomainError(f"point {p.tolist()} outside chart domain of {self.name}")
        return p

    def g(self, X: TangentVector, Y: TangentVector):
        """Metric pairing of two vectors at the same base point."""
        if not np.allclose(X.base, Y.base):
            raise ValidationError("tangent vectors based at different points")
        G = self.metric(X.base)
        return float(X.components @ G @ Y.components)


@dataclass(frozen=True)
class StructureReport:
    """Max residuals over a probe set for one family of axiom checks."""

    name: str
    residuals: dict
    tol: float
    n_probes: int

    @property
    def passed(self):
        return all(v < self.tol for v in self.residuals.values())

    def as_dict(self):
        return {
            "check": self.name,
            "tol": self.tol,
            "n_probes": self.n_probes,
            "passed": self.passed,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


# ---------------------------------------------------------------------------
# built-in structures


def _n3(eps):
    def metric(p):
        _, y, z = p
        e2z = np.exp(2.0 * z)
        return np.array([
            [4.0 * eps * y * y + e2z, 0.0, 2.0 * eps * y],
            [0.0, e2z, 0.0],
            [2.0 * eps * y, 0.0, float(eps)],
        ])

    def metric_partials(p):
        _, y, z = p
        d = np.zeros((3, 3, 3))
        d[1] = [[8.0 * eps * y, 0.0, 2.0 * eps],
                [0.0, 0.0, 0.0],
                [2.0 * eps, 0.0, 0.0]]
        e2z = np.exp(2.0 * z)
        d[2] = [[2.0 * e2z, 0.0, 0.0],
                [0.0, 2.0 * e2z, 0.0],
                [0.0, 0.0, 0.0]]
        return d

    def phi(p):
        _, y, _ = p
        return np.array([[0.0, -1.0, 0.0],
                         [1.0, 0.0, 0.0],
                         [0.0, 2.0 * y, 0.0]])

    def phi_partials(p):
        d = np.zeros((3, 3, 3))
        d[1, 2, 1] = 2.0
        return d

    def eta(p):
        _, y, _ = p
        return np.array([2.0 * y, 0.0, 1.0])

    def eta_partials(p):
        d = np.zeros((3, 3))
        d[1, 0] = 2.0
        return d

    def christoffel(p):
        _, y, z = p
        e2z = np.exp(2.0 * z)
        em2z = np.exp(-2.0 * z)
        G = np.zeros((3, 3, 3))

        def put(i, j, v):
            G[:, i, j] = v
            G[:, j, i] = v

        put(0, 0, [2.0 * y, -4.0 * eps * y * em2z, -eps * (4.0 * eps * y * y + e2z)])
        put(0, 1, [2.0 * eps * y * em2z, 0.0, (-4.0 * eps * y * y + e2z) * em2z])
        put(0, 2, [1.0, -eps * em2z, -2.0 * y])
        put(1, 1, [2.0 * y, 0.0, -eps * (4.0 * eps * y * y + e2z)])
        put(1, 2, [eps * em2z, 1.0, -2.0 * eps * y * em2z])
        return G

    return StructureTensors(
        name="n3",
        epsilon=eps,
        metric=metric,
        phi=phi,
        xi=lambda p: np.array([0.0, 0.0, 1.0]),
        eta=eta,
        chart_domain=lambda p: True,
        metric_partials=metric_partials,
        phi_partials=phi_partials,
        eta_partials=eta_partials,
        xi_partials=lambda p: np.zeros((3, 3)),
        christoffel_closed=christoffel,
        probe_box=((-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5)),
    )


def _q3(eps):
    def metric(p):
        x = p[0]
        return np.array([
            [x * x, 0.0, 0.0],
            [0.0, x * x + 4.0 * eps * x * x, -2.0 * eps * x],
            [0.0, -2.0 * eps * x, float(eps)],
        ])

    def metric_partials(p):
        x = p[0]
        d = np.zeros((3, 3, 3))
        d[0] = [[2.0 * x, 0.0, 0.0],
                [0.0, 2.0 * x * (1.0 + 4.0 * eps), -2.0 * eps],
                [0.0, -2.0 * eps, 0.0]]
        return d

    def phi(p):
        x = p[0]
        return np.array([[0.0, -1.0, 0.0],
                         [1.0, 0.0, 0.0],
                         [2.0 * x, 0.0, 0.0]])

    def phi_partials(p):
        d = np.zeros((3, 3, 3))
        d[0, 2, 0] = 2.0
        return d

    def eta(p):
        x = p[0]
        return np.array([0.0, -2.0 * x, 1.0])

    def eta_partials(p):
        d = np.zeros((3, 3))
        d[0, 1] = -2.0
        return d

    def christoffel(p):
        x = p[0]
        G = np.zeros((3, 3, 3))

        def put(i, j, v):
            G[:, i, j] = v
            G[:, j, i] = v

        put(0, 0, [1.0 / x, 0.0, 0.0])
        put(1, 1, [-(1.0 + 4.0 * eps) / x, 0.0, 0.0])
        put(1, 2, [eps / (x * x), 0.0, 0.0])
        put(0, 1, [0.0, (2.0 * eps + 1.0) / x, 1.0 + 4.0 * eps])
        put(0, 2, [0.0, -eps / (x * x), -2.0 * eps / x])
        return G

    return StructureTensors(
        name="q3",
        epsilon=eps,
        metric=metric,
        phi=phi,
        xi=lambda p: np.array([0.0, 0.0, 1.0]),
        eta=eta,
        chart_domain=lambda p: p[0] > 0.0,
        metric_partials=metric_partials,
        phi_partials=phi_partials,
        eta_partials=eta_partials,
        xi_partials=lambda p: np.zeros((3, 3)),
        christoffel_closed=christoffel,
        probe_box=((0.3, 2.5), (-1.5, 1.5), (-1.5, 1.5)),
    )


def builtin_manifold(name, epsilon):
    """The two built-in structures by name ("n3" or "q3")."""
    if epsilon not in (-1, 1):
        raise ValidationError(f"epsilon must be +1 or -1, got {epsilon!r}")
    if name == "n3":
        return _n3(int(epsilon))
    if name == "q3":
        return _q3(int(epsilon))
    raise ValidationError(f"unknown builtin manifold {name!r}")


# ---------------------------------------------------------------------------
# expression-backed user structures


def structure_from_expressions(name, epsilon, metric_rows, phi_rows, eta_entries,
                               xi_entries, domain=None, probe_box=None):
    """Build a structure from 3x3 nested lists of expression strings for g
    and phi plus 3-entry lists for eta and xi.  The metric must be given
    symmetric; domain is an optional expression required to be > 0."""
    if epsilon not in (-1, 1):
        raise ValidationError(f"epsilon must be +1 or -1, got {epsilon!r}")

    def grid3x3(rows, label):
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValidationError(f"{label} must be a 3x3 table of expressions")
        return [[ex.parse(str(e)) for e in row] for row in rows]

    g_ast = grid3x3(metric_rows, "metric")
    phi_ast = grid3x3(phi_rows, "phi")
    if len(eta_entries) != 3 or len(xi_entries) != 3:
        raise ValidationError("eta and xi need 3 entries each")
    eta_ast = [ex.parse(str(e)) for e in eta_entries]
    xi_ast = [ex.parse(str(e)) for e in xi_entries]
    dom_ast = ex.parse(str(domain)) if domain else None

    g_d = [[[ex.differentiate(g_ast[i][j], v) for j in range(3)] for i in range(3)]
           for v in ("x", "y", "z")]
    phi_d = [[[ex.differentiate(phi_ast[k][j], v) for j in range(3)] for k in range(3)]
             for v in ("x", "y", "z")]
    eta_d = [[ex.differentiate(eta_ast[i], v) for i in range(3)] for v in ("x", "y", "z")]
    xi_d = [[ex.differentiate(xi_ast[k], v) for k in range(3)] for v in ("x", "y", "z")]

    def ev(ast, p):
        return float(ast.eval(x=p[0], y=p[1], z=p[2]))

    def metric(p):
        m = np.array([[ev(g_ast[i][j], p) for j in range(3)] for i in range(3)])
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValidationError(f"metric expressions are not symmetric at {p.tolist()}")
        return 0.5 * (m + m.T)

    box = tuple(tuple(b) for b in probe_box) if probe_box else ((-1.5, 1.5),) * 3
    return StructureTensors(
        name=name,
        epsilon=int(epsilon),
        metric=metric,
        phi=lambda p: np.array([[ev(phi_ast[k][j], p) for j in range(3)] for k in range(3)]),
        xi=lambda p: np.array([ev(a, p) for a in xi_ast]),
        eta=lambda p: np.array([ev(a, p) for a in eta_ast]),
        chart_domain=(lambda p: ev(dom_ast, p) > 0.0) if dom_ast else (lambda p: True),
        metric_partials=lambda p: np.array(
            [[[ev(g_d[l][i][j], p) for j in range(3)] for i in range(3)] for l in range(3)]),
        phi_partials=lambda p: np.array(
            [[[ev(phi_d[l][k][j], p) for j in range(3)] for k in range(3)] for l in range(3)]),
        eta_partials=lambda p: np.array(
            [[ev(eta_d[l][i], p) for i in range(3)] for l in range(3)]),
        xi_partials=lambda p: np.array(
            [[ev(xi_d[l][k], p) for k in range(3)] for l in range(3)]),
        probe_box=box,
    )


# ---------------------------------------------------------------------------
# probes and axiom checks


def probe_points(M, n=100, seed=7, box=None):
    """Deterministic pseudo-random chart points inside box (rejection
    sampled against the chart domain)."""
    rng = np.random.default_rng(seed)
    box = box or M.probe_box
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    out = []
    attempts = 0
    while len(out) < n:
        p = lo + (hi - lo) * rng.random(3)
        attempts += 1
        if attempts > 1000 * n:
            raise ValidationError("probe box does not intersect the chart domain")
        if M.chart_domain(p):
            out.append(p)
    return np.array(out)


def check_almost_contact(M, probes, tol=1e-10):
    """Residuals of the defining identities of (phi, xi, eta):
    phi^2 = -I + eta (x) xi, eta(xi) = 1, phi xi = 0, eta o phi = 0."""
    r_phi2 = r_etaxi = r_phixi = r_etaphi = 0.0
    for p in probes:
        p = M.require_inside(p)
        F = M.phi(p)
        xi = M.xi(p)
        eta = M.eta(p)
        r_phi2 = max(r_phi2, np.abs(F @ F + np.eye(3) - np.outer(xi, eta)).max())
        r_etaxi = max(r_etaxi, abs(float(eta @ xi) - 1.0))
        r_phixi = max(r_phixi, np.abs(F @ xi).max())
        r_etaphi = max(r_etaphi, np.abs(eta @ F).max())
    return StructureReport(
        name="almost_contact",
        residuals={
            "phi_squared": r_phi2,
            "eta_of_xi": r_etaxi,
            "phi_of_xi": r_phixi,
            "eta_after_phi": r_etaphi,
        },
        tol=tol,
        n_probes=len(probes),
    )


def check_compatibility(M, probes, tol=1e-10):
    """Residuals of g(phi X, phi Y) = g(X, Y) - eps eta(X) eta(Y) over the
    coordinate basis sweep, plus eta(X) = eps g(X, xi) and g(xi,xi) = eps."""
    eps = M.epsilon
    r_comp = r_dual = r_unit = 0.0
    for p in probes:
        p = M.require_inside(p)
        G = M.metric(p)
        F = M.phi(p)
        xi = M.xi(p)
        eta = M.eta(p)
        lhs = F.T @ G @ F
        rhs = G - eps * np.outer(eta, eta)
        r_comp = max(r_comp, np.abs(lhs - rhs).max())
        r_dual = max(r_dual, np.abs(eta - eps * (G @ xi)).max())
        r_unit = max(r_unit, abs(float(xi @ G @ xi) - eps))
    return StructureReport(
        name="compatibility",
        residuals={
            "metric_phi_invariance": r_comp,
            "eta_metric_duality": r_dual,
            "xi_unit": r_unit,
        },
        tol=tol,
        n_probes=len(probes),
    )


def fundamental_two_form(M, p, X: TangentVector, Y: TangentVector):
    """Phi(X, Y) = eps g(X, phi Y)."""
    p = M.require_inside(p)
    if not (np.allclose(X.base, p) and np.allclose(Y.base, p)):
        raise ValidationError("vectors must be based at p")
    G = M.metric(p)
    F = M.phi(p)
    return M.epsilon * float(X.components @ G @ (F @ Y.components))


def causal_character(M, p, X: TangentVector, tol=1e-9):
    """Classify g(X, X) as spacelike/timelike/null with a relative zero band."""
    p = M.require_inside(p)
    n2 = float(X.components @ X.components)
    if n2 == 0.0:
        raise ValidationError("cannot classify the zero vector")
    q = float(X.components @ M.metric(p) @ X.components)
    if abs(q) <= tol * n2:
        return "null"
    return "spacelike" if q > 0 else "timelike"


def metric_signature_ok(M, probes):
    """True iff eigenvalue signs of g are (+,+,+) for eps=+1 and (+,+,-)
    for eps=-1 at every probe."""
    want_neg = 1 if M.epsilon == -1 else 0
    for p in probes:
        ev = np.linalg.eigvalsh(M.metric(M.require_inside(p)))
        if np.any(np.abs(ev) < 1e-12) or int((ev < 0).sum()) != want_neg:
            return False
    return True


def phi_kernel_determinant(M, p):
    """Determinant of phi restricted to ker eta (rank-2 check: != 0)."""
    p = M.require_inside(p)
    eta = M.eta(p)
    F = M.phi(p)
    xi = M.xi(p)
    # two independent directions annihilated by eta, via SVD null space
    _, _, vt = np.linalg.svd(eta.reshape(1, 3))
    b1, b2 = vt[1], vt[2]
    basis = np.column_stack([b1, b2, xi])
    coeff = np.linalg.solve(basis, np.column_stack([F @ b1, F @ b2]))
    return float(np.linalg.det(coeff[:2, :2]))
