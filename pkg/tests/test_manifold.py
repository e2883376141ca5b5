import dataclasses

import numpy as np
import pytest

from contactgeom import manifold as mf
from contactgeom.errors import ChartDomainError, ValidationError


class TestBuiltins:
    def test_n3_metric_matrix_at_example_point(self, n3p):
        got = n3p.metric(np.array([0.0, 1.0, 0.0]))
        assert np.allclose(got, [[5, 0, 2], [0, 1, 0], [2, 0, 1]], atol=1e-14)

    def test_q3_metric_matrix_at_example_point(self, q3p):
        got = q3p.metric(np.array([2.0, 0.0, 0.0]))
        assert np.allclose(got, [[4, 0, 0], [0, 20, -4], [0, -4, 1]], atol=1e-14)

    def test_q3_chart_domain(self, q3m):
        assert q3m.chart_domain(np.array([0.5, 1.0, 1.0]))
        assert not q3m.chart_domain(np.array([-1.0, 0.0, 0.0]))

    def test_unknown_name(self):
        with pytest.raises(ValidationError):
            mf.builtin_manifold("m5", 1)

    def test_bad_epsilon(self):
        with pytest.raises(ValidationError):
            mf.builtin_manifold("n3", 2)

    def test_require_inside_raises_off_chart(self, q3p):
        with pytest.raises(ChartDomainError):
            q3p.require_inside(np.array([-1.0, 0.0, 0.0]))

    @pytest.mark.parametrize("name,eps", [("n3", 1), ("n3", -1), ("q3", 1), ("q3", -1)])
    def test_exact_partials_match_finite_differences(self, name, eps):
        M = mf.builtin_manifold(name, eps)
        rng = np.random.default_rng(5)
        for _ in range(10):
            p = np.array([rng.uniform(a, b) for a, b in M.probe_box])
            h = 1e-6
            for l in range(3):
                dp = np.zeros(3)
                dp[l] = h
                fd_g = (M.metric(p + dp) - M.metric(p - dp)) / (2 * h)
                assert np.allclose(M.metric_partials(p)[l], fd_g, atol=5e-8)
                fd_phi = (M.phi(p + dp) - M.phi(p - dp)) / (2 * h)
                assert np.allclose(M.phi_partials(p)[l], fd_phi, atol=5e-8)
                fd_eta = (M.eta(p + dp) - M.eta(p - dp)) / (2 * h)
                assert np.allclose(M.eta_partials(p)[l], fd_eta, atol=5e-8)


class TestAlmostContact:
    def test_n3_phi_squared_identity_at_example_point(self, n3p):
        p = np.array([0.0, 1.0, 0.0])
        F = n3p.phi(p)
        # phi^2 d1 = 2y d3 - d1 must equal -d1 + eta(d1) xi
        lhs = F @ F @ np.array([1.0, 0.0, 0.0])
        rhs = -np.array([1.0, 0.0, 0.0]) + n3p.eta(p)[0] * n3p.xi(p)
        assert np.allclose(lhs, rhs, atol=1e-15)
        report = mf.check_almost_contact(n3p, [p], tol=1e-12)
        assert report.passed

    @pytest.mark.parametrize("eps", [1, -1])
    def test_q3_axioms_on_random_probes(self, eps):
        M = mf.builtin_manifold("q3", eps)
        probes = mf.probe_points(M, 100, seed=2)
        report = mf.check_almost_contact(M, probes, tol=1e-12)
        assert report.passed, report.residuals
        assert all(v >= 0 for v in report.residuals.values())

    def test_corrupted_phi_fails(self, n3p):
        bad = dataclasses.replace(
            n3p, phi=lambda p, base=n3p.phi: base(p) @ np.diag([1.0, -1.0, 1.0]))
        probes = mf.probe_points(n3p, 10, seed=3)
        report = mf.check_almost_contact(bad, probes, tol=1e-10)
        assert not report.passed
        assert report.residuals["phi_squared"] >= 1.0


class TestCompatibility:
    def test_xi_direction_case(self, n3m):
        p = np.array([0.3, -0.2, 0.1])
        G = n3m.metric(p)
        F = n3m.phi(p)
        xi = n3m.xi(p)
        assert abs(float((F @ xi) @ G @ (F @ xi))) < 1e-15
        assert abs(float(xi @ G @ xi) - n3m.epsilon) < 1e-15

    @pytest.mark.parametrize("eps", [1, -1])
    def test_q3_random_probes(self, eps):
        M = mf.builtin_manifold("q3", eps)
        probes = mf.probe_points(M, 100, seed=4)
        report = mf.check_compatibility(M, probes, tol=1e-12)
        assert report.passed, report.residuals

    def test_n3_basis_pair_at_example_point(self, n3p):
        p = np.array([1.0, 1.0, 0.0])
        G = n3p.metric(p)
        F = n3p.phi(p)
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, 1.0, 0.0])
        lhs = float((F @ e1) @ G @ (F @ e2))
        rhs = float(e1 @ G @ e2) - n3p.epsilon * n3p.eta(p)[0] * n3p.eta(p)[1]
        assert abs(lhs - rhs) < 1e-12


class TestTwoForm:
    def test_vanishes_on_equal_arguments(self, q3p):
        p = np.array([1.2, 0.1, -0.4])
        X = mf.TangentVector([0.3, -1.0, 0.7], p)
        assert abs(mf.fundamental_two_form(q3p, p, X, X)) < 1e-15

    def test_example_value_n3_origin(self, n3p):
        p = np.zeros(3)
        d1 = mf.TangentVector([1, 0, 0], p)
        d2 = mf.TangentVector([0, 1, 0], p)
        assert abs(mf.fundamental_two_form(n3p, p, d1, d2) - (-1.0)) < 1e-15

    def test_antisymmetry_at_random_probes(self, n3m):
        probes = mf.probe_points(n3m, 20, seed=9)
        rng = np.random.default_rng(1)
        for p in probes:
            X = mf.TangentVector(rng.normal(size=3), p)
            Y = mf.TangentVector(rng.normal(size=3), p)
            a = mf.fundamental_two_form(n3m, p, X, Y)
            b = mf.fundamental_two_form(n3m, p, Y, X)
            assert abs(a + b) < 1e-12 * max(1.0, abs(a))

    def test_base_point_mismatch(self, n3p):
        p = np.zeros(3)
        X = mf.TangentVector([1, 0, 0], p)
        Y = mf.TangentVector([0, 1, 0], np.array([1.0, 0, 0]))
        with pytest.raises(ValidationError):
            mf.fundamental_two_form(n3p, p, X, Y)


class TestCausal:
    def test_xi_spacelike_for_positive_epsilon(self, n3p, q3p):
        for M in (n3p, q3p):
            p = M.require_inside(np.array([0.7, 0.2, 0.4]))
            assert mf.causal_character(M, p, mf.TangentVector(M.xi(p), p)) == "spacelike"

    def test_xi_timelike_for_negative_epsilon(self, n3m, q3m):
        for M in (n3m, q3m):
            p = M.require_inside(np.array([0.7, 0.2, 0.4]))
            assert mf.causal_character(M, p, mf.TangentVector(M.xi(p), p)) == "timelike"

    def test_null_direction_in_q3_minus(self, q3m):
        p = np.array([1.0, 0.0, 0.0])
        X = mf.TangentVector([1.0, 0.0, 1.0], p)
        assert mf.causal_character(q3m, p, X) == "null"

    def test_zero_vector_rejected(self, q3p):
        p = np.array([1.0, 0.0, 0.0])
        with pytest.raises(ValidationError):
            mf.causal_character(q3p, p, mf.TangentVector([0.0, 0.0, 0.0], p))


class TestSignatureAndRank:
    @pytest.mark.parametrize("name,eps", [("n3", 1), ("n3", -1), ("q3", 1), ("q3", -1)])
    def test_signature(self, name, eps):
        M = mf.builtin_manifold(name, eps)
        probes = mf.probe_points(M, 50, seed=6)
        assert mf.metric_signature_ok(M, probes)

    @pytest.mark.parametrize("name,eps", [("n3", 1), ("n3", -1), ("q3", 1), ("q3", -1)])
    def test_phi_rank_two(self, name, eps):
        M = mf.builtin_manifold(name, eps)
        probes = mf.probe_points(M, 50, seed=8)
        for p in probes:
            assert abs(mf.phi_kernel_determinant(M, p)) > 1e-10


class TestProbes:
    def test_deterministic_for_fixed_seed(self, q3p):
        a = mf.probe_points(q3p, 30, seed=42)
        b = mf.probe_points(q3p, 30, seed=42)
        assert np.array_equal(a, b)
        assert all(q3p.chart_domain(p) for p in a)

    def test_box_domain_mismatch(self, q3p):
        with pytest.raises(ValidationError):
            mf.probe_points(q3p, 5, seed=1, box=((-2.0, -1.0), (0, 1), (0, 1)))


class TestExpressionStructures:
    def _n3_expr(self, eps):
        e = str(eps)
        return mf.structure_from_expressions(
            name="n3expr", epsilon=eps,
            metric_rows=[
                [f"4*({e})*y^2 + exp(2*z)", "0", f"2*({e})*y"],
                ["0", "exp(2*z)", "0"],
                [f"2*({e})*y", "0", e],
            ],
            phi_rows=[["0", "-1", "0"], ["1", "0", "0"], ["0", "2*y", "0"]],
            eta_entries=["2*y", "0", "1"],
            xi_entries=["0", "0", "1"],
        )

    @pytest.mark.parametrize("eps", [1, -1])
    def test_matches_builtin(self, eps):
        E = self._n3_expr(eps)
        B = mf.builtin_manifold("n3", eps)
        rng = np.random.default_rng(0)
        for _ in range(10):
            p = rng.uniform(-1.2, 1.2, size=3)
            assert np.allclose(E.metric(p), B.metric(p), atol=1e-13)
            assert np.allclose(E.phi(p), B.phi(p), atol=1e-13)
            assert np.allclose(E.metric_partials(p), B.metric_partials(p), atol=1e-12)
            assert np.allclose(E.phi_partials(p), B.phi_partials(p), atol=1e-13)
            assert np.allclose(E.eta_partials(p), B.eta_partials(p), atol=1e-13)

    def test_non_symmetric_metric_rejected(self):
        M = mf.structure_from_expressions(
            name="bad", epsilon=1,
            metric_rows=[["1", "0.5", "0"], ["0", "1", "0"], ["0", "0", "1"]],
            phi_rows=[["0", "-1", "0"], ["1", "0", "0"], ["0", "0", "0"]],
            eta_entries=["0", "0", "1"],
            xi_entries=["0", "0", "1"],
        )
        with pytest.raises(ValidationError, match="symmetric"):
            M.metric(np.zeros(3))

    def test_domain_expression(self):
        M = mf.structure_from_expressions(
            name="halfspace", epsilon=1,
            metric_rows=[["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
            phi_rows=[["0", "-1", "0"], ["1", "0", "0"], ["0", "0", "0"]],
            eta_entries=["0", "0", "1"],
            xi_entries=["0", "0", "1"],
            domain="x",
        )
        assert M.chart_domain(np.array([0.5, 0, 0]))
        assert not M.chart_domain(np.array([-0.5, 0, 0]))


def test_tangent_vector_rejects_non_finite():
    with pytest.raises(ValidationError):
        mf.TangentVector([np.inf, 0.0, 0.0], np.zeros(3))
