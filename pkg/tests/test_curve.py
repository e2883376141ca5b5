import numpy as np
import pytest

from contactgeom import curve as cv
from contactgeom import legendre as lg
from contactgeom.errors import HypothesisError, ValidationError


class TestSample:
    def test_upsilon1_sample(self, n3p, upsilon1):
        cs = cv.sample(n3p, upsilon1, 0.7)
        assert np.allclose(cs.velocity, [0, 1, 0])
        assert abs(cs.m) < 1e-15
        assert abs(cs.speed2 - 1.0) < 1e-15

    def test_upsilon2_sample_at_one(self, n3p, upsilon2):
        cs = cv.sample(n3p, upsilon2, 1.0)
        assert np.allclose(cs.velocity, [-1.0, 0.0, 1.0])
        assert abs(cs.m) < 1e-15

    def test_upsilon2_domain_error(self, n3p, upsilon2):
        with pytest.raises(ValidationError):
            cv.sample(n3p, upsilon2, -0.5)

    def test_off_chart_position(self, q3p):
        c = cv.ExpressionCurve(["s", "0", "0"], domain=(-5, 5))
        with pytest.raises(Exception):
            cv.sample(q3p, c, -1.0)  # x = -1 leaves the chart


class TestLegendreCheck:
    def test_upsilon1(self, n3p, upsilon1):
        rep = cv.is_legendre(n3p, upsilon1, cv.uniform_grid(-2, 2, 101), tol=1e-10)
        assert rep.is_legendre
        assert rep.extra_residuals["legendre_condition"] < 1e-12
        assert rep.extra_residuals["unit_speed_condition"] < 1e-12

    def test_upsilon2(self, n3m, upsilon2):
        rep = cv.is_legendre(n3m, upsilon2, cv.uniform_grid(0.5, 5, 101), tol=1e-10)
        assert rep.is_legendre
        assert rep.extra_residuals["legendre_condition"] < 1e-12
        assert rep.extra_residuals["unit_speed_condition"] < 1e-12

    def test_straight_line_in_q3_legendre_but_not_unit(self, q3p):
        line = cv.ExpressionCurve(["s", "0", "0"], domain=(0.1, 10), label="ray")
        grid = cv.uniform_grid(1.5, 2.5, 21)
        rep = cv.is_legendre(q3p, line, grid, tol=1e-10)
        assert rep.is_legendre  # eta(v') = -2x*0 + 0 = 0
        assert rep.extra_residuals["unit_speed_condition"] > 0.1
        ok, _ = cv.is_unit_speed(q3p, line, grid)
        assert not ok

    def test_empty_grid(self, n3p, upsilon1):
        with pytest.raises(ValidationError):
            cv.is_legendre(n3p, upsilon1, [], tol=1e-8)


class TestUnitSpeed:
    def test_upsilon1(self, n3p, upsilon1):
        ok, dev = cv.is_unit_speed(n3p, upsilon1, cv.uniform_grid(-2, 2, 51))
        assert ok and dev < 1e-14

    def test_x_line_at_zero_height(self, n3p):
        c = cv.ExpressionCurve(["s", "0", "0"], domain=(-5, 5))
        ok, _ = cv.is_unit_speed(n3p, c, cv.uniform_grid(-1, 1, 11))
        assert ok

    def test_x_line_shifted_in_z_fails(self, n3p):
        c = cv.ExpressionCurve(["s", "0", "1"], domain=(-5, 5))
        ok, dev = cv.is_unit_speed(n3p, c, cv.uniform_grid(-1, 1, 11))
        assert not ok
        assert abs(dev - (np.exp(2.0) - 1.0)) < 1e-12


class TestReparametrize:
    def test_identity_on_unit_speed(self, n3p, upsilon1):
        uni = cv.reparametrize_arclength(n3p, upsilon1, 0.0, cv.uniform_grid(-2, 2, 101))
        for t in (-1.0, 0.3, 1.4):
            assert np.allclose(uni.point(t), upsilon1.point(t), atol=1e-8)

    def test_double_speed_line(self, n3p):
        base = cv.ExpressionCurve(["2*s", "0", "0"], domain=(-5, 5))
        uni = cv.reparametrize_arclength(n3p, base, 0.0, cv.uniform_grid(-1, 1, 101))
        ok, dev = cv.is_unit_speed(n3p, uni, cv.uniform_grid(-1.5, 1.5, 21))
        assert ok and dev < 1e-8
        assert np.allclose(uni.point(1.2), [1.2, 0.0, 0.0], atol=1e-9)

    def test_null_curve_rejected(self, q3m, null_curve):
        with pytest.raises(HypothesisError):
            cv.reparametrize_arclength(q3m, null_curve, 0.0, cv.uniform_grid(-0.5, 1.0, 51))

    def test_derivatives_against_stencils(self, n3p, generic_unit_curve):
        uni = generic_unit_curve
        h = 1e-4
        for t in (0.5, 2.0, 4.0):
            fd1 = (uni.point(t + h) - uni.point(t - h)) / (2 * h)
            assert np.abs(uni.derivative(t, 1) - fd1).max() < 1e-6
            fd2 = (uni.point(t + h) - 2 * uni.point(t) + uni.point(t - h)) / h ** 2
            assert np.abs(uni.derivative(t, 2) - fd2).max() < 1e-5


class TestExpressionCurveDerivatives:
    def test_against_central_differences(self):
        c = cv.ExpressionCurve(["sin(2*s)", "exp(-s)", "s^3/3"], domain=(-3, 3))
        h = 1e-4
        for s in (-1.0, 0.2, 1.3):
            for order in (1, 2, 3):
                lo = c.derivative(s - h, order - 1) if order > 1 else c.point(s - h)
                hi = c.derivative(s + h, order - 1) if order > 1 else c.point(s + h)
                fd = (hi - lo) / (2 * h)
                rel = np.abs(c.derivative(s, order) - fd).max()
                assert rel < 1e-6


class TestSampledCurve:
    def _make(self, n=501):
        s = np.linspace(0.0, 2.0, n)
        pts = np.column_stack([np.sin(s), np.cos(s), s ** 2])
        return s, cv.SampledCurve(s, pts, label="sine")

    def test_stencil_derivatives(self):
        s, c = self._make()
        g = c.grid()
        for sv in (g[0], g[len(g) // 2], g[-1]):
            assert np.abs(c.derivative(sv, 1)
                          - [np.cos(sv), -np.sin(sv), 2 * sv]).max() < 1e-8
            assert np.abs(c.derivative(sv, 2)
                          - [-np.sin(sv), -np.cos(sv), 2.0]).max() < 1e-6
            assert np.abs(c.derivative(sv, 3)
                          - [-np.cos(sv), np.sin(sv), 0.0]).max() < 1e-3

    def test_requires_uniform_spacing(self):
        s = np.array([0.0, 0.1, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7])
        with pytest.raises(ValidationError, match="uniform"):
            cv.SampledCurve(s, np.zeros((8, 3)))

    def test_requires_enough_samples(self):
        s = np.linspace(0, 1, 5)
        with pytest.raises(ValidationError):
            cv.SampledCurve(s, np.zeros((5, 3)))

    def test_csv_roundtrip(self, tmp_path):
        s, c = self._make(101)
        path = tmp_path / "curve.csv"
        cv.curve_to_csv(c, c.grid(), path)
        back = cv.curve_from_csv(path)
        g = back.grid()
        assert np.allclose([back.point(v) for v in g[:5]],
                           [c.point(v) for v in c.grid()[2:7]], atol=1e-9)

    def test_csv_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValidationError, match="header"):
            cv.curve_from_csv(path)

    def test_csv_extra_columns_ignored(self, tmp_path):
        path = tmp_path / "extra.csv"
        rows = ["s,x,y,z,kappa"]
        for s in np.linspace(0, 1, 11):
            rows.append(f"{s},{s},0,0,9")
        path.write_text("\n".join(rows) + "\n")
        c = cv.curve_from_csv(path)
        assert np.allclose(c.point(c.grid()[0]), [c.grid()[0], 0, 0])


class TestGeodesic:
    def test_xi_flow_is_geodesic_in_q3(self, q3p):
        geo = cv.geodesic(q3p, [1.5, 0.0, 0.0], [0.0, 0.0, 1.0], (-1.0, 1.0))
        # xi-flow: position moves linearly in z
        assert np.allclose(geo.point(0.8), [1.5, 0.0, 0.8], atol=1e-10)

    def test_preserves_speed(self, q3m):
        geo = cv.geodesic(q3m, [1.0, 0.0, 0.0], [1.0, 0.0, 1.0], (-0.4, 0.8))
        for s in (-0.3, 0.0, 0.5):
            assert abs(cv.sample(q3m, geo, s).speed2) < 1e-10

    def test_sampled_export_is_truly_geodesic(self, q3m):
        # independent check: stencil acceleration of the sampled trace
        from contactgeom.frenet import nabla_TT
        geo = cv.geodesic(q3m, [1.0, 0.0, 0.0], [1.0, 0.0, 1.0], (-0.4, 0.8),
                          max_step=0.002)
        s = np.linspace(-0.3, 0.7, 1001)
        samp = cv.SampledCurve(s, np.array([geo.point(v) for v in s]))
        for sv in samp.grid()[::50]:
            assert np.linalg.norm(nabla_TT(q3m, samp, sv)) < 1e-8


def test_uniform_grid_insets_endpoints():
    g = cv.uniform_grid(0.0, 1.0, 11)
    assert g[0] > 0.0 and g[-1] < 1.0
    assert len(g) == 11


def test_upsilon2_xz_antidiagonal(n3p, upsilon2):
    # x + z = -ln s + ln s = 0 along the whole trace
    for s in np.linspace(0.5, 5, 17):
        p = upsilon2.point(s)
        assert abs(p[0] + p[2]) < 1e-12
