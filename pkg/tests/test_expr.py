import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactgeom import expr as ex
from contactgeom.errors import ExprEvalError, ExprSyntaxError

from exprgen import five_point_derivative, sample_cases


def ev(text, **bind):
    return ex.parse(text).eval(**bind)


class TestParseEval:
    def test_exp_of_2z(self):
        assert ev("exp(2*z)", z=0.0) == 1.0

    def test_power_times_parenthesized(self):
        assert ev("x^2*(1+0)", x=3.0) == 9.0

    def test_double_star_rejected(self):
        with pytest.raises(ExprSyntaxError):
            ex.parse("2**x")

    def test_ln_at_e(self):
        assert abs(ev("ln(s)", s=math.e) - 1.0) < 1e-15

    def test_sqrt_of_negative_is_domain_error(self):
        with pytest.raises(ExprEvalError):
            ev("sqrt(-1)")

    def test_mul_by_zero_folds_cleanly(self):
        assert ev("2*y*0 + 1", y=7.0) == 1.0

    def test_unbound_variable(self):
        with pytest.raises(ExprEvalError, match="unbound"):
            ev("x + y", x=1.0)

    def test_unknown_identifier_with_position(self):
        with pytest.raises(ExprSyntaxError, match="unknown identifier"):
            ex.parse("2*t")

    def test_syntax_error_carries_position(self):
        try:
            ex.parse("1 + * 2")
        except ExprSyntaxError as err:
            assert err.position == 4
        else:
            pytest.fail("expected a syntax error")

    def test_precedence_unary_minus_vs_power(self):
        # ^ binds tighter than unary minus
        assert ev("-x^2", x=2.0) == -4.0

    def test_power_right_associative(self):
        assert ev("2^3^2", ) == 512.0

    def test_negative_exponent(self):
        assert ev("2^-1") == 0.5

    def test_division_by_zero(self):
        with pytest.raises(ExprEvalError, match="division"):
            ev("1/(s-1)", s=1.0)

    def test_non_integer_power_needs_positive_base(self):
        with pytest.raises(ExprEvalError):
            ev("(-2)^0.5")
        assert abs(ev("4^0.5") - 2.0) < 1e-15

    def test_integer_power_of_negative_base(self):
        assert ev("(-2)^3") == -8.0

    def test_whitespace_insensitive(self):
        assert ev("  1 +   2* s ", s=3.0) == 7.0

    def test_ln_nonpositive(self):
        with pytest.raises(ExprEvalError, match="ln"):
            ev("ln(x)", x=0.0)

    def test_scientific_literals(self):
        assert ev("1e-3 + 2.5E2") == pytest.approx(250.001)

    def test_empty_expression(self):
        with pytest.raises(ExprSyntaxError):
            ex.parse("   ")

    def test_vectorized_eval(self):
        arr = np.array([0.0, 1.0, 2.0])
        out = ex.parse("s^2 + 1").eval(s=arr)
        assert np.allclose(out, [1.0, 2.0, 5.0])


class TestDifferentiate:
    def test_neg_ln_derivative_value(self):
        d = ex.differentiate(ex.parse("-ln(s)"), "s")
        assert abs(d.eval(s=2.0) - (-0.5)) < 1e-14
        fd = five_point_derivative(ex.parse("-ln(s)"), 2.0, 1e-4)
        assert abs(d.eval(s=2.0) - fd) < 1e-9

    def test_sin_twice_is_minus_sin(self):
        dd = ex.differentiate(ex.differentiate(ex.parse("sin(s)"), "s"), "s")
        for s in (0.3, 1.1, 2.0):
            assert abs(dd.eval(s=s) + math.sin(s)) < 1e-14

    def test_abs_derivative_away_from_zero(self):
        d = ex.differentiate(ex.parse("abs(s)"), "s")
        assert d.eval(s=2.0) == 1.0
        assert d.eval(s=-2.0) == -1.0

    def test_abs_derivative_errors_at_zero(self):
        d = ex.differentiate(ex.parse("abs(s)"), "s")
        with pytest.raises(ExprEvalError):
            d.eval(s=0.0)

    def test_unknown_variable_rejected(self):
        with pytest.raises(ValueError):
            ex.differentiate(ex.parse("s"), "t")

    def test_general_power_rule(self):
        # d/ds s^s = s^s (ln s + 1)
        d = ex.differentiate(ex.parse("s^s"), "s")
        s = 1.7
        expected = s ** s * (math.log(s) + 1.0)
        assert abs(d.eval(s=s) - expected) < 1e-12

    def test_seeded_sweep_against_five_point_stencil(self):
        for ast, s, h in sample_cases(200, seed=11):
            sym = ex.differentiate(ast, "s").eval(s=s)
            fd = five_point_derivative(ast, s, h)
            assert abs(sym - fd) / max(1.0, abs(sym)) < 1e-7, str(ast)


class TestRoundTrip:
    def test_print_parse_identity_on_sweep(self):
        for ast, s, _ in sample_cases(150, seed=23):
            again = ex.parse(str(ast))
            assert abs(again.eval(s=s) - ast.eval(s=s)) <= 1e-12 * max(
                1.0, abs(ast.eval(s=s)))

    def test_derivative_ast_reparses(self):
        for ast, s, _ in sample_cases(60, seed=31):
            d = ex.differentiate(ast, "s")
            assert abs(ex.parse(str(d)).eval(s=s) - d.eval(s=s)) < 1e-12 * max(
                1.0, abs(d.eval(s=s)))


class TestLinearity:
    @given(a=st.floats(-3, 3, allow_nan=False), b=st.floats(-3, 3, allow_nan=False),
           s=st.floats(0.2, 1.8, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_derivative_is_linear(self, a, b, s):
        f = ex.parse("sin(s) + s^2")
        g = ex.parse("exp(s/2) - s")
        combo = ex.Bin("+", ex.Bin("*", ex.Num(a), f), ex.Bin("*", ex.Num(b), g))
        left = ex.differentiate(combo, "s").eval(s=s)
        right = (a * ex.differentiate(f, "s").eval(s=s)
                 + b * ex.differentiate(g, "s").eval(s=s))
        assert abs(left - right) < 1e-12 * max(1.0, abs(left))
