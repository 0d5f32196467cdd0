"""Expression parser used by the config-file interface."""

import pickle

import numpy as np
import pytest

from dirac1d import Expression, ExpressionError


class TestParsing:
    @pytest.mark.parametrize("text,value", [
        ("1+2*3", 7.0),
        ("(1+2)*3", 9.0),
        ("2^3^2", 512.0),          # right-associative power
        ("2**3", 8.0),             # ** accepted as alias
        ("-2^2", -4.0),            # unary minus binds looser than power
        ("2^-2", 0.25),
        ("6/4/2", 0.75),           # left-associative division
        ("1e2 + 5E-1", 100.5),
        (".5*4", 2.0),
        ("pi", np.pi),
        ("+3", 3.0),
    ])
    def test_constant_expressions(self, text, value):
        assert Expression(text)(0.0, 0.0) == pytest.approx(value, rel=1e-15)

    def test_variables_vectorize_over_x(self):
        e = Expression("sin(2*x) + t*cos(x)")
        x = np.linspace(0, 2 * np.pi, 33)
        np.testing.assert_allclose(e(0.5, x), np.sin(2 * x) + 0.5 * np.cos(x), atol=1e-15)

    def test_benchmark_potential_expression(self):
        e = Expression("1/(1+sin(x)^2)")
        x = np.linspace(0, 2 * np.pi, 17)
        np.testing.assert_allclose(e(0.0, x), 1 / (1 + np.sin(x) ** 2), atol=1e-15)

    def test_nested_functions(self):
        e = Expression("exp(-(x-1)^2/2)*cos(sin(x))")
        x = np.array([0.0, 1.0, 2.5])
        np.testing.assert_allclose(e(0.0, x), np.exp(-(x - 1) ** 2 / 2) * np.cos(np.sin(x)),
                                   atol=1e-15)

    @pytest.mark.parametrize("bad", [
        "1 +", "sin x", "foo(3)", "y + 1", "(1+2", "1..2", "2 3", "sin(1,2)", "",
    ])
    def test_malformed_rejected(self, bad):
        with pytest.raises(ExpressionError):
            Expression(bad)

    def test_division_by_zero_at_eval(self):
        e = Expression("1/(x-1)")
        with pytest.raises(ExpressionError):
            e(0.0, np.array([0.0, 1.0]))

    def test_pickle_roundtrip(self):
        e = Expression("cos(x)+sin(2*x)")
        e2 = pickle.loads(pickle.dumps(e))
        x = np.linspace(0, 1, 5)
        np.testing.assert_array_equal(e(0.0, x), e2(0.0, x))
