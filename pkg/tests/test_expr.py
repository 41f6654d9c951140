import numpy as np
import pytest
from hypothesis import given, settings

from parahyper import expr as ex
from parahyper.errors import ArityError, DomainError, ExpressionSyntaxError, UnknownIdentifierError

from exprgen import random_text, texts
from oracles import fd_jet


def test_precedence_tree():
    e = ex.parse("x*y + sin(z)")
    assert e == ex.Add(ex.Mul(ex.Var("x"), ex.Var("y")), ex.Call("sin", ex.Var("z")))


@pytest.mark.parametrize(
    "text, tree",
    [
        ("x-y-z", ex.Sub(ex.Sub(ex.Var("x"), ex.Var("y")), ex.Var("z"))),
        ("x/y/z", ex.Div(ex.Div(ex.Var("x"), ex.Var("y")), ex.Var("z"))),
        ("-x^2", ex.Neg(ex.Pow(ex.Var("x"), 2))),
        ("  x *\ty ", ex.Mul(ex.Var("x"), ex.Var("y"))),
    ],
)
def test_associativity_and_whitespace(text, tree):
    assert ex.parse(text) == tree


def test_power_is_right_associative():
    # 2^3^2 = 2^9
    assert ex.eval_jet2(ex.parse("x^3^2"), [2, 0, 0, 0]).value == pytest.approx(512.0)


def test_open_paren_offset():
    with pytest.raises(ExpressionSyntaxError) as err:
        ex.parse("(")
    assert err.value.offset == 0


@pytest.mark.parametrize("text, offset", [("x + * y", 4), ("sin(x", 3), ("x $ y", 2)])
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ExpressionSyntaxError) as err:
        ex.parse(text)
    assert err.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as err:
        ex.parse("x^2*K")
    assert err.value.name == "K"
    assert err.value.offset == 4


def test_arity():
    with pytest.raises(ArityError):
        ex.parse("sin(x, y)")


def test_complex_chart_variables():
    with pytest.raises(UnknownIdentifierError):
        ex.parse("x1 + z")
    e = ex.lower(ex.parse("z1*z2", ex.COMPLEX_CHART))
    j = ex.eval_jet2(e, [1, 2, 3, 4], ex.COMPLEX_CHART)
    assert j.value == pytest.approx((1 + 2j) * (3 + 4j))
    assert j.gradient[1] == pytest.approx(1j * (3 + 4j))


def test_square_jet():
    j = ex.eval_jet2(ex.parse("x^2"), [3, 0, 0, 0])
    assert j.value == 9
    assert j.gradient[0] == 6
    assert j.hessian[0, 0] == 2


def test_sin_z_times_t():
    j = ex.eval_jet2(ex.parse("sin(z)*t"), [0, 0, 0, 2])
    assert j.value == 0
    assert j.gradient[2] == pytest.approx(2.0, abs=1e-15)
    assert j.hessian[2, 3] == pytest.approx(1.0, abs=1e-15)
    _, g, h = fd_jet(ex.parse("sin(z)*t"), [0, 0, 0, 2])
    assert np.allclose(g, j.gradient, atol=1e-8)
    assert np.allclose(h, j.hessian, atol=1e-8)


@pytest.mark.parametrize("text, p", [("ln(y)", [0, 0, 0, 0]), ("sqrt(x)", [-1, 0, 0, 0]), ("1/(x-1)", [1, 0, 0, 0])])
def test_domain_errors(text, p):
    with pytest.raises(DomainError) as err:
        ex.eval_jet2(ex.parse(text), p)
    assert err.value.subexpression


def test_hessian_symmetric_exactly():
    rng = np.random.default_rng(3)
    for _ in range(20):
        e = ex.parse(random_text(rng, 5))
        h = ex.eval_jet2(e, rng.uniform(-1, 1, 4)).hessian
        assert np.array_equal(h, h.T)


@given(texts)
@settings(max_examples=300, deadline=None)
def test_print_parse_fixed_point(text):
    e = ex.parse(text)
    printed = ex.to_text(e)
    again = ex.parse(printed)
    assert again == e
    assert ex.to_text(again) == printed


def test_ad_matches_finite_differences():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(500):
        e = ex.parse(random_text(rng, 6))
        p = rng.uniform(-1, 1, 4)
        j = ex.eval_jet2(e, p)
        v, g, h = fd_jet(e, p)
        assert j.value == pytest.approx(v, rel=1e-12, abs=1e-12)
        scale_g = max(1.0, np.max(np.abs(j.gradient)))
        scale_h = max(1.0, np.max(np.abs(j.hessian)))
        err = max(np.max(np.abs(g - j.gradient)) / scale_g, np.max(np.abs(h - j.hessian)) / scale_h)
        worst = max(worst, err)
    assert worst < 1e-6


def test_symbolic_diff_agrees_with_jets():
    rng = np.random.default_rng(8)
    for _ in range(50):
        e = ex.parse(random_text(rng, 4))
        p = rng.uniform(-1, 1, (3, 4))
        jets = ex.eval_batch(e, p)
        for k, v in enumerate(ex.REAL_CHART):
            dk = ex.eval_batch(ex.lower(ex.diff(e, v)), p)
            assert np.allclose(dk.val, jets.grad[:, k], rtol=1e-12, atol=1e-12)
            assert np.allclose(dk.grad, jets.hess[:, k, :], rtol=1e-11, atol=1e-11)


def test_free_variables():
    assert ex.free_variables(ex.parse("sin(z)*t + 3")) == {"z", "t"}
    assert ex.free_variables(ex.parse("pi")) == set()
