import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liegroupoid import exprdsl
from liegroupoid.errors import DomainError, ParseError, UnboundVariableError
from liegroupoid.exprdsl import BinOp, Call, Neg, Num, Pow, Var, VariableEnv, evaluate, parse, to_source
from liegroupoid.jets import JetSpec, extract_partial, lift_variable, seed_vector


def test_simple_sum():
    env = VariableEnv.for_chart(1, 1, with_w=True)
    assert parse("v1 + w1", env) == BinOp("+", Var("v1"), Var("w1"))


def test_product_binds_tighter():
    e = parse("v3 + w3 + v1*w2", VariableEnv.for_chart(0, 3, with_w=True))
    assert e == BinOp("+", BinOp("+", Var("v3"), Var("w3")), BinOp("*", Var("v1"), Var("w2")))


def test_unknown_identifier_offset():
    src = "exp(v1)*u1 + q"
    with pytest.raises(ParseError) as info:
        parse(src, VariableEnv.for_chart(1, 1))
    assert info.value.offset == src.index("q")
    assert "q" in str(info.value)


@pytest.mark.parametrize(
    "src,offset",
    [
        ("v1 +", 4),
        ("(v1", 3),
        ("v1 ^ 1.5", 5),
        ("v1 ^ w1", 5),
        ("exp", 0),
        ("exp()", 0),
        ("sin(v1, w1)", 0),
        ("tanh(v1)", 0),
        ("v1 $ w1", 3),
        ("", 0),
        ("v1 w1", 3),
    ],
)
def test_error_offsets(src, offset):
    with pytest.raises(ParseError) as info:
        parse(src, VariableEnv.for_chart(0, 1, with_w=True))
    assert info.value.offset == offset


def test_precedence_and_unary():
    assert parse("-x^2") == Neg(Pow(Var("x"), 2))
    assert parse("a - b - c") == BinOp("-", BinOp("-", Var("a"), Var("b")), Var("c"))
    assert parse("a / b * c") == BinOp("*", BinOp("/", Var("a"), Var("b")), Var("c"))
    assert parse("2^3^2") == Pow(Pow(Num(2.0), 3), 2)
    assert parse("sqrt(1 - v1^2)") == Call("sqrt", BinOp("-", Num(1.0), Pow(Var("v1"), 2)))


def test_evaluate_plain():
    assert evaluate(parse("v1*w2"), {"v1": 2.0, "w2": 5.0}) == 10.0
    assert evaluate(parse("-x^2 + 1e-1"), {"x": 3.0}) == pytest.approx(-8.9)
    assert evaluate(parse("2^3^2"), {}) == 64.0


def test_evaluate_jets():
    spec = JetSpec(2, 2)
    b = {"v1": lift_variable(spec, 0.3, 0), "w2": lift_variable(spec, -0.4, 1)}
    assert extract_partial(evaluate(parse("v1*w2"), b), (1, 1)) == 1.0
    spec1 = JetSpec(1, 2)
    r = evaluate(parse("sqrt(1 - v1^2)"), {"v1": lift_variable(spec1, 0.0, 0)})
    assert extract_partial(r, (0,)) == 1.0
    assert extract_partial(r, (1,)) == 0.0


def test_evaluation_errors():
    with pytest.raises(UnboundVariableError):
        evaluate(parse("x + y"), {"x": 1.0})
    with pytest.raises(DomainError):
        evaluate(parse("1 / (x - 1)"), {"x": 1.0})
    with pytest.raises(DomainError):
        evaluate(parse("log(x)"), {"x": -1.0})


def test_variables():
    assert exprdsl.variables(parse("exp(v1)*u1 + v2 - v1")) == {"u1", "v1", "v2"}


def test_env_rejects_function_names():
    with pytest.raises(ValueError):
        VariableEnv(("x", "exp"))


def test_plain_and_jet_values_agree():
    src = "exp(v1)*u1 + v2 / (2 + cos(u1)) - sqrt(1 + v1^2)*sin(v2)"
    point = {"u1": 0.3, "v1": -0.2, "v2": 0.7}
    spec = JetSpec(3, 3)
    jet_point = dict(zip(point, seed_vector(spec, list(point.values()), 0)))
    e = parse(src)
    assert evaluate(e, jet_point).value == evaluate(e, point)


# printer round trip -----------------------------------------------------------

names = st.sampled_from(["u1", "v1", "w2", "x"])
leaves = st.one_of(
    names.map(Var),
    st.floats(min_value=0.0, max_value=1e6, allow_nan=False).map(Num),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(children, st.integers(0, 4)).map(lambda t: Pow(*t)),
        st.tuples(st.sampled_from(sorted(exprdsl.FUNCTIONS)), children).map(lambda t: Call(*t)),
    )


exprs = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_print_parse_fixpoint(e):
    src = to_source(e)
    assert parse(src) == e
    assert to_source(parse(src)) == src


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_printed_source_evaluates_identically(e):
    point = {"u1": 0.3, "v1": 0.5, "w2": 1.25, "x": 2.0}
    try:
        a = evaluate(e, point)
    except (DomainError, OverflowError, ZeroDivisionError):
        return
    b = evaluate(parse(to_source(e)), point)
    assert a == b or (math.isnan(a) and math.isnan(b))
