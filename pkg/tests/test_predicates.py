import pytest
from hypothesis import given
from hypothesis import strategies as st

from scenguard.errors import ArityError, ParseError
from scenguard.predicates import TRUE, Predicate


@pytest.mark.parametrize(
    "text",
    ["v0 > 0 ∧ v1 < v0", "v0 > 0 && v1 < v0", "v0 > 0 and v1 < v0", "(v0 > 0) and (v1 < v0)"],
)
def test_spellings_share_canonical_form(text):
    assert Predicate.parse(text) == Predicate.parse("v0 > 0 and v1 < v0")


def test_rule_condition_and_complement():
    p = Predicate.parse("v0 > 0 and v1 < v0")
    q = Predicate.parse("v0 <= 0 or v1 >= v0")
    for x in [(1, 0), (0, 1), (2, 1), (-1, -2), (3, 3)]:
        assert p(x) != q(x)
    assert p((1, 0)) and not p((0, 1))


def test_unicode_comparisons():
    assert Predicate.parse("v0 ≤ 1 ∨ ¬(v1 ≥ 2)")((1, 5))
    assert Predicate.parse("v0 ≠ 1")((2,))


def test_output_names():
    q = Predicate.parse("y2 > 10")
    assert q.variables == {"y2"}
    assert q.value_arity == 0
    assert not q.evaluate({"y1": 1.0, "y2": 0.0})
    assert q.evaluate({"y1": 1.0, "y2": 11.0})


def test_booleans_and_not():
    p = Predicate.parse("not v0 or v1 == true")
    assert p((False, False))
    assert p((True, True))
    assert not p((True, False))


def test_value_arity():
    assert Predicate.parse("v3 > 0 or v1 > 0").value_arity == 4
    assert TRUE.value_arity == 0 and TRUE(())


def test_short_tuple_is_arity_error():
    with pytest.raises(ArityError):
        Predicate.parse("v1 > 0")((1.0,))


def test_undefined_name_is_arity_error():
    with pytest.raises(ArityError):
        Predicate.parse("y3 > 0").evaluate({"y1": 0.0})


@pytest.mark.parametrize("bad", ["", "v0 >", "v0 > 0 and", "(v0 > 1", "v0 >> 1", "v0 > 1)", "3 $ 4"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        Predicate.parse(bad)


def test_parse_error_column():
    with pytest.raises(ParseError) as info:
        Predicate.parse("v0 > 0 and $")
    assert info.value.column == 12


def test_precedence_and_binds_tighter():
    p = Predicate.parse("v0 > 0 or v1 > 0 and v2 > 0")
    assert p((1, 0, 0))
    assert not p((0, 1, 0))


cmp_ops = st.sampled_from(["<", "<=", ">", ">=", "==", "!="])
atoms = st.builds(lambda i, op, c: f"v{i} {op} {c}", st.integers(0, 2), cmp_ops, st.integers(-3, 3))
exprs = st.recursive(
    atoms,
    lambda inner: st.one_of(
        st.builds(lambda a, b: f"({a}) and ({b})", inner, inner),
        st.builds(lambda a, b: f"({a}) or ({b})", inner, inner),
        st.builds(lambda a: f"not ({a})", inner),
    ),
    max_leaves=6,
)


def _python_eval(text, vals):
    env = {f"v{i}": v for i, v in enumerate(vals)}
    return eval(text, {}, env)


@given(exprs, st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)))
def test_agrees_with_python_semantics(text, vals):
    # the and/or/not/comparison fragment coincides with Python's
    assert Predicate.parse(text)(tuple(float(v) for v in vals)) == bool(_python_eval(text, vals))


@given(exprs)
def test_canonical_text_is_a_fixpoint(text):
    p = Predicate.parse(text)
    assert Predicate.parse(p.source).source == p.source
    assert Predicate.parse(p.source) == p
