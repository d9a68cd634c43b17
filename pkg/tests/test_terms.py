"""Term algebra: construction, evaluation, s-expression round trips."""

import pytest
from hypothesis import given, strategies as st

from hgsuite.terms import (
    Arith,
    AttrVar,
    BoolConst,
    ConstraintLit,
    EventVal,
    IntConst,
    StrConst,
    SymInput,
    const_eval_lit,
    eval_lit,
    eval_term,
    is_linear,
    lit_from_sexpr,
    lit_terms,
    lit_to_sexpr,
    make_arith,
    sort_of,
    substitute,
    substitute_lit,
    term_from_sexpr,
    term_to_sexpr,
    walk,
)

X = SymInput("x")
Y = SymInput("y")
TEMP = AttrVar("cc" * 16, "temperature", sort="int")


def test_sorts():
    assert sort_of(IntConst(3)) == "int"
    assert sort_of(StrConst("on")) == "str"
    assert sort_of(BoolConst(True)) == "bool"
    assert sort_of(X) == "int"
    assert sort_of(EventVal()) == "str"
    assert sort_of(Arith("+", X, IntConst(1))) == "int"


def test_make_arith_folds_constants():
    assert make_arith("+", IntConst(2), IntConst(3)) == IntConst(5)
    assert make_arith("*", IntConst(4), IntConst(5)) == IntConst(20)
    assert make_arith("-", IntConst(2), IntConst(3)) == IntConst(-1)
    kept = make_arith("+", X, IntConst(3))
    assert isinstance(kept, Arith)
    with pytest.raises(ValueError):
        make_arith("/", X, IntConst(2))


def test_linearity():
    assert is_linear(Arith("*", IntConst(3), X))
    assert is_linear(Arith("+", Arith("*", IntConst(2), X), Y))
    assert not is_linear(Arith("*", X, Y))
    assert not is_linear(Arith("+", IntConst(1), Arith("*", X, X)))


def test_walk_preorder():
    term = Arith("+", Arith("*", IntConst(2), X), Y)
    assert list(walk(term))[0] is term
    assert X in list(walk(term)) and Y in list(walk(term))


def test_negate_involution():
    lit = ConstraintLit("<", X, IntConst(10))
    assert lit.negate() == ConstraintLit(">=", X, IntConst(10))
    assert lit.negate().negate() == lit


def test_eval_term_and_lit():
    env = {X: 4, TEMP: 31}
    assert eval_term(Arith("+", X, IntConst(1)), env) == 5
    assert eval_lit(ConstraintLit(">", TEMP, IntConst(30)), env)
    assert not eval_lit(ConstraintLit("==", X, IntConst(5)), env)
    with pytest.raises(KeyError):
        eval_term(Y, env)
    with pytest.raises(ValueError):
        eval_lit(ConstraintLit("<", StrConst("a"), StrConst("b")), {})


def test_const_eval_lit():
    assert const_eval_lit(ConstraintLit("==", IntConst(1), IntConst(1))) is True
    assert const_eval_lit(ConstraintLit(">", IntConst(1), IntConst(2))) is False
    assert const_eval_lit(ConstraintLit(">", X, IntConst(2))) is None


def test_substitute_folds():
    term = Arith("+", X, IntConst(1))
    assert substitute(term, {X: IntConst(2)}) == IntConst(3)
    lit = ConstraintLit(">", term, Y)
    assert substitute_lit(lit, {X: IntConst(2), Y: IntConst(0)}) == ConstraintLit(
        ">", IntConst(3), IntConst(0)
    )


def test_sexpr_fixed_forms():
    # the wire format is load-bearing; freeze the exact spellings
    assert term_to_sexpr(IntConst(-3)) == "-3"
    assert term_to_sexpr(StrConst("on")) == '"on"'
    assert term_to_sexpr(BoolConst(True)) == "true"
    assert term_to_sexpr(X) == "(var x int)"
    assert term_to_sexpr(AttrVar("ab" * 16, "switch")) == f"(attr {'ab' * 16} switch str)"
    assert term_to_sexpr(EventVal()) == "(evt str)"
    assert term_to_sexpr(Arith("+", X, IntConst(1))) == "(+ (var x int) 1)"
    assert lit_to_sexpr(ConstraintLit("<=", X, IntConst(5))) == "(<= (var x int) 5)"


def test_sexpr_rejects_garbage():
    for bad in ("", "(", ")", "(in)", "(frob x int)", '(attr "d")', "(+ 1)", "1 2"):
        with pytest.raises(Exception):
            term_from_sexpr(bad)
    with pytest.raises(Exception):
        lit_from_sexpr("(^^ 1 2)")


# ---------------------------------------------------- round-trip property

_names = st.text(alphabet="abcdefgxyz_", min_size=1, max_size=8)
_attrs = st.sampled_from(["switch", "temperature", "motion", "timeOfDay"])
_sorts = st.sampled_from(["int", "str", "bool"])

_leaves = st.one_of(
    st.integers(-(10**6), 10**6).map(IntConst),
    st.text(alphabet="abc on,.-", max_size=10).map(StrConst),
    st.booleans().map(BoolConst),
    st.builds(SymInput, _names, _sorts),
    st.builds(AttrVar, _names, _attrs, _sorts),
    st.builds(EventVal, _sorts),
)

# build arithmetic the way the extractor does, so constant folding is
# already applied and the round trip is structural
_terms = st.recursive(
    _leaves,
    lambda inner: st.builds(make_arith, st.sampled_from(["+", "-", "*"]), inner, inner),
    max_leaves=8,
)

_lits = st.builds(ConstraintLit, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), _terms, _terms)


@given(_terms)
def test_term_sexpr_round_trip(term):
    assert term_from_sexpr(term_to_sexpr(term)) == term


@given(_lits)
def test_lit_sexpr_round_trip(lit):
    assert lit_from_sexpr(lit_to_sexpr(lit)) == lit
    assert list(lit_terms(lit))  # never empty


@given(_lits)
def test_negate_round_trip(lit):
    assert lit.negate().negate() == lit
