import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gqe.errors import FlavorError, QuerySyntaxError
from gqe.query import (
    Alt, And, Bwd, FeatEq, Fwd, Label, NodeTest, Not, Or, PropEq, Seq, Star, Wildcard,
    is_star_free, parse, parse_test, subterms, unparse, unparse_test,
)


def test_contact_query_ast():
    assert parse("?person/contact/?infected") == Seq(
        Seq(NodeTest(Label("person")), Fwd(Label("contact"))), NodeTest(Label("infected")))


def test_property_query_ast():
    r = parse('?person/(contact & date="3/4/21")/?infected', "property")
    assert r.left.right == Fwd(And(Label("contact"), PropEq("date", "3/4/21")))


def test_inverse_query_ast():
    r = parse("?person/rides/?bus/rides^-/?person")
    assert sum(isinstance(t, Bwd) for t in subterms(r)) == 1


def test_starred_group():
    assert parse("((lives+contact))*") == Star(Alt(Fwd(Label("lives")), Fwd(Label("contact"))))
    assert parse("(lives+contact)*") == Star(Alt(Fwd(Label("lives")), Fwd(Label("contact"))))
    assert parse("(contact)*") == Star(Fwd(Label("contact")))


def test_precedence():
    assert parse("a/b+c") == Alt(Seq(Fwd(Label("a")), Fwd(Label("b"))), Fwd(Label("c")))
    assert parse_test("!a&b|c") == Or(And(Not(Label("a")), Label("b")), Label("c"))
    assert parse("a^-/b") == Seq(Bwd(Label("a")), Fwd(Label("b")))


def test_feature_tests():
    r = parse("?(f1=person)/(f1=contact & f5=\"3/4/21\")/?(f1=infected)", "vector", 6)
    assert FeatEq(5, "3/4/21") in set(subterms(r))


def test_printer_examples():
    assert unparse(parse("?person/contact/?infected")) == "?person/contact/?infected"
    assert unparse(NodeTest(Wildcard())) == "?_"
    assert unparse(parse("((lives+contact))*")) == "(lives+contact)*"
    assert unparse_test(PropEq("date", "3/4/21")) == 'date="3/4/21"'


def test_quoted_atoms():
    assert parse_test('"a b"') == Label("a b")
    assert parse_test('"say \\"hi\\""') == Label('say "hi"')
    assert parse_test('"_"') == Label("_")


NEGATIVE = [
    "", "/", "a/", "/a", "a//b", "a+", "+a", "(a", "a)", "((a)",
    "(a/b)^-", "a*", "?a*", "?a^-", "?", "a^-*", "⊥", "?⊥", "a=", "a b",
]


@pytest.mark.parametrize("text", NEGATIVE)
def test_negative_corpus(text):
    with pytest.raises(QuerySyntaxError) as info:
        parse(text)
    assert info.value.offset >= 0


def test_error_offset():
    with pytest.raises(QuerySyntaxError) as info:
        parse("?person/(contact")
    assert info.value.offset == len("?person/(contact")


def test_flavor_gating():
    with pytest.raises(FlavorError):
        parse("(f1=person)", "labeled")
    with pytest.raises(FlavorError):
        parse("?(name=x)", "labeled")
    with pytest.raises(FlavorError):
        parse("(name=x)", "vector", 3)
    with pytest.raises(FlavorError):
        parse("(f4=x)", "vector", 3)
    assert parse("(f1=x)", "property") == Fwd(PropEq("f1", "x"))
    assert parse("(f2=x)", "vector", 3) == Fwd(FeatEq(2, "x"))


def test_star_free():
    assert is_star_free(parse("?a/b+c^-"))
    assert not is_star_free(parse("a/(b)*"))


# -- round trip --------------------------------------------------------------------

atom = st.sampled_from(["a", "person", "x.y", "3/4/21", "a b", "_", 'q"uote', "f1", "p-q"])


def node_tests(depth):
    base = st.one_of(
        atom.map(Label), st.just(Wildcard()),
        st.tuples(atom, atom).map(lambda t: PropEq(*t)),
    )
    if depth <= 0:
        return base
    sub = node_tests(depth - 1)
    return st.one_of(
        base, sub.map(Not),
        st.tuples(sub, sub).map(lambda t: And(*t)),
        st.tuples(sub, sub).map(lambda t: Or(*t)),
    )


def regexes(depth):
    t = node_tests(2)
    base = st.one_of(t.map(NodeTest), t.map(Fwd), t.map(Bwd))
    if depth <= 0:
        return base
    sub = regexes(depth - 1)
    return st.one_of(
        base, sub.map(Star),
        st.tuples(sub, sub).map(lambda p: Alt(*p)),
        st.tuples(sub, sub).map(lambda p: Seq(*p)),
    )


@settings(max_examples=1000, deadline=None)
@given(regexes(6))
def test_round_trip(r):
    assert parse(unparse(r), "property") == r


@settings(max_examples=300, deadline=None)
@given(node_tests(4))
def test_test_round_trip(t):
    assert parse_test(unparse_test(t), "property") == t


@settings(max_examples=200, deadline=None)
@given(regexes(4))
def test_parsed_tests_respect_flavor(r):
    text = unparse(r)
    parsed = parse(text, "property")
    assert not any(isinstance(x, FeatEq) for x in subterms(parsed))
    if any(isinstance(x, PropEq) for x in subterms(r)):
        with pytest.raises(FlavorError):
            parse(text, "labeled")
