"""Regular path expressions over graphs: AST, parser and printer.

Concrete syntax (whitespace between tokens is ignored)::

    regex  := seq ('+' seq)*
    seq    := item ('/' item)*
    item   := '?' ntest                  node test, zero-length
            | etest ['^-']               edge test, forward or inverse
            | '(' regex ')' ['*']        group, optionally starred
    ntest  := atom | '_' | '(' test ')'
    etest  := atom | '_' | '(' test ')'
    test   := and ('|' and)*
    and    := not ('&' not)*
    not    := '!' not | '(' test ')' | '_' | atom ['=' atom]

Atoms are bare words or double-quoted strings (``\\"`` escapes a quote);
values containing ``/``, ``=`` or spaces must be quoted.  ``p=v`` is a
property test on property graphs and ``f<i>=v`` a feature test on
vector-labeled graphs.  ``_`` matches any node or edge.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FlavorError, QuerySyntaxError
from .graph import BOTTOM

# -- tests ----------------------------------------------------------------


@dataclass(frozen=True)
class Label:
    value: str


@dataclass(frozen=True)
class PropEq:
    name: str
    value: str


@dataclass(frozen=True)
class FeatEq:
    index: int
    value: str

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("feature indices start at 1")


@dataclass(frozen=True)
class Wildcard:
    pass


@dataclass(frozen=True)
class Not:
    test: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


TEST_TYPES = (Label, PropEq, FeatEq, Wildcard, Not, Or, And)

# -- regexes --------------------------------------------------------------


@dataclass(frozen=True)
class NodeTest:
    test: object


@dataclass(frozen=True)
class Fwd:
    test: object


@dataclass(frozen=True)
class Bwd:
    test: object


@dataclass(frozen=True)
class Alt:
    left: object
    right: object


@dataclass(frozen=True)
class Seq:
    left: object
    right: object


@dataclass(frozen=True)
class Star:
    body: object


REGEX_TYPES = (NodeTest, Fwd, Bwd, Alt, Seq, Star)


def subterms(ast):
    """Pre-order iteration over a regex or test tree."""
    yield ast
    if isinstance(ast, (NodeTest, Fwd, Bwd, Not)):
        yield from subterms(ast.test)
    elif isinstance(ast, (Alt, Seq, Or, And)):
        yield from subterms(ast.left)
        yield from subterms(ast.right)
    elif isinstance(ast, Star):
        yield from subterms(ast.body)


def is_star_free(r):
    return not any(isinstance(t, Star) for t in subterms(r))


def sequence(*parts):
    """Left-nested concatenation of regexes."""
    out = parts[0]
    for p in parts[1:]:
        out = Seq(out, p)
    return out


# -- evaluation of tests -----------------------------------------------------

def satisfies_vector(t, vec):
    """Evaluate a test against a bare feature vector (label = feature 1)."""
    if isinstance(t, Label):
        return vec[0] == t.value
    if isinstance(t, FeatEq):
        return t.index <= len(vec) and vec[t.index - 1] == t.value
    if isinstance(t, Wildcard):
        return True
    if isinstance(t, PropEq):
        return False
    if isinstance(t, Not):
        return not satisfies_vector(t.test, vec)
    if isinstance(t, And):
        return satisfies_vector(t.left, vec) and satisfies_vector(t.right, vec)
    if isinstance(t, Or):
        return satisfies_vector(t.left, vec) or satisfies_vector(t.right, vec)
    raise TypeError(f"not a test: {t!r}")


def satisfies(t, g, obj):
    """Whether node or edge ``obj`` of ``g`` passes test ``t``.

    On vector-labeled graphs a bare label test reads feature 1.
    """
    if g.flavor == "vector":
        return satisfies_vector(t, g.features(obj))
    if isinstance(t, Label):
        return g.label(obj) == t.value
    if isinstance(t, PropEq):
        return g.prop(obj, t.name) == t.value
    if isinstance(t, Wildcard):
        return True
    if isinstance(t, FeatEq):
        return False
    if isinstance(t, Not):
        return not satisfies(t.test, g, obj)
    if isinstance(t, And):
        return satisfies(t.left, g, obj) and satisfies(t.right, g, obj)
    if isinstance(t, Or):
        return satisfies(t.left, g, obj) or satisfies(t.right, g, obj)
    raise TypeError(f"not a test: {t!r}")


# -- tokenizer ----------------------------------------------------------------

_BARE = re.compile(r"[\w.:#@$%-]+")
_FEATURE = re.compile(r"f([0-9]+)")
_PUNCT = ("^-", "?", "/", "+", "*", "(", ")", "!", "&", "|", "=")


@dataclass
class _Tok:
    kind: str   # punctuation text, "atom" or "end"
    text: str
    offset: int  # byte offset into the UTF-8 query
    quoted: bool = False


def _tokenize(text):
    toks = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        off = len(text[:i].encode("utf-8"))
        if c == BOTTOM:
            raise QuerySyntaxError(f"reserved atom {BOTTOM} cannot be used in a query", off)
        if c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= n:
                raise QuerySyntaxError("unterminated quoted atom", off)
            value = "".join(buf)
            if value == "":
                raise QuerySyntaxError("empty atom", off)
            if value == BOTTOM:
                raise QuerySyntaxError(f"reserved atom {BOTTOM} cannot be used in a query", off)
            toks.append(_Tok("atom", value, off, quoted=True))
            i = j + 1
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Tok(p, p, off))
                i += len(p)
                break
        else:
            m = _BARE.match(text, i)
            if not m:
                raise QuerySyntaxError(f"unexpected character {c!r}", off)
            toks.append(_Tok("atom", m.group(), off))
            i = m.end()
    toks.append(_Tok("end", "", len(text.encode("utf-8"))))
    return toks


# -- parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, text, flavor, dimension):
        if flavor not in (None, "labeled", "property", "vector"):
            raise ValueError(f"unknown flavor {flavor!r}")
        self.toks = _tokenize(text)
        self.pos = 0
        self.flavor = flavor
        self.dimension = dimension

    @property
    def tok(self):
        return self.toks[self.pos]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return QuerySyntaxError(message, tok.offset)

    def expect(self, kind):
        if self.tok.kind != kind:
            found = "end of query" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.error(f"expected {kind!r}, found {found}")
        self.pos += 1

    def finish(self, value):
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return value

    # tests

    def test(self):
        left = self.conj()
        while self.tok.kind == "|":
            self.pos += 1
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.neg()
        while self.tok.kind == "&":
            self.pos += 1
            left = And(left, self.neg())
        return left

    def neg(self):
        if self.tok.kind == "!":
            self.pos += 1
            return Not(self.neg())
        if self.tok.kind == "(":
            self.pos += 1
            t = self.test()
            self.expect(")")
            return t
        return self.atomic_test(allow_eq=True)

    def atomic_test(self, allow_eq):
        tok = self.tok
        if tok.kind != "atom":
            found = "end of query" if tok.kind == "end" else repr(tok.text)
            raise self.error(f"expected a test, found {found}")
        self.pos += 1
        if tok.text == "_" and not tok.quoted:
            return Wildcard()
        if not (allow_eq and self.tok.kind == "="):
            return Label(tok.text)
        self.pos += 1
        vtok = self.tok
        if vtok.kind != "atom":
            raise self.error("expected a value after '='")
        self.pos += 1
        return self.comparison(tok, vtok.text)

    def comparison(self, name_tok, value):
        name = name_tok.text
        feat = None if name_tok.quoted else _FEATURE.fullmatch(name)
        flavor = self.flavor
        if flavor == "labeled":
            what = "feature" if feat else "property"
            raise FlavorError(f"{what} test on labeled graph (byte {name_tok.offset})")
        if flavor == "property" or (flavor is None and not feat):
            return PropEq(name, value)
        if not feat:
            raise FlavorError(f"property test on vector graph (byte {name_tok.offset})")
        index = int(feat.group(1))
        if index < 1 or (self.dimension is not None and index > self.dimension):
            raise FlavorError(
                f"feature index {index} outside dimension {self.dimension} (byte {name_tok.offset})"
            )
        return FeatEq(index, value)

    def simple_test(self):
        """``atom``, ``_`` or a parenthesized test, as used after ``?`` and in edge position."""
        if self.tok.kind == "(":
            self.pos += 1
            t = self.test()
            self.expect(")")
            return t
        return self.atomic_test(allow_eq=False)

    # regexes

    def regex(self):
        left = self.seq()
        while self.tok.kind == "+":
            self.pos += 1
            left = Alt(left, self.seq())
        return left

    def seq(self):
        left = self.item()
        while self.tok.kind == "/":
            self.pos += 1
            left = Seq(left, self.item())
        return left

    def item(self):
        tok = self.tok
        if tok.kind == "?":
            self.pos += 1
            r = NodeTest(self.simple_test())
            if self.tok.kind in ("^-", "*"):
                raise self.error(f"{self.tok.text!r} cannot follow a node test")
            return r
        if tok.kind == "(":
            start = self.pos
            try:
                t = self.simple_test()
            except QuerySyntaxError:
                self.pos = start + 1
                body = self.regex()
                self.expect(")")
                if self.tok.kind == "*":
                    self.pos += 1
                    return Star(body)
                if self.tok.kind == "^-":
                    raise self.error("'^-' applies to an edge test, not to a group")
                return body
            if self.tok.kind == "*":
                self.pos += 1
                return Star(Fwd(t))
            return self.edge(t)
        if tok.kind == "atom":
            return self.edge(self.simple_test())
        found = "end of query" if tok.kind == "end" else repr(tok.text)
        raise self.error(f"expected a path expression, found {found}")

    def edge(self, t):
        if self.tok.kind == "^-":
            self.pos += 1
            if self.tok.kind == "*":
                raise self.error("'*' applies only to a parenthesized group")
            return Bwd(t)
        if self.tok.kind == "*":
            raise self.error("'*' applies only to a parenthesized group")
        return Fwd(t)


def parse(text, flavor=None, dimension=None):
    """Parse a path expression.

    ``flavor`` ("labeled", "property", "vector" or ``None`` for no gating)
    decides which comparison tests are legal; ``dimension`` bounds feature
    indices on vector graphs.
    """
    p = _Parser(text, flavor, dimension)
    return p.finish(p.regex())


def parse_test(text, flavor=None, dimension=None):
    """Parse a standalone node/edge test such as ``name="Claire"``."""
    p = _Parser(text, flavor, dimension)
    return p.finish(p.test())


def parse_for(g, text):
    return parse(text, g.flavor, g.dimension)


# -- printer --------------------------------------------------------------------

def _atom(value):
    if value != "_" and _BARE.fullmatch(value):
        return value
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def unparse_test(t, level=0):
    if isinstance(t, Label):
        return _atom(t.value)
    if isinstance(t, Wildcard):
        return "_"
    if isinstance(t, PropEq):
        return f"{_atom(t.name)}={_atom(t.value)}"
    if isinstance(t, FeatEq):
        return f"f{t.index}={_atom(t.value)}"
    if isinstance(t, Not):
        return "!" + unparse_test(t.test, 2)
    if isinstance(t, Or):
        s = unparse_test(t.left, 0) + "|" + unparse_test(t.right, 1)
        return f"({s})" if level > 0 else s
    if isinstance(t, And):
        s = unparse_test(t.left, 1) + "&" + unparse_test(t.right, 2)
        return f"({s})" if level > 1 else s
    raise TypeError(f"not a test: {t!r}")


def _simple(t):
    if isinstance(t, (Label, Wildcard)):
        return unparse_test(t)
    return "(" + unparse_test(t) + ")"


def unparse(r, level=0):
    """Print a regex with the fewest parentheses that re-parse to the same tree."""
    if isinstance(r, NodeTest):
        return "?" + _simple(r.test)
    if isinstance(r, Fwd):
        return _simple(r.test)
    if isinstance(r, Bwd):
        return _simple(r.test) + "^-"
    if isinstance(r, Star):
        return "(" + unparse(r.body, 0) + ")*"
    if isinstance(r, Alt):
        s = unparse(r.left, 0) + "+" + unparse(r.right, 1)
        return f"({s})" if level > 0 else s
    if isinstance(r, Seq):
        s = unparse(r.left, 1) + "/" + unparse(r.right, 2)
        return f"({s})" if level > 1 else s
    raise TypeError(f"not a regex: {r!r}")
