"""Two-variable first-order logic with counting (FO2 / FOC2) over graphs.

Node tests act as unary predicates and edge tests as binary ones.  Syntax::

    formula := disj
    disj    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | '(' formula ')'
             | 'exists' ['>=' k] var unary
             | test '(' var [',' var] ')'
    test    := atom | name '=' value | '_' | '[' <any node/edge test> ']'

``rides(x,y)`` holds when some ``rides`` edge goes from ``x`` to ``y``.
Evaluation is bottom-up: each subformula becomes a relation over its free
variables, so with two variables no relation is wider than a binary one.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product as cartesian

from .errors import FormulaError, QueryError, StarNotSupported
from .graph import Violation
from .query import (
    Alt, Bwd, FeatEq, Fwd, Label, NodeTest, PropEq, Seq, Star, Wildcard,
    parse_test, satisfies, unparse_test,
)

VARIABLES = ("x", "y")


@dataclass(frozen=True)
class NodePred:
    test: object
    var: str


@dataclass(frozen=True)
class EdgePred:
    test: object
    src: str
    dst: str


@dataclass(frozen=True)
class Neg:
    body: object


@dataclass(frozen=True)
class Conj:
    left: object
    right: object


@dataclass(frozen=True)
class Disj:
    left: object
    right: object


@dataclass(frozen=True)
class Exists:
    var: str
    body: object


@dataclass(frozen=True)
class CountExists:
    k: int
    var: str
    body: object

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise FormulaError(f"counting quantifier needs k >= 1, got {self.k!r}")


def conj(*parts):
    """Left-nested conjunction of the non-``None`` parts (``None`` stands for true)."""
    parts = [p for p in parts if p is not None]
    if not parts:
        return None
    out = parts[0]
    for p in parts[1:]:
        out = Conj(out, p)
    return out


def variables(phi):
    """Every variable name occurring in ``phi``, bound or free."""
    if isinstance(phi, NodePred):
        return {phi.var}
    if isinstance(phi, EdgePred):
        return {phi.src, phi.dst}
    if isinstance(phi, Neg):
        return variables(phi.body)
    if isinstance(phi, (Conj, Disj)):
        return variables(phi.left) | variables(phi.right)
    if isinstance(phi, (Exists, CountExists)):
        return {phi.var} | variables(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


def free_variables(phi):
    if isinstance(phi, NodePred):
        return {phi.var}
    if isinstance(phi, EdgePred):
        return {phi.src, phi.dst}
    if isinstance(phi, Neg):
        return free_variables(phi.body)
    if isinstance(phi, (Conj, Disj)):
        return free_variables(phi.left) | free_variables(phi.right)
    if isinstance(phi, (Exists, CountExists)):
        return free_variables(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def validate_two_var(phi):
    """``None`` if ``phi`` uses only ``x`` and ``y``, else a :class:`Violation`."""
    extra = sorted(variables(phi) - set(VARIABLES))
    if extra:
        return Violation("too many variables", f"only x and y are allowed, found {', '.join(extra)}")
    return None


# -- parser -----------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<bracket>\[(?:[^\]"]|"(?:[^"\\]|\\.)*")*\])
  | (?P<quoted>"(?:[^"\\]|\\.)*")
  | (?P<ge>>=)
  | (?P<punct>[(),!&|=])
  | (?P<word>[\w.:#@$%-]+)
""", re.VERBOSE)


def _tokenize(text):
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = m.lastgroup
        if kind != "ws":
            toks.append((m.group() if kind == "punct" else kind, m.group(), m.start()))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text, flavor, dimension):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0
        self.flavor = flavor
        self.dimension = dimension

    @property
    def kind(self):
        return self.toks[self.pos][0]

    def fail(self, message):
        _, text, offset = self.toks[self.pos]
        found = "end of formula" if self.kind == "end" else repr(text)
        return FormulaError(f"{message}, found {found} at offset {offset}")

    def expect(self, kind):
        if self.kind != kind:
            raise self.fail(f"expected {kind!r}")
        self.pos += 1

    def formula(self):
        left = self.conj()
        while self.kind == "|":
            self.pos += 1
            left = Disj(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.kind == "&":
            self.pos += 1
            left = Conj(left, self.unary())
        return left

    def unary(self):
        kind, text, _ = self.toks[self.pos]
        if kind == "!":
            self.pos += 1
            return Neg(self.unary())
        if kind == "(":
            self.pos += 1
            phi = self.formula()
            self.expect(")")
            return phi
        if kind == "word" and text == "exists" and self.toks[self.pos + 1][0] in ("word", "ge"):
            self.pos += 1
            k = None
            if self.kind == "ge":
                self.pos += 1
                _, num, _ = self.toks[self.pos]
                if self.kind != "word" or not num.isdigit():
                    raise self.fail("expected a count after '>='")
                k = int(num)
                self.pos += 1
            var = self.var()
            body = self.unary()
            return Exists(var, body) if k is None else CountExists(k, var, body)
        return self.predicate()

    def var(self):
        _, text, _ = self.toks[self.pos]
        if self.kind != "word" or not text.isidentifier():
            raise self.fail("expected a variable")
        self.pos += 1
        return text

    def predicate(self):
        kind, text, start = self.toks[self.pos]
        if kind == "bracket":
            self.pos += 1
            raw, base = text[1:-1], start + 1
        elif kind in ("word", "quoted"):
            self.pos += 1
            if self.kind == "=":
                self.pos += 1
                if self.kind not in ("word", "quoted"):
                    raise self.fail("expected a value after '='")
                self.pos += 1
            end = self.toks[self.pos][2]
            raw, base = self.text[start:end], start
        else:
            raise self.fail("expected a predicate")
        try:
            test = parse_test(raw, self.flavor, self.dimension)
        except QueryError as exc:
            raise FormulaError(f"bad test {raw!r} at offset {base}: {exc}") from exc
        self.expect("(")
        first = self.var()
        if self.kind == ",":
            self.pos += 1
            second = self.var()
            self.expect(")")
            return EdgePred(test, first, second)
        self.expect(")")
        return NodePred(test, first)


def parse_formula(text, flavor=None, dimension=None):
    p = _Parser(text, flavor, dimension)
    phi = p.formula()
    if p.kind != "end":
        raise p.fail("unexpected trailing input")
    return phi


# -- printer ----------------------------------------------------------------------


def _pred_test(t):
    if isinstance(t, (Label, Wildcard, PropEq, FeatEq)):
        return unparse_test(t)
    return "[" + unparse_test(t) + "]"


def to_string(phi, level=0):
    """Concrete syntax for ``phi``; re-parses to an equal formula."""
    if isinstance(phi, NodePred):
        return f"{_pred_test(phi.test)}({phi.var})"
    if isinstance(phi, EdgePred):
        return f"{_pred_test(phi.test)}({phi.src},{phi.dst})"
    if isinstance(phi, Neg):
        return "!" + to_string(phi.body, 2)
    if isinstance(phi, Exists):
        return f"exists {phi.var} ({to_string(phi.body)})"
    if isinstance(phi, CountExists):
        return f"exists>={phi.k} {phi.var} ({to_string(phi.body)})"
    if isinstance(phi, Disj):
        s = to_string(phi.left, 0) + " | " + to_string(phi.right, 1)
        return f"({s})" if level > 0 else s
    if isinstance(phi, Conj):
        s = to_string(phi.left, 1) + " & " + to_string(phi.right, 2)
        return f"({s})" if level > 1 else s
    raise TypeError(f"not a formula: {phi!r}")


# -- evaluation -------------------------------------------------------------------


class _Rel:
    """A relation over sorted free variables ``vars``: a set of value tuples."""

    __slots__ = ("vars", "rows")

    def __init__(self, vars, rows):
        assert len(vars) <= 2, f"relation of arity {len(vars)}"
        self.vars = vars
        self.rows = rows


def _extend(rel, vars, nodes):
    """Cylindrify ``rel`` to the (larger) variable tuple ``vars``."""
    if rel.vars == vars:
        return rel.rows
    pos = [vars.index(v) for v in rel.vars]
    out = set()
    for row in cartesian(nodes, repeat=len(vars)):
        if tuple(row[i] for i in pos) in rel.rows:
            out.add(row)
    return out


class _Evaluator:
    def __init__(self, g):
        self.g = g
        self.nodes = tuple(g.nodes)
        self.memo = {}

    def rel(self, phi):
        hit = self.memo.get(phi)
        if hit is None:
            hit = self.memo[phi] = self._rel(phi)
        return hit

    def _rel(self, phi):
        g, nodes = self.g, self.nodes
        if isinstance(phi, NodePred):
            return _Rel((phi.var,), {(n,) for n in nodes if satisfies(phi.test, g, n)})
        if isinstance(phi, EdgePred):
            hits = [g.endpoints(e) for e in g.edges if satisfies(phi.test, g, e)]
            if phi.src == phi.dst:
                return _Rel((phi.src,), {(s,) for s, d in hits if s == d})
            if phi.src < phi.dst:
                return _Rel((phi.src, phi.dst), set(hits))
            return _Rel((phi.dst, phi.src), {(d, s) for s, d in hits})
        if isinstance(phi, Neg):
            r = self.rel(phi.body)
            full = set(cartesian(nodes, repeat=len(r.vars)))
            return _Rel(r.vars, full - r.rows)
        if isinstance(phi, (Conj, Disj)):
            a, b = self.rel(phi.left), self.rel(phi.right)
            vars = tuple(sorted(set(a.vars) | set(b.vars)))
            ra, rb = _extend(a, vars, nodes), _extend(b, vars, nodes)
            return _Rel(vars, ra & rb if isinstance(phi, Conj) else ra | rb)
        if isinstance(phi, (Exists, CountExists)):
            k = 1 if isinstance(phi, Exists) else phi.k
            r = self.rel(phi.body)
            if phi.var not in r.vars:
                return r if len(nodes) >= k else _Rel(r.vars, set())
            i = r.vars.index(phi.var)
            rest = r.vars[:i] + r.vars[i + 1:]
            counts = {}
            for row in r.rows:
                key = row[:i] + row[i + 1:]
                counts[key] = counts.get(key, 0) + 1
            return _Rel(rest, {key for key, c in counts.items() if c >= k})
        raise TypeError(f"not a formula: {phi!r}")


def eval_formula(g, phi):
    """Evaluate ``phi`` (a formula or its text) on ``g``.

    Returns a set of nodes for one free variable, a set of ``(x, y)`` pairs
    for two, and a bool for a sentence.
    """
    if isinstance(phi, str):
        phi = parse_formula(phi, g.flavor, g.dimension)
    bad = validate_two_var(phi)
    if bad:
        raise FormulaError(bad.detail)
    r = _Evaluator(g).rel(phi)
    if not r.vars:
        return bool(r.rows)
    if len(r.vars) == 1:
        return {row[0] for row in r.rows}
    return set(r.rows)


# -- regex translation ------------------------------------------------------------


def _other(v):
    return "y" if v == "x" else "x"


def regex_to_fo2(r):
    """A formula ``psi(x)`` selecting the nodes where a path of star-free ``r`` starts.

    The walk along the expression alternates between ``x`` and ``y``: each
    edge step quantifies the variable not currently in use, so a stale
    binding is simply requantified.
    """

    def tr(r, v, rest):
        if isinstance(r, NodeTest):
            return conj(NodePred(r.test, v), rest(v))
        if isinstance(r, (Fwd, Bwd)):
            w = _other(v)
            edge = EdgePred(r.test, v, w) if isinstance(r, Fwd) else EdgePred(r.test, w, v)
            return Exists(w, conj(edge, rest(w)))
        if isinstance(r, Seq):
            return tr(r.left, v, lambda u: tr(r.right, u, rest))
        if isinstance(r, Alt):
            return Disj(tr(r.left, v, rest), tr(r.right, v, rest))
        if isinstance(r, Star):
            raise StarNotSupported("expressions with a Kleene star have no two-variable translation")
        raise TypeError(f"not a regex: {r!r}")

    return tr(r, "x", lambda v: None)
