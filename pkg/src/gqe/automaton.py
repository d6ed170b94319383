"""Compilation of path expressions into automata and graph products.

A :class:`PathAutomaton` has two kinds of moves: edge moves, which consume
one edge in a given direction, and node guards, which consume nothing and
test the current node (a guard without a test is a plain epsilon move).
Guards depend on node labels, so their closure is taken per concrete node
inside the product rather than on the automaton alone.

Product vertices are ``(node, state)`` pairs where ``state`` is the initial
state or the target of an edge move.  A step from ``(n, q)`` follows an edge
move leaving any state in the guard closure of ``q`` at ``n``.  Accepting
walks in the product correspond to accepting runs, so a path may have
several walks; :func:`determinize` removes that ambiguity.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

from .errors import CapExceeded
from .query import Alt, Bwd, Fwd, NodeTest, Seq, Star, satisfies, unparse_test

DEFAULT_CAP = 4096
FWD, BWD = "fwd", "bwd"


@dataclass(frozen=True)
class EdgeMove:
    src: int
    direction: str
    test: object
    dst: int


@dataclass(frozen=True)
class Guard:
    src: int
    test: object  # None: epsilon
    dst: int


class PathAutomaton:
    def __init__(self, n_states, initial, finals, edge_moves, guards):
        self.n_states = n_states
        self.initial = initial
        self.finals = frozenset(finals)
        self.edge_moves = tuple(edge_moves)
        self.guards = tuple(guards)
        self.moves_from = defaultdict(list)
        self.guards_from = defaultdict(list)
        for m in self.edge_moves:
            self.moves_from[m.src].append(m)
        for m in self.guards:
            self.guards_from[m.src].append(m)

    @property
    def states(self):
        return range(self.n_states)

    def is_empty(self):
        return not self.finals

    def to_dot(self):
        lines = ["digraph automaton {", "  rankdir=LR;", '  start [shape=point];']
        for q in self.states:
            shape = "doublecircle" if q in self.finals else "circle"
            lines.append(f"  q{q} [shape={shape}];")
        lines.append(f"  start -> q{self.initial};")
        for m in self.edge_moves:
            mark = "^-" if m.direction == BWD else ""
            lines.append(f'  q{m.src} -> q{m.dst} [label="{_dot(unparse_test(m.test))}{mark}"];')
        for m in self.guards:
            text = "ε" if m.test is None else "?" + unparse_test(m.test)
            lines.append(f'  q{m.src} -> q{m.dst} [label="{_dot(text)}", style=dashed];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return (f"PathAutomaton({self.n_states} states, {len(self.edge_moves)} edge moves, "
                f"{len(self.guards)} guards)")


def _dot(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


def compile_regex(r):
    """Compile a regex AST into a trimmed :class:`PathAutomaton`."""
    edge_moves, guards = [], []
    counter = [0]

    def new():
        counter[0] += 1
        return counter[0] - 1

    def build(r):
        if isinstance(r, NodeTest):
            s, f = new(), new()
            guards.append(Guard(s, r.test, f))
        elif isinstance(r, (Fwd, Bwd)):
            s, f = new(), new()
            edge_moves.append(EdgeMove(s, FWD if isinstance(r, Fwd) else BWD, r.test, f))
        elif isinstance(r, Alt):
            s, f = new(), new()
            for part in (r.left, r.right):
                ps, pf = build(part)
                guards.append(Guard(s, None, ps))
                guards.append(Guard(pf, None, f))
        elif isinstance(r, Seq):
            s, mid = build(r.left)
            mid2, f = build(r.right)
            guards.append(Guard(mid, None, mid2))
        elif isinstance(r, Star):
            s = new()
            bs, bf = build(r.body)
            guards.append(Guard(s, None, bs))
            guards.append(Guard(bf, None, s))
            f = s
        else:
            raise TypeError(f"not a regex: {r!r}")
        return s, f

    start, final = build(r)
    return _trim(counter[0], start, {final}, edge_moves, guards)


def _trim(n, initial, finals, edge_moves, guards):
    succ, pred = defaultdict(set), defaultdict(set)
    for m in (*edge_moves, *guards):
        succ[m.src].add(m.dst)
        pred[m.dst].add(m.src)

    def reach(seeds, adj):
        seen, todo = set(seeds), list(seeds)
        while todo:
            for t in adj[todo.pop()]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen

    useful = reach([initial], succ) & reach(finals, pred)
    if initial not in useful:
        return PathAutomaton(1, 0, (), (), ())
    order = sorted(useful)
    ren = {q: i for i, q in enumerate(order)}
    return PathAutomaton(
        len(order),
        ren[initial],
        [ren[q] for q in finals if q in useful],
        [EdgeMove(ren[m.src], m.direction, m.test, ren[m.dst]) for m in edge_moves
         if m.src in useful and m.dst in useful],
        [Guard(ren[m.src], m.test, ren[m.dst]) for m in guards if m.src in useful and m.dst in useful],
    )


class _Stepper:
    """Memoized guard closures and moves of an automaton over one graph."""

    def __init__(self, g, a):
        self.g = g
        self.a = a
        self._closure = {}
        self._test = {}
        self._steps = {}

    def passes(self, test, obj):
        key = (test, obj)
        hit = self._test.get(key)
        if hit is None:
            hit = self._test[key] = satisfies(test, self.g, obj)
        return hit

    def closure(self, n, q):
        key = (n, q)
        hit = self._closure.get(key)
        if hit is None:
            seen, todo = {q}, [q]
            while todo:
                for gd in self.a.guards_from[todo.pop()]:
                    if gd.dst not in seen and (gd.test is None or self.passes(gd.test, n)):
                        seen.add(gd.dst)
                        todo.append(gd.dst)
            hit = self._closure[key] = frozenset(seen)
        return hit

    def accepts(self, n, q):
        return not self.a.finals.isdisjoint(self.closure(n, q))

    def steps(self, n, q):
        """Distinct ``(edge, direction, (next_node, next_state))`` steps from ``(n, q)``."""
        key = (n, q)
        hit = self._steps.get(key)
        if hit is None:
            g = self.g
            out = set()
            for p in self.closure(n, q):
                for mv in self.a.moves_from[p]:
                    if mv.direction == FWD:
                        for e in g.out_edges(n):
                            if self.passes(mv.test, e):
                                out.add((e, FWD, (g.endpoints(e)[1], mv.dst)))
                    else:
                        for e in g.in_edges(n):
                            if self.passes(mv.test, e):
                                out.add((e, BWD, (g.endpoints(e)[0], mv.dst)))
            hit = self._steps[key] = tuple(sorted(out))
        return hit


class ProductGraph:
    """Trimmed product of a graph and a path automaton.

    Only vertices reachable from a start vertex and co-reachable to an
    accepting vertex are kept, so ``start`` is empty exactly when the
    expression has no answer.
    """

    def __init__(self, g, a):
        self.graph = g
        self.automaton = a
        self.stepper = st = _Stepper(g, a)
        seeds = [(n, a.initial) for n in g.nodes]
        seen = set(seeds)
        todo = deque(seeds)
        fwd = {}
        while todo:
            v = todo.popleft()
            fwd[v] = st.steps(*v)
            for _, _, w in fwd[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        rev = defaultdict(set)
        for v, outs in fwd.items():
            for _, _, w in outs:
                rev[w].add(v)
        finals = {v for v in seen if st.accepts(*v)}
        alive = set(finals)
        todo = deque(finals)
        while todo:
            for u in rev[todo.popleft()]:
                if u not in alive:
                    alive.add(u)
                    todo.append(u)
        self.vertices = frozenset(alive)
        self.finals = frozenset(finals)
        self.start = tuple(v for v in seeds if v in alive)
        self.steps = {v: tuple(s for s in fwd[v] if s[2] in alive) for v in alive}

    def is_final(self, v):
        return v in self.finals

    def subset_steps(self, n, states):
        """Successors of the subset vertex ``(n, states)`` keyed by ``(edge, next_node)``.

        Both directions of a self-loop lead to the same path, so they share a key.
        """
        grouped = defaultdict(set)
        for q in states:
            if (n, q) in self.vertices:
                for e, _, (m, q2) in self.steps[(n, q)]:
                    grouped[(e, m)].add(q2)
        return tuple((e, m, frozenset(qs)) for (e, m), qs in sorted(grouped.items()))

    def subset_final(self, n, states):
        return any((n, q) in self.finals for q in states)

    def to_dot(self):
        ids = {v: i for i, v in enumerate(sorted(self.vertices))}
        lines = ["digraph product {"]
        for v, i in ids.items():
            shape = "doublecircle" if v in self.finals else "circle"
            extra = ", style=bold" if v in self.start else ""
            lines.append(f'  v{i} [label="{_dot(v[0])},q{v[1]}", shape={shape}{extra}];')
        for v, outs in sorted(self.steps.items()):
            for e, d, w in outs:
                mark = "^-" if d == BWD else ""
                lines.append(f'  v{ids[v]} -> v{ids[w]} [label="{_dot(e)}{mark}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"ProductGraph({len(self.vertices)} vertices, {len(self.start)} start)"


def product(g, a):
    return ProductGraph(g, a)


class DeterministicProduct:
    """Per-node subset construction over a :class:`ProductGraph`.

    Vertices are ``(node, frozenset(states))``; from any vertex each
    ``(edge, next_node)`` leads to at most one successor, so graph paths
    and walks from a start vertex are in bijection.
    """

    def __init__(self, p, cap=DEFAULT_CAP):
        self.product = p
        self.cap = cap
        q0 = p.automaton.initial
        self.vertices = []
        self.index = {}
        self.steps = []
        self.final = []
        todo = deque()

        def add(v):
            if v not in self.index:
                if len(self.vertices) >= cap:
                    raise CapExceeded(cap)
                self.index[v] = len(self.vertices)
                self.vertices.append(v)
                self.steps.append(None)
                self.final.append(p.subset_final(*v))
                todo.append(v)
            return self.index[v]

        self.start = [add((n, frozenset([q0]))) for n, _ in p.start]
        while todo:
            v = todo.popleft()
            i = self.index[v]
            self.steps[i] = [(e, m, add((m, qs))) for e, m, qs in p.subset_steps(*v)]

    def __len__(self):
        return len(self.vertices)

    def walk_counts(self, k):
        """``table[j][i]``: walks of length ``j`` from vertex ``i`` to an accepting vertex."""
        table = [[1 if f else 0 for f in self.final]]
        for _ in range(k):
            prev = table[-1]
            table.append([sum(prev[w] for _, _, w in outs) for outs in self.steps])
        return table

    def to_dot(self):
        lines = ["digraph deterministic {"]
        for i, (n, qs) in enumerate(self.vertices):
            shape = "doublecircle" if self.final[i] else "circle"
            states = ",".join(f"q{q}" for q in sorted(qs))
            lines.append(f'  d{i} [label="{_dot(n)},{{{states}}}", shape={shape}];')
        for i, outs in enumerate(self.steps):
            for e, _, w in outs:
                lines.append(f'  d{i} -> d{w} [label="{_dot(e)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"DeterministicProduct({len(self.vertices)} vertices)"


def determinize(p, cap=DEFAULT_CAP):
    """Subset-construct ``p``; raises :class:`CapExceeded` past ``cap`` vertices."""
    return DeterministicProduct(p, cap)
