"""Brute-force reference implementations and random instance generators.

Nothing here goes through automata or products: path semantics are
evaluated by literally building the set of index spans of a candidate
walk that each subexpression matches, and candidate walks are enumerated
exhaustively.  Betweenness is computed from explicit lists of shortest paths,
and formulas by trying every variable assignment.
"""
import itertools
import random

from gqe.graph import Graph, Path
from gqe.logic import CountExists, Conj, Disj, EdgePred, Exists, Neg, NodePred, free_variables
from gqe.query import (
    Alt, And, Bwd, Fwd, Label, NodeTest, Not, Or, Seq, Star, Wildcard,
    satisfies,
)

LABELS = ("a", "b", "c")


# -- random instances ------------------------------------------------------------


def random_graph(rng, max_nodes=8, max_edges=12, labels=LABELS, min_nodes=1):
    n = rng.randint(min_nodes, max_nodes)
    nodes = {f"v{i}": rng.choice(labels) for i in range(n)}
    ids = list(nodes)
    edges = []
    for i in range(rng.randint(0, max_edges)):
        s, d = rng.choice(ids), rng.choice(ids)
        if rng.random() < 0.1:
            d = s
        edges.append((f"e{i}", s, d, rng.choice(labels)))
        if rng.random() < 0.1:  # parallel edge
            edges.append((f"e{i}p", s, d, rng.choice(labels)))
    return Graph.labeled_graph(nodes, edges)


def random_test(rng, depth=2):
    roll = rng.random()
    if depth <= 0 or roll < 0.6:
        return Wildcard() if rng.random() < 0.1 else Label(rng.choice(LABELS))
    if roll < 0.75:
        return Not(random_test(rng, depth - 1))
    cls = And if roll < 0.9 else Or
    return cls(random_test(rng, depth - 1), random_test(rng, depth - 1))


def random_regex(rng, depth=4, star=True):
    roll = rng.random()
    if depth <= 1 or roll < 0.35:
        kind = rng.random()
        t = random_test(rng, 1)
        if kind < 0.3:
            return NodeTest(t)
        return Fwd(t) if kind < 0.75 else Bwd(t)
    if roll < 0.6:
        return Seq(random_regex(rng, depth - 1, star), random_regex(rng, depth - 1, star))
    if roll < 0.85 or not star:
        return Alt(random_regex(rng, depth - 1, star), random_regex(rng, depth - 1, star))
    return Star(random_regex(rng, depth - 1, star))


# -- literal path semantics ------------------------------------------------------


def walks(g, k):
    """Every walk with exactly ``k`` edges, each edge traversed either way."""
    layer = {Path((n,)) for n in g.nodes}
    for _ in range(k):
        nxt = set()
        for p in layer:
            n = p.end
            for e in g.out_edges(n):
                nxt.add(Path(p.nodes + (g.endpoints(e)[1],), p.edges + (e,)))
            for e in g.in_edges(n):
                nxt.add(Path(p.nodes + (g.endpoints(e)[0],), p.edges + (e,)))
        layer = nxt
    return layer


def spans(g, r, p):
    """Pairs ``(i, j)`` such that the sub-walk from node ``i`` to node ``j`` matches ``r``."""
    k = len(p.edges)
    if isinstance(r, NodeTest):
        return {(i, i) for i in range(k + 1) if satisfies(r.test, g, p.nodes[i])}
    if isinstance(r, (Fwd, Bwd)):
        out = set()
        for i, e in enumerate(p.edges):
            want = (p.nodes[i], p.nodes[i + 1]) if isinstance(r, Fwd) else (p.nodes[i + 1], p.nodes[i])
            if g.endpoints(e) == want and satisfies(r.test, g, e):
                out.add((i, i + 1))
        return out
    if isinstance(r, Alt):
        return spans(g, r.left, p) | spans(g, r.right, p)
    if isinstance(r, Seq):
        a, b = spans(g, r.left, p), spans(g, r.right, p)
        return {(i, l) for i, j in a for j2, l in b if j == j2}
    if isinstance(r, Star):
        body = spans(g, r.body, p)
        closure = {(i, i) for i in range(k + 1)}
        while True:
            more = closure | {(i, l) for i, j in closure for j2, l in body if j == j2}
            if more == closure:
                return closure
            closure = more
    raise TypeError(r)


def relation(g, r):
    """Node pairs linked by some conforming path, computed by relational algebra."""
    if isinstance(r, NodeTest):
        return {(n, n) for n in g.nodes if satisfies(r.test, g, n)}
    if isinstance(r, (Fwd, Bwd)):
        out = set()
        for e in g.edges:
            if satisfies(r.test, g, e):
                u, v = g.endpoints(e)
                out.add((u, v) if isinstance(r, Fwd) else (v, u))
        return out
    if isinstance(r, Alt):
        return relation(g, r.left) | relation(g, r.right)
    if isinstance(r, Seq):
        a, b = relation(g, r.left), relation(g, r.right)
        return {(u, w) for u, v in a for v2, w in b if v == v2}
    if isinstance(r, Star):
        body = relation(g, r.body)
        closure = {(n, n) for n in g.nodes}
        while True:
            more = closure | {(u, w) for u, v in closure for v2, w in body if v == v2}
            if more == closure:
                return closure
            closure = more
    raise TypeError(r)


def conforms(g, r, p):
    return (0, len(p.edges)) in spans(g, r, p)


def answers(g, r, k):
    """All paths of ``r`` with exactly ``k`` edges."""
    return {p for p in walks(g, k) if conforms(g, r, p)}


def answers_upto(g, r, max_len):
    return set().union(*(answers(g, r, k) for k in range(max_len + 1)))


# -- betweenness -----------------------------------------------------------------


def forward_walks(g, a, k):
    layer = [Path((a,))]
    for _ in range(k):
        layer = [Path(p.nodes + (g.endpoints(e)[1],), p.edges + (e,))
                 for p in layer for e in g.out_edges(p.end)]
    return layer


def bc_brute(g, x):
    """Directed betweenness from explicit lists of shortest paths."""
    total = 0.0
    n = len(g.nodes)
    for a in g.nodes:
        for b in g.nodes:
            if a == b or x in (a, b):
                continue
            for k in range(1, n):
                found = [p for p in forward_walks(g, a, k) if p.end == b]
                if found:
                    total += sum(x in p.nodes for p in found) / len(found)
                    break
    return total


def bc_r_brute(g, x, r):
    """Restricted betweenness from explicit lists of shortest conforming paths."""
    linked = relation(g, r)
    total = 0.0
    for a in g.nodes:
        for b in g.nodes:
            if a == b or x in (a, b) or (a, b) not in linked:
                continue
            k = 0
            while True:
                found = [p for p in answers(g, r, k) if p.start == a and p.end == b]
                if found:
                    total += sum(x in p.nodes for p in found) / len(found)
                    break
                k += 1
    return total


# -- two-variable logic ------------------------------------------------------------


def fo_holds(g, phi, env):
    """Textbook satisfaction of ``phi`` under the variable assignment ``env``."""
    if isinstance(phi, NodePred):
        return satisfies(phi.test, g, env[phi.var])
    if isinstance(phi, EdgePred):
        a, b = env[phi.src], env[phi.dst]
        return any(g.endpoints(e) == (a, b) and satisfies(phi.test, g, e) for e in g.edges)
    if isinstance(phi, Neg):
        return not fo_holds(g, phi.body, env)
    if isinstance(phi, Conj):
        return fo_holds(g, phi.left, env) and fo_holds(g, phi.right, env)
    if isinstance(phi, Disj):
        return fo_holds(g, phi.left, env) or fo_holds(g, phi.right, env)
    if isinstance(phi, Exists):
        return any(fo_holds(g, phi.body, {**env, phi.var: n}) for n in g.nodes)
    if isinstance(phi, CountExists):
        return sum(fo_holds(g, phi.body, {**env, phi.var: n}) for n in g.nodes) >= phi.k
    raise TypeError(phi)


def fo_brute(g, phi):
    free = sorted(free_variables(phi))
    if not free:
        return fo_holds(g, phi, {})
    if len(free) == 1:
        return {n for n in g.nodes if fo_holds(g, phi, {free[0]: n})}
    return {(a, b) for a in g.nodes for b in g.nodes if fo_holds(g, phi, {free[0]: a, free[1]: b})}


def random_formula(rng, depth=4):
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        if rng.random() < 0.5:
            return NodePred(random_test(rng, 1), rng.choice("xy"))
        return EdgePred(random_test(rng, 1), rng.choice("xy"), rng.choice("xy"))
    if roll < 0.4:
        return Neg(random_formula(rng, depth - 1))
    if roll < 0.55:
        return Conj(random_formula(rng, depth - 1), random_formula(rng, depth - 1))
    if roll < 0.65:
        return Disj(random_formula(rng, depth - 1), random_formula(rng, depth - 1))
    if roll < 0.85:
        return Exists(rng.choice("xy"), random_formula(rng, depth - 1))
    return CountExists(rng.randint(1, 3), rng.choice("xy"), random_formula(rng, depth - 1))


# -- GNNs ------------------------------------------------------------------------


def random_vector_graph(rng, d=2, values=("0", "1"), max_nodes=7, max_edges=10, min_nodes=1):
    n = rng.randint(min_nodes, max_nodes)
    nodes = {f"v{i}": [rng.choice(values) for _ in range(d)] for i in range(n)}
    ids = list(nodes)
    edges = [(f"e{i}", rng.choice(ids), rng.choice(ids), [rng.choice(values) for _ in range(d)])
             for i in range(rng.randint(0, max_edges))]
    return Graph.vector_graph(nodes, edges, dimension=d)


def _feature_test(rng, d, values):
    j, v = rng.randint(1, d), rng.choice(values)
    t = f'f{j}="{v}"'
    roll = rng.random()
    if roll < 0.2:
        return "!" + t
    if roll < 0.4:
        return f'{t} & f{rng.randint(1, d)}="{rng.choice(values)}"'
    if roll < 0.5:
        return "_"
    return t


def random_rule_gnn_doc(rng, d=2, values=("0", "1"), direction="undirected", edge_features=False, layers=2):
    doc_layers = []
    for _ in range(layers):
        rules = []
        for _ in range(rng.randint(1, 3)):
            rule = {"self": _feature_test(rng, d, values), "set": [rng.randint(1, d), rng.choice(values)]}
            if direction == "undirected":
                if rng.random() < 0.8:
                    rule["neighbor"] = _feature_test(rng, d, values)
            else:
                for key in ("out", "in"):
                    if rng.random() < 0.6:
                        rule[key] = _feature_test(rng, d, values)
            if edge_features and rng.random() < 0.5 and (direction == "undirected" or "out" in rule or "in" in rule):
                rule["edge"] = _feature_test(rng, d, values)
            rules.append(rule)
        doc_layers.append({"kind": "rule", "rules": rules})
    return {"dimension": d, "direction": direction, "edge_features": edge_features,
            "layers": doc_layers, "csl": {"feature": rng.randint(1, d), "equals": rng.choice(values)}}


def random_linear_gnn_doc(rng, d=2, direction="undirected", layers=2):
    def mat():
        return [[rng.choice([-1, -0.5, 0, 0.5, 1]) for _ in range(d)] for _ in range(d)]

    doc_layers = []
    for _ in range(layers):
        layer = {"kind": "linear", "A": mat(), "B": mat(), "b": [rng.choice([-0.5, 0, 0.5]) for _ in range(d)]}
        if direction == "directed":
            layer["B_in"] = mat()
        doc_layers.append(layer)
    return {"dimension": d, "direction": direction, "layers": doc_layers, "csl": {"feature": 1, "equals": "1"}}


# -- decision models -------------------------------------------------------------


def random_decision_doc(rng, n_vars=4, shared_leaves=False):
    """A random read-once decision model over variables x0..x{n-1}, as a graph document.

    With ``shared_leaves`` all paths end in one ``0`` and one ``1`` leaf, so the
    graph is a DAG rather than a tree.
    """
    names = [f"x{i}" for i in range(n_vars)]
    nodes, edges = [], []
    counter = itertools.count()
    leaves = {}

    def build(free):
        if not free or rng.random() < 0.25:
            bit = rng.choice("01")
            if shared_leaves and bit in leaves:
                return leaves[bit]
            nid = f"n{next(counter)}"
            nodes.append({"id": nid, "label": bit})
            leaves[bit] = nid
            return nid
        nid = f"n{next(counter)}"
        var = rng.choice(sorted(free))
        nodes.append({"id": nid, "label": var})
        for bit in "01":
            child = build(free - {var})
            edges.append({"id": f"d{len(edges)}", "src": nid, "dst": child, "label": bit})
        return nid

    root = build(set(names))
    return {"model": "labeled", "root": root, "variables": names, "nodes": nodes, "edges": edges}


def truth_table(doc):
    """Class of every total instance, by walking the document's edges directly."""
    names = doc["variables"]
    label = {n["id"]: n["label"] for n in doc["nodes"]}
    succ = {(e["src"], e["label"]): e["dst"] for e in doc["edges"]}
    table = {}
    for bits in itertools.product((0, 1), repeat=len(names)):
        inst = dict(zip(names, bits))
        n = doc["root"]
        while label[n] not in ("0", "1"):
            n = succ[(n, str(inst[label[n]]))]
        table[bits] = int(label[n])
    return table


def completions(names, partial):
    free = [v for v in names if v not in partial]
    for bits in itertools.product((0, 1), repeat=len(free)):
        inst = {**partial, **dict(zip(free, bits))}
        yield tuple(inst[v] for v in names)


def make_rng(seed):
    return random.Random(seed)

