"""Betweenness centrality, plain and restricted to paths conforming to a regex.

For ``bc_r`` the shortest paths between ``a`` and ``b`` are the conforming
``a -> b`` paths of minimal length among conforming ones.  Those that pass
through ``x`` are counted as the total minus the number of same-length
conforming paths once ``x`` is deleted from the graph.  Pairs with
``a == b`` are excluded: under expressions that accept length-0 paths they
would otherwise contribute a trivial term for every node.

Exact values are accumulated as fractions in pair order, so they are
reproducible bit for bit.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .automaton import DEFAULT_CAP, determinize
from .engine import RunSampler, _regex, build_product, sample_size
from .errors import CapExceeded, UnknownNode


@dataclass(frozen=True)
class CentralityReport:
    node: str
    value: float
    mode: str = "exact"
    regex: object = None
    epsilon: float | None = None
    seed: int | None = None

    def to_json(self):
        return {"node": self.node, "bc": self.value}


def _check_node(g, x):
    if not g.has_node(x):
        raise UnknownNode(x)


def _shortest_counts(g, s):
    """BFS distances and shortest-path counts from ``s`` along edge direction."""
    dist, sigma = {s: 0}, {s: 1}
    todo = deque([s])
    while todo:
        u = todo.popleft()
        for e in g.out_edges(u):
            w = g.endpoints(e)[1]
            if w not in dist:
                dist[w] = dist[u] + 1
                sigma[w] = 0
                todo.append(w)
            if dist[w] == dist[u] + 1:
                sigma[w] += sigma[u]
    return dist, sigma


def _bc_exact(g, x, tables):
    dx, sx = tables[x]
    total = Fraction(0)
    for a in g.nodes:
        if a == x:
            continue
        da, sa = tables[a]
        if x not in da:
            continue
        for b in g.nodes:
            if b in (a, x) or b not in da or b not in dx:
                continue
            if da[x] + dx[b] == da[b]:
                total += Fraction(sa[x] * sx[b], sa[b])
    return total


def bc(g, x):
    """Directed betweenness of ``x``: sum over ``a != b`` (both ``!= x``) of the
    fraction of shortest ``a -> b`` paths through ``x``."""
    _check_node(g, x)
    tables = {a: _shortest_counts(g, a) for a in g.nodes}
    return float(_bc_exact(g, x, tables))


def bc_all(g):
    tables = {a: _shortest_counts(g, a) for a in g.nodes}
    return {x: float(_bc_exact(g, x, tables)) for x in g.nodes}


# -- regex-restricted --------------------------------------------------------------


def _conforming_counts(g, r, cap, targets=None):
    """Per source ``a``: ``{b: (L, count)}`` for the shortest conforming ``a -> b`` paths.

    With ``targets`` (``{a: {b: L}}``) the count is taken at the given
    length instead of the minimal one.
    """
    det = determinize(build_product(g, r), cap)
    out = {}
    for s in det.start:
        a = det.vertices[s][0]
        want = None if targets is None else targets.get(a, {})
        if want is not None and not want:
            continue
        horizon = len(det) if want is None else max(want.values())
        found = {}
        layer = {s: 1}
        for j in range(horizon + 1):
            if not layer:
                break
            acc = {}
            for v, c in layer.items():
                if det.final[v]:
                    b = det.vertices[v][0]
                    acc[b] = acc.get(b, 0) + c
            for b, c in acc.items():
                if want is None:
                    found.setdefault(b, (j, c))
                elif want.get(b) == j:
                    found[b] = (j, c)
            nxt = {}
            for v, c in layer.items():
                for _, _, w in det.steps[v]:
                    nxt[w] = nxt.get(w, 0) + c
            layer = nxt
        out[a] = found
    return out


def _bc_r_exact(g, x, r, cap, full):
    targets = {
        a: {b: L for b, (L, _) in row.items() if b not in (a, x)}
        for a, row in full.items() if a != x
    }
    reduced = _conforming_counts(g.without_node(x), r, cap, targets)
    total = Fraction(0)
    for a in g.nodes:
        for b, L in targets.get(a, {}).items():
            every = full[a][b][1]
            avoiding = reduced.get(a, {}).get(b, (L, 0))[1]
            assert 0 <= avoiding <= every, (a, b, avoiding, every)
            total += Fraction(every - avoiding, every)
    return total


def bc_r(g, x, r, cap=DEFAULT_CAP):
    """Betweenness of ``x`` over shortest paths conforming to ``r``."""
    _check_node(g, x)
    r = _regex(g, r)
    try:
        full = _conforming_counts(g, r, cap)
        return float(_bc_r_exact(g, x, r, cap, full))
    except CapExceeded as exc:
        raise CapExceeded(exc.cap, "use bc_r_approx instead") from exc


def bc_r_all(g, r, cap=DEFAULT_CAP):
    r = _regex(g, r)
    try:
        full = _conforming_counts(g, r, cap)
        return {x: float(_bc_r_exact(g, x, r, cap, full)) for x in g.nodes}
    except CapExceeded as exc:
        raise CapExceeded(exc.cap, "use bc_r_approx instead") from exc


def _shortest_lengths(p, s):
    """Minimal walk length from product vertex ``s`` to an accepting vertex, per end node."""
    dist = {s: 0}
    todo = deque([s])
    best = {}
    while todo:
        v = todo.popleft()
        if v in p.finals:
            best.setdefault(v[0], dist[v])
        for _, _, w in p.steps[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                todo.append(w)
    return best


def bc_r_approx(g, x, r, epsilon=0.1, seed=0, confidence=0.95):
    """Randomized ``bc_r``.

    Minimal conforming lengths come from reachability in the ambiguous
    product, which is cheap.  For each pair, accepting runs of that length
    are sampled uniformly and each path is weighted by ``1 / amb(p)``; the
    term is the weighted share of sampled paths that visit ``x``.
    """
    _check_node(g, x)
    r = _regex(g, r)
    m = sample_size(epsilon, confidence)
    rng = random.Random(seed)
    p = build_product(g, r)
    total = 0.0
    for s in sorted(p.start):
        a = s[0]
        if a == x:
            continue
        for b, L in sorted(_shortest_lengths(p, s).items()):
            if b in (a, x):
                continue
            sampler = RunSampler(p, L, starts=[s], final=lambda v, b=b: v[0] == b)
            through = weight = 0.0
            for _ in range(m):
                path = sampler.sample(rng)
                w = 1.0 / sampler.ambiguity(path)
                weight += w
                if x in path.nodes:
                    through += w
            total += through / weight
    return total
