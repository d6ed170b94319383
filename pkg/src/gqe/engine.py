"""Query evaluation: selection, enumeration, reachability, counting, sampling.

Exact counting runs a length-``k`` walk count over the deterministic
product.  Counting paths that conform to an expression is SpanL-complete,
so the subset construction may blow up; past the vertex cap callers fall
back to :func:`count_approx`.

``count_approx`` is an importance-sampling estimator over accepting runs
of the (ambiguous) product.  With ``R`` runs of length ``k`` and ``amb(p)``
runs over path ``p``, a uniformly sampled run yields ``R / amb(p)``, whose
expectation is the number of paths.  Its guarantee is empirical: relative
error within ``epsilon`` with probability about 0.95, not the
``1 - 2**-100`` of a true FPRAS.
"""
from __future__ import annotations

import math
import random
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass
from itertools import accumulate

from .automaton import DEFAULT_CAP, compile_regex, determinize, product
from .errors import CapExceeded, EmptySupport
from .graph import Path
from .query import parse_for, parse_test, satisfies

MAX_K = 10**6


def _regex(g, r):
    return parse_for(g, r) if isinstance(r, str) else r


def _test(g, t):
    return parse_test(t, g.flavor, g.dimension) if isinstance(t, str) else t


def _check_k(k):
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise ValueError(f"path length must be a non-negative integer, got {k!r}")
    if k > MAX_K:
        raise ValueError(f"path length {k} exceeds the limit of {MAX_K}")


def build_product(g, r):
    """Product of ``g`` with the automaton of ``r`` (a string or an AST)."""
    return product(g, compile_regex(_regex(g, r)))


def select_nodes(g, t):
    """Nodes passing test ``t`` (a string or a test AST)."""
    t = _test(g, t)
    return {n for n in g.nodes if satisfies(t, g, n)}


def _existence(p, max_len):
    """``ok[j]``: product vertices with an accepting walk of exactly ``j`` steps."""
    ok = [set(p.finals)]
    for _ in range(max_len):
        prev = ok[-1]
        ok.append({v for v in p.vertices if any(w in prev for _, _, w in p.steps[v])})
    return ok


def enumerate_paths(g, r, max_len, stats=None):
    """Yield every path of ``r`` with length at most ``max_len``, without repeats.

    Paths come out by length, then lexicographically on ``n0 e1 n1 ...``.
    Each branch of the depth-first search is pruned unless it can still end
    in an answer of the current length, so the work between two answers is
    polynomial.  If ``stats`` is a dict, ``stats["expansions"]`` counts
    visited search nodes.
    """
    _check_k(max_len)
    p = build_product(g, r)
    q0 = p.automaton.initial
    ok = _existence(p, max_len)
    memo = {}

    def children(n, states, rem):
        key = (n, states)
        succ = memo.get(key)
        if succ is None:
            succ = memo[key] = p.subset_steps(n, states)
        need = ok[rem - 1]
        return iter([(e, m, ts) for e, m, ts in succ if any((m, q) in need for q in ts)])

    starts = sorted(n for n, _ in p.start)
    for length in range(max_len + 1):
        for n0 in starts:
            if (n0, q0) not in ok[length]:
                continue
            if length == 0:
                yield Path((n0,))
                continue
            nodes, edges = [n0], []
            stack = [children(n0, frozenset([q0]), length)]
            while stack:
                if stats is not None:
                    stats["expansions"] = stats.get("expansions", 0) + 1
                step = next(stack[-1], None)
                if step is None:
                    stack.pop()
                    if edges:
                        nodes.pop()
                        edges.pop()
                    continue
                e, m, ts = step
                nodes.append(m)
                edges.append(e)
                rem = length - len(edges)
                if rem == 0:
                    yield Path(tuple(nodes), tuple(edges))
                    nodes.pop()
                    edges.pop()
                else:
                    stack.append(children(m, ts, rem))


def reachable_from(g, r):
    """Nodes where some path of ``r`` starts, by product reachability."""
    return {n for n, _ in build_product(g, r).start}


def pairs(g, r):
    """``{(start(p), end(p))}`` over all paths ``p`` of ``r`` (finite even if the paths are not)."""
    p = build_product(g, r)
    out = set()
    for s in p.start:
        seen, todo = {s}, [s]
        while todo:
            v = todo.pop()
            if v in p.finals:
                out.add((s[0], v[0]))
            for _, _, w in p.steps[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
    return out


def count_exact(g, r, k, cap=DEFAULT_CAP):
    """Number of paths of ``r`` with length exactly ``k``.

    Raises :class:`CapExceeded` when the deterministic product outgrows ``cap``.
    """
    _check_k(k)
    det = determinize(build_product(g, r), cap)
    cur = [1 if f else 0 for f in det.final]
    for _ in range(k):
        cur = [sum(cur[w] for _, _, w in outs) for outs in det.steps]
    return sum(cur[i] for i in det.start)


# -- run sampling ---------------------------------------------------------------


class RunSampler:
    """Uniform sampling of accepting length-``k`` runs in a product graph.

    ``starts`` and ``final`` optionally restrict the runs, e.g. to paths
    between a fixed pair of nodes.
    """

    def __init__(self, p, k, starts=None, final=None):
        self.p = p
        self.k = k
        self.starts = tuple(p.start if starts is None else (s for s in starts if s in p.vertices))
        self.finals = frozenset(v for v in p.finals if final is None or final(v))
        runs = [{v: 1 for v in self.finals}]
        for _ in range(k):
            prev = runs[-1]
            nxt = {}
            for v in p.vertices:
                c = sum(prev.get(w, 0) for _, _, w in p.steps[v])
                if c:
                    nxt[v] = c
            runs.append(nxt)
        self.runs = runs
        self.total = sum(runs[k].get(s, 0) for s in self.starts)
        self._cum = {}
        self._by_edge = {}
        self._amb = {}
        self._start_cum = list(accumulate(runs[k].get(s, 0) for s in self.starts))

    def _choose(self, cum, rng):
        return bisect_right(cum, rng.randrange(cum[-1]))

    def sample(self, rng):
        """One accepting run, returned as its underlying path."""
        v = self.starts[self._choose(self._start_cum, rng)]
        nodes, edges = [v[0]], []
        for rem in range(self.k - 1, -1, -1):
            key = (v, rem)
            hit = self._cum.get(key)
            if hit is None:
                outs = self.p.steps[v]
                hit = self._cum[key] = (outs, list(accumulate(self.runs[rem].get(w, 0) for _, _, w in outs)))
            outs, cum = hit
            e, _, v = outs[self._choose(cum, rng)]
            nodes.append(v[0])
            edges.append(e)
        return Path(tuple(nodes), tuple(edges))

    def ambiguity(self, path):
        """Number of accepting runs over ``path``."""
        key = (path.nodes, path.edges)
        hit = self._amb.get(key)
        if hit is not None:
            return hit
        cur = defaultdict(int)
        for s in self.starts:
            if s[0] == path.nodes[0]:
                cur[s] += 1
        for e, m in zip(path.edges, path.nodes[1:]):
            nxt = defaultdict(int)
            for v, c in cur.items():
                for w in self._successors(v, e):
                    if w[0] == m:
                        nxt[w] += c
            cur = nxt
        hit = self._amb[key] = sum(c for v, c in cur.items() if v in self.finals)
        return hit

    def _successors(self, v, e):
        key = (v, e)
        hit = self._by_edge.get(key)
        if hit is None:
            hit = self._by_edge[key] = tuple(w for e2, _, w in self.p.steps[v] if e2 == e)
        return hit


def sample_size(epsilon, confidence=0.95):
    """Samples drawn by :func:`count_approx`: ``ceil(8 / eps**2 * ln(1 / (1 - confidence)))``."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    return math.ceil(math.ceil(8 / epsilon**2) * math.log(1 / (1 - confidence)))


@dataclass(frozen=True)
class Estimate:
    estimate: float
    samples: int
    epsilon: float
    runs: int = 0

    def to_json(self):
        return {"estimate": self.estimate, "samples": self.samples, "epsilon": self.epsilon}


def estimate_count(sampler, epsilon, seed=0, weight=None, confidence=0.95):
    """``R * mean(weight(p) / amb(p))`` over uniformly sampled runs; ``weight`` defaults to 1."""
    if sampler.total == 0:
        return Estimate(0.0, 0, epsilon, 0)
    rng = random.Random(seed)
    m = sample_size(epsilon, confidence)
    acc = 0.0
    for _ in range(m):
        path = sampler.sample(rng)
        w = 1 if weight is None else weight(path)
        if w:
            acc += w / sampler.ambiguity(path)
    return Estimate(sampler.total * acc / m, m, epsilon, sampler.total)


def count_approx(g, r, k, epsilon=0.1, seed=0, confidence=0.95):
    """Unbiased estimate of the number of paths of ``r`` with length ``k``."""
    _check_k(k)
    sample_size(epsilon, confidence)
    return estimate_count(RunSampler(build_product(g, r), k), epsilon, seed, confidence=confidence)


# -- uniform generation -----------------------------------------------------------


class PathSampler:
    """Uniform generator of the length-``k`` paths of an expression.

    Preprocessing builds walk-count tables over the deterministic product,
    after which every :meth:`draw` is exactly uniform.  If the subset
    construction exceeds ``cap``, draws fall back to run sampling with
    acceptance probability ``1 / amb(p)``, which is uniform as well.
    """

    def __init__(self, g, r, k, seed=0, cap=DEFAULT_CAP):
        _check_k(k)
        self.k = k
        self.rng = random.Random(seed)
        p = build_product(g, r)
        try:
            self.det = determinize(p, cap)
        except CapExceeded:
            self.det = None
        if self.det is not None:
            self.mode = "exact"
            self.table = self.det.walk_counts(k)
            top = self.table[k]
            self.support_size = sum(top[i] for i in self.det.start)
            self._start_cum = list(accumulate(top[i] for i in self.det.start))
            self._cum = {}
        else:
            self.mode = "rejection"
            self.runs = RunSampler(p, k)
            self.support_size = None
            if self.runs.total == 0:
                raise EmptySupport(f"no path of length {k} conforms to the expression")
        if self.mode == "exact" and self.support_size == 0:
            raise EmptySupport(f"no path of length {k} conforms to the expression")

    def draw(self):
        if self.mode == "rejection":
            while True:
                path = self.runs.sample(self.rng)
                amb = self.runs.ambiguity(path)
                if amb == 1 or self.rng.randrange(amb) == 0:
                    return path
        det, rng = self.det, self.rng
        i = det.start[bisect_right(self._start_cum, rng.randrange(self._start_cum[-1]))]
        nodes, edges = [det.vertices[i][0]], []
        for rem in range(self.k - 1, -1, -1):
            key = (i, rem)
            cum = self._cum.get(key)
            if cum is None:
                cum = self._cum[key] = list(accumulate(self.table[rem][w] for _, _, w in det.steps[i]))
            e, m, i = det.steps[i][bisect_right(cum, rng.randrange(cum[-1]))]
            nodes.append(m)
            edges.append(e)
        return Path(tuple(nodes), tuple(edges))

    def __iter__(self):
        while True:
            yield self.draw()


def prepare_sampler(g, r, k, seed=0, cap=DEFAULT_CAP):
    return PathSampler(g, r, k, seed, cap)


def draw(sampler):
    return sampler.draw()
