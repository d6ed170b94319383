"""Decision models stored as labeled graphs, and interpretability queries on them.

A model is a rooted binary decision graph.  Internal nodes are labeled
with a variable name and have one out-edge labeled ``0`` and one labeled
``1``; leaves are labeled ``0`` or ``1``.  Models must be read-once: no
root-to-leaf path tests a variable twice.  Then every path consistent with
a partial instance can be completed, so "some completion classifies as c"
is a plain search over consistent paths.

Bias is read as: flipping only the protected variable changes the
classification of some total instance.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations, product

from .errors import ModelError, VariableLimitExceeded
from .graph import Graph

MAX_VARIABLES = 20
OUTCOMES = ("0", "1")


def _bit(value, var):
    if value in (0, 1) and not isinstance(value, bool):
        return value
    if value in ("0", "1"):
        return int(value)
    raise ModelError(f"variable {var!r} must be 0 or 1, got {value!r}")


class DecisionModel:
    def __init__(self, graph, root, variables=None):
        if graph.flavor != "labeled":
            raise ModelError(f"decision models are labeled graphs, not {graph.flavor} graphs")
        if not graph.has_node(root):
            raise ModelError(f"root {root!r} is not a node")
        self.graph = graph
        self.root = root
        self.children = {}
        for n in graph.nodes:
            outs = {graph.label(e): graph.endpoints(e)[1] for e in graph.out_edges(n)}
            if not outs:
                if graph.label(n) not in OUTCOMES:
                    raise ModelError(f"leaf {n!r} must be labeled 0 or 1, not {graph.label(n)!r}")
                continue
            if len(graph.out_edges(n)) != 2 or set(outs) != set(OUTCOMES):
                raise ModelError(f"node {n!r} needs exactly one 0-edge and one 1-edge")
            if graph.label(n) in OUTCOMES:
                raise ModelError(f"internal node {n!r} is labeled like a leaf")
            self.children[n] = (outs["0"], outs["1"])
        used = {graph.label(n) for n in self.children}
        if variables is None:
            variables = used
        elif not used <= set(variables):
            raise ModelError(f"undeclared variables: {sorted(used - set(variables))}")
        self.variables = tuple(sorted(variables))
        self._check_shape()

    def _check_shape(self):
        """Every node reachable from the root, no cycles, read-once."""
        below = {}
        state = {}

        def visit(n):
            # iterative post-order to stay clear of the recursion limit
            stack = [(n, False)]
            while stack:
                u, done = stack.pop()
                if done:
                    state[u] = 2
                    acc = set()
                    for c in self.children.get(u, ()):
                        acc |= below[c]
                    if u in self.children:
                        var = self.graph.label(u)
                        if var in acc:
                            raise ModelError(f"variable {var!r} is read twice below node {u!r}")
                        acc.add(var)
                    below[u] = frozenset(acc)
                    continue
                if state.get(u) == 2:
                    continue
                if state.get(u) == 1:
                    raise ModelError(f"cycle through node {u!r}")
                state[u] = 1
                stack.append((u, True))
                for c in self.children.get(u, ()):
                    if state.get(c) == 1:
                        raise ModelError(f"cycle through node {c!r}")
                    if state.get(c) != 2:
                        stack.append((c, False))

        visit(self.root)
        stray = [n for n in self.graph.nodes if n not in state]
        if stray:
            raise ModelError(f"nodes not reachable from the root: {stray}")

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        if "root" not in doc:
            raise ModelError("decision model documents need a 'root'")
        root = doc.pop("root")
        variables = doc.pop("variables", None)
        return cls(Graph.from_dict(doc), root, variables)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def var(self, n):
        return self.graph.label(n)

    def is_leaf(self, n):
        return n not in self.children

    def normalize(self, partial):
        """Check a partial instance and coerce its values to ints."""
        out = {}
        for var, value in dict(partial or {}).items():
            if var not in self.variables:
                raise ModelError(f"unknown variable {var!r}")
            out[var] = _bit(value, var)
        return out

    def _check_size(self):
        if len(self.variables) > MAX_VARIABLES:
            raise VariableLimitExceeded(
                f"{len(self.variables)} variables; exhaustive queries allow at most {MAX_VARIABLES}")

    def instances(self, fixed=None):
        """All total instances extending ``fixed``, in lexicographic order."""
        fixed = self.normalize(fixed)
        free = [v for v in self.variables if v not in fixed]
        for bits in product((0, 1), repeat=len(free)):
            inst = {**fixed, **dict(zip(free, bits))}
            yield {v: inst[v] for v in self.variables}


def classify(m, inst):
    inst = m.normalize(inst)
    n = m.root
    while not m.is_leaf(n):
        var = m.var(n)
        if var not in inst:
            raise ModelError(f"instance does not assign {var!r}")
        n = m.children[n][inst[var]]
    return int(m.graph.label(n))


def find_instance(m, target, partial=None):
    """A total instance extending ``partial`` classified as ``target``, or ``None``."""
    target = _bit(target, "target")
    partial = m.normalize(partial)
    dead = set()
    path = {}

    def search(n):
        if m.is_leaf(n):
            return int(m.graph.label(n)) == target
        if n in dead:
            return False
        var = m.var(n)
        bits = (partial[var],) if var in partial else (0, 1)
        for b in bits:
            path[var] = b
            if search(m.children[n][b]):
                return True
            del path[var]
        dead.add(n)
        return False

    if not search(m.root):
        return None
    witness = {v: 0 for v in m.variables}
    witness.update(partial)
    witness.update(path)
    return {v: witness[v] for v in m.variables}


def exists_instance(m, target, partial=None):
    """``(found, witness)``: whether some completion of ``partial`` is classified ``target``."""
    w = find_instance(m, target, partial)
    return w is not None, w


def is_sufficient_reason(m, partial, target):
    """Every completion of ``partial`` is classified ``target``."""
    return find_instance(m, 1 - _bit(target, "target"), partial) is None


def minimal_sufficient_reason(m, inst, mode="subset"):
    """A minimal part of total instance ``inst`` that still forces its class.

    ``mode="subset"`` drops assignments greedily in variable order and
    returns a subset-minimal reason.  ``mode="cardinality"`` searches all
    subsets by size and returns a smallest one, first in lexicographic
    order of variables.
    """
    inst = m.normalize(inst)
    missing = [v for v in m.variables if v not in inst]
    if missing:
        raise ModelError(f"instance is not total, missing {missing}")
    target = classify(m, inst)
    if mode == "subset":
        kept = dict(inst)
        for v in m.variables:
            trial = {k: b for k, b in kept.items() if k != v}
            if is_sufficient_reason(m, trial, target):
                kept = trial
        return kept
    if mode == "cardinality":
        m._check_size()
        for size in range(len(m.variables) + 1):
            for vs in combinations(m.variables, size):
                part = {v: inst[v] for v in vs}
                if is_sufficient_reason(m, part, target):
                    return part
    raise ValueError(f"mode must be 'subset' or 'cardinality', got {mode!r}")


def all_minimal_sufficient_reasons(m, target):
    """Every subset-minimal partial instance sufficient for ``target``, smallest first."""
    m._check_size()
    target = _bit(target, "target")
    found = []
    for size in range(len(m.variables) + 1):
        for vs in combinations(m.variables, size):
            for bits in product((0, 1), repeat=size):
                part = dict(zip(vs, bits))
                if any(r.items() <= part.items() for r in found):
                    continue
                if is_sufficient_reason(m, part, target):
                    found.append(part)
    return found


@dataclass(frozen=True)
class BiasWitness:
    low: dict
    high: dict
    low_class: int
    high_class: int


def find_bias_witness(m, feature):
    """The first total instance (in lexicographic order) whose class flips with ``feature``."""
    if feature not in m.variables:
        raise ModelError(f"unknown feature {feature!r}")
    m._check_size()
    for inst in m.instances({feature: 0}):
        hi = dict(inst)
        hi[feature] = 1
        a, b = classify(m, inst), classify(m, hi)
        if a != b:
            return BiasWitness(inst, hi, a, b)
    return None


def is_biased(m, feature):
    """``(biased, witness)`` for protected variable ``feature``."""
    w = find_bias_witness(m, feature)
    return w is not None, w
