"""Aggregate-combine GNNs over vector-labeled graphs, and WL color refinement.

Layer ``i + 1`` of node ``u`` is computed from its own layer-``i`` vector
and the multiset of layer-``i`` vectors of its neighbors.  In undirected
mode the neighbors of ``u`` are the nodes joined to it by an edge in either
direction; in directed mode out- and in-neighbors are two separate inputs.

Two layer kinds are available:

* ``rule``: a list of ``(self, neighbor, set)`` rules.  The first rule whose
  self test holds and that has a neighbor passing the neighbor test sets
  feature ``j`` to a value.  With no matching rule the vector is unchanged.
  Directed models use ``out`` and ``in`` conditions instead of ``neighbor``;
  with ``edge_features`` an ``edge`` test must also hold on a connecting edge.
* ``linear``: ``clamp(A u + B sum(N(u)) + b)`` with clamp to ``[0, 1]``.
  Features must be decimal numbers.

Model JSON::

    {"dimension": 2, "direction": "undirected", "edge_features": false,
     "layers": [{"kind": "rule", "rules": [{"self": "f1=bus",
                 "neighbor": "f1=infected", "set": [2, "1"]}]}],
     "csl": {"feature": 2, "equals": "1"}}

``csl`` may also be ``{"test": "<test>"}`` for a full test over the last layer.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .errors import GnnError, QueryError
from .query import Wildcard, parse_test, satisfies_vector, unparse_test

DIRECTIONS = ("undirected", "directed")
_DECIMAL = re.compile(r"[+-]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?")


@dataclass(frozen=True)
class Rule:
    self_test: object
    set_index: int
    set_value: str
    neighbor: object = None  # undirected mode
    out: object = None  # directed mode
    inc: object = None
    edge: object = None  # edge-feature test, edge_features mode only


@dataclass(frozen=True)
class RuleLayer:
    rules: tuple

    kind = "rule"


@dataclass(frozen=True)
class LinearLayer:
    A: tuple
    B: tuple
    b: tuple
    B_in: tuple | None = None  # directed mode: B reads out-neighbors, B_in in-neighbors

    kind = "linear"


@dataclass(frozen=True)
class Csl:
    test: object

    def __call__(self, vec):
        return satisfies_vector(self.test, vec)


class Gnn:
    def __init__(self, dimension, layers, csl, direction="undirected", edge_features=False):
        if not isinstance(dimension, int) or dimension < 1:
            raise GnnError(f"dimension must be a positive integer, got {dimension!r}")
        if direction not in DIRECTIONS:
            raise GnnError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
        if not layers:
            raise GnnError("a GNN needs at least one layer")
        self.dimension = dimension
        self.layers = tuple(layers)
        self.csl = csl
        self.direction = direction
        self.edge_features = bool(edge_features)
        for i, layer in enumerate(self.layers, 1):
            self._check_layer(i, layer)

    def _check_layer(self, i, layer):
        d = self.dimension
        if isinstance(layer, RuleLayer):
            for rule in layer.rules:
                if not 1 <= rule.set_index <= d:
                    raise GnnError(f"layer {i}: rule sets feature {rule.set_index}, dimension is {d}")
                if self.direction == "undirected" and (rule.out is not None or rule.inc is not None):
                    raise GnnError(f"layer {i}: out/in conditions need directed mode")
                if self.direction == "directed" and rule.neighbor is not None:
                    raise GnnError(f"layer {i}: use out/in conditions in directed mode")
                if rule.edge is not None and not self.edge_features:
                    raise GnnError(f"layer {i}: edge conditions need edge_features")
                if rule.edge is not None and self.direction == "directed" and rule.out is None and rule.inc is None:
                    raise GnnError(f"layer {i}: an edge condition needs an out or in condition")
        elif isinstance(layer, LinearLayer):
            mats = [("A", layer.A), ("B", layer.B)]
            if self.direction == "directed":
                if layer.B_in is None:
                    raise GnnError(f"layer {i}: directed linear layers need B_in")
                mats.append(("B_in", layer.B_in))
            for name, m in mats:
                if len(m) != d or any(len(row) != d for row in m):
                    raise GnnError(f"layer {i}: {name} must be {d}x{d}")
            if len(layer.b) != d:
                raise GnnError(f"layer {i}: b must have length {d}")
        else:
            raise GnnError(f"layer {i}: unknown layer {layer!r}")

    @property
    def layer_count(self):
        return len(self.layers)

    @classmethod
    def from_dict(cls, doc):
        try:
            d = doc["dimension"]
            direction = doc.get("direction", "undirected")
            ef = doc.get("edge_features", False)
            layers = [_layer_from_dict(x, d) for x in doc["layers"]]
            csl = _csl_from_dict(doc["csl"], d)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, GnnError):
                raise
            raise GnnError(f"malformed GNN model: {exc}") from exc
        return cls(d, layers, csl, direction, ef)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        layers = []
        for layer in self.layers:
            if isinstance(layer, RuleLayer):
                rules = []
                for r in layer.rules:
                    item = {"self": unparse_test(r.self_test)}
                    for key, t in (("neighbor", r.neighbor), ("out", r.out), ("in", r.inc), ("edge", r.edge)):
                        if t is not None:
                            item[key] = unparse_test(t)
                    item["set"] = [r.set_index, r.set_value]
                    rules.append(item)
                layers.append({"kind": "rule", "rules": rules})
            else:
                item = {"kind": "linear", "A": [list(r) for r in layer.A],
                        "B": [list(r) for r in layer.B], "b": list(layer.b)}
                if layer.B_in is not None:
                    item["B_in"] = [list(r) for r in layer.B_in]
                layers.append(item)
        return {"dimension": self.dimension, "direction": self.direction,
                "edge_features": self.edge_features, "layers": layers,
                "csl": {"test": unparse_test(self.csl.test)}}


def _test(text, d):
    if text is None:
        return None
    try:
        return parse_test(text, "vector", d)
    except QueryError as exc:
        raise GnnError(f"bad test {text!r}: {exc}") from exc


def _layer_from_dict(doc, d):
    kind = doc.get("kind")
    if kind == "rule":
        rules = []
        for r in doc["rules"]:
            j, v = r["set"]
            if not isinstance(j, int) or not isinstance(v, str):
                raise GnnError(f"rule action must be [index, \"value\"], got {r['set']!r}")
            rules.append(Rule(_test(r.get("self", "_"), d), j, v, _test(r.get("neighbor"), d),
                              _test(r.get("out"), d), _test(r.get("in"), d), _test(r.get("edge"), None)))
        return RuleLayer(tuple(rules))
    if kind == "linear":
        mat = lambda m: tuple(tuple(float(x) for x in row) for row in m)  # noqa: E731
        b_in = doc.get("B_in")
        return LinearLayer(mat(doc["A"]), mat(doc["B"]), tuple(float(x) for x in doc["b"]),
                           None if b_in is None else mat(b_in))
    raise GnnError(f"unknown layer kind {kind!r}")


def _csl_from_dict(doc, d):
    if "test" in doc:
        return Csl(_test(doc["test"], d))
    j = doc["feature"]
    if not isinstance(j, int) or not 1 <= j <= d:
        raise GnnError(f"csl feature {j!r} out of range 1..{d}")
    return Csl(parse_test(f"f{j}={_quote(doc['equals'])}", "vector", d))


def _quote(v):
    return '"' + str(v).replace('"', '\\"') + '"'


# -- evaluation ---------------------------------------------------------------------


def _neighborhoods(g, direction):
    """Per node: list of (neighbor, edge) pairs, per direction slot."""
    out = {}
    for u in g.nodes:
        fwd = [(g.endpoints(e)[1], e) for e in g.out_edges(u)]
        bwd = [(g.endpoints(e)[0], e) for e in g.in_edges(u)]
        out[u] = (fwd + bwd,) if direction == "undirected" else (fwd, bwd)
    return out


def _distinct(pairs):
    seen, res = set(), []
    for v, _ in pairs:
        if v not in seen:
            seen.add(v)
            res.append(v)
    return res


def _number(value, node):
    if not isinstance(value, str) or not _DECIMAL.fullmatch(value):
        raise GnnError(f"node {node!r}: feature {value!r} is not a decimal number")
    return float(value)


def _format(x):
    return str(int(x)) if x == int(x) else repr(x)


def _apply_rule_layer(g, gnn, layer, cur, nbhd):
    nxt = {}
    for u in g.nodes:
        vec = cur[u]
        for rule in layer.rules:
            if not satisfies_vector(rule.self_test, vec):
                continue
            if gnn.direction == "undirected":
                neighbor = rule.neighbor
                if neighbor is None and rule.edge is not None:
                    neighbor = Wildcard()
                conds = [(neighbor, nbhd[u][0])]
            else:
                conds = [(rule.out, nbhd[u][0]), (rule.inc, nbhd[u][1])]
            if all(_any_neighbor(g, cur, t, rule.edge, pairs) for t, pairs in conds if t is not None):
                vec = vec[:rule.set_index - 1] + (rule.set_value,) + vec[rule.set_index:]
                break
        nxt[u] = vec
    return nxt


def _any_neighbor(g, cur, test, edge_test, pairs):
    if edge_test is None:
        return any(satisfies_vector(test, cur[v]) for v in _distinct(pairs))
    return any(satisfies_vector(test, cur[v]) and satisfies_vector(edge_test, g.features(e))
               for v, e in pairs)


def _apply_linear_layer(g, gnn, layer, cur, nbhd):
    d = gnn.dimension
    nums = {u: [_number(x, u) for x in cur[u]] for u in g.nodes}
    mats = [layer.B] if gnn.direction == "undirected" else [layer.B, layer.B_in]
    nxt = {}
    for u in g.nodes:
        terms = [[layer.b[i]] + [layer.A[i][j] * nums[u][j] for j in range(d)] for i in range(d)]
        for B, pairs in zip(mats, nbhd[u]):
            agg = [math.fsum(nums[v][j] for v in _distinct(pairs)) for j in range(d)]
            for i in range(d):
                terms[i].extend(B[i][j] * agg[j] for j in range(d))
        nxt[u] = tuple(_format(min(1.0, max(0.0, math.fsum(t)))) for t in terms)
    return nxt


def run_layers(g, gnn):
    """Feature vectors per layer: ``snapshots[0]`` is the input, ``snapshots[L]`` the last layer."""
    if g.flavor != "vector":
        raise GnnError(f"GNNs run on vector-labeled graphs, not {g.flavor} graphs")
    if g.dimension != gnn.dimension:
        raise GnnError(f"graph dimension {g.dimension} does not match GNN dimension {gnn.dimension}")
    nbhd = _neighborhoods(g, gnn.direction)
    snapshots = [{u: tuple(g.features(u)) for u in g.nodes}]
    for layer in gnn.layers:
        apply = _apply_rule_layer if isinstance(layer, RuleLayer) else _apply_linear_layer
        snapshots.append(apply(g, gnn, layer, snapshots[-1], nbhd))
    return snapshots


def classify(g, gnn):
    """Nodes accepted by the classifier on the last layer."""
    last = run_layers(g, gnn)[-1]
    return {u for u in g.nodes if gnn.csl(last[u])}


def changed_nodes(snapshots, i):
    """Nodes whose vector changed at layer ``i`` (the ones a layer flags)."""
    prev, cur = snapshots[i - 1], snapshots[i]
    return {u for u in cur if cur[u] != prev[u]}


# -- Weisfeiler-Lehman ----------------------------------------------------------------


def _canonical(sigs):
    ids = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
    return {u: ids[s] for u, s in sigs.items()}


def wl_colors(g, rounds, direction="undirected", edge_features=False):
    """Color refinement: ``colors[t][u]`` is the color of ``u`` after ``t`` rounds.

    Round 0 colors come from the feature vectors (labels on other flavors).
    Round ``t + 1`` refines by the sorted multiset of neighbor colors, with
    neighbors defined as for GNN layers.  Ids are ranks of sorted
    signatures, so they are stable across runs.
    """
    if not isinstance(rounds, int) or rounds < 0:
        raise ValueError(f"rounds must be a non-negative integer, got {rounds!r}")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")

    def own(obj):
        return tuple(g.features(obj)) if g.flavor == "vector" else (g.label(obj),)

    nbhd = _neighborhoods(g, direction)
    colors = [_canonical({u: own(u) for u in g.nodes})]
    for _ in range(rounds):
        c = colors[-1]
        sigs = {}
        for u in g.nodes:
            parts = []
            for pairs in nbhd[u]:
                if edge_features:
                    by_node = {}
                    for v, e in pairs:
                        by_node.setdefault(v, []).append(own(e))
                    parts.append(tuple(sorted((c[v], tuple(sorted(es))) for v, es in by_node.items())))
                else:
                    parts.append(tuple(sorted(c[v] for v in _distinct(pairs))))
            sigs[u] = (c[u], *parts)
        colors.append(_canonical(sigs))
    return colors
