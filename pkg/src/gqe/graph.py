"""Graph data models: labeled, property and vector-labeled multigraphs.

All three flavors share one immutable :class:`Graph` class.  A graph is a
multigraph ``(N, E, rho)`` plus, depending on the flavor, a label per object,
a partial property map, or a fixed-length feature vector per object.  Missing
feature entries hold the reserved atom :data:`BOTTOM`.

Graphs are built from a JSON-shaped document (see :meth:`Graph.from_dict`)
and every constructor validates it, so an instance always satisfies the
data-model invariants.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import GraphError, PathError, RdfParseError

BOTTOM = "⊥"
MODELS = ("labeled", "property", "vector")


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def _is_atom(value):
    return isinstance(value, str) and value != ""


def _check_atom(value, where):
    if not _is_atom(value):
        return Violation("bad atom", f"{where} must be a non-empty string, got {value!r}")
    if value == BOTTOM:
        return Violation("reserved atom", f"{where} uses the reserved atom {BOTTOM}")
    return None


def _check_document(doc):
    if not isinstance(doc, Mapping):
        return Violation("bad document", "graph document must be a JSON object")
    model = doc.get("model")
    if model not in MODELS:
        return Violation("unknown model", f"model must be one of {MODELS}, got {model!r}")
    nodes = doc.get("nodes", [])
    edges = doc.get("edges", [])
    dim = doc.get("dimension")
    if model == "vector":
        if dim is None:
            first = next((o.get("features") for o in [*nodes, *edges] if isinstance(o, Mapping)), None)
            dim = len(first) if isinstance(first, list) else 1
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            return Violation("bad dimension", f"dimension must be a positive integer, got {dim!r}")
        columns = doc.get("columns")
        if columns is not None and (
            not isinstance(columns, list) or len(columns) != dim or not all(_is_atom(c) for c in columns)
        ):
            return Violation("bad columns", f"columns must list {dim} non-empty names")

    seen = set()
    node_ids = set()
    for kind, objs in (("node", nodes), ("edge", edges)):
        for obj in objs:
            if not isinstance(obj, Mapping):
                return Violation("bad document", f"every {kind} must be a JSON object")
            oid = obj.get("id")
            v = _check_atom(oid, f"{kind} id")
            if v:
                return v
            if oid in seen:
                return Violation("duplicate id", f"id {oid!r} is used more than once")
            seen.add(oid)
            if kind == "node":
                node_ids.add(oid)
            else:
                for end in ("src", "dst"):
                    if obj.get(end) not in node_ids:
                        return Violation(
                            "dangling endpoint", f"edge {oid!r} {end} {obj.get(end)!r} is not a node"
                        )
            if model in ("labeled", "property"):
                if "label" not in obj:
                    return Violation("missing label", f"{kind} {oid!r} has no label")
                v = _check_atom(obj["label"], f"label of {oid!r}")
                if v:
                    return v
                if "features" in obj:
                    return Violation("wrong payload", f"{kind} {oid!r} carries features in a {model} graph")
            props = obj.get("props")
            if props is not None:
                if model != "property":
                    return Violation("wrong payload", f"{kind} {oid!r} carries props in a {model} graph")
                if not isinstance(props, Mapping):
                    return Violation("bad document", f"props of {oid!r} must be an object")
                for name, value in props.items():
                    v = _check_atom(name, f"property name on {oid!r}") or _check_atom(
                        value, f"property {name!r} of {oid!r}"
                    )
                    if v:
                        return v
            if model == "vector":
                feats = obj.get("features")
                if not isinstance(feats, list):
                    return Violation("missing features", f"{kind} {oid!r} has no feature vector")
                if len(feats) != dim:
                    return Violation(
                        "dimension mismatch", f"{kind} {oid!r} has {len(feats)} features, expected {dim}"
                    )
                for i, value in enumerate(feats, 1):
                    if value is None:
                        continue
                    v = _check_atom(value, f"feature {i} of {oid!r}")
                    if v:
                        return v
                if "label" in obj:
                    return Violation("wrong payload", f"{kind} {oid!r} carries a label in a vector graph")
    return None


def validate(g):
    """Check a :class:`Graph` or a graph document against the data model.

    Returns ``None`` when every invariant holds, otherwise the first
    :class:`Violation` found (dangling endpoint, missing label, dimension
    mismatch, duplicate id, reserved atom, ...).
    """
    if isinstance(g, Graph):
        g = g.to_dict()
    return _check_document(g)


class Graph:
    """Immutable multigraph with labels, properties or feature vectors.

    Use :meth:`from_dict`, :meth:`labeled_graph`, :meth:`property_graph` or
    :meth:`vector_graph` to build one.
    """

    __slots__ = (
        "flavor", "dimension", "columns", "_nodes", "_edges", "_ends",
        "_labels", "_props", "_features", "_out", "_in",
    )

    def __init__(self, doc, *, _checked=False):
        if not _checked:
            violation = _check_document(doc)
            if violation:
                raise GraphError(violation)
        self.flavor = doc["model"]
        self._nodes = tuple(n["id"] for n in doc.get("nodes", []))
        self._edges = tuple(e["id"] for e in doc.get("edges", []))
        self._ends = {e["id"]: (e["src"], e["dst"]) for e in doc.get("edges", [])}
        self._labels = {}
        self._props = {}
        self._features = {}
        self.dimension = None
        self.columns = None
        objs = [*doc.get("nodes", []), *doc.get("edges", [])]
        if self.flavor == "vector":
            self._features = {
                o["id"]: tuple(BOTTOM if v is None else v for v in o["features"]) for o in objs
            }
            self.dimension = doc.get("dimension") or (
                len(next(iter(self._features.values()))) if self._features else 1
            )
            if doc.get("columns") is not None:
                self.columns = tuple(doc["columns"])
        else:
            self._labels = {o["id"]: o["label"] for o in objs}
            if self.flavor == "property":
                self._props = {o["id"]: MappingProxyType(dict(o.get("props") or {})) for o in objs}
        out = {n: [] for n in self._nodes}
        inc = {n: [] for n in self._nodes}
        for e, (s, d) in self._ends.items():
            out[s].append(e)
            inc[d].append(e)
        self._out = {n: tuple(es) for n, es in out.items()}
        # assigned last: its presence freezes the instance
        self._in = {n: tuple(es) for n, es in inc.items()}

    def __setattr__(self, name, value):
        if hasattr(self, "_in"):
            raise AttributeError("Graph is immutable")
        object.__setattr__(self, name, value)

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_dict(cls, doc):
        return cls(doc)

    @classmethod
    def labeled_graph(cls, nodes: Mapping[str, str], edges: Iterable[Sequence[str]]):
        """``nodes`` maps id to label; ``edges`` holds ``(id, src, dst, label)`` tuples."""
        return cls({
            "model": "labeled",
            "nodes": [{"id": n, "label": lab} for n, lab in nodes.items()],
            "edges": [{"id": e, "src": s, "dst": d, "label": lab} for e, s, d, lab in edges],
        })

    @classmethod
    def property_graph(cls, nodes, edges):
        """``nodes`` maps id to ``(label, props)``; edges are ``(id, src, dst, label, props)``."""
        return cls({
            "model": "property",
            "nodes": [{"id": n, "label": lab, "props": dict(p)} for n, (lab, p) in nodes.items()],
            "edges": [
                {"id": e, "src": s, "dst": d, "label": lab, "props": dict(p)} for e, s, d, lab, p in edges
            ],
        })

    @classmethod
    def vector_graph(cls, nodes, edges, dimension=None, columns=None):
        """``nodes`` maps id to a feature sequence; edges are ``(id, src, dst, features)``.

        :data:`BOTTOM` (or ``None``) marks a missing entry.
        """
        def enc(vec):
            return [None if v is None or v == BOTTOM else v for v in vec]

        doc = {
            "model": "vector",
            "nodes": [{"id": n, "features": enc(f)} for n, f in nodes.items()],
            "edges": [{"id": e, "src": s, "dst": d, "features": enc(f)} for e, s, d, f in edges],
        }
        if dimension is not None:
            doc["dimension"] = dimension
        if columns is not None:
            doc["columns"] = list(columns)
        return cls(doc)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    # -- accessors ------------------------------------------------------

    @property
    def nodes(self):
        return self._nodes

    @property
    def edges(self):
        return self._edges

    def has_node(self, n):
        return n in self._out

    def endpoints(self, e):
        return self._ends[e]

    def out_edges(self, n):
        return self._out[n]

    def in_edges(self, n):
        return self._in[n]

    def label(self, obj):
        """Label of a node or edge; ``None`` on vector-labeled graphs."""
        return self._labels.get(obj)

    def props(self, obj):
        return self._props.get(obj, MappingProxyType({}))

    def prop(self, obj, name):
        return self.props(obj).get(name)

    def features(self, obj):
        return self._features[obj]

    def neighbors(self, n):
        """Distinct nodes joined to ``n`` by an edge in either direction."""
        seen = {}
        for e in self._out[n]:
            seen.setdefault(self._ends[e][1], None)
        for e in self._in[n]:
            seen.setdefault(self._ends[e][0], None)
        return tuple(seen)

    def out_neighbors(self, n):
        return tuple(dict.fromkeys(self._ends[e][1] for e in self._out[n]))

    def in_neighbors(self, n):
        return tuple(dict.fromkeys(self._ends[e][0] for e in self._in[n]))

    # -- derived graphs -------------------------------------------------

    def without_node(self, x):
        """Copy of the graph with node ``x`` and its incident edges removed."""
        doc = self.to_dict()
        doc["nodes"] = [n for n in doc["nodes"] if n["id"] != x]
        doc["edges"] = [e for e in doc["edges"] if x not in (e["src"], e["dst"])]
        return Graph(doc, _checked=True)

    def to_dict(self):
        def payload(obj):
            if self.flavor == "vector":
                return {"features": [None if v == BOTTOM else v for v in self._features[obj]]}
            out = {"label": self._labels[obj]}
            if self.flavor == "property":
                out["props"] = dict(self._props[obj])
            return out

        doc = {"model": self.flavor}
        if self.flavor == "vector":
            doc["dimension"] = self.dimension
            if self.columns is not None:
                doc["columns"] = list(self.columns)
        doc["nodes"] = [{"id": n, **payload(n)} for n in self._nodes]
        doc["edges"] = [
            {"id": e, "src": self._ends[e][0], "dst": self._ends[e][1], **payload(e)} for e in self._edges
        ]
        return doc

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        a, b = self.to_dict(), other.to_dict()
        for doc in (a, b):
            doc["nodes"] = sorted(doc["nodes"], key=lambda o: o["id"])
            doc["edges"] = sorted(doc["edges"], key=lambda o: o["id"])
        return a == b

    __hash__ = None

    def __repr__(self):
        return f"Graph({self.flavor}, {len(self._nodes)} nodes, {len(self._edges)} edges)"


# -- conversions ----------------------------------------------------------

def to_vector_labeled(g, columns=None):
    """Encode a property graph as a vector-labeled graph.

    Feature 1 holds the label and each property name gets one later column;
    absent properties become :data:`BOTTOM`.  Property columns default to the
    sorted property names; pass ``columns`` to fix another order.  The
    returned graph records the header in ``g.columns``.
    """
    if g.flavor != "property":
        raise GraphError(Violation("wrong flavor", f"expected a property graph, got {g.flavor}"))
    names = sorted({p for o in (*g.nodes, *g.edges) for p in g.props(o)})
    if columns is None:
        columns = names
    else:
        columns = list(columns)
        missing = set(names) - set(columns)
        if missing or len(set(columns)) != len(columns):
            raise GraphError(Violation("bad columns", f"columns must list each property once, missing {sorted(missing)}"))
    header = ["label", *columns]

    def vec(obj):
        return [g.label(obj), *(g.prop(obj, c) for c in columns)]

    return Graph.vector_graph(
        {n: vec(n) for n in g.nodes},
        [(e, *g.endpoints(e), vec(e)) for e in g.edges],
        dimension=len(header),
        columns=header,
    )


def to_property_graph(g, columns=None):
    """Inverse of :func:`to_vector_labeled` given the column header."""
    header = list(columns or g.columns or [])
    if g.flavor != "vector" or len(header) != g.dimension or header[:1] != ["label"]:
        raise GraphError(Violation("bad columns", "need a vector graph and a header starting with 'label'"))

    def split(obj):
        f = g.features(obj)
        return f[0], {c: v for c, v in zip(header[1:], f[1:]) if v != BOTTOM}

    return Graph.property_graph(
        {n: split(n) for n in g.nodes},
        [(e, *g.endpoints(e), *split(e)) for e in g.edges],
    )


# -- RDF ------------------------------------------------------------------

_NT_TERM = re.compile(r'\s*(<[^<>]*>|"(?:[^"\\]|\\.)*"|[^\s<>"]+)')


def _nt_term(tok):
    if tok.startswith("<"):
        return tok[1:-1]
    if tok.startswith('"'):
        return re.sub(r"\\(.)", r"\1", tok[1:-1])
    return tok


def parse_ntriples(text):
    """Parse the supported N-Triples subset into ``(s, p, o)`` tuples.

    One triple per line, terms written as ``<iri>``, ``"literal"`` or bare
    atoms, with an optional terminating ``.``.  Blank lines and ``#``
    comments are skipped.
    """
    triples = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.endswith("."):
            head = line[:-1]
            if head.endswith((" ", "\t", ">", '"')):
                line = head.rstrip()
        terms, pos = [], 0
        while pos < len(line):
            m = _NT_TERM.match(line, pos)
            if not m:
                raise RdfParseError(lineno, f"cannot read a term at column {pos + 1}")
            terms.append(_nt_term(m.group(1)))
            pos = m.end()
            while pos < len(line) and line[pos].isspace():
                pos += 1
        if len(terms) != 3:
            raise RdfParseError(lineno, f"expected 3 terms, found {len(terms)}")
        for t in terms:
            if t == "" or t == BOTTOM:
                raise RdfParseError(lineno, f"invalid atom {t!r}")
        triples.append(tuple(terms))
    return triples


def import_rdf(triples):
    """Build a labeled graph from RDF triples.

    Every distinct subject/object becomes a node labeled with its own
    identifier; every distinct triple becomes an edge ``t<i>`` (numbered in
    first-occurrence order) labeled with the predicate.  Accepts an iterable
    of triples or N-Triples text.
    """
    if isinstance(triples, str):
        triples = parse_ntriples(triples)
    unique = list(dict.fromkeys(tuple(t) for t in triples))
    nodes = {}
    for s, _, o in unique:
        nodes.setdefault(s, s)
        nodes.setdefault(o, o)
    return Graph.labeled_graph(nodes, [(f"t{i}", s, o, p) for i, (s, p, o) in enumerate(unique)])


# -- paths ----------------------------------------------------------------

@dataclass(frozen=True)
class Path:
    """A walk ``n0 e1 n1 ... ek nk``; a single node is a path of length 0."""

    nodes: tuple
    edges: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        if not self.nodes:
            raise PathError("a path has at least one node")
        if len(self.edges) != len(self.nodes) - 1:
            raise PathError("a path alternates nodes and edges")

    @property
    def length(self):
        return len(self.edges)

    def __len__(self):
        return len(self.edges)

    @property
    def start(self):
        return self.nodes[0]

    @property
    def end(self):
        return self.nodes[-1]

    def items(self):
        """Interleaved sequence ``(n0, e1, n1, ...)``."""
        out = [self.nodes[0]]
        for e, n in zip(self.edges, self.nodes[1:]):
            out += (e, n)
        return tuple(out)

    def sort_key(self):
        return (len(self.edges), self.items())

    def concat(self, other):
        return concat(self, other)

    def is_walk_in(self, g):
        """Each edge joins its neighbours in the sequence, in one direction or the other."""
        if not all(g.has_node(n) for n in self.nodes):
            return False
        for a, e, b in zip(self.nodes, self.edges, self.nodes[1:]):
            if e not in g._ends or g.endpoints(e) not in ((a, b), (b, a)):
                return False
        return True

    def to_json(self):
        return {"nodes": list(self.nodes), "edges": list(self.edges)}

    def __str__(self):
        return " ".join(self.items())


def concat(p, q):
    """Join ``p`` and ``q`` at ``end(p) == start(q)``."""
    if p.end != q.start:
        raise PathError(f"cannot concatenate: path ends at {p.end!r} but next starts at {q.start!r}")
    return Path(p.nodes + q.nodes[1:], p.edges + q.edges)
