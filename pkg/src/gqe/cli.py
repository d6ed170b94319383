"""Command-line interface: ``gqe <subcommand> ...``.

Results go to stdout as JSON lines (or tab-separated with ``--format tsv``).
Errors go to stderr as one JSON object.  Exit status is 0 on success, 1
when the query or input is rejected and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path as FsPath

from . import analytics, engine, graph, logic, neural, xai
from .automaton import DEFAULT_CAP, compile_regex, determinize
from .errors import CapExceeded, GqeError, UnknownNode
from .fixtures import FIXTURES, fixture_path
from .query import parse, parse_for


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- helpers -------------------------------------------------------------------------


def _resolve(path):
    """A file path, or the name of a bundled fixture (``fig1a`` or ``fig1a.json``)."""
    p = FsPath(path)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in FIXTURES:
        return fixture_path(stem)
    raise UsageError(f"no such file: {path}")


def _read_json(path):
    with _resolve(path).open(encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise graph.GraphError(graph.Violation("bad json", f"{path}: {exc}")) from exc


def _load_graph(path):
    doc = _read_json(path)
    doc.pop("root", None)
    return graph.Graph.from_dict(doc)


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GQE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"GQE_SEED must be an integer, got {env!r}") from None


def _assignment(text):
    out = {}
    for part in filter(None, (text or "").split(",")):
        name, sep, value = part.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"expected var=value, got {part!r}")
        out[name.strip()] = value.strip()
    return out


def _epsilon(text):
    eps = float(text)
    if not 0 < eps < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return eps


def _nonneg(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return n


def _path_record(p):
    return {"path": str(p), **p.to_json()}


# -- subcommands ---------------------------------------------------------------------


def cmd_nodes(args):
    g = _load_graph(args.graph)
    return [{"node": n} for n in sorted(engine.select_nodes(g, args.test))]


def cmd_paths(args):
    g = _load_graph(args.graph)
    if args.dot:
        r = parse_for(g, args.query)
        if args.dot == "automaton":
            return compile_regex(r).to_dot()
        p = engine.build_product(g, r)
        return p.to_dot() if args.dot == "product" else determinize(p, args.cap).to_dot()
    return [_path_record(p) for p in engine.enumerate_paths(g, args.query, args.max_len)]


def cmd_reach(args):
    g = _load_graph(args.graph)
    return [{"node": n} for n in sorted(engine.reachable_from(g, args.query))]


def cmd_pairs(args):
    g = _load_graph(args.graph)
    return [{"start": a, "end": b} for a, b in sorted(engine.pairs(g, args.query))]


def cmd_count(args):
    g = _load_graph(args.graph)
    if not args.approx:
        try:
            return [{"exact": engine.count_exact(g, args.query, args.len, args.cap)}]
        except CapExceeded as exc:
            print(json.dumps({"warning": f"{exc}; falling back to the estimator"}), file=sys.stderr)
    est = engine.count_approx(g, args.query, args.len, args.epsilon, _seed(args))
    return [est.to_json()]


def cmd_sample(args):
    g = _load_graph(args.graph)
    s = engine.prepare_sampler(g, args.query, args.len, _seed(args), args.cap)
    return [_path_record(engine.draw(s)) for _ in range(args.n)]


def cmd_centrality(args):
    g = _load_graph(args.graph)
    if args.node and not g.has_node(args.node):
        raise UnknownNode(args.node)
    if args.approx and args.query is None:
        raise UsageError("--approx needs --query")
    if args.approx:
        seed = _seed(args)
        targets = [args.node] if args.node else g.nodes
        values = {x: analytics.bc_r_approx(g, x, args.query, args.epsilon, seed) for x in targets}
    elif args.node:
        x = args.node
        values = {x: analytics.bc(g, x) if args.query is None else analytics.bc_r(g, x, args.query, args.cap)}
    else:
        values = analytics.bc_all(g) if args.query is None else analytics.bc_r_all(g, args.query, args.cap)
    rows = [{"node": x, "bc": v} for x, v in values.items()]
    rows.sort(key=lambda r: (-r["bc"], r["node"]))
    return rows


def cmd_gnn(args):
    g = _load_graph(args.graph)
    model = neural.Gnn.from_dict(_read_json(args.model))
    snaps = neural.run_layers(g, model)
    out = []
    if args.trace:
        for i, snap in enumerate(snaps):
            rec = {"layer": i, "features": {u: list(v) for u, v in snap.items()}}
            if i:
                rec["flagged"] = sorted(neural.changed_nodes(snaps, i))
            out.append(rec)
    out.append({"true": sorted(neural.classify(g, model))})
    return out


def cmd_wl(args):
    g = _load_graph(args.graph)
    direction = "directed" if args.directed else "undirected"
    colors = neural.wl_colors(g, args.rounds, direction, args.edge_features)
    return [{"round": t, "colors": c} for t, c in enumerate(colors)]


def cmd_fo2(args):
    if args.action == "translate":
        if not args.query:
            raise UsageError("fo2 translate needs --query")
        r = parse_for(_load_graph(args.graph), args.query) if args.graph else parse(args.query)
        phi = logic.regex_to_fo2(r)
        return [{"formula": logic.to_string(phi)}]
    formulas = []
    if args.formula:
        formulas.append(args.formula)
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            formulas += [line.strip() for line in fh if line.strip() and not line.startswith("#")]
    if not formulas:
        raise UsageError("fo2 needs --formula or --file")
    if args.action == "check":
        out = []
        for text in formulas:
            bad = logic.validate_two_var(logic.parse_formula(text))
            out.append({"formula": text, "ok": bad is None, **({"violation": bad.detail} if bad else {})})
        return out
    if not args.graph:
        raise UsageError("fo2 eval needs --graph")
    g = _load_graph(args.graph)
    out = []
    for text in formulas:
        res = logic.eval_formula(g, text)
        if isinstance(res, bool):
            out.append({"formula": text, "value": res})
        elif res and isinstance(next(iter(res)), tuple):
            out.append({"formula": text, "pairs": [list(p) for p in sorted(res)]})
        else:
            out.append({"formula": text, "nodes": sorted(res)})
    return out


def cmd_xai(args):
    m = xai.DecisionModel.from_dict(_read_json(args.model))
    inst = _assignment(args.instance)
    partial = _assignment(args.partial)
    q = args.query
    if q == "classify":
        return [{"instance": m.normalize(inst), "class": xai.classify(m, inst)}]
    if q == "exists":
        found, w = xai.exists_instance(m, _target(args), partial)
        return [{"exists": found, "witness": w}]
    if q == "suffreason":
        return [{"sufficient": xai.is_sufficient_reason(m, partial, _target(args))}]
    if q == "minreason":
        return [{"reason": xai.minimal_sufficient_reason(m, inst, args.mode)}]
    if q == "allminreasons":
        return [{"reason": r} for r in xai.all_minimal_sufficient_reasons(m, _target(args))]
    if q == "bias":
        if not args.feature:
            raise UsageError("xai bias needs --feature")
        biased, w = xai.is_biased(m, args.feature)
        rec = {"feature": args.feature, "biased": biased}
        if w:
            rec["witness"] = [w.low, w.high]
            rec["classes"] = [w.low_class, w.high_class]
        return [rec]
    raise UsageError(f"unknown xai query {q!r}")


def _target(args):
    if args.target is None:
        raise UsageError(f"xai {args.query} needs --target")
    return args.target


def cmd_convert(args):
    if args.rdf:
        with open(args.rdf, encoding="utf-8") as fh:
            out = graph.import_rdf(fh.read())
    else:
        if not args.graph:
            raise UsageError("convert needs --graph or --rdf")
        g = _load_graph(args.graph)
        cols = args.columns.split(",") if args.columns else None
        out = graph.to_property_graph(g, cols) if args.to == "property" else graph.to_vector_labeled(g, cols)
    return [out.to_dict()]


def cmd_validate(args):
    doc = _read_json(args.graph)
    doc.pop("root", None)
    bad = graph.validate(doc)
    if bad is None:
        return [{"ok": True}]
    rec = {"ok": False, "kind": bad.kind, "detail": bad.detail}
    return [rec], 1


# Each subcommand with the library operations it exposes.  Parsing, printing
# and path concatenation are building blocks used by every command and are
# not listed.
COMMANDS = {
    "nodes": (cmd_nodes, ("engine.select_nodes",)),
    "paths": (cmd_paths, ("engine.enumerate_paths", "automaton.compile_regex", "automaton.product",
                          "automaton.determinize")),
    "reach": (cmd_reach, ("engine.reachable_from",)),
    "pairs": (cmd_pairs, ("engine.pairs",)),
    "count": (cmd_count, ("engine.count_exact", "engine.count_approx")),
    "sample": (cmd_sample, ("engine.prepare_sampler", "engine.draw")),
    "centrality": (cmd_centrality, ("analytics.bc", "analytics.bc_r", "analytics.bc_r_approx")),
    "gnn": (cmd_gnn, ("neural.run_layers", "neural.classify")),
    "wl": (cmd_wl, ("neural.wl_colors",)),
    "fo2": (cmd_fo2, ("logic.eval_formula", "logic.regex_to_fo2", "logic.validate_two_var")),
    "xai": (cmd_xai, (
        "xai.classify", "xai.exists_instance", "xai.is_sufficient_reason",
        "xai.minimal_sufficient_reason", "xai.all_minimal_sufficient_reasons", "xai.is_biased",
    )),
    "convert": (cmd_convert, ("graph.to_vector_labeled", "graph.to_property_graph", "graph.import_rdf")),
    "validate": (cmd_validate, ("graph.validate",)),
}


def build_parser():
    parser = _Parser(prog="gqe", description="Graph query engine")
    parser.add_argument("--format", choices=("json", "tsv"), default="json")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help, graph=True, query=False):
        p = sub.add_parser(name, help=help)
        if graph:
            p.add_argument("-g", "--graph", required=graph == "required", help="graph JSON file or fixture name")
        if query:
            p.add_argument("-q", "--query", required=True, help="regular path expression")
        p.add_argument("--format", choices=("json", "tsv"), default=argparse.SUPPRESS)
        return p

    def estimator(p):
        p.add_argument("--epsilon", type=_epsilon, default=0.1)
        p.add_argument("--seed", type=int, default=None, help="default 0, or $GQE_SEED")

    p = add("nodes", "nodes passing a test", "required")
    p.add_argument("-t", "--test", required=True)

    p = add("paths", "enumerate paths up to a length", "required", query=True)
    p.add_argument("--max-len", type=_nonneg, required=True)
    p.add_argument("--dot", choices=("automaton", "product", "deterministic"),
                   help="print a Graphviz dump instead of paths")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)

    add("reach", "nodes where an answer path starts", "required", query=True)
    add("pairs", "(start, end) pairs of answer paths", "required", query=True)

    p = add("count", "count paths of an exact length", "required", query=True)
    p.add_argument("--len", type=_nonneg, required=True)
    p.add_argument("--approx", action="store_true", help="use the randomized estimator")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    estimator(p)

    p = add("sample", "uniformly random paths of an exact length", "required", query=True)
    p.add_argument("--len", type=_nonneg, required=True)
    p.add_argument("-n", type=_nonneg, default=1)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    estimator(p)

    p = add("centrality", "betweenness, optionally restricted to a regex", "required")
    p.add_argument("-q", "--query")
    p.add_argument("-x", "--node")
    p.add_argument("--approx", action="store_true")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    estimator(p)

    p = add("gnn", "classify nodes with a GNN model", "required")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("--trace", action="store_true", help="also print every layer")

    p = add("wl", "Weisfeiler-Lehman colors", "required")
    p.add_argument("--rounds", type=_nonneg, default=1)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--edge-features", action="store_true")

    p = add("fo2", "two-variable logic")
    p.add_argument("action", choices=("eval", "translate", "check"))
    p.add_argument("-f", "--formula")
    p.add_argument("--file", help="one formula per line")
    p.add_argument("-q", "--query", help="star-free regex to translate")

    p = add("xai", "queries on a decision model", graph=False)
    p.add_argument("query", choices=("classify", "exists", "suffreason", "minreason", "allminreasons", "bias"))
    p.add_argument("-m", "--model", required=True)
    p.add_argument("--instance", help="total instance, e.g. x=1,y=0")
    p.add_argument("--partial", help="partial instance, e.g. x=1")
    p.add_argument("--target", type=int, choices=(0, 1))
    p.add_argument("--feature")
    p.add_argument("--mode", choices=("subset", "cardinality"), default="subset")

    p = add("convert", "property <-> vector encoding, RDF import")
    p.add_argument("--to", choices=("vector", "property"), default="vector")
    p.add_argument("--columns", help="comma-separated column order")
    p.add_argument("--rdf", help="N-Triples file to import")

    add("validate", "check a graph document", "required")
    return parser


def _emit(rows, fmt, out):
    if isinstance(rows, str):
        out.write(rows)
        return
    if fmt == "json":
        for r in rows:
            out.write(json.dumps(r, ensure_ascii=False) + "\n")
        return
    if rows:
        keys = list(rows[0])
        out.write("\t".join(keys) + "\n")
    for r in rows:
        cells = [v if isinstance(v, str) else json.dumps(v, ensure_ascii=False) for v in r.values()]
        out.write("\t".join(cells) + "\n")


def _fail(kind, message, code):
    print(json.dumps({"error": kind, "message": message}, ensure_ascii=False), file=sys.stderr)
    return code


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    handler = COMMANDS[args.command][0]
    try:
        res = handler(args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except (GqeError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    except OSError as exc:
        return _fail("usage", str(exc), 2)
    code = 0
    if isinstance(res, tuple):
        res, code = res
    _emit(res, args.format, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
