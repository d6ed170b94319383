"""Fixture graphs and models shipped with the package (the golden-test corpus)."""
import json
from importlib import resources

FIXTURES = ("fig1a", "fig1b", "fig1c", "fig2", "fig2-gnn", "fig3")


def fixture_path(name):
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    return resources.files("gqe") / "data" / f"{name}.json"


def load_document(name):
    with fixture_path(name).open(encoding="utf-8") as fh:
        return json.load(fh)


def load_graph(name):
    from .graph import Graph

    doc = load_document(name)
    doc.pop("root", None)
    return Graph.from_dict(doc)
