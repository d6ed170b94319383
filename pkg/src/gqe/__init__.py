"""Graph query engine: regular path queries, path counting and sampling,
regex-restricted centrality, GNN evaluation, two-variable logic and
decision-model explanations over labeled, property and vector-labeled graphs."""
from .analytics import bc, bc_all, bc_r, bc_r_all, bc_r_approx
from .automaton import DEFAULT_CAP, compile_regex, determinize, product
from .engine import (
    count_approx, count_exact, draw, enumerate_paths, pairs, prepare_sampler,
    reachable_from, select_nodes,
)
from .errors import (
    CapExceeded, EmptySupport, FlavorError, FormulaError, GnnError, GqeError, GraphError,
    ModelError, PathError, QueryError, QuerySyntaxError, RdfParseError, StarNotSupported,
    UnknownNode, VariableLimitExceeded,
)
from .graph import (
    BOTTOM, Graph, Path, concat, import_rdf, parse_ntriples, to_property_graph,
    to_vector_labeled, validate,
)
from .logic import eval_formula, parse_formula, regex_to_fo2, to_string, validate_two_var
from .neural import Gnn, changed_nodes, run_layers, wl_colors
from .neural import classify as gnn_classify
from .query import parse, parse_test, unparse, unparse_test
from .xai import (
    DecisionModel, all_minimal_sufficient_reasons, exists_instance, find_bias_witness,
    is_biased, is_sufficient_reason, minimal_sufficient_reason,
)
from .xai import classify as model_classify

__version__ = "0.1.0"
