"""Exception hierarchy shared by every module."""


class GqeError(Exception):
    """Base class for all query-engine errors."""


class GraphError(GqeError, ValueError):
    """A graph document or construction call violates a data-model invariant."""

    def __init__(self, violation):
        self.violation = violation
        super().__init__(str(violation))


class RdfParseError(GqeError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class PathError(GqeError, ValueError):
    """Raised on an ill-formed path operation, e.g. concatenating non-adjacent paths."""


class QueryError(GqeError, ValueError):
    pass


class QuerySyntaxError(QueryError):
    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} at byte {offset}")


class FlavorError(QueryError):
    """A test atom is not legal for the graph flavor it is evaluated on."""


class CapExceeded(GqeError):
    """Subset construction grew past the vertex cap; use the approximate counter."""

    def __init__(self, cap, hint="use the approximate counter"):
        self.cap = cap
        super().__init__(f"deterministic product exceeds cap of {cap} vertices; {hint}")


class EmptySupport(GqeError):
    pass


class UnknownNode(GqeError, KeyError):
    def __init__(self, node):
        self.node = node
        super().__init__(node)

    def __str__(self):
        return f"unknown node {self.node!r}"


class FormulaError(GqeError, ValueError):
    pass


class StarNotSupported(FormulaError):
    pass


class ModelError(GqeError, ValueError):
    """Invalid decision model, unknown variable or incomplete instance."""


class VariableLimitExceeded(ModelError):
    pass


class GnnError(GqeError, ValueError):
    pass
