"""
Exception hierarchy for the view-based rewriting toolkit.

Operations for which "nothing found" is a legitimate answer return ``None``
instead of raising; everything below signals bad input, an exhausted budget,
or a broken internal guarantee.
"""

from typing import Optional


class ViewRewriteError(Exception):
    """Base class for every error raised by the package."""


class ParseError(ViewRewriteError):
    """Malformed text input (graph, regex, spec, grammar or Datalog file)."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownLabel(ViewRewriteError):
    """An edge uses a label outside the declared alphabet."""


class UnknownSymbol(ViewRewriteError):
    """A regex or word uses a symbol outside the alphabet."""


class UndeclaredSymbol(ViewRewriteError):
    """A grammar production references an undeclared symbol."""


class UnknownNode(ViewRewriteError):
    """A node id does not belong to the graph it is used with."""


class UnknownState(ViewRewriteError):
    """A state does not belong to the automaton it is used with."""


class PartialMap(ViewRewriteError):
    """A node map is not total on the source graph."""


class AlphabetMismatch(ViewRewriteError):
    """A database is not over the alphabet expected by a query or view."""


class EmptyViewSet(ViewRewriteError):
    """A view product was requested for zero views."""


class IndexOutOfRange(ViewRewriteError):
    """A path position lies outside the path."""


class CertificateFailure(ViewRewriteError):
    """A materialized counterexample failed its own post-checks."""


class ResourceLimit(ViewRewriteError):
    """A configured budget was exhausted before an answer was reached."""


class BudgetExceeded(ResourceLimit):
    """An enumeration or search outgrew its configured budget."""


class TemplateTooLarge(ResourceLimit):
    """The query automaton has too many states for the subset template."""


class EmissionTooLarge(ResourceLimit):
    """A canonical Datalog program would exceed its predicate budget."""


class UnboundHeadVariable(ViewRewriteError):
    """A Datalog rule head uses a variable that does not occur in its body."""


class NotAViewImage(ViewRewriteError):
    """No preimage database was found within the search bound."""


class NotConnected(ViewRewriteError):
    """The 3-colorability reduction requires a connected input graph."""


class FixtureMismatch(ViewRewriteError):
    """A view instance is not over the vocabulary of the chosen fixture."""
