"""Exception hierarchy shared across the package.

Every error that can surface in a session transcript or an HTTP error body
derives from StatQueryError so callers can catch one base class and report
the concrete class name to the user.
"""


class StatQueryError(Exception):
    """Base class for all errors raised by this package."""


# -- data ingest ------------------------------------------------------------

class ParseError(StatQueryError):
    """Malformed delimited input (e.g. ragged row)."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class EmptyDataError(StatQueryError):
    """File has a header but no data rows."""


class SchemaError(StatQueryError):
    """Invalid header, e.g. duplicate column names."""


class AllMissingError(StatQueryError):
    """A column contains no non-missing value to infer a kind from."""


class UnknownVariableError(StatQueryError):
    """A referenced variable is not a column of the dataset."""


# -- formula ----------------------------------------------------------------

class FormulaSyntaxError(StatQueryError):
    """Formula text does not match the grammar."""


class FormulaSemanticError(StatQueryError):
    """Formula is grammatical but meaningless (e.g. response on both sides)."""


class NonContinuousResponseError(StatQueryError):
    """Model response must be a continuous column."""


class DegenerateFactorError(StatQueryError):
    """A categorical predictor has fewer than two observed levels."""


# -- intent -----------------------------------------------------------------

class UnresolvedMentionError(StatQueryError):
    """A variable mention matched no column."""


class AmbiguousMentionError(StatQueryError):
    """A variable mention matched several columns at the same tier."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class SchemaViolation(StatQueryError):
    """A language-model reply failed wire-schema validation."""


# -- stats engine -----------------------------------------------------------

class InsufficientDataError(StatQueryError):
    """Too few usable rows for the requested computation."""


class RankDeficientError(StatQueryError):
    """Design matrix is not full column rank."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class ConvergenceError(StatQueryError):
    """Iterative fit did not converge within the iteration budget."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)


class FamilyDomainError(StatQueryError):
    """Response values violate the family's domain (e.g. y <= 0 for Gamma)."""


class DomainError(StatQueryError):
    """Invalid argument to a special function (non-finite input, df <= 0)."""


class IncomparableModelsError(StatQueryError):
    """Models were fit to different responses or row sets."""


# -- inference --------------------------------------------------------------

class NotInModelError(StatQueryError):
    """The requested variable is not a term of the fitted model."""


class KindError(StatQueryError):
    """A variable has the wrong kind for the requested operation."""


# -- hops -------------------------------------------------------------------

class CovarianceError(StatQueryError):
    """Coefficient covariance is not positive semidefinite."""


# -- session ----------------------------------------------------------------

class NoModelError(StatQueryError):
    """The session has no fitted model yet."""


class UnsupportedChartError(StatQueryError):
    """No chart rule exists for the requested variable combination."""


class MigrationError(StatQueryError):
    """Stored session cannot be read (corrupt or wrong schema version)."""


class DanglingReferenceError(StatQueryError):
    """Stored session references a dataset file that no longer exists."""
