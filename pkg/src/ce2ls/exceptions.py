"""Shared exception types."""


class GraphError(ValueError):
    """Malformed graph: bad node names, cycles, or invalid edge combinations."""


class CapacityError(RuntimeError):
    """An exhaustive operation was asked to run over a space that is too large."""


class ParseError(ValueError):
    """A text input (graph file, config file, dataset) could not be parsed.

    Carries ``line_no`` when the offending line is known.
    """

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class InsufficientDataError(ValueError):
    """Too few samples for the requested statistical operation."""


class EstimationError(ValueError):
    """Effect estimation failed (rank deficiency, empty arm, empty input)."""

    def __init__(self, message, offending_columns=()):
        self.offending_columns = tuple(offending_columns)
        super().__init__(message)


class FaithfulnessConflict(RuntimeError):
    """Contradictory identifiability evidence was observed in one search run.

    Under faithfulness a non-identifiability witness and a found adjustment
    set cannot coexist, so this is a data-quality signal rather than a state
    the search can resolve. Both pieces of evidence are attached.
    """

    def __init__(self, witness, psi_entries):
        self.witness = witness
        self.psi_entries = tuple(psi_entries)
        super().__init__(
            "conflicting identifiability evidence: "
            f"witness {witness} vs adjustment sets "
            f"{[sorted(e.z) for e in psi_entries]}"
        )


class UnusableSeedError(RuntimeError):
    """Seed screening exhausted its retries without a usable dataset."""
