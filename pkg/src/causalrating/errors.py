"""Exception hierarchy shared by all modules."""


class CausalRatingError(Exception):
    """Base class for every error raised by this package."""


class GraphError(CausalRatingError):
    pass


class CycleError(GraphError):
    """The requested edge set contains a directed cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("directed cycle: " + " -> ".join(map(str, self.cycle)))


class UnknownNodeError(GraphError):
    pass


class UnknownTemplate(GraphError):
    pass


class OverlapError(CausalRatingError):
    """Variable sets required to be disjoint overlap."""


class UnknownVariable(CausalRatingError):
    pass


class ModelError(CausalRatingError):
    pass


class NormalizationError(ModelError):
    """A probability row or table does not sum to one (or has negative mass)."""


class ShapeError(ModelError):
    pass


class StateSpaceTooLarge(ModelError):
    pass


class ZeroProbabilityEvidence(ModelError):
    pass


class ValueOutOfRange(ModelError):
    pass


class EmptyDataset(ModelError):
    pass


class NumericalConsistencyError(CausalRatingError):
    """Two algebraically equivalent computations disagreed beyond tolerance."""


class IdentificationError(CausalRatingError):
    pass


class CriterionNotMet(IdentificationError):
    """A graphical identification criterion failed.

    ``witness`` holds the offending trail (list of node names) or a short
    description of the failed condition.
    """

    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class LatentAdjustmentError(IdentificationError):
    """An adjustment set contains a latent (unobserved) node."""


class PositivityViolation(IdentificationError):
    """An adjustment formula referenced a zero-probability cell.

    ``cell`` names the offending configuration.
    """

    def __init__(self, message, cell=None):
        self.cell = cell
        super().__init__(message)


class ParameterError(CausalRatingError):
    pass


class NegativeTta(ParameterError):
    pass
