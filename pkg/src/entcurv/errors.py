"""Exception types shared across the package."""


class EntcurvError(Exception):
    """Base class for every error raised by the package."""


class NotConnected(EntcurvError):
    pass


class NotReversible(EntcurvError):
    def __init__(self, edge, defect):
        self.edge = edge
        self.defect = defect
        super().__init__(f"m(x)L(x,y) != m(y)L(y,x) on edge {edge} (relative defect {defect:.3e})")


class ZeroRateOnEdge(EntcurvError):
    pass


class SelfLoop(EntcurvError):
    pass


class UnknownVertex(EntcurvError):
    pass


class AxiomViolated(EntcurvError):
    def __init__(self, index, witness):
        self.index = index
        self.witness = witness
        super().__init__(f"move axiom ({index}) violated: {witness}")


class NotCyclicallyMonotone(EntcurvError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"pairs are not d-cyclically monotone; cycle {witness}")


class NonPositiveCoefficient(EntcurvError):
    pass


class KAtLeastOne(EntcurvError):
    def __init__(self, value, where=None):
        self.value = value
        self.where = where
        super().__init__(f"K = {value:.12g} >= 1 at {where}; bound inapplicable")


class EnumerationCapped(EntcurvError):
    pass


class NonPositiveR(EntcurvError):
    pass


class NotClassC(EntcurvError):
    pass


class MarginalsNotNormalized(EntcurvError):
    pass


class MissingMoves(EntcurvError):
    pass


class DistanceNotTwo(EntcurvError):
    pass


class DistanceBelowTwo(EntcurvError):
    pass


class NotSymmetric(EntcurvError):
    pass


class TooLargeForExact(EntcurvError):
    pass


class TooLarge(EntcurvError):
    pass


class BoundaryVertex(EntcurvError):
    pass


class HypothesisFails(EntcurvError):
    def __init__(self, witness, slack):
        self.witness = witness
        self.slack = slack
        super().__init__(f"Prekopa-Leindler hypothesis fails at {witness} (slack {slack:.3e})")


class NonPositiveCurvature(EntcurvError):
    pass


class InfiniteEntropy(EntcurvError):
    pass


class NoConvergence(EntcurvError):
    pass
