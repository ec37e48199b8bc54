"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to process exit statuses without a lookup table.
"""


class FiidError(Exception):
    exit_code = 2


# precondition failures (exit 2)

class InvalidGraph(FiidError):
    pass


class DisconnectedInput(FiidError):
    pass


class BallTooLarge(FiidError):
    pass


class UnsupportedParams(FiidError):
    pass


class GenerationFailed(FiidError):
    pass


class InconsistentCounts(FiidError):
    """No reversible orbit weight exists (the input is not unimodular)."""


class BipartiteChain(FiidError):
    pass


class NotBipartite(FiidError):
    pass


class OddDegree(FiidError):
    def __init__(self, vertex, degree=None):
        self.vertex = vertex
        self.degree = degree
        msg = f"vertex {vertex} has odd degree"
        if degree is not None:
            msg += f" {degree}"
        super().__init__(msg)


class NotPerfect(FiidError):
    pass


class NotBalanced(FiidError):
    def __init__(self, vertex, indeg=None, outdeg=None):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} is not balanced (in={indeg}, out={outdeg})")


class TooLarge(FiidError):
    pass


class NotRegularBipartite(FiidError):
    pass


class NotEvenRegular(FiidError):
    pass


class InvalidInput(FiidError):
    pass


class DegenerateClass(FiidError):
    pass


class NoDisjointMatchings(FiidError):
    pass


class NotTreeBall(FiidError):
    pass


class InvalidAutomorphism(FiidError):
    pass


# numerical failures (exit 3)

class EigenFailure(FiidError):
    exit_code = 3
