"""Exception hierarchy shared by all modules."""


class KLAError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(KLAError, ValueError):
    """Malformed input: bad descriptor, wrong shape, out-of-range field."""


class NotOrderP(ValidationError):
    """The action matrix does not satisfy rho^p = I."""


class NotContained(KLAError):
    """A sublattice is not contained in the lattice it was compared with."""


class InfiniteQuotient(KLAError):
    """Quotient of lattices of different rank."""


class QuotientTooLarge(KLAError):
    """Coset enumeration exceeded its configured bound."""


class HypothesisError(KLAError):
    """A theorem was requested whose hypotheses are not met."""


class NoApplicableTheorem(HypothesisError):
    """No decomposition in the catalog covers the query."""


class UnknownJ(HypothesisError):
    """The number of conjugacy classes of maximal finite subgroups is unknown.

    This happens for non-split extensions, where the count has to be
    supplied by the caller.
    """


# alias kept for callers that think of it as an analysis failure
NonSplitUnknownJ = UnknownJ


class NotFree(HypothesisError):
    """The action is not free away from zero."""


class NotRegular(HypothesisError):
    """The coefficient ring lacks the Regular axiom."""


class EvenP(HypothesisError):
    """The odd-prime L-theory decomposition was asked for p = 2."""


class DecorationNeedsZ(HypothesisError):
    """A decoration other than <-inf> needs the coefficient ring Z."""
