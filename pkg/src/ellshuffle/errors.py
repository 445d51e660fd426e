"""Exception hierarchy shared by every module of the package."""


class EllShuffleError(Exception):
    """Base class for all errors raised by ellshuffle."""


# theta_core
class ZeroArgument(EllShuffleError, ValueError):
    pass


class BranchCutProximity(EllShuffleError, ValueError):
    pass


class PoleAtUnitArgument(EllShuffleError, ZeroDivisionError):
    pass


# theta_expr
class PoleEncountered(EllShuffleError, ZeroDivisionError):
    def __init__(self, atom, term_index, modulus):
        self.atom = atom
        self.term_index = term_index
        self.modulus = modulus
        super().__init__(
            f"denominator atom theta({atom}) in term {term_index} has modulus {modulus:.3e}"
        )


class UnboundVariable(EllShuffleError, KeyError):
    pass


class ZeroSection(EllShuffleError, ValueError):
    pass


class MultiTermExpression(EllShuffleError, ValueError):
    pass


class NonIntegralShift(EllShuffleError, ValueError):
    """A shift var -> q^k var moves some atom by a non-integral power of q."""


# quiver_model
class UnsupportedQuiver(EllShuffleError, ValueError):
    pass


class RankMismatch(EllShuffleError, ValueError):
    pass


class MissingSplitting(EllShuffleError, ValueError):
    pass


class UnpairableClass(EllShuffleError, ValueError):
    pass


# shuffle_engine
class InvalidFixedPoint(EllShuffleError, ValueError):
    pass


class UnsupportedChamber(EllShuffleError, ValueError):
    pass


class ProviderLimitExceeded(EllShuffleError, ValueError):
    pass


class InvalidPartitionTuple(EllShuffleError, ValueError):
    pass


class InvalidSplitting(EllShuffleError, ValueError):
    pass


# axiom_verifier
class InconsistentPattern(EllShuffleError, ValueError):
    pass


# oracle_solver
class NoCandidate(EllShuffleError, LookupError):
    pass


class AmbiguousCandidate(EllShuffleError, LookupError):
    def __init__(self, candidates):
        self.candidates = candidates
        super().__init__(f"{len(candidates)} distinct sections satisfy the constraints")


class RankExceedsOne(EllShuffleError, ValueError):
    pass
