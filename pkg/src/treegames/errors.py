"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class so
that tests and the CLI can map outcomes to stable exit codes.  Exceptions that
carry a witness (a stuck vertex set, a Hall violator, ...) expose it as an
attribute rather than burying it in the message.
"""


class TreegamesError(Exception):
    """Base class for all package-specific errors."""


class InvalidConfiguration(TreegamesError):
    """A game, board or parameter combination that can never be played."""


class InvalidParameter(InvalidConfiguration):
    """A numeric parameter outside its documented range."""


class GameOver(TreegamesError):
    """A move was submitted to a finished game."""


class IllegalMove(TreegamesError):
    """The move does not conform to the rules in the current position."""


class OracleBudgetExceeded(TreegamesError):
    """Exhaustive game search ran past its node budget."""


class PairingViolated(TreegamesError):
    """A pairing plan was asked to respond to an element outside its pairs,
    or one of its pairs was corrupted (both elements gone to the opponent)."""


class SplitUnavailable(TreegamesError):
    """No subtree split exists for the requested size parameter."""


class TreeTooSmall(TreegamesError):
    """The tree has too few vertices for the requested operation."""


class StrategyNotFound(TreegamesError):
    """A named strategy or playbook entry is missing."""


class DegreeBoundViolated(TreegamesError):
    """An input tree exceeds the maximum degree supported by the parameters."""


class EmbeddingInvalid(TreegamesError):
    """A tree-to-graph map violates injectivity, edge preservation or the
    allowed image region."""


class ExtensionFailed(TreegamesError):
    """Tree extension inside a host graph ran out of repair options.

    ``witness`` holds the tree vertices that could not be placed.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or []


class NoStarMatching(TreegamesError):
    """The requested star partition of the leftover vertices does not exist."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or []


class GreedyStuck(TreegamesError):
    """Greedy embedding hit a vertex with no free candidate image."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or []


class RandomizedEmbeddingFailed(TreegamesError):
    """All resampling attempts of a randomized embedding failed a check.

    ``failed_check`` names the condition that could not be met.
    """

    def __init__(self, message, failed_check=None):
        super().__init__(message)
        self.failed_check = failed_check


class DiracUnmet(TreegamesError):
    """Hamilton cycle construction requires minimum degree >= n/2."""


class BadSplit(TreegamesError):
    """A cycle split was requested with incompatible part sizes."""


class HallViolation(TreegamesError):
    """A bipartite matching is infeasible; ``witness`` is a violating set."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or []


class ConnectorFailed(TreegamesError):
    """A clique connector could not be assembled from the available edges."""


class RoutingFailed(TreegamesError):
    """Bare-path routing failed; ``stage`` names the step, ``witness`` the data."""

    def __init__(self, message, stage=None, witness=None):
        super().__init__(message)
        self.stage = stage
        self.witness = witness


class AccountingError(TreegamesError):
    """A board-accounting invariant broke during a simulated match."""


class SynthesisFailed(TreegamesError):
    """Random certificate-graph synthesis exhausted its resampling budget."""


class PartitionFailed(TreegamesError):
    """Verify-and-resample board partitioning exhausted its budget."""


class PreconditionUnmet(TreegamesError):
    """A strategy's guarantee precondition does not hold; play continues
    best-effort when the caller chooses not to treat this as fatal."""


class CriterionUnmet(TreegamesError):
    """A potential criterion failed at a stage start; the stage's guarantee
    is void and the run records the fact instead of claiming it."""
