"""Exception hierarchy.

Every error may carry a ``witness``: the concrete elements, points or table
entries that show the failure.  The CLI maps the three top-level families to
exit codes (input problems, failed checks, internal invariant breaches).
"""


class OrbatlasError(Exception):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# --- malformed algebraic input -------------------------------------------

class GroupError(OrbatlasError):
    pass


class NotAssociative(GroupError):
    pass


class NoIdentity(GroupError):
    pass


class NoInverse(GroupError):
    pass


class NotHomomorphism(GroupError):
    pass


class OrderBoundExceeded(GroupError):
    pass


class NotAction(GroupError):
    pass


class BimoduleError(OrbatlasError):
    pass


class NotBimodule(BimoduleError):
    pass


class MiddleGroupMismatch(BimoduleError):
    pass


class NotAtlasBimodule(BimoduleError):
    pass


class NotTorsor(BimoduleError):
    pass


class SizeBoundExceeded(BimoduleError):
    pass


class PosetViolation(OrbatlasError):
    pass


class NoOverlap(OrbatlasError):
    pass


class NotComposable(OrbatlasError):
    pass


class NotTranslationSubset(OrbatlasError):
    pass


class EvaluationNotBijective(OrbatlasError):
    pass


class RefinementError(OrbatlasError):
    pass


# --- theorems that failed on data that claimed to be valid ----------------

class InvariantBreach(OrbatlasError):
    """A statement that must hold for valid input did not hold."""


class NonInjective(InvariantBreach):
    pass


class KernelIsoFailure(InvariantBreach):
    pass


class NoSolution(InvariantBreach):
    pass


class NonUnique(InvariantBreach):
    pass


class NoWitness(InvariantBreach):
    pass


class LawViolation(InvariantBreach):
    pass


class WitnessDependence(InvariantBreach):
    pass


# --- documents -------------------------------------------------------------

class DocumentError(OrbatlasError):
    """Unreadable document or unresolved reference; ``location`` is a
    (line, column) pair when the parser knows it, else a JSON path string."""

    def __init__(self, message, location=None, witness=None):
        super().__init__(message, witness)
        self.location = location

    def __str__(self):
        msg = super().__str__()
        if isinstance(self.location, tuple):
            return f"line {self.location[0]}, column {self.location[1]}: {msg}"
        if self.location:
            return f"{self.location}: {msg}"
        return msg
