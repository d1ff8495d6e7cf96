"""Exception hierarchy.

Each error carries the CLI exit code it maps to, so the command layer can
translate failures without a lookup table.
"""


class IpcirError(Exception):
    exit_code = 2


# validation / parse failures (exit 2)
class InvalidIndexSet(IpcirError):
    pass


class SpaceMismatch(IpcirError):
    pass


class EmptyEvent(IpcirError):
    pass


class InvalidChain(IpcirError):
    pass


class InvalidMass(IpcirError):
    pass


class UnknownObservation(IpcirError):
    pass


class InvalidMap(IpcirError):
    pass


class InvalidCollection(IpcirError):
    pass


class NoCompatibleOrder(IpcirError):
    pass


class InvalidEvidence(IpcirError):
    pass


class InvalidParameter(IpcirError):
    pass


class InvalidSample(IpcirError):
    pass


class UnsupportedClassArity(IpcirError):
    pass


class OracleMismatch(IpcirError):
    pass


# impossible / infeasible (exit 3)
class ZeroMassEvent(IpcirError):
    exit_code = 3


class ZeroUpperProbability(IpcirError):
    exit_code = 3


class ObservationImpossible(IpcirError):
    exit_code = 3


class CurPreconditionViolated(IpcirError):
    exit_code = 3

    def __init__(self, completion, message=None):
        self.completion = completion
        super().__init__(message or f"completion {completion!r} has zero upper probability")


class Infeasible(IpcirError):
    exit_code = 3


# caps (exit 4)
class EnumerationCapExceeded(IpcirError):
    exit_code = 4


class ProblemTooLarge(IpcirError):
    exit_code = 4


# non-convergence (exit 5)
class EmDidNotConverge(IpcirError):
    exit_code = 5
