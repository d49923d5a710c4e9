"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit status 1); failures
inside an analysis step derive from :class:`ComputationError` (exit status 2).
"""


class CascadeKitError(Exception):
    pass


class InputError(CascadeKitError):
    pass


class ComputationError(CascadeKitError):
    pass


class MalformedRow(InputError):
    def __init__(self, reason, line=None, source=None):
        self.reason = reason
        self.line = line
        self.source = source
        where = source or "<input>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {reason}")


class DuplicateActivityId(MalformedRow):
    pass


class DanglingEdgeEndpoint(MalformedRow):
    pass


class EmptyProject(InputError):
    pass


class CycleDetected(InputError):
    def __init__(self, cycle, source=None):
        self.cycle = list(cycle)
        self.source = source
        path = " -> ".join(self.cycle + self.cycle[:1])
        prefix = f"{source}: " if source else ""
        super().__init__(f"{prefix}cycle detected [{', '.join(self.cycle)}] ({path})")


class NoCompletedActivities(ComputationError):
    pass


class InsufficientGroupSize(ComputationError):
    def __init__(self, group, size, required):
        self.group = group
        self.size = size
        self.required = required
        super().__init__(f"group '{group}' has {size} members, need at least {required}")


class InsufficientData(ComputationError):
    pass


class LengthMismatch(ComputationError):
    pass


class ZeroVariance(ComputationError):
    pass


class CollinearPredictors(ComputationError):
    pass


class EmptyInput(ComputationError):
    pass


class DegenerateDistribution(ComputationError):
    pass


class NonPositiveValue(ComputationError):
    pass


class InfeasibleConfig(ComputationError):
    pass
