"""Exception hierarchy. Every error is a ValueError so callers can catch broadly."""


class VcbnError(ValueError):
    pass


class InvalidAssignmentError(VcbnError):
    pass


class CycleError(VcbnError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__(f"graph contains a cycle through nodes {self.cycle}")


class DimensionMismatchError(VcbnError):
    pass


class FormatError(VcbnError):
    pass


class SchemaViolationError(FormatError):
    def __init__(self, row, column, token):
        self.row, self.column, self.token = row, column, token
        super().__init__(f"token {token!r} at row {row}, column {column!r} is not in the declared alphabet")


class DegenerateAlphabetError(FormatError):
    pass


class EmptyDatasetError(FormatError):
    pass


class InfeasibleFloorError(VcbnError):
    pass


class SupportViolationError(VcbnError):
    def __init__(self, row):
        self.row = row
        super().__init__(f"row {row} has zero probability under the network")


class StateSpaceTooLargeError(VcbnError):
    pass


class GuardExceededError(VcbnError):
    pass


class InvalidNetworkError(VcbnError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid network: " + "; ".join(self.violations))
