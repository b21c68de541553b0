"""Exception types shared across the package.

All city and position indices in error messages are 1-based.
"""


class TspdualError(Exception):
    """Base class for all package errors."""


class InstanceError(TspdualError):
    """Invalid distance matrix or tour data."""


class AsymmetricMatrix(InstanceError):
    def __init__(self, i: int, j: int, dij: float, dji: float):
        self.pair = (i, j)
        super().__init__(f"d[{i},{j}] = {dij!r} != d[{j},{i}] = {dji!r}")


class NegativeDistance(InstanceError):
    def __init__(self, i: int, j: int, value: float):
        self.pair = (i, j)
        super().__init__(f"d[{i},{j}] = {value!r} is negative")


class NonzeroDiagonal(InstanceError):
    def __init__(self, i: int, value: float):
        self.index = i
        super().__init__(f"d[{i},{i}] = {value!r} must be zero")


class TriangleViolation(InstanceError):
    def __init__(self, i: int, j: int, k: int, direct: float, detour: float):
        self.pair = (i, j)
        self.via = k
        super().__init__(
            f"d[{i},{j}] = {direct!r} > d[{i},{k}] + d[{k},{j}] = {detour!r}"
        )


class DimensionMismatch(TspdualError):
    pass


class InstanceTooLarge(TspdualError):
    pass


class TourDoesNotFixCityOne(TspdualError):
    pass


class NotDualFeasible(TspdualError):
    pass


class StartNotDualFeasible(TspdualError):
    pass


class InfeasibleTarget(TspdualError):
    pass
