"""Exception hierarchy shared by all rkdetect modules."""


class RkDetectError(Exception):
    """Base class for all errors raised by this package."""


class ZeroRowError(RkDetectError):
    def __init__(self, row):
        self.row = row
        super().__init__(f"row {row} has (near-)zero norm and cannot be normalized")


class DimensionMismatchError(RkDetectError):
    pass


class IndexOutOfRangeError(RkDetectError):
    pass


class EmptySystemError(RkDetectError):
    pass


class RankDeficientError(RkDetectError):
    pass


class NotEnoughRowsError(RkDetectError):
    pass


class NoGroundTruthError(RkDetectError):
    pass


class NoCorruptionError(RkDetectError):
    pass


class InvalidConfigError(RkDetectError):
    pass


class InvalidInputsError(RkDetectError):
    pass


class InvalidSpecError(RkDetectError):
    pass


class TooLargeError(RkDetectError):
    pass


class NoConsistentSubsystemError(RkDetectError):
    pass


class IoError(RkDetectError):
    pass


class ParseError(RkDetectError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
