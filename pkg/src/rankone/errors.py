"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class carries the code it
should terminate with.
"""


class RankOneError(Exception):
    exit_code = 1


class InvalidArgumentError(RankOneError, ValueError):
    exit_code = 2


class OutOfRangeError(RankOneError, IndexError):
    exit_code = 2


class ResourceLimitError(RankOneError):
    exit_code = 3


class IntegrityError(RankOneError):
    exit_code = 4
