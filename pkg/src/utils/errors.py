"""Exception hierarchy shared by the library and the command line front end.

Every exception carries ``exit_code`` so ``main.py`` can map failures to
distinct process exit codes.
"""
import numpy as np


def _rebuild(cls, message, state):
    error = Exception.__new__(cls)
    Exception.__init__(error, message)
    error.__dict__.update(state)
    return error


class PrnfError(Exception):
    exit_code = 1

    def __reduce__(self):
        # subclasses take their own constructor arguments; rebuild from the message and attributes
        return _rebuild, (self.__class__, str(self), self.__dict__)


class ConfigError(PrnfError):
    exit_code = 2

    def __init__(self, field, message):
        self.field = field
        super(ConfigError, self).__init__("config field '{}': {}".format(field, message))


class MissingFileError(PrnfError):
    exit_code = 3

    def __init__(self, path, what="file"):
        self.path = str(path)
        super(MissingFileError, self).__init__("{} not found: {}".format(what, path))


class CorruptFileError(PrnfError):
    exit_code = 4

    def __init__(self, path, message):
        self.path = str(path)
        super(CorruptFileError, self).__init__("corrupt file {}: {}".format(path, message))


class ChecksumError(PrnfError):
    exit_code = 5

    def __init__(self, path, expected, found):
        self.path = str(path)
        super(ChecksumError, self).__init__(
            "checksum mismatch in {}: stored {} but content hashes to {}".format(path, expected, found))


class OutputExistsError(PrnfError):
    exit_code = 6

    def __init__(self, path):
        self.path = str(path)
        super(OutputExistsError, self).__init__("refusing to overwrite {} (pass --force)".format(path))


class ShapeError(PrnfError, ValueError):
    exit_code = 7


class ContractError(PrnfError, ValueError):
    exit_code = 7


class NumericalError(PrnfError):
    exit_code = 8


class SingularJacobianError(NumericalError):
    """Log-determinant below the singularity floor for one or more samples."""

    def __init__(self, indices, what="Jacobian"):
        self.indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        self.sample_index = int(self.indices[0])
        self.what = what
        super(SingularJacobianError, self).__init__(
            "singular {} at sample {} ({} sample(s) affected)".format(what, self.sample_index, len(self.indices)))


class TrainingDivergedError(NumericalError):

    def __init__(self, epoch, value):
        self.epoch = epoch
        super(TrainingDivergedError, self).__init__("non-finite loss {} at epoch {}".format(value, epoch))


class DegenerateDensityError(NumericalError):
    pass


class NotPositiveDefiniteError(NumericalError):
    pass
