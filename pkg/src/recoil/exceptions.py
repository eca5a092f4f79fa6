"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map error
classes to distinct process exit statuses.
"""


class RecoilError(Exception):
    exit_code = 1


class ModelError(RecoilError, ValueError):
    exit_code = 4


class AlphabetTooLarge(ModelError):
    pass


class EmptyInput(ModelError):
    pass


class ZeroFrequencySymbol(ModelError):
    pass


class IncompleteCoverage(RecoilError, ValueError):
    """A backward scan ran out of events before every lane was seen."""


class ContainerError(RecoilError, ValueError):
    exit_code = 5


class BadMagic(ContainerError):
    pass


class UnsupportedVersion(ContainerError):
    pass


class TruncatedContainer(ContainerError):
    pass


class TruncatedSeries(TruncatedContainer):
    pass


class ValueOverflow(ContainerError):
    pass


class InconsistentMetadata(ContainerError):
    exit_code = 6


class DecodeError(RecoilError):
    exit_code = 7


class BitstreamUnderflow(DecodeError):
    pass


class SyncFailure(DecodeError):
    pass
