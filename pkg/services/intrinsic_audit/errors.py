"""
Audit Errors
Exception hierarchy shared by every layer of the simulator.
"""


class AuditError(ValueError):
    """Base class for all simulator errors"""


class ConfigError(AuditError):
    """Invalid or unknown configuration values"""


class ShapeMismatchError(AuditError):
    """Vectors, images or specs that do not line up"""


class EmptyDataError(AuditError):
    """An operation that needs data received none"""


class NumericalError(AuditError):
    """Non-finite values appeared during computation"""


class PartitionError(AuditError):
    """A dataset cannot be split as requested"""
