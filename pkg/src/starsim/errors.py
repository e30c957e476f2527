"""Exception hierarchy shared by every starsim subpackage."""


class StarSimError(Exception):
    """Base class; the CLI maps any subclass to a nonzero exit code."""

    code = "error"


class InvalidStateError(StarSimError, ValueError):
    code = "invalid-state"


class GeometryError(StarSimError, ValueError):
    code = "geometry"


class OverwriteError(StarSimError):
    code = "overwrite"


class UnprogrammedReadError(StarSimError):
    code = "unprogrammed-read"


class PartialScanError(StarSimError):
    code = "partial-scan"


class DomainError(StarSimError, ValueError):
    code = "domain"


class ProfileError(StarSimError, ValueError):
    """Profile failed validation; ``field`` names the offending entry."""

    code = "profile-invalid"

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DimensionError(StarSimError, ValueError):
    code = "dimension-mismatch"


class MetadataCorruptError(StarSimError):
    code = "metadata-corrupt"


class UnsupportedModeError(StarSimError):
    code = "unsupported-mode"


class AddressError(StarSimError, IndexError):
    code = "address"


class ConfigError(StarSimError, ValueError):
    code = "config-invalid"
