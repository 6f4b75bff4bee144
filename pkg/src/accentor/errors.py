"""Exception types shared across the package."""


class AccentorError(Exception):
    """Base class for package-specific failures."""


class FrameGridError(AccentorError):
    """Feature streams that must share a frame grid disagree."""


class FeatureFormatError(AccentorError):
    """A feature dump file has a well-formed header but incompatible contents."""


class CorruptFileError(AccentorError):
    """A feature dump or checkpoint file is truncated or unreadable."""


class FrontendUnavailableError(AccentorError):
    """Character predictions could not be obtained for a clip."""


class CheckpointVersionError(AccentorError):
    """A checkpoint was written with an unsupported format version."""


class ConfigError(AccentorError):
    """Invalid or incomplete configuration."""


class TrainingDiverged(AccentorError):
    """A loss term became non-finite during training."""
