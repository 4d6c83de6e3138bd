"""Exception hierarchy shared across the pipeline."""


class PipelineError(Exception):
    """Base class for contract violations raised by pipeline stages."""


class ConfigError(PipelineError):
    """Invalid or degenerate configuration (bad dates, empty feature, ...)."""


class AlignmentError(PipelineError):
    """Feature/column order does not match the persisted feature list."""


class ContractViolation(PipelineError):
    """A caller broke a stage precondition (e.g. non-Dev rows in a resampler)."""


class VersionError(PipelineError):
    """Serialized artifact carries an unsupported schema version."""


class IntegrityError(PipelineError):
    """A run artifact referenced by the manifest is missing or inconsistent."""
