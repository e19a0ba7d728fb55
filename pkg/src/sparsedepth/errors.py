"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside the range an operation accepts."""


class ImageFormatError(ValueError):
    """A raster file is malformed or in an unsupported format."""


class PipelineError(RuntimeError):
    """A stage failed while the pipeline was running."""
