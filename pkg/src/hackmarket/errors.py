class PipelineError(ValueError):
    """Base class for errors raised by the categorization pipeline."""


class IngestError(PipelineError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"{message} at line {line}")


class DegenerateSeedError(PipelineError):
    pass
