"""Error types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1, StageError -> 2,
OSError -> 3.  FormatError raised inside a pipeline stage is wrapped into a
StageError carrying the stage name.
"""


class ConfigError(ValueError):
    """Invalid configuration value or malformed manifest."""


class FormatError(ValueError):
    """Malformed or inconsistent binary/CSV payload (bad magic, truncation,
    shape or ROI mismatch)."""


class StageError(RuntimeError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
