"""Exception hierarchy shared by every pipeline stage."""


class RFFPError(Exception):
    """Base class; ``kind`` is the machine-readable tag used in CLI error JSON."""

    kind = "error"


class ParameterError(RFFPError, ValueError):
    kind = "parameter"


class InvalidProfileError(RFFPError, ValueError):
    kind = "invalid-profile"


class DegenerateSignalError(RFFPError, ValueError):
    kind = "degenerate-signal"


class ShapeError(RFFPError, ValueError):
    kind = "shape"


class LabelError(RFFPError, ValueError):
    kind = "label"


class StratificationError(RFFPError, ValueError):
    kind = "stratification"


class TrainingDivergedError(RFFPError, ArithmeticError):
    kind = "training-diverged"


class ColumnCountError(RFFPError, ValueError):
    kind = "column-count"


class ParseError(RFFPError, ValueError):
    kind = "parse"


class UnknownLabelError(RFFPError, ValueError):
    kind = "unknown-label"


class StageError(RFFPError):
    """Wraps a failure inside a pipeline stage with the offending sample id."""

    kind = "stage"

    def __init__(self, stage, sample_id, cause):
        self.stage = stage
        self.sample_id = sample_id
        self.cause = cause
        super().__init__(f"{stage} failed on {sample_id}: {cause}")
