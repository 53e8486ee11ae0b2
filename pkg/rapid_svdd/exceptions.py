"""
Exceptions raised by rapid_svdd. Everything derives from RapidSvddError, so
callers (like the CLI) can separate problems of the data or the parameters from
programming errors.
"""

import typing


class RapidSvddError(Exception):
    """
    Base class of all errors raised deliberately by this package.
    """


class DataFormatError(RapidSvddError, ValueError):
    """
    A file could not be parsed. Row and column are 1-based data positions
    (the header row is not counted) and may be None if the error is not
    bound to a cell.
    """

    def __init__(
        self,
        msg: str,
        row: typing.Optional[int] = None,
        column: typing.Optional[str] = None,
    ) -> None:
        super().__init__(msg)
        self.row = row
        self.column = column


class DegenerateDataError(RapidSvddError, ValueError):
    """
    The data does not allow the requested computation, e.g., all features
    are constant when estimating a bandwidth.
    """


class GramMatrixTooLargeError(RapidSvddError, MemoryError):
    """
    The dense Gram matrix would exceed the configured number of observations.
    """


class PrefilterError(RapidSvddError, ValueError):
    """
    The outlier share does not leave any inlier.
    """


class SopInstanceTooLargeError(RapidSvddError, ValueError):
    """
    Too many inliers for the exhaustive sample optimization oracle.
    """


class ConvergenceError(RapidSvddError, RuntimeError):
    """
    An iterative solver did not reach its tolerance. The diagnostics are kept
    for the error report.
    """

    def __init__(self, msg: str, diagnostics: typing.Dict[str, float]) -> None:
        super().__init__(msg)
        self.diagnostics = diagnostics


class PipelineStageError(RapidSvddError):
    """
    Wraps an error raised inside a stage of the evaluation pipeline.
    """

    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"Stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
