"""Exception types raised across the toolkit.

Everything derives from CurveStitchError so callers can catch the whole
family; most are also ValueError subclasses because they signal bad
arguments rather than runtime faults.
"""


class CurveStitchError(Exception):
    pass


class ChannelMismatch(CurveStitchError, ValueError):
    pass


class InvalidSigma(CurveStitchError, ValueError):
    pass


class BadThresholds(CurveStitchError, ValueError):
    pass


class DegenerateConfiguration(CurveStitchError, ValueError):
    pass


class EmptyEdgeMap(CurveStitchError, ValueError):
    pass


class DegenerateSegment(CurveStitchError, ValueError):
    pass


class VerticalLine(CurveStitchError, ValueError):
    pass


class ZeroMass(CurveStitchError, ValueError):
    pass


class DegeneratePair(CurveStitchError, ValueError):
    pass


class EmptyInput(CurveStitchError, ValueError):
    pass


class InsufficientSamples(CurveStitchError, ValueError):
    pass


class DegenerateSpan(CurveStitchError, ValueError):
    pass


class LengthMismatch(CurveStitchError, ValueError):
    pass


class EmptyLibrary(CurveStitchError, ValueError):
    pass


class TileTooLarge(CurveStitchError, ValueError):
    pass


class ShapeMismatch(CurveStitchError, ValueError):
    pass


class FrameOrderViolation(CurveStitchError, ValueError):
    pass


class SpecInvalid(CurveStitchError, ValueError):
    pass


class ConfigError(CurveStitchError, ValueError):
    pass


class StageError(CurveStitchError):
    """Wraps an error raised inside a pipeline stage with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
