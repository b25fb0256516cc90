"""Exception hierarchy.

Errors fall into two families that the command line maps to distinct exit
codes: ``InputFormatError`` for problems with a score or trace being read,
and ``ConfigError`` for problems with configuration files or flags.
Geometry and kinematics errors derive from ``ValueError`` because they
signal invalid arguments to pure functions.
"""


class BowMotionError(Exception):
    """Base class for all package errors."""


class InputFormatError(BowMotionError):
    pass


class ConfigError(BowMotionError):
    pass


class MalformedFile(InputFormatError):
    pass


class UnpairedNoteOn(InputFormatError):
    def __init__(self, pitch, track, onset_ticks):
        self.pitch = pitch
        self.track = track
        self.onset_ticks = onset_ticks
        super().__init__(
            f"note-on for pitch {pitch} at tick {onset_ticks} (track {track}) "
            "is never released")


class NotOpenString(InputFormatError):
    def __init__(self, pitch, onset_ticks=None):
        self.pitch = pitch
        self.onset_ticks = onset_ticks
        where = "" if onset_ticks is None else f" at tick {onset_ticks}"
        super().__init__(
            f"pitch {pitch}{where} is not an open cello string "
            "(expected 36, 43, 50 or 57; try --map nearest)")


class BelowRange(InputFormatError):
    def __init__(self, pitch, onset_ticks=None):
        self.pitch = pitch
        self.onset_ticks = onset_ticks
        where = "" if onset_ticks is None else f" at tick {onset_ticks}"
        super().__init__(f"pitch {pitch}{where} is below the C string (36)")


class OverrideLengthMismatch(InputFormatError):
    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(
            f"bowing override has {got} entries but the score has {expected} notes")


class SchemaMismatch(InputFormatError):
    def __init__(self, line, detail=""):
        self.line = line
        super().__init__(f"line {line}: schema mismatch{': ' + detail if detail else ''}")


class ParseFailure(InputFormatError):
    def __init__(self, line, detail=""):
        self.line = line
        super().__init__(f"line {line}: {detail or 'parse failure'}")


class FractionOutOfRange(ValueError, BowMotionError):
    pass


class OffBowLine(ValueError, BowMotionError):
    pass


class NegativeDuration(ValueError, BowMotionError):
    pass


class TargetUnreachable(BowMotionError):
    pass


class JointLimitViolation(ValueError, BowMotionError):
    pass


class NoConvergence(BowMotionError):
    pass
