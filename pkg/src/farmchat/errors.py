"""Exception types shared across the service."""


class FarmchatError(Exception):
    """Base class for every error raised by this package."""


class FrameError(FarmchatError):
    """A wire frame could not be decoded or encoded.

    ``field`` names the offending key so protocol bugs are diagnosable
    from the error alone.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class MalformedFrame(FrameError):
    pass


class UnknownEventType(FrameError):
    pass


class UnknownAction(FrameError):
    pass


class MissingField(FrameError):
    pass


class InvariantViolation(FarmchatError):
    pass


class UnknownUser(FarmchatError):
    pass


class EmptyUtterance(FarmchatError):
    pass


class DuplicateIntent(FarmchatError):
    pass


class EmptyTrainingPhrase(FarmchatError):
    pass


class UnknownField(FarmchatError):
    pass


class TemplateError(FarmchatError):
    pass


class ParseError(FarmchatError):
    """Input file is syntactically bad; ``index`` is the line or record number."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class ValidationError(FarmchatError):
    """Input parsed but violates a semantic constraint; names the rule id."""

    def __init__(self, message: str, rule_id: str | None = None):
        super().__init__(message)
        self.rule_id = rule_id


class SessionInactive(FarmchatError):
    pass


class IoFailure(FarmchatError):
    pass


class SchemaMismatch(FarmchatError):
    pass


class BadRange(FarmchatError):
    pass


class CorruptFile(FarmchatError):
    pass
