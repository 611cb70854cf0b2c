"""Engine error hierarchy.

Every failure mode the engine can report deliberately; anything else
escaping as a plain exception is a bug.
"""


class EngineError(Exception):
    """Base class for all engine errors."""


class UnknownType(EngineError):
    pass


class ParseError(EngineError):
    pass


class NotEnumerable(EngineError):
    pass


class ArityError(EngineError):
    pass


class TypeMismatch(EngineError):
    """Value does not belong to the declared domain.

    Carries the attribute position when raised from record validation.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class CompositionError(EngineError):
    pass


class OrderConflict(EngineError):
    pass


class SchemaMismatch(EngineError):
    pass


class UnknownAttribute(EngineError):
    pass


class DirectionError(EngineError):
    pass


class LabelConflict(EngineError):
    pass


class TooLarge(EngineError):
    pass


class NotMonic(EngineError):
    pass


class NonFiniteResult(EngineError):
    pass


class UnsupportedColimit(EngineError):
    pass


class InitialNotMaterializable(EngineError):
    pass


class RepresentationError(EngineError):
    """A construction left the class of finitely presented semi-simplicial
    schemas (e.g. a quotient produced a non-degenerate simplex with a
    degenerate face)."""


class ValidationError(EngineError):
    pass
