from abc import ABC
from dataclasses import dataclass
from typing import Callable, Dict, NoReturn, Optional, Sequence

_NOT_SET = object()


class TaggedError(ABC, Exception):
    """Base class for tagged exceptions with cause tracking.

    Every subclass declares a ``TAG`` class attribute used as a discriminator
    in reports and in :meth:`TaggedError.match`.

    Example:
        >>> class GridError(TaggedError):
        ...     TAG = "GridError"
        >>> raise GridError("empty grid", cause="10:5:1")
    """

    __slots__ = ("_message", "_non_exception_cause")

    _message: str
    _non_exception_cause: Optional[object]

    TAG: str

    @property
    def tag(self) -> str:
        return self.TAG

    @property
    def message(self) -> str:
        return self._message

    def __init_subclass__(cls) -> None:
        if not hasattr(cls, "TAG"):
            panic(f"Subclass {cls.__name__} must define TAG class attribute")

    def __init__(self, message: str, cause: Optional[object] = None) -> None:
        super().__init__(message)
        self._message = message

        if isinstance(cause, BaseException):
            self._non_exception_cause = _NOT_SET
            self.__cause__ = cause
        else:
            self._non_exception_cause = cause
            self.__cause__ = None

    @property
    def cause(self) -> Optional[object]:
        """The exception or plain object this error was raised for."""
        if self._non_exception_cause is not _NOT_SET:
            return self._non_exception_cause
        return self.__cause__

    def __str__(self) -> str:
        return self._message

    @staticmethod
    def match[A](
        error: "TaggedError",
        handlers: Dict[type, Callable[..., A]],
    ) -> A:
        """Pattern matches on error type.

        Args:
            error: TaggedError to match.
            handlers: Dict mapping error types to handler functions.

        Returns:
            Result of matched handler.

        Raises:
            ValueError: If no handler found for error type.

        Example:
            >>> TaggedError.match(err, {ConfigError: lambda e: 1, OutputError: lambda e: 1})
            1
        """
        handler = handlers.get(type(error))
        if handler is None:
            raise ValueError(f"No handler for error type: {type(error).__name__}")
        return handler(error)


@dataclass(frozen=True, slots=True)
class Issue:
    """A single validation problem located by a dotted field path."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ConfigError(TaggedError):
    """Scenario could not be read, parsed or validated.

    Example:
        >>> err = ConfigError("invalid scenario", [Issue("zeta", "must be >= 1")])
        >>> [str(i) for i in err.issues]
        ['zeta: must be >= 1']
    """

    __slots__ = ("issues",)

    TAG: str = "ConfigError"

    def __init__(
        self,
        message: str,
        issues: Sequence[Issue] = (),
        cause: Optional[object] = None,
    ) -> None:
        self.issues = tuple(issues)
        detail = "; ".join(str(i) for i in self.issues)
        super().__init__(f"{message}: {detail}" if detail else message, cause)


class ChannelIndexError(TaggedError):
    __slots__ = ("channel", "count")

    TAG: str = "ChannelIndexError"

    def __init__(self, channel: int, count: int) -> None:
        self.channel = channel
        self.count = count
        super().__init__(f"Channel index {channel} outside 1..{count}")


class StateIndexError(TaggedError):
    __slots__ = ("index", "size")

    TAG: str = "StateIndexError"

    def __init__(self, index: int, size: int) -> None:
        self.index = index
        self.size = size
        super().__init__(f"State index {index} outside 0..{size - 1}")


class PenaltyRangeError(TaggedError):
    __slots__ = ("v",)

    TAG: str = "PenaltyRangeError"

    def __init__(self, v: int, data_size: int) -> None:
        self.v = v
        super().__init__(f"Remaining data {v} outside 0..{data_size}")


class DisallowedActionError(TaggedError):
    """An action outside the allowed set of its state was used."""

    __slots__ = ("t", "state", "action")

    TAG: str = "DisallowedActionError"

    def __init__(self, state: object, action: object, t: Optional[int] = None) -> None:
        self.t = t
        self.state = state
        self.action = action
        where = f" at t={t}" if t is not None else ""
        super().__init__(f"Action {action} not allowed in state {state}{where}")


class PolicyMismatchError(TaggedError):
    __slots__ = ()

    TAG: str = "PolicyMismatchError"


class UnknownPolicyError(TaggedError):
    __slots__ = ("name",)

    TAG: str = "UnknownPolicyError"

    def __init__(self, name: str, known: Sequence[str]) -> None:
        self.name = name
        super().__init__(f"Unknown policy {name!r}; expected one of {', '.join(known)}")


class GridSpecError(TaggedError):
    __slots__ = ("spec",)

    TAG: str = "GridSpecError"

    def __init__(self, spec: str, reason: str) -> None:
        self.spec = spec
        super().__init__(f"Invalid grid {spec!r}: {reason}")


class OutputError(TaggedError):
    __slots__ = ()

    TAG: str = "OutputError"


class UnhandledException(TaggedError):
    """Wrapper for exceptions caught by :func:`handoffdp.safe.safe`."""

    TAG: str = "UnhandledException"

    def __init__(self, cause: object) -> None:
        super().__init__(f"Unhandled exception: {cause}", cause)


class Panic(TaggedError):
    """Unrecoverable error: a defect or a broken internal invariant."""

    TAG: str = "Panic"


def is_panic(value: object) -> bool:
    return isinstance(value, Panic)


def panic(message: str, cause: Optional[object] = None) -> NoReturn:
    """Raises a Panic exception.

    Args:
        message: Panic message.
        cause: Optional cause (exception or any object).

    Raises:
        Panic: Always raises.
    """
    raise Panic(message, cause)


class ShapeMismatchError(TaggedError):
    """Vectors or tables whose dimensions do not agree."""

    __slots__ = ()

    TAG: str = "ShapeMismatchError"


class InvalidStateError(TaggedError):
    """A state whose fields fall outside the state space of its scenario."""

    __slots__ = ("state",)

    TAG: str = "InvalidStateError"

    def __init__(self, state: object, reason: str) -> None:
        self.state = state
        super().__init__(f"Invalid state {state}: {reason}")


class StageIndexError(TaggedError):
    __slots__ = ("t",)

    TAG: str = "StageIndexError"

    def __init__(self, t: int, last: int) -> None:
        self.t = t
        super().__init__(f"Stage {t} outside 1..{last}")


class SampleSizeError(TaggedError):
    __slots__ = ("n",)

    TAG: str = "SampleSizeError"

    def __init__(self, n: int) -> None:
        self.n = n
        super().__init__(f"Need at least one rollout, got {n}")
