from abc import ABC, abstractmethod
from typing import (
    Callable,
    Generic,
    Iterable,
    NoReturn,
    Optional,
    TypedDict,
    TypeVar,
    cast,
)

from .error import panic


A = TypeVar("A", covariant=True)
B = TypeVar("B")
E = TypeVar("E", covariant=True)
F = TypeVar("F")
T = TypeVar("T")


class Matcher(TypedDict, Generic[A, B, E, F]):
    """Handlers for pattern matching on Result variants."""

    ok: Callable[[A], B]
    err: Callable[[E], F]


class Result(Generic[A, E], ABC):
    """Outcome of an operation that can fail in an expected way.

    ``Result[A, E]`` is either ``Ok`` carrying the value or ``Err`` carrying the
    error. Validation and loading code returns these instead of raising.

    Example:
        >>> parse_config("three_channel").map(lambda c: c.horizon)
        Ok(15)
    """

    __slots__ = ()

    def is_ok(self) -> bool:
        return isinstance(self, Ok)

    def is_err(self) -> bool:
        return isinstance(self, Err)

    @abstractmethod
    def map(self, fn: Callable[[A], B]) -> "Result[B, E]": ...

    @abstractmethod
    def map_err(self, fn: Callable[[E], F]) -> "Result[A, F]": ...

    @abstractmethod
    def and_then(self, fn: Callable[[A], "Result[B, F]"]) -> "Result[B, E | F]": ...

    @abstractmethod
    def unwrap(self, message: Optional[str] = None) -> A: ...

    @abstractmethod
    def unwrap_err(self, message: Optional[str] = None) -> E: ...

    @abstractmethod
    def match(self, cases: Matcher[A, B, E, F]) -> B | F: ...

    @staticmethod
    def partition[PA, PE](
        results: Iterable["Result[PA, PE]"],
    ) -> tuple[list[PA], list[PE]]:
        """Splits Results into the list of ok values and the list of err values.

        Example:
            >>> Result.partition([Ok(1), Err("bad"), Ok(2)])
            ([1, 2], ['bad'])
        """
        oks: list[PA] = []
        errs: list[PE] = []
        for result in results:
            if result.is_ok():
                oks.append(result.unwrap())
            else:
                errs.append(result.unwrap_err())
        return (oks, errs)

    @staticmethod
    def collect[CA, CE](
        results: Iterable["Result[CA, CE]"],
    ) -> "Result[list[CA], list[CE]]":
        """Ok with every value if all succeeded, Err with every error otherwise."""
        oks, errs = Result.partition(results)
        if errs:
            return Err(errs)
        return Ok(oks)


class Ok(Result[A, E]):
    """Successful result variant."""

    __slots__ = ("value",)
    __match_args__ = ("value",)

    def __init__(self, value: A) -> None:
        self.value: A = value

    def map(self, fn: Callable[[A], B]) -> "Ok[B, E]":
        return try_or_panic(lambda: Ok(fn(self.value)), "Ok.map failed")

    def map_err(self, fn: Callable[[E], F]) -> "Ok[A, F]":
        return cast("Ok[A, F]", self)

    def and_then(self, fn: Callable[[A], Result[B, F]]) -> "Result[B, E | F]":
        return try_or_panic(lambda: fn(self.value), "Ok.and_then failed")

    def unwrap(self, message: Optional[str] = None) -> A:
        return self.value

    def unwrap_err(self, message: Optional[str] = None) -> NoReturn:
        panic(message or f"unwrap_err called on Ok: {self.value!r}")

    def match(self, cases: Matcher[A, B, E, F]) -> B | F:
        return try_or_panic(lambda: cases["ok"](self.value), "Ok.match failed")

    def __repr__(self) -> str:
        return f"Ok({self.value!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Ok) and self.value == cast("Ok[A, E]", other).value

    def __hash__(self) -> int:
        return hash(("ok", self.value))


class Err(Result[A, E]):
    """Error result variant."""

    __slots__ = ("value",)
    __match_args__ = ("value",)

    def __init__(self, value: E) -> None:
        self.value: E = value

    def map(self, fn: Callable[[A], B]) -> "Err[B, E]":
        return cast("Err[B, E]", self)

    def map_err(self, fn: Callable[[E], F]) -> "Err[A, F]":
        return try_or_panic(lambda: Err(fn(self.value)), "Err.map_err failed")

    def and_then(self, fn: Callable[[A], Result[B, F]]) -> "Err[B, E]":
        return cast("Err[B, E]", self)

    def unwrap(self, message: Optional[str] = None) -> NoReturn:
        panic(message or f"unwrap called on Err: {self.value!r}", self.value)

    def unwrap_err(self, message: Optional[str] = None) -> E:
        return self.value

    def match(self, cases: Matcher[A, B, E, F]) -> B | F:
        return try_or_panic(lambda: cases["err"](self.value), "Err.match failed")

    def __repr__(self) -> str:
        return f"Err({self.value!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Err) and self.value == cast("Err[A, E]", other).value

    def __hash__(self) -> int:
        return hash(("err", self.value))


def try_or_panic(fn: Callable[[], T], message: str) -> T:
    """Executes fn, converting any exception into a Panic."""
    try:
        return fn()
    except Exception as e:
        panic(message, e)
