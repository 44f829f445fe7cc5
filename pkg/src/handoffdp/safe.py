from typing import Callable, Generic, TypedDict, TypeVar, overload

from .error import UnhandledException, panic
from .result import Err, Ok, Result

A = TypeVar("A")
E = TypeVar("E")


class SafeOptions(TypedDict, Generic[A, E]):
    """Thunk plus a translator from the caught exception to a domain error.

    Attributes:
        try_: Function to execute.
        catch: Function to transform caught exceptions.
    """

    try_: Callable[[], A]
    catch: Callable[[Exception], E]


@overload
def safe(thunk: Callable[[], A]) -> Result[A, UnhandledException]: ...


@overload
def safe(thunk: SafeOptions[A, E]) -> Result[A, E]: ...


def safe(
    thunk: Callable[[], A] | SafeOptions[A, E],
) -> Result[A, E | UnhandledException]:
    """Executes function safely, wrapping result/error in Result.

    Args:
        thunk: Function to execute or options dict with try_ and catch.

    Returns:
        Result containing value or error.

    Raises:
        Panic: If catch handler throws.

    Example:
        >>> safe(lambda: Path("missing.yaml").read_text())
        Err(UnhandledException(...))
        >>> safe({"try_": lambda: yaml.safe_load(text), "catch": to_config_error})
        Err(ConfigError(...))
    """
    if callable(thunk):
        try:
            return Ok(thunk())
        except Exception as e:
            return Err(UnhandledException(e))

    try:
        return Ok(thunk["try_"]())
    except Exception as original_cause:
        try:
            return Err(thunk["catch"](original_cause))
        except Exception as catch_handler_error:
            panic("safe catch handler threw", catch_handler_error)
