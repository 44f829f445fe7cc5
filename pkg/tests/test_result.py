import pytest

from handoffdp import ConfigError, Err, Issue, Ok, Panic, Result


class TestResult:
    class TestOk:
        def test_creates_ok_with_value(self) -> None:
            ok: Result[int, str] = Ok(42)

            assert ok.is_ok()
            assert not ok.is_err()
            assert ok.unwrap() == 42
            assert isinstance(ok, Ok)

        def test_creates_ok_with_none(self) -> None:
            ok: Result[None, str] = Ok(None)

            assert ok.is_ok()
            assert ok.unwrap() is None

    class TestErr:
        def test_creates_err_with_error(self) -> None:
            result: Result[int, str] = Err("An error occurred")
            assert result.is_err()
            assert not result.is_ok()
            assert isinstance(result, Err)

        def test_creates_err_with_tagged_error(self) -> None:
            error = ConfigError("invalid", [Issue("zeta", "must be >= 1")])
            result: Result[int, ConfigError] = Err(error)
            assert result.unwrap_err() is error

    class TestMap:
        def test_transforms_ok_value(self) -> None:
            assert Ok(2).map(lambda x: x * 3) == Ok(6)

        def test_passes_err_through(self) -> None:
            err: Result[int, str] = Err("missing")
            assert err.map(lambda x: x * 3) == Err("missing")

        def test_panics_when_function_throws(self) -> None:
            def explode(_: int) -> int:
                raise RuntimeError("boom")

            with pytest.raises(Panic, match="Ok.map failed"):
                Ok(1).map(explode)

    class TestMapErr:
        def test_transforms_err_value(self) -> None:
            err: Result[int, str] = Err("Not found")
            assert err.map_err(lambda e: f"Error: {e}") == Err("Error: Not found")

        def test_leaves_ok_untouched(self) -> None:
            ok: Result[int, str] = Ok(1)
            assert ok.map_err(lambda e: f"Error: {e}") == Ok(1)

    class TestAndThen:
        def test_chains_ok(self) -> None:
            def half(x: int) -> Result[int, str]:
                return Ok(x // 2) if x % 2 == 0 else Err(f"{x} is odd")

            assert Ok(8).and_then(half).and_then(half) == Ok(2)
            assert Ok(6).and_then(half).and_then(half) == Err("3 is odd")

        def test_short_circuits_err(self) -> None:
            calls: list[int] = []

            def record(x: int) -> Result[int, str]:
                calls.append(x)
                return Ok(x)

            err: Result[int, str] = Err("stop")
            assert err.and_then(record) == Err("stop")
            assert calls == []

    class TestUnwrap:
        def test_unwrap_err_panics(self) -> None:
            with pytest.raises(Panic, match="unwrap called on Err"):
                Err("bad").unwrap()

        def test_unwrap_with_custom_message(self) -> None:
            with pytest.raises(Panic, match="scenario must load"):
                Err("bad").unwrap("scenario must load")

        def test_unwrap_err_on_ok_panics(self) -> None:
            with pytest.raises(Panic, match="unwrap_err called on Ok"):
                Ok(1).unwrap_err()

    class TestMatch:
        def test_calls_matching_handler(self) -> None:
            cases = {"ok": lambda v: f"value {v}", "err": lambda e: f"error {e}"}
            assert Ok(3).match(cases) == "value 3"  # type: ignore[arg-type]
            assert Err("x").match(cases) == "error x"  # type: ignore[arg-type]

    class TestPartition:
        def test_splits_values_and_errors(self) -> None:
            results: list[Result[int, str]] = [Ok(1), Err("a"), Ok(2), Err("b")]
            assert Result.partition(results) == ([1, 2], ["a", "b"])

        def test_empty(self) -> None:
            assert Result.partition([]) == ([], [])

    class TestCollect:
        def test_all_ok(self) -> None:
            assert Result.collect([Ok(1), Ok(2)]) == Ok([1, 2])

        def test_gathers_every_error(self) -> None:
            results: list[Result[int, str]] = [Ok(1), Err("a"), Err("b")]
            assert Result.collect(results) == Err(["a", "b"])

        def test_keeps_first_error(self) -> None:
            results: list[Result[int, str]] = [Ok(1), Err("a"), Err("b")]
            assert Result.collect(results).map_err(lambda errors: errors[0]) == Err("a")

    class TestEquality:
        def test_ok_and_err_differ(self) -> None:
            assert Ok(1) != Err(1)
            assert hash(Ok(1)) != hash(Err(1))

        def test_repr(self) -> None:
            assert repr(Ok((1, 2))) == "Ok((1, 2))"
            assert repr(Err("bad")) == "Err('bad')"

        def test_supports_structural_matching(self) -> None:
            match Ok(5):
                case Ok(value):
                    assert value == 5
                case _:
                    pytest.fail("expected Ok")
