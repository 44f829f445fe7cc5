from pathlib import Path

import pytest

from handoffdp import OutputError, Panic, UnhandledException, safe


class TestSafe:
    class TestSimpleThunk:
        def test_returns_ok_on_success(self) -> None:
            result = safe(lambda: 42)
            assert result.is_ok()
            assert result.unwrap() == 42

        def test_returns_err_on_exception(self) -> None:
            result = safe(lambda: int("bad"))
            assert result.is_err()
            error = result.unwrap_err()
            assert isinstance(error, UnhandledException)
            assert error.tag == "UnhandledException"

        def test_wraps_any_exception(self) -> None:
            def raise_custom() -> int:
                raise RuntimeError("Custom error")

            result = safe(raise_custom)
            err = result.unwrap_err()
            assert isinstance(err, UnhandledException)
            assert str(err) == "Unhandled exception: Custom error"

        def test_wraps_missing_file(self, tmp_path: Path) -> None:
            missing = tmp_path / "missing.yaml"
            result = safe(lambda: missing.read_text())
            assert isinstance(result.unwrap_err().cause, FileNotFoundError)

    class TestWithOptions:
        def test_returns_ok_on_success(self) -> None:
            result = safe({"try_": lambda: 42, "catch": lambda e: str(e)})
            assert result.unwrap() == 42

        def test_maps_exception_to_domain_error(self, tmp_path: Path) -> None:
            target = tmp_path / "missing" / "values.csv"
            result = safe(
                {
                    "try_": lambda: target.write_text("t,v\n"),
                    "catch": lambda e: OutputError(f"cannot write {target}", e),
                }
            )
            error = result.unwrap_err()
            assert isinstance(error, OutputError)
            assert isinstance(error.cause, FileNotFoundError)

        def test_panics_when_catch_handler_throws(self) -> None:
            def bad_handler(e: Exception) -> str:
                raise RuntimeError("handler broke")

            with pytest.raises(Panic, match="safe catch handler threw"):
                safe({"try_": lambda: int("bad"), "catch": bad_handler})
