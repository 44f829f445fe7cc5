import pytest

from handoffdp import (
    ConfigError,
    DisallowedActionError,
    GridSpecError,
    Issue,
    Panic,
    SampleSizeError,
    State,
    TaggedError,
    UnhandledException,
    UnknownPolicyError,
    is_panic,
    panic,
)
from handoffdp.mdp import Action


class SolverError(TaggedError):
    __slots__ = ("stage",)

    TAG: str = "SolverError"

    def __init__(self, stage: int) -> None:
        self.stage = stage
        super().__init__(f"Stage {stage} failed")


class TestTaggedError:
    class TestConstruction:
        def test_has_tag_discriminator(self) -> None:
            assert SolverError(3).tag == "SolverError"
            assert ConfigError("bad").tag == "ConfigError"
            assert GridSpecError("1:0", "empty").tag == "GridSpecError"

        def test_sets_message(self) -> None:
            error = SolverError(3)
            assert error.message == "Stage 3 failed"
            assert str(error) == "Stage 3 failed"

        def test_preserves_custom_properties(self) -> None:
            assert SolverError(7).stage == 7
            assert GridSpecError("a:b", "not integers").spec == "a:b"

        def test_chains_exception_cause(self) -> None:
            root = OSError("disk full")
            error = ConfigError("cannot read scenario.yaml", cause=root)
            assert error.__cause__ is root
            assert error.cause is root

        def test_keeps_non_exception_cause(self) -> None:
            error = ConfigError("bad", cause={"line": 3})
            assert error.cause == {"line": 3}
            assert error.__cause__ is None

        def test_subclass_without_tag_panics(self) -> None:
            with pytest.raises(Panic):

                class Untagged(TaggedError):  # pyright: ignore[reportUnusedClass]
                    pass

    class TestMatch:
        def test_dispatches_on_type(self) -> None:
            handlers = {
                SolverError: lambda e: f"stage {e.stage}",
                ConfigError: lambda e: "config",
            }
            assert TaggedError.match(SolverError(2), handlers) == "stage 2"
            assert TaggedError.match(ConfigError("x"), handlers) == "config"

        def test_raises_without_handler(self) -> None:
            with pytest.raises(ValueError, match="No handler for error type: SolverError"):
                TaggedError.match(SolverError(1), {ConfigError: lambda e: 0})


class TestConfigError:
    def test_lists_issues_in_message(self) -> None:
        error = ConfigError(
            "invalid scenario 'x'",
            [Issue("zeta", "must be >= 1"), Issue("horizon", "must be >= 1")],
        )
        assert error.issues == (Issue("zeta", "must be >= 1"), Issue("horizon", "must be >= 1"))
        assert str(error) == "invalid scenario 'x': zeta: must be >= 1; horizon: must be >= 1"

    def test_message_without_issues(self) -> None:
        assert str(ConfigError("scenario not found")) == "scenario not found"


class TestDomainErrors:
    def test_disallowed_action_names_state_action_and_stage(self) -> None:
        state = State.of(2, [0], [1], 1)
        error = DisallowedActionError(state, Action(1, 1), t=3)
        assert error.t == 3
        assert error.state == state
        assert str(error) == "Action (1,1) not allowed in state (v=2, o=[0], q=[1], c=1) at t=3"

    def test_unknown_policy_lists_known_names(self) -> None:
        error = UnknownPolicyError("greedy", ("optimal", "always-staying"))
        assert error.name == "greedy"
        assert "optimal, always-staying" in str(error)

    def test_sample_size_names_the_count(self) -> None:
        error = SampleSizeError(0)
        assert error.n == 0
        assert error.tag == "SampleSizeError"
        assert str(error) == "Need at least one rollout, got 0"


class TestUnhandledException:
    def test_wraps_cause(self) -> None:
        cause = RuntimeError("boom")
        error = UnhandledException(cause)
        assert error.tag == "UnhandledException"
        assert error.cause is cause
        assert str(error) == "Unhandled exception: boom"


class TestPanic:
    def test_panic_raises(self) -> None:
        with pytest.raises(Panic, match="broken invariant"):
            panic("broken invariant")

    def test_is_panic(self) -> None:
        assert is_panic(Panic("x"))
        assert not is_panic(ConfigError("x"))
        assert not is_panic(ValueError("x"))
