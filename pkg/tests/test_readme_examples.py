import re
from pathlib import Path

import numpy as np
import pytest

from handoffdp import (
    ALWAYS_STAYING,
    AccessMDP,
    CaseTag,
    ConfigError,
    ScenarioConfig,
    backward_induction,
    evaluate_policy,
    expected_total_cost,
    monotone_backward_induction,
    monte_carlo,
    parse_config,
    policy_by_name,
    run_all_checks,
    sweep_data_size,
    sweep_deadline,
)
from handoffdp.cli import main

SCENARIO_FILE = """\
name: three_channel
horizon: 15          # D
data_size: 30        # V
zeta: 1              # threshold sampling interval, optional
rates: {good: 2, bad: 1}
costs: {silent: 0.01, transmit: 40, switch: 5}
penalty:
  quadratic: 5       # penalty(v) = 5 * v^2; or `table: [...]` with V + 1 entries
channels:            # rows are "from" states, ordered (busy, idle) and (bad, good)
  - occupancy: [[0.2, 0.8], [0.8, 0.2]]
    quality: [[0.5, 0.5], [0.5, 0.5]]
  - occupancy: [[0.2, 0.8], [0.8, 0.2]]
    quality: [[0.5, 0.5], [0.5, 0.5]]
  - occupancy: [[0.2, 0.8], [0.8, 0.2]]
    quality: [[0.5, 0.5], [0.5, 0.5]]
initial_state:       # optional
  occupancy: [1, 1, 1]
  quality: [0, 1, 0]
  channel: 3
"""


class TestQuickStart:
    def test_solve_bundled_scenario(self, three_channel: ScenarioConfig) -> None:
        config = parse_config("three_channel").unwrap()
        values, policy = backward_induction(config)

        s1 = config.initial_state
        assert expected_total_cost(values, s1) > 0
        action = policy.action(1, s1)
        assert re.fullmatch(r"\([01],[123]\)", str(action))
        assert action in AccessMDP(config).allowed_actions(s1)
        assert config == three_channel


class TestSolvers:
    def test_monotone_solver_agrees(self, small_three_channel: ScenarioConfig) -> None:
        config = small_three_channel
        values, policy = backward_induction(config)
        mono_values, mono_policy, thresholds = monotone_backward_induction(config)

        assert mono_policy == policy
        np.testing.assert_array_equal(mono_values.values, values.values)
        assert thresholds.case((1, 1, 1), (0, 1, 0), 3) is CaseTag.CASE3
        assert len(thresholds.row(1, (1, 1, 1), (0, 1, 0), 3)) == 4

    def test_coarse_scan_bounds_the_optimum(self, small_three_channel: ScenarioConfig) -> None:
        config = small_three_channel
        s1 = config.initial_state
        values, _ = backward_induction(config)
        coarse_values, coarse, _ = monotone_backward_induction(config.with_zeta(3))

        assert expected_total_cost(coarse_values, s1) >= expected_total_cost(values, s1) - 1e-9
        own = evaluate_policy(config, coarse)
        np.testing.assert_allclose(coarse_values.values, own.values)


class TestStructureChecks:
    def test_reports_per_check(self, small_three_channel: ScenarioConfig) -> None:
        values, policy = backward_induction(small_three_channel)
        reports = run_all_checks(small_three_channel, values, policy)

        assert len(reports) == 2 + small_three_channel.horizon
        assert reports[0].name == "value_monotone"
        assert reports[0].passed
        assert reports[1].passed


class TestBaselinesAndMonteCarlo:
    def test_estimate_and_named_policy(self, small_three_channel: ScenarioConfig) -> None:
        config = small_three_channel
        s1 = config.initial_state
        estimate = monte_carlo(config, ALWAYS_STAYING, s1, 2_000, seed=0)
        assert estimate.n == 2_000
        assert estimate.stderr > 0

        optimal = policy_by_name("optimal", config).unwrap()
        assert optimal.name == "optimal"


class TestSweeps:
    def test_exact_only_sweeps(self, small_three_channel: ScenarioConfig) -> None:
        sweep = sweep_data_size(
            small_three_channel, (2, 4, 6), ("optimal", "always-staying"), 0
        ).unwrap()
        costs = sweep.exact("optimal")
        assert costs == sorted(costs)
        assert all(o <= a + 1e-9 for o, a in zip(costs, sweep.exact("always-staying")))

        by_deadline = sweep_deadline(small_three_channel, (2, 4), ("optimal",), 0).unwrap()
        assert by_deadline.grid == (2, 4)


class TestErrorHandling:
    def test_missing_file(self) -> None:
        result = parse_config("missing.yaml")
        message = result.match({"ok": lambda c: c.name, "err": lambda e: e.message})
        assert "not found" in message

        error = result.unwrap_err()
        assert isinstance(error, ConfigError)
        assert [issue.path for issue in error.issues] == ["config"]


class TestScenarioFiles:
    def test_documented_file_is_the_bundled_scenario(
        self, tmp_path: Path, three_channel: ScenarioConfig
    ) -> None:
        path = tmp_path / "three_channel.yaml"
        path.write_text(SCENARIO_FILE, encoding="utf-8")
        assert parse_config(path).unwrap() == three_channel

    def test_plain_number_penalty(self, tmp_path: Path, three_channel: ScenarioConfig) -> None:
        text = re.sub(r"penalty:\n  quadratic: 5 .*\n", "penalty: 5\n", SCENARIO_FILE)
        path = tmp_path / "three_channel.yaml"
        path.write_text(text, encoding="utf-8")
        assert parse_config(path).unwrap() == three_channel


class TestCommandLine:
    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        with pytest.raises(SystemExit):
            main(["--version"])
        assert capsys.readouterr().out.startswith("handoffdp ")
