import csv
import json
from collections.abc import Callable
from pathlib import Path

import numpy as np

from handoffdp import (
    AccessMDP,
    OutputError,
    ScenarioConfig,
    backward_induction,
    check_value_monotone,
    monotone_backward_induction,
    sweep_data_size,
)
from handoffdp.serialize import (
    POLICY_COLUMNS,
    THRESHOLD_COLUMNS,
    VALUE_COLUMNS,
    RunManifest,
    bit_string,
    config_hash,
    parse_bits,
    read_policy_csv,
    read_sweep_csv,
    read_thresholds_csv,
    read_values_csv,
    write_checks_json,
    write_manifest,
    write_policy_csv,
    write_sweep,
    write_thresholds_csv,
    write_values_csv,
)


def read_rows(path: Path) -> list[dict[str, str]]:
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class TestSerialize:
    class TestBits:
        def test_channel_one_first(self) -> None:
            assert bit_string((0, 1, 1)) == "011"
            assert parse_bits("011") == (0, 1, 1)

    class TestTables:
        def test_values_csv_layout(
            self, tmp_path: Path, frozen: Callable[..., ScenarioConfig]
        ) -> None:
            values, _ = backward_induction(frozen(data_size=2))
            path = write_values_csv(tmp_path / "values.csv", values).unwrap()
            rows = read_rows(path)
            assert tuple(rows[0]) == VALUE_COLUMNS
            assert len(rows) == 2 * 3 * 4
            assert rows[0] == {"t": "1", "v": "0", "o": "0", "q": "0", "c": "1", "value": "0.0"}
            last = rows[-1]
            picked = (last["t"], last["v"], last["o"], last["q"], last["value"])
            assert picked == ("2", "2", "1", "1", "20.0")

        def test_values_reload_exactly(
            self, tmp_path: Path, small_three_channel: ScenarioConfig
        ) -> None:
            mdp = AccessMDP(small_three_channel)
            values, _ = backward_induction(mdp)
            path = write_values_csv(tmp_path / "values.csv", values).unwrap()
            reloaded = read_values_csv(path, mdp.space).unwrap()
            np.testing.assert_array_equal(reloaded.values, values.values)

        def test_policy_reloads(self, tmp_path: Path, small_three_channel: ScenarioConfig) -> None:
            mdp = AccessMDP(small_three_channel)
            _, policy = backward_induction(mdp)
            path = write_policy_csv(tmp_path / "policy.csv", policy).unwrap()
            assert tuple(read_rows(path)[0]) == POLICY_COLUMNS
            assert read_policy_csv(path, mdp.space).unwrap() == policy

        def test_thresholds_leave_unused_cells_empty(
            self, tmp_path: Path, frozen: Callable[..., ScenarioConfig]
        ) -> None:
            _, _, thresholds = monotone_backward_induction(frozen(data_size=4))
            path = write_thresholds_csv(tmp_path / "thresholds.csv", thresholds).unwrap()
            rows = read_rows(path)
            assert tuple(rows[0]) == THRESHOLD_COLUMNS
            idle_good = next(r for r in rows if (r["o"], r["q"]) == ("1", "1"))
            assert idle_good["case"] == "case1"
            assert [idle_good[f"th{i}"] for i in range(1, 5)] == ["3", "", "", ""]
            busy = next(r for r in rows if r["o"] == "0")
            assert busy["case"] == "case4"

        def test_thresholds_reload(
            self, tmp_path: Path, small_three_channel: ScenarioConfig
        ) -> None:
            mdp = AccessMDP(small_three_channel)
            _, policy, thresholds = monotone_backward_induction(mdp)
            path = write_thresholds_csv(tmp_path / "thresholds.csv", thresholds).unwrap()
            reloaded = read_thresholds_csv(path, mdp.space).unwrap()
            np.testing.assert_array_equal(reloaded.thresholds, thresholds.thresholds)
            np.testing.assert_array_equal(reloaded.targets, thresholds.targets)
            assert reloaded.cases == thresholds.cases
            assert reloaded.to_policy_table() == policy

        def test_rewrite_is_byte_identical(
            self, tmp_path: Path, small_three_channel: ScenarioConfig
        ) -> None:
            first_values, _ = backward_induction(small_three_channel)
            second_values, _ = backward_induction(small_three_channel)
            first = write_values_csv(tmp_path / "a.csv", first_values)
            second = write_values_csv(tmp_path / "b.csv", second_values)
            assert first.unwrap().read_bytes() == second.unwrap().read_bytes()

    class TestSweepFiles:
        def test_csv_and_json(self, tmp_path: Path, small_three_channel: ScenarioConfig) -> None:
            sweep = sweep_data_size(small_three_channel, (3, 5), ("always-staying",), 50, seed=2)
            csv_path, json_path = write_sweep(
                tmp_path / "sweep_V.csv", tmp_path / "sweep_V.json", sweep.unwrap()
            ).unwrap()
            assert read_sweep_csv(csv_path).unwrap() == list(sweep.unwrap().rows)
            document = json.loads(json_path.read_text(encoding="utf-8"))
            assert document["grid"] == [3, 5]
            assert [r["n"] for r in document["rows"]] == [50, 50]

    class TestChecksAndManifest:
        def test_checks_json(self, tmp_path: Path, frozen: Callable[..., ScenarioConfig]) -> None:
            values, _ = backward_induction(frozen(data_size=2))
            path = write_checks_json(tmp_path / "checks.json", [check_value_monotone(values)])
            document = json.loads(path.unwrap().read_text(encoding="utf-8"))
            assert document == {
                "passed": True,
                "checks": [{"name": "value_monotone", "passed": True, "counterexamples": []}],
            }

        def test_config_hash_is_stable(self, three_channel: ScenarioConfig) -> None:
            assert config_hash(three_channel) == config_hash(three_channel.with_zeta(1))
            assert config_hash(three_channel) != config_hash(three_channel.with_zeta(2))
            assert len(config_hash(three_channel)) == 64

        def test_manifest(self, tmp_path: Path) -> None:
            manifest = RunManifest("abc", "solve", 0, "0.1.0", 1.5, ("values.csv",))
            path = write_manifest(tmp_path / "manifest.json", manifest).unwrap()
            assert json.loads(path.read_text(encoding="utf-8")) == {
                "config_hash": "abc",
                "subcommand": "solve",
                "seed": 0,
                "version": "0.1.0",
                "runtime_seconds": 1.5,
                "outputs": ["values.csv"],
            }

    class TestErrors:
        def test_unwritable_target_is_output_error(
            self, tmp_path: Path, frozen: Callable[..., ScenarioConfig]
        ) -> None:
            blocker = tmp_path / "file"
            blocker.write_text("", encoding="utf-8")
            values, _ = backward_induction(frozen())
            error = write_values_csv(blocker / "values.csv", values).unwrap_err()
            assert isinstance(error, OutputError)
            assert error.cause is not None

        def test_malformed_table_is_output_error(
            self, tmp_path: Path, small_three_channel: ScenarioConfig
        ) -> None:
            path = tmp_path / "values.csv"
            path.write_text("t,v,o,q,c,value\n1,0,000,000,1,abc\n", encoding="utf-8")
            error = read_values_csv(path, AccessMDP(small_three_channel).space).unwrap_err()
            assert isinstance(error, OutputError)

        def test_missing_table_is_output_error(self, tmp_path: Path) -> None:
            error = read_sweep_csv(tmp_path / "absent.csv").unwrap_err()
            assert isinstance(error, OutputError)
