from pathlib import Path
from typing import Any

import numpy as np
import orjson
from click.testing import CliRunner

from volterra_paths import __version__
from volterra_paths.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main
from volterra_paths.utils.json_utils import JsonHandler

FRACTIONAL: dict[str, Any] = {
    "kernel": {"type": "fractional", "beta": 0.5},
    "operator": {"type": "diagonal", "entries": [-1.0, -4.0]},
    "grid": {"T": 1.0, "n": 128},
    "noise": {
        "brownian_covariance": [[0.1, 0.0], [0.0, 0.1]],
        "poisson_rate": 5.0,
        "jump_distribution": {"kind": "rademacher", "scale": 0.5},
    },
    "ensemble_size": 6,
    "u0": [1.0, 0.5],
    "seed": 7,
}


def _config(tmp_path: Path, **overrides: Any) -> Path:
    path = tmp_path / "experiment.json"
    path.write_bytes(orjson.dumps({**FRACTIONAL, **overrides}))
    return path


def test_version_option() -> None:
    result = CliRunner().invoke(main, ["--version"])

    assert result.exit_code == EXIT_OK
    assert __version__ in result.output


def test_verify_kernel_certifies_half_order_kernel(tmp_path: Path) -> None:
    out = tmp_path / "out"

    result = CliRunner().invoke(main, ["verify-kernel", "--config", str(_config(tmp_path)), "--out", str(out)])

    assert result.exit_code == EXIT_OK, result.output
    report = JsonHandler.load_file(out / "certificate.json")
    assert report["passed"] is True
    assert report["certificate"]["passed"] is True
    assert abs(report["certificate"]["sigma"] - np.pi / 4) <= 1e-6


def test_verify_kernel_fails_for_linear_kernel(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = _config(tmp_path, kernel={"type": "linear_t"})

    result = CliRunner().invoke(main, ["verify-kernel", "--config", str(config), "--out", str(out)])

    assert result.exit_code == EXIT_CHECK_FAILED
    assert JsonHandler.load_file(out / "certificate.json")["certificate"]["passed"] is False


def test_failed_certificate_blocks_resolvent_without_force(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = _config(tmp_path, kernel={"type": "linear_t"})

    result = CliRunner().invoke(main, ["resolvent", "--config", str(config), "--out", str(out)])

    assert result.exit_code == EXIT_CHECK_FAILED
    assert not (out / "resolvent_report.json").exists()


def test_malformed_config_exits_with_usage_code(tmp_path: Path) -> None:
    broken = tmp_path / "broken.json"
    broken.write_text('{"kernel": ')

    result = CliRunner().invoke(main, ["verify-kernel", "--config", str(broken)])

    assert result.exit_code == EXIT_USAGE


def test_missing_config_exits_with_usage_code(tmp_path: Path) -> None:
    result = CliRunner().invoke(main, ["simulate", "--config", str(tmp_path / "absent.json")])

    assert result.exit_code == EXIT_USAGE


def test_schema_violation_exits_with_usage_code(tmp_path: Path) -> None:
    config = _config(tmp_path, ensemble_size=0)

    result = CliRunner().invoke(main, ["simulate", "--config", str(config)])

    assert result.exit_code == EXIT_USAGE


def test_resolvent_writes_both_tables(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = _config(tmp_path, checks=["laplace", "certificate", "resolvent", "cross_method"])

    result = CliRunner().invoke(main, ["resolvent", "--config", str(config), "--out", str(out)])

    assert result.exit_code == EXIT_OK, result.output
    for name in ("resolvent_matrix.csv", "resolvent_matrix.bin", "resolvent_spectral.bin", "resolvent_diff.csv"):
        assert (out / name).is_file()
    report = JsonHandler.load_file(out / "resolvent_report.json")
    assert report["matrix"]["residual"] <= 1e-10 * 4
    assert report["cross_method"]["max_diff"] <= 1e-6


def test_check_positivity_passes_for_dissipative_operator(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = _config(tmp_path, checks=["certificate", "gram", "bochner"])

    result = CliRunner().invoke(main, ["check-positivity", "--config", str(config), "--out", str(out)])

    assert result.exit_code == EXIT_OK, result.output
    report = JsonHandler.load_file(out / "positivity.json")
    assert report["gram"]["passed"] is True
    assert report["bochner"]["passed"] is True


def test_simulate_and_report_write_summary(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = _config(tmp_path, checks=["laplace", "certificate", "jump_transfer", "regularity"])
    runner = CliRunner()

    simulated = runner.invoke(main, ["simulate", "--config", str(config), "--out", str(out)])
    reported = runner.invoke(main, ["report", "--out", str(out)])

    assert simulated.exit_code == EXIT_OK, simulated.output
    assert reported.exit_code == EXIT_OK, reported.output
    assert (out / "paths" / "solution_0005.csv").is_file()
    assert (out / "paths" / "noise_0000.csv").is_file()
    assert (out / "ensemble_mean.csv").is_file()
    summary = JsonHandler.load_file(out / "summary.json")
    assert summary["passed"] is True
    assert set(summary["reports"]) == {"certificate", "resolvent", "simulation"}
    simulation = JsonHandler.load_file(out / "simulation_report.json")
    assert simulation["jump_transfer"]["match_fraction"] == 1.0


def test_report_on_empty_directory_fails(tmp_path: Path) -> None:
    out = tmp_path / "empty"
    out.mkdir()

    result = CliRunner().invoke(main, ["report", "--out", str(out)])

    assert result.exit_code == EXIT_CHECK_FAILED


def test_rerun_with_same_seed_is_byte_identical(tmp_path: Path) -> None:
    config = _config(tmp_path, checks=["certificate", "jump_transfer", "regularity"])
    runner = CliRunner()

    for out in ("first", "second"):
        result = runner.invoke(main, ["simulate", "--config", str(config), "--out", str(tmp_path / out)])
        assert result.exit_code == EXIT_OK, result.output

    for name in ("certificate.json", "simulation_report.json", "paths/solution_0003.csv", "ensemble_mean.csv"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


def test_seed_option_changes_paths(tmp_path: Path) -> None:
    config = _config(tmp_path, checks=["certificate"])
    runner = CliRunner()

    runner.invoke(main, ["simulate", "--config", str(config), "--out", str(tmp_path / "a")])
    runner.invoke(main, ["simulate", "--config", str(config), "--out", str(tmp_path / "b"), "--seed", "8"])

    first = (tmp_path / "a" / "paths" / "noise_0000.csv").read_bytes()
    second = (tmp_path / "b" / "paths" / "noise_0000.csv").read_bytes()
    assert first != second


def test_negative_seed_exits_with_usage_code(tmp_path: Path) -> None:
    out = tmp_path / "out"

    result = CliRunner().invoke(
        main, ["simulate", "--config", str(_config(tmp_path)), "--out", str(out), "--seed", "-1"]
    )

    assert result.exit_code == EXIT_USAGE
    assert not (out / "simulation_report.json").exists()


def test_continuous_regularity_compares_against_coarser_grid(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = _config(
        tmp_path,
        noise={"brownian_covariance": [[1.0, 0.0], [0.0, 1.0]]},
        ensemble_size=20,
        checks=["certificate", "regularity"],
    )

    result = CliRunner().invoke(main, ["simulate", "--config", str(config), "--out", str(out)])

    assert result.exit_code == EXIT_OK, result.output
    regularity = JsonHandler.load_file(out / "simulation_report.json")["regularity"]
    assert regularity["mode"] == "continuous"
    scaling = regularity["increment_scaling"]
    assert scaling["levels"] == [32, 128]
    assert scaling["max_increments"][1] < scaling["max_increments"][0]
    assert scaling["passed"] is True


def test_rotation_operator_gets_a_ladder_shift(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = _config(tmp_path, operator={"type": "matrix", "entries": [[0.0, 5.0], [-5.0, 0.0]]})

    CliRunner().invoke(main, ["verify-kernel", "--config", str(config), "--out", str(out)])

    report = JsonHandler.load_file(out / "certificate.json")
    assert report["rho"] == 1.0
    assert report["operator_angle"]["rho"] == 1.0
    assert report["operator_angle"]["field_angle"] < np.pi / 2


def test_explicit_zero_shift_is_kept(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = _config(tmp_path, operator={"type": "matrix", "entries": [[0.0, 5.0], [-5.0, 0.0]]}, rho=0.0)

    result = CliRunner().invoke(main, ["verify-kernel", "--config", str(config), "--out", str(out)])

    assert result.exit_code == EXIT_CHECK_FAILED
    assert JsonHandler.load_file(out / "certificate.json")["rho"] == 0.0
