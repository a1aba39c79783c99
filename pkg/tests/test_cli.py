"""Integration tests for the CLI.

These tests drive every command through typer's CliRunner:
1. --version and --help
2. gen determinism and input validation
3. verify exit codes
4. moments, lift and realize outputs
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from freeclark import __version__
from freeclark.cli import app
from freeclark.schemas import (
    ColligationModel,
    CommSeriesModel,
    FreeSeriesModel,
    InstanceMetadata,
    InstanceModel,
    MomentModel,
    Report,
    SeriesMode,
)
from freeclark.series import FreeSeries

runner = CliRunner()


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep the CLI callback from installing its stderr sink."""
    monkeypatch.setattr("freeclark.cli.setup_logging", lambda settings=None: None)


def _write_free(tmp_path: Path, F: FreeSeries, name: str = "instance.json") -> Path:
    instance = InstanceModel(
        mode=SeriesMode.FREE,
        free=FreeSeriesModel.from_series(F),
        metadata=InstanceMetadata(d=F.d, m=F.m, deg=F.degree),
    )
    path = tmp_path / name
    path.write_text(instance.model_dump_json())
    return path


def _write_json(tmp_path: Path, payload: dict, name: str) -> Path:  # type: ignore[type-arg]
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


# ============================================================================
# Tests: Basic flags
# ============================================================================


def test_cli_version_flag() -> None:
    result = runner.invoke(app, ["--version"])

    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_cli_help_lists_commands() -> None:
    result = runner.invoke(app, ["--help"])

    assert result.exit_code == 0
    for command in ("gen", "verify", "moments", "lift", "realize"):
        assert command in result.stdout


# ============================================================================
# Tests: gen
# ============================================================================


def test_gen_is_deterministic() -> None:
    args = ["gen", "--d", "2", "--m", "1", "--deg", "2", "--rho", "0.7", "--seed", "42", "--N", "3"]
    first = runner.invoke(app, args)
    second = runner.invoke(app, args)

    assert first.exit_code == 0
    assert first.stdout == second.stdout
    instance = InstanceModel.model_validate_json(first.stdout)
    assert instance.mode == SeriesMode.FREE
    assert instance.metadata.seed == 42
    assert instance.free is not None and instance.free.N == 3


def test_gen_comm_mode(tmp_path: Path) -> None:
    out = tmp_path / "comm.json"
    result = runner.invoke(app, ["gen", "--mode", "comm", "--d", "2", "--N", "3", "-o", str(out)])

    assert result.exit_code == 0
    instance = InstanceModel.model_validate_json(out.read_text())
    assert instance.mode == SeriesMode.COMM
    assert instance.comm is not None


def test_gen_rejects_bad_rho() -> None:
    result = runner.invoke(app, ["gen", "--rho", "1.5"])

    assert result.exit_code == 2


def test_gen_rejects_degree_above_truncation() -> None:
    result = runner.invoke(app, ["gen", "--deg", "4", "--N", "2"])

    assert result.exit_code == 2


def test_gen_respects_max_word_length(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("FREECLARK_MAX_WORD_LENGTH", "2")

    assert runner.invoke(app, ["gen", "--N", "3"]).exit_code == 2
    assert runner.invoke(app, ["gen", "--N", "2"]).exit_code == 0


# ============================================================================
# Tests: verify
# ============================================================================


def test_verify_zero_series_passes(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries.zero(1, 1, 2))
    out = tmp_path / "report.json"

    result = runner.invoke(app, ["verify", str(path), "-o", str(out)])

    assert result.exit_code == 0
    report = Report.model_validate_json(out.read_text())
    assert report.passed
    assert any(c.name == "realize.coisometry" for c in report.checks)
    assert not any(c.name.startswith("lift.") for c in report.checks)


def test_verify_quiet_prints_json(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries(1, 1, 2, {(1,): 0.5}))

    result = runner.invoke(app, ["verify", str(path), "--suite", "herglotz", "--quiet"])

    assert result.exit_code == 0
    report = Report.model_validate_json(result.stdout)
    assert report.suite == "herglotz"
    assert [c.name for c in report.checks] == sorted(c.name for c in report.checks)


def test_verify_unital_instance_is_a_usage_error(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries(1, 1, 2, {(): 1.0}))

    result = runner.invoke(app, ["verify", str(path)])

    assert result.exit_code == 2


def test_verify_missing_file(tmp_path: Path) -> None:
    result = runner.invoke(app, ["verify", str(tmp_path / "missing.json")])

    assert result.exit_code == 2


def test_verify_invalid_json(tmp_path: Path) -> None:
    path = _write_json(tmp_path, {"mode": "free"}, "bad.json")

    result = runner.invoke(app, ["verify", str(path)])

    assert result.exit_code == 2


def test_verify_fails_under_impossible_tolerance(tmp_path: Path) -> None:
    out = tmp_path / "instance.json"
    runner.invoke(app, ["gen", "--d", "2", "--deg", "2", "--seed", "1", "--N", "3", "-o", str(out)])

    result = runner.invoke(app, ["verify", str(out), "--suite", "herglotz", "--tol", "1e-300"])

    assert result.exit_code == 1


# ============================================================================
# Tests: moments
# ============================================================================


def test_moments_of_one_variable_instance(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries(1, 1, 3, {(1,): 0.5}))
    out = tmp_path / "moments.json"

    result = runner.invoke(app, ["moments", str(path), "--max-len", "2", "-o", str(out)])

    assert result.exit_code == 0
    model = MomentModel.model_validate_json(out.read_text())
    assert model.N == 2
    assert model.moments["11"][0][0] == pytest.approx([0.25, 0.0])


def test_moments_of_comm_instance(tmp_path: Path) -> None:
    inst = tmp_path / "comm.json"
    runner.invoke(app, ["gen", "--mode", "comm", "--d", "2", "--N", "2", "-o", str(inst)])

    result = runner.invoke(app, ["moments", str(inst)])

    assert result.exit_code == 0
    assert "1,1" in json.loads(result.stdout)["moments"]


# ============================================================================
# Tests: lift
# ============================================================================


def test_lift_produces_a_verified_free_instance(tmp_path: Path) -> None:
    comm = tmp_path / "comm.json"
    lifted = tmp_path / "lift.json"
    runner.invoke(
        app, ["gen", "--mode", "comm", "--d", "2", "--deg", "1", "--N", "3", "-o", str(comm)]
    )

    result = runner.invoke(app, ["lift", "--comm", str(comm), "-o", str(lifted)])

    assert result.exit_code == 0
    instance = InstanceModel.model_validate_json(lifted.read_text())
    assert instance.mode == SeriesMode.FREE
    assert instance.lift_of is not None
    assert instance.metadata.extension == "tight"

    check = runner.invoke(app, ["verify", str(lifted), "--suite", "lift"])
    assert check.exit_code == 0


def test_lift_with_random_extension_writes_report(tmp_path: Path) -> None:
    comm = tmp_path / "comm.json"
    report_path = tmp_path / "report.json"
    runner.invoke(app, ["gen", "--mode", "comm", "--d", "2", "--N", "2", "-o", str(comm)])

    result = runner.invoke(
        app,
        [
            "lift",
            "--comm",
            str(comm),
            "--extension",
            "random:5",
            "-o",
            str(tmp_path / "lift.json"),
            "--report",
            str(report_path),
        ],
    )

    assert result.exit_code == 0
    report = Report.model_validate_json(report_path.read_text())
    assert {c.name for c in report.checks} == {"lift.symmetrization", "lift.moment_restriction"}


def test_lift_rejects_bad_extension(tmp_path: Path) -> None:
    comm = tmp_path / "comm.json"
    runner.invoke(app, ["gen", "--mode", "comm", "--d", "2", "--N", "2", "-o", str(comm)])

    result = runner.invoke(app, ["lift", "--comm", str(comm), "--extension", "loose"])

    assert result.exit_code == 2


def test_lift_needs_a_comm_instance(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries.zero(2, 1, 2))

    result = runner.invoke(app, ["lift", "--comm", str(path)])

    assert result.exit_code == 2


# ============================================================================
# Tests: realize
# ============================================================================


def test_realize_needs_exactly_one_target(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries(1, 1, 3, {(1,): 0.5}))

    assert runner.invoke(app, ["realize", str(path)]).exit_code == 2


def test_realize_rejects_both_targets(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries(1, 1, 3, {(1,): 0.5}))
    point = _write_json(tmp_path, {"n": 1, "Z": [[[[0.1, 0]]]]}, "point.json")

    result = runner.invoke(app, ["realize", str(path), "--point", str(point), "--coeffs", "2"])

    assert result.exit_code == 2


def test_realize_writes_the_colligation(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries(1, 1, 3, {(1,): 0.5}))
    out = tmp_path / "colligation.json"

    result = runner.invoke(app, ["realize", str(path), "--coeffs", "2", "--colligation", str(out)])

    assert result.exit_code == 0
    model = ColligationModel.model_validate_json(out.read_text())
    assert (model.d, model.m) == (1, 1)
    assert len(model.A) == 1
    assert len(model.B) == model.state_dim
    assert model.D[0][0] == [0.0, 0.0]


def test_realize_coefficients(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries(1, 1, 3, {(1,): 0.5}))

    result = runner.invoke(app, ["realize", str(path), "--coeffs", "2"])

    assert result.exit_code == 0
    coeffs = FreeSeriesModel.model_validate_json(result.stdout).to_series()
    assert abs(coeffs.coeff((1,))[0, 0] - 0.5) < 1e-10
    assert abs(coeffs.coeff((1, 1))[0, 0]) < 1e-10


def test_realize_at_nilpotent_point(tmp_path: Path) -> None:
    path = _write_free(tmp_path, FreeSeries(1, 1, 3, {(1,): 0.5}))
    point = _write_json(
        tmp_path, {"n": 2, "Z": [[[[0, 0], [0.9, 0]], [[0, 0], [0, 0]]]]}, "point.json"
    )
    out = tmp_path / "value.json"

    result = runner.invoke(app, ["realize", str(path), "--point", str(point), "-o", str(out)])

    assert result.exit_code == 0
    value = json.loads(out.read_text())
    assert value["value"][0][1] == pytest.approx([0.45, 0.0], abs=1e-10)
    assert value["nilpotent_error"] < 1e-10


def test_realize_comm_outside_ball_fails(tmp_path: Path) -> None:
    instance = InstanceModel(
        mode=SeriesMode.COMM,
        comm=CommSeriesModel(d=1, m=1, N=2, coeffs={"1": [[[0.5, 0.0]]]}),
        metadata=InstanceMetadata(d=1, m=1, deg=1),
    )
    path = tmp_path / "comm.json"
    path.write_text(instance.model_dump_json())
    point = _write_json(tmp_path, {"n": 1, "Z": [[[[1.2, 0]]]]}, "point.json")

    result = runner.invoke(app, ["realize", str(path), "--point", str(point)])

    assert result.exit_code == 1
