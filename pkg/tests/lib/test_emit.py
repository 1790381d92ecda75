import math

import pytest

from cavityms.lib.common.exception import InvalidConfigurationError, OutputError
from cavityms.lib.harness.emit import (
    emit_csv,
    emit_svg_lineplot,
    format_value,
    read_csv,
    render_csv,
)
from cavityms.lib.harness.spec import ScanResult


@pytest.fixture
def result():
    return ScanResult(
        scenario="fig5",
        columns=["delta", "chi", "fidelity"],
        rows=[
            [2.0, 0.0, 1.0],
            [2.0, 0.5, 0.8123456789012345],
            [4.0, 0.0, math.nan],
            [4.0, 0.5, 0.9],
        ],
        provenance={"scenario": "fig5", "config_hash": "abc"},
        x="chi",
        y=["fidelity"],
        group=["delta"],
    )


def test_format_value():
    assert format_value(0.1) == "0.1"
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(math.nan) == "nan"
    assert format_value(1e-20) == "1e-20"


def test_render_csv(result):
    text = render_csv(result)
    assert text.endswith("\n")
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[:2] == ["# config_hash: abc", "# scenario: fig5"]
    assert lines[2] == "delta,chi,fidelity"
    assert lines[4] == "2,0.5,0.812345678901"
    assert lines[5] == "4,0,nan"


def test_csv_round_trip(result, tmp_path):
    path = emit_csv(result, tmp_path / "out" / "fig5.csv")
    back = read_csv(path)
    assert back.scenario == "fig5"
    assert back.columns == result.columns
    assert back.provenance == result.provenance
    assert back.rows[1][2] == pytest.approx(0.812345678901)
    assert math.isnan(back.rows[2][2])


def test_read_csv_errors(tmp_path):
    with pytest.raises(OutputError):
        read_csv(tmp_path / "missing.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("# scenario: x\n", encoding="utf8")
    with pytest.raises(InvalidConfigurationError):
        read_csv(empty)
    broken = tmp_path / "broken.csv"
    broken.write_text("a,b\n1,two\n", encoding="utf8")
    with pytest.raises(InvalidConfigurationError):
        read_csv(broken)


def test_svg_is_deterministic(result, tmp_path):
    first = emit_svg_lineplot(result, tmp_path / "a.svg").read_bytes()
    second = emit_svg_lineplot(result, tmp_path / "b.svg").read_bytes()
    assert first == second
    assert first.lstrip().startswith(b"<?xml")


def test_svg_needs_plot_columns(tmp_path):
    table = ScanResult("table1", ["set", "chi"], [[1.0, 2.0]])
    with pytest.raises(InvalidConfigurationError):
        emit_svg_lineplot(table, tmp_path / "t.svg")
    # explicit columns work without defaults
    assert emit_svg_lineplot(table, tmp_path / "t.svg", x="set", y=["chi"]).exists()


def test_unwritable_output(result, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("", encoding="utf8")
    with pytest.raises(OutputError) as e:
        emit_csv(result, blocker / "fig5.csv")
    assert e.value.path.endswith("fig5.csv")
