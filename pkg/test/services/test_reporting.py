# =====================================================
# test/services/test_reporting.py
# =====================================================
from pathlib import Path

import pytest

from src.schemas.evaluation import EvalReport, EvalTask
from src.schemas.prompting import ShotStrategy
from src.services.exceptions import MissingArtifact, SchemaError
from src.services.reporting import (
    aggregate_cells,
    load_report,
    render_per_dataset_table,
    render_results_table,
    serialize_report,
    strategy_of,
)

GOLDEN = Path(__file__).resolve().parent.parent / "golden"


@pytest.fixture
def report(make_eval_row) -> EvalReport:
    return EvalReport(rows=[
        make_eval_row("d1", "Actors", "zero-shot", 0.50, 0.40, 0.44),
        make_eval_row("d1", "Actors", "few-shot", 0.70, 0.60, 0.65),
        make_eval_row("d2", "Actors", "few-shot", 0.90, 0.80, 0.85),
        make_eval_row("d1", "HL", "one-shot", 0.30, 0.20, 0.24),
        make_eval_row("d1", "Actors", "zero-shot", 0.40, 0.30, 0.34, critic_enabled=False),
    ])


class TestResultsTable:

    def test_golden(self, report):
        expected = (GOLDEN / "results_table.txt").read_text(encoding="utf-8")

        assert render_results_table(report) == expected

    def test_single_setting(self, report):
        table = render_results_table(report, critic_enabled=False)

        assert table.startswith("Results (critic off, 1 dataset, generated-recall convention)\n")
        assert "critic on" not in table

    def test_empty_report(self):
        assert render_results_table(EvalReport()) == "No evaluation rows.\n"

    def test_ties_all_marked(self, make_eval_row):
        report = EvalReport(rows=[
            make_eval_row("d1", "Actors", "zero-shot", 0.501, 0.1, 0.1),
            make_eval_row("d1", "Actors", "few-shot", 0.499, 0.2, 0.2),
        ])

        line = render_results_table(report).splitlines()[3]

        assert line == "Actors  Prec.     0.50*     -   0.50*"

    def test_aggregate_is_mean(self, report):
        cells = aggregate_cells(report.rows)

        assert cells[(EvalTask.ACTORS, ShotStrategy.FEW_SHOT)].precision == pytest.approx(0.8)


class TestPerDatasetTable:

    def test_sorted_by_precision(self, report):
        table = render_per_dataset_table(report, EvalTask.ACTORS, ShotStrategy.FEW_SHOT)

        lines = table.splitlines()
        assert lines[0] == "Per-dataset results (Actors, FS, critic on)"
        assert lines[3].startswith("d2")
        assert lines[4] == f"{'d1':<20}{'0.60':>8}{'0.70':>8}{'0.65':>8}"

    def test_no_rows(self, report):
        table = render_per_dataset_table(report, EvalTask.LOW_LEVEL, ShotStrategy.FEW_SHOT)

        assert table.endswith("(no rows)\n")


class TestReportFiles:

    def test_write_and_load(self, report, tmp_path):
        path = tmp_path / "report.json"
        path.write_bytes(serialize_report(report))

        assert load_report(path) == report

    def test_missing(self, tmp_path):
        with pytest.raises(MissingArtifact):
            load_report(tmp_path / "absent.json")

    def test_invalid(self, tmp_path):
        path = tmp_path / "report.json"
        path.write_text('{"rows": "nope"}', encoding="utf-8")

        with pytest.raises(SchemaError):
            load_report(path)

    @pytest.mark.parametrize("value,expected", [
        ("FS", ShotStrategy.FEW_SHOT),
        ("one-shot", ShotStrategy.ONE_SHOT),
        ("ten-shot", None),
    ])
    def test_strategy_of(self, value, expected):
        assert strategy_of(value) is expected
