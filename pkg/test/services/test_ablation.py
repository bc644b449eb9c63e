# =====================================================
# test/services/test_ablation.py
# =====================================================
import pytest

from src.schemas.evaluation import EvalReport
from src.services.ablation import (
    compare_critic_settings,
    compare_reports,
    format_delta,
    render_ablation_table,
    split_by_critic,
)
from src.services.exceptions import CellMismatch, CriticSettingMismatch, DuplicateCell


def critic_off(report):
    return EvalReport(rows=[row.model_copy(update={"critic_enabled": False}) for row in report.rows])


class TestFormatDelta:

    @pytest.mark.parametrize("delta,expected", [
        (0.0, "0.00"),
        (-0.004, "0.00"),
        (0.02, "+0.02"),
        (-0.1, "-0.10"),
    ])
    def test_format(self, delta, expected):
        assert format_delta(delta) == expected


class TestCompareReports:

    def test_identical_reports(self, make_eval_row):
        report = EvalReport(rows=[make_eval_row("d1", "HL", "few-shot", 0.5, 0.4, 0.44)])

        table = render_ablation_table(compare_reports(report, critic_off(report)))

        data_lines = table.splitlines()[2:]
        assert len(data_lines) == 3
        assert all(line.endswith("    0.00") for line in data_lines)

    def test_delta_is_a_minus_b(self, make_eval_row):
        a = EvalReport(rows=[make_eval_row("d1", "HL", "few-shot", 0.52, 0.40, 0.45)])
        b = EvalReport(rows=[make_eval_row("d1", "HL", "few-shot", 0.50, 0.40, 0.44, critic_enabled=False)])

        rows = compare_reports(a, b)
        lines = render_ablation_table(rows).splitlines()

        assert rows[0].delta("precision") == pytest.approx(0.02)
        assert lines[2] == f"{'d1':<20}{'HL':<8}{'FS':<6}{'Prec.':<8}{'0.52':>7}{'0.50':>7}{'+0.02':>8}"

    def test_rows_ordered_by_dataset_then_task(self, make_eval_row):
        report = EvalReport(rows=[
            make_eval_row("d2", "Actors", "zero-shot", 0.5, 0.5, 0.5),
            make_eval_row("d1", "LL", "zero-shot", 0.5, 0.5, 0.5),
            make_eval_row("d1", "Actors", "zero-shot", 0.5, 0.5, 0.5),
        ])

        compared = compare_reports(report, critic_off(report))

        assert [(r.dataset_id, r.task.value) for r in compared] == [("d1", "Actors"), ("d1", "LL"), ("d2", "Actors")]

    def test_cell_mismatch(self, make_eval_row):
        a = EvalReport(rows=[
            make_eval_row("d1", "HL", "few-shot", 0.5, 0.5, 0.5),
            make_eval_row("d1", "LL", "few-shot", 0.5, 0.5, 0.5),
        ])
        b = EvalReport(rows=[make_eval_row("d1", "HL", "few-shot", 0.5, 0.5, 0.5, critic_enabled=False)])

        with pytest.raises(CellMismatch) as exc:
            compare_reports(a, b)

        assert exc.value.missing_in_b == [("d1", "LL", "few-shot")]
        assert exc.value.missing_in_a == []

    def test_report_a_with_critic_off_rows(self, make_eval_row):
        mixed = EvalReport(rows=[
            make_eval_row("d1", "HL", "few-shot", 0.62, 0.62, 0.62),
            make_eval_row("d1", "HL", "few-shot", 0.60, 0.60, 0.60, critic_enabled=False),
        ])
        b = EvalReport(rows=[make_eval_row("d1", "HL", "few-shot", 0.60, 0.60, 0.60, critic_enabled=False)])

        with pytest.raises(CriticSettingMismatch) as exc:
            compare_reports(mixed, b)

        assert exc.value.side == "A"
        assert exc.value.cells == [("d1", "HL", "few-shot")]

    def test_swapped_reports(self, make_eval_row):
        a = EvalReport(rows=[make_eval_row("d1", "HL", "few-shot", 0.62, 0.62, 0.62)])
        b = EvalReport(rows=[make_eval_row("d1", "HL", "few-shot", 0.60, 0.60, 0.60, critic_enabled=False)])

        with pytest.raises(CriticSettingMismatch):
            compare_reports(b, a)

    def test_duplicate_cell(self, make_eval_row):
        a = EvalReport(rows=[
            make_eval_row("d1", "HL", "few-shot", 0.62, 0.62, 0.62),
            make_eval_row("d1", "HL", "few-shot", 0.70, 0.70, 0.70),
        ])
        b = EvalReport(rows=[make_eval_row("d1", "HL", "few-shot", 0.60, 0.60, 0.60, critic_enabled=False)])

        with pytest.raises(DuplicateCell) as exc:
            compare_reports(a, b)

        assert exc.value.side == "A"
        assert exc.value.cells == [("d1", "HL", "few-shot")]


class TestMixedReport:

    def test_split_by_critic(self, make_eval_row):
        report = EvalReport(embedder="http", rows=[
            make_eval_row("d1", "HL", "few-shot", 0.62, 0.62, 0.62),
            make_eval_row("d1", "HL", "few-shot", 0.60, 0.60, 0.60, critic_enabled=False),
            make_eval_row("d1", "LL", "few-shot", 0.40, 0.40, 0.40),
        ])

        on, off = split_by_critic(report)

        assert [r.task.value for r in on.rows] == ["HL", "LL"]
        assert [r.task.value for r in off.rows] == ["HL"]
        assert on.embedder == off.embedder == "http"

    def test_compare_critic_settings(self, make_eval_row):
        report = EvalReport(rows=[
            make_eval_row("d1", "HL", "few-shot", 0.62, 0.62, 0.62),
            make_eval_row("d1", "HL", "few-shot", 0.60, 0.60, 0.60, critic_enabled=False),
        ])

        rows = compare_critic_settings(report)

        assert len(rows) == 1
        assert rows[0].delta("f1") == pytest.approx(0.02)
        assert format_delta(rows[0].delta("f1")) == "+0.02"
