# =====================================================
# src/services/ablation.py - Critic on/off comparison
# =====================================================
import logging
from typing import Dict, List, Sequence, Tuple

from src.schemas.evaluation import AblationRow, EvalReport, EvalRow, EvalTask
from .exceptions import CellMismatch, CriticSettingMismatch, DuplicateCell
from .reporting import METRIC_LABELS, strategy_of

logger = logging.getLogger(__name__)

Cell = Tuple[str, str, str]

TASK_ORDER = {task.value: i for i, task in enumerate(EvalTask)}


def format_delta(delta: float) -> str:
    """'+0.02' / '-0.10'; un delta che arrotonda a zero è sempre '0.00'"""
    if round(delta, 2) == 0:
        return "0.00"
    return f"{delta:+.2f}"


def order_rows(rows: Sequence[AblationRow]) -> List[AblationRow]:
    return sorted(rows, key=lambda r: (r.dataset_id, TASK_ORDER.get(r.task.value, 99), r.strategy))


def split_by_critic(report: EvalReport) -> Tuple[EvalReport, EvalReport]:
    """Divide un report misto (es. da `run --matrix`) in (critic on, critic off)"""
    on = [row for row in report.rows if row.critic_enabled]
    off = [row for row in report.rows if not row.critic_enabled]
    return report.model_copy(update={"rows": on}), report.model_copy(update={"rows": off})


def _cells(report: EvalReport, side: str, critic_enabled: bool) -> Dict[Cell, EvalRow]:
    wrong = {row.cell for row in report.rows if row.critic_enabled != critic_enabled}
    if wrong:
        raise CriticSettingMismatch(side, critic_enabled, wrong)

    cells: Dict[Cell, EvalRow] = {}
    duplicates = set()
    for row in report.rows:
        if row.cell in cells:
            duplicates.add(row.cell)
        cells[row.cell] = row
    if duplicates:
        raise DuplicateCell(side, duplicates)
    return cells


def compare_reports(report_a: EvalReport, report_b: EvalReport) -> List[AblationRow]:
    """
    Confronta cella per cella (dataset, task, strategy).

    A contiene solo righe con critic, B solo righe senza; i delta sono A - B.
    Entrambi i report devono coprire le stesse celle, una riga per cella.
    """
    cells_a = _cells(report_a, "A", True)
    cells_b = _cells(report_b, "B", False)
    missing_in_b = set(cells_a) - set(cells_b)
    missing_in_a = set(cells_b) - set(cells_a)
    if missing_in_a or missing_in_b:
        raise CellMismatch(missing_in_a, missing_in_b)

    rows = [
        AblationRow(dataset_id=a.dataset_id, task=a.task, strategy=a.strategy, a=a.metrics, b=cells_b[cell].metrics)
        for cell, a in cells_a.items()
    ]
    logger.info(f"Compared {len(rows)} cells")
    return order_rows(rows)


def compare_critic_settings(report: EvalReport) -> List[AblationRow]:
    return compare_reports(*split_by_critic(report))


def render_ablation_table(rows: List[AblationRow]) -> str:
    lines = [
        f"{'Dataset':<20}{'Task':<8}{'Str.':<6}{'Metric':<8}{'A':>7}{'B':>7}{'Delta':>8}",
        "-" * 64,
    ]
    for row in rows:
        strategy = strategy_of(row.strategy)
        short = strategy.short if strategy else row.strategy
        for field, label in METRIC_LABELS:
            lines.append(
                f"{row.dataset_id:<20}{row.task.value:<8}{short:<6}{label:<8}"
                f"{getattr(row.a, field):>7.2f}{getattr(row.b, field):>7.2f}{format_delta(row.delta(field)):>8}"
            )
    return "\n".join(lines) + "\n"
