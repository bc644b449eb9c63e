# =====================================================
# src/services/reporting.py - Plain-text result tables and report files
# =====================================================
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from src.schemas.evaluation import EvalReport, EvalRow, EvalTask, TaskMetrics
from src.schemas.pipeline import PipelineResult
from src.schemas.prompting import ShotStrategy
from .exceptions import MissingArtifact, SchemaError

logger = logging.getLogger(__name__)

METRIC_LABELS = (("precision", "Prec."), ("recall", "Recall"), ("f1", "F1"))
_TASK_WIDTH = 8
_CELL_WIDTH = 7


def strategy_of(value: str) -> Optional[ShotStrategy]:
    """Accetta sia 'few-shot' che 'FS'"""
    for strategy in ShotStrategy:
        if value in (strategy.value, strategy.short):
            return strategy
    return None


# ==========================================
# REPORT FILES
# ==========================================

def serialize_report(report: EvalReport) -> bytes:
    return (report.model_dump_json(indent=2) + "\n").encode("utf-8")


def load_report(path: Union[str, Path]) -> EvalReport:
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f"Evaluation report not found: {path}")
    try:
        return EvalReport.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise SchemaError(f"{path}: invalid evaluation report") from e


# ==========================================
# AGGREGATION
# ==========================================

def aggregate_cells(rows: Sequence[EvalRow]) -> Dict[Tuple[EvalTask, ShotStrategy], TaskMetrics]:
    """Media aritmetica tra i dataset per ogni cella (task, strategy)"""
    grouped: Dict[Tuple[EvalTask, ShotStrategy], List[TaskMetrics]] = {}
    for row in rows:
        strategy = strategy_of(row.strategy)
        if strategy is None:
            logger.warning(f"Row {row.dataset_id}/{row.task.value} has unknown strategy '{row.strategy}', skipped")
            continue
        grouped.setdefault((row.task, strategy), []).append(row.metrics)
    return {
        cell: TaskMetrics(
            precision=float(np.mean([m.precision for m in metrics])),
            recall=float(np.mean([m.recall for m in metrics])),
            f1=float(np.mean([m.f1 for m in metrics])),
        )
        for cell, metrics in grouped.items()
    }


def _format_row(values: List[Optional[float]]) -> str:
    """Due decimali; asterisco sul migliore della riga quando ci sono almeno due valori"""
    present = [round(v, 2) for v in values if v is not None]
    best = max(present) if len(present) >= 2 else None
    cells = []
    for value in values:
        if value is None:
            cells.append(f"{'-':>{_CELL_WIDTH - 1}} ")
        else:
            mark = "*" if best is not None and round(value, 2) == best else " "
            cells.append(f"{value:>{_CELL_WIDTH - 1}.2f}{mark}")
    return "".join(cells)


# ==========================================
# RESULTS TABLE
# ==========================================

def render_results_table(report: EvalReport, critic_enabled: Optional[bool] = None) -> str:
    """
    Tabella Prec./Recall/F1 x ZS/OS/FS per Actors, HL e LL.

    Una tabella per ogni impostazione del critic presente nel report
    (o solo quella richiesta); celle mancanti stampate come '-'.
    """
    settings = sorted({row.critic_enabled for row in report.rows}, reverse=True)
    if critic_enabled is not None:
        settings = [s for s in settings if s == critic_enabled]
    if not settings:
        return "No evaluation rows.\n"

    strategies = list(ShotStrategy)
    header = f"{'Task':<{_TASK_WIDTH}}{'Metric':<{_TASK_WIDTH}}" + "".join(
        f"{s.short:>{_CELL_WIDTH - 1}} " for s in strategies
    )
    header = header.rstrip()

    blocks = []
    for setting in settings:
        rows = [r for r in report.rows if r.critic_enabled == setting]
        n_datasets = len({r.dataset_id for r in rows})
        cells = aggregate_cells(rows)
        lines = [
            f"Results (critic {'on' if setting else 'off'}, "
            f"{n_datasets} dataset{'s' if n_datasets != 1 else ''}, {report.metric_convention} convention)",
            header,
            "-" * len(header),
        ]
        for task in EvalTask:
            for i, (field, label) in enumerate(METRIC_LABELS):
                values = [
                    getattr(cells[(task, s)], field) if (task, s) in cells else None
                    for s in strategies
                ]
                name = task.value if i == 0 else ""
                lines.append((f"{name:<{_TASK_WIDTH}}{label:<{_TASK_WIDTH}}" + _format_row(values)).rstrip())
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def render_per_dataset_table(
    report: EvalReport,
    task: EvalTask,
    strategy: ShotStrategy,
    critic_enabled: bool = True,
) -> str:
    """Recall/Precision/F1 per dataset, ordinati per precision decrescente"""
    rows = [
        r for r in report.rows
        if r.task == task and strategy_of(r.strategy) == strategy and r.critic_enabled == critic_enabled
    ]
    rows.sort(key=lambda r: (-r.metrics.precision, r.dataset_id))
    lines = [
        f"Per-dataset results ({task.value}, {strategy.short}, critic {'on' if critic_enabled else 'off'})",
        f"{'Dataset':<20}{'Recall':>8}{'Prec.':>8}{'F1':>8}",
        "-" * 44,
    ]
    for row in rows:
        m = row.metrics
        lines.append(f"{row.dataset_id:<20}{m.recall:>8.2f}{m.precision:>8.2f}{m.f1:>8.2f}")
    if not rows:
        lines.append("(no rows)")
    return "\n".join(lines) + "\n"


# ==========================================
# RUN SUMMARY
# ==========================================

def render_stage_summary(result: PipelineResult) -> str:
    """Convergenza per stage, stampata da `run`"""
    lines = [f"{'Stage':<14}{'Iter':>5}{'Score':>8}  Converged", "-" * 38]
    for name, stage in result.stage_results.items():
        score = f"{stage.final_score:.2f}" if stage.final_score is not None else "-"
        lines.append(f"{name:<14}{stage.iterations_used:>5}{score:>8}  {'yes' if stage.converged else 'no'}")
    counts = result.goal_model.counts()
    lines.append(
        f"actors={counts['actors']} HL={counts['HL']} LL={counts['LL']} api_mappings={len(result.api_mappings)}"
    )
    return "\n".join(lines) + "\n"
