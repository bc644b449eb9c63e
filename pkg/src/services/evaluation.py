# =====================================================
# src/services/evaluation.py - Precision/recall/F1 over matched goal sets
# =====================================================
import logging
from typing import List, Optional, Sequence

from src.schemas.evaluation import EvalReport, EvalRow, EvalSide, EvalTask, MatchingResult, TaskMetrics
from src.schemas.goal_model import GoalModel, GroundTruthDataset
from src.schemas.run_config import MetricConvention
from .embeddings import embed
from .matching import max_weight_matching, similarity_matrix
from .preprocessing import TextKind, TextPreprocessor, default_preprocessor

logger = logging.getLogger(__name__)


def compute_metrics(
    matching: MatchingResult,
    size_x: int,
    size_y: int,
    convention: MetricConvention = MetricConvention.GENERATED_RECALL,
) -> TaskMetrics:
    """
    Recall = Σ sim / |X|, Precision = Σ sim / |Y| (X generati, Y riferimento).

    La convenzione 'bertscore' scambia i denominatori.
    """
    if size_x == 0 or size_y == 0:
        logger.warning(f"Metrics on empty set (|X|={size_x}, |Y|={size_y}) defined as 0")
        return TaskMetrics(recall=0.0, precision=0.0, f1=0.0)
    if len(matching.arcs) > min(size_x, size_y):
        raise ValueError("matching has more arcs than the smaller side")

    total = matching.total_weight
    over_x, over_y = total / size_x, total / size_y
    if convention == MetricConvention.BERTSCORE:
        precision, recall = over_x, over_y
    else:
        recall, precision = over_x, over_y
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return TaskMetrics(recall=recall, precision=precision, f1=f1)


def _evaluate_texts(
    task: EvalTask,
    generated: Sequence[str],
    reference: Sequence[str],
    kind: TextKind,
    backend,
    preprocessor: TextPreprocessor,
    convention: MetricConvention,
    dataset_id: str,
    strategy: str,
    critic_enabled: bool,
) -> EvalRow:
    gen_pre = [preprocessor.preprocess(t, kind) for t in generated]
    ref_pre = [preprocessor.preprocess(t, kind) for t in reference]
    x = embed(gen_pre, backend, EvalSide.GENERATED, originals=generated)
    y = embed(ref_pre, backend, EvalSide.REFERENCE, originals=reference)
    matching = max_weight_matching(similarity_matrix(x, y))
    metrics = compute_metrics(matching, len(x), len(y), convention)
    logger.info(
        f"{dataset_id} {task.value}: P={metrics.precision:.2f} R={metrics.recall:.2f} F1={metrics.f1:.2f}"
    )
    return EvalRow(
        dataset_id=dataset_id,
        task=task,
        strategy=strategy,
        critic_enabled=critic_enabled,
        size_generated=len(x),
        size_reference=len(y),
        metrics=metrics,
        matching=matching,
        generated=list(generated),
        reference=list(reference),
    )


def evaluate_run(
    model: GoalModel,
    truth: GroundTruthDataset,
    backend,
    preprocessor: Optional[TextPreprocessor] = None,
    convention: MetricConvention = MetricConvention.GENERATED_RECALL,
    strategy: Optional[str] = None,
    critic_enabled: Optional[bool] = None,
) -> List[EvalRow]:
    """
    Tre righe: Actors sui nomi (senza preprocessing), HL e LL sui testi
    preprocessati. I due livelli sono valutati indipendentemente, i link
    parent sono ignorati.
    """
    preprocessor = preprocessor or default_preprocessor()
    provenance = model.provenance
    strategy = strategy or (provenance.strategy if provenance else "")
    if critic_enabled is None:
        critic_enabled = provenance.critic_enabled if provenance else True

    common = dict(
        backend=backend,
        preprocessor=preprocessor,
        convention=convention,
        dataset_id=truth.dataset_id,
        strategy=strategy,
        critic_enabled=critic_enabled,
    )
    return [
        _evaluate_texts(
            EvalTask.ACTORS,
            [a.name for a in model.actors],
            [a.name for a in truth.actors],
            TextKind.ACTOR_NAME,
            **common,
        ),
        _evaluate_texts(
            EvalTask.HIGH_LEVEL,
            [g.text for g in model.high_level],
            [g.text for g in truth.high_level],
            TextKind.GOAL_TEXT,
            **common,
        ),
        _evaluate_texts(
            EvalTask.LOW_LEVEL,
            [g.text for g in model.low_level],
            [g.text for g in truth.low_level],
            TextKind.GOAL_TEXT,
            **common,
        ),
    ]


def build_report(rows: Sequence[EvalRow], convention: MetricConvention, embedder_name: str) -> EvalReport:
    ordered = sorted(rows, key=lambda r: (r.dataset_id, r.strategy, not r.critic_enabled, list(EvalTask).index(r.task)))
    return EvalReport(metric_convention=convention.value, embedder=embedder_name, rows=ordered)
