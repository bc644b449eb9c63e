# =====================================================
# src/services/shot_similarity.py - Description vs shot-example similarity
# =====================================================
import logging
from typing import Dict, List, Mapping, Sequence

import numpy as np

from src.schemas.evaluation import ShotSimilarityReport, ShotSimilarityRow
from src.schemas.goal_model import ProjectDescription
from src.schemas.prompting import LOOP_TASKS, ShotExample, Task
from .exceptions import ZeroVector

logger = logging.getLogger(__name__)

GENERATOR = "generator"
CRITIC = "critic"
TASK_COLUMNS = {Task.ACTORS: "Actors", Task.HIGH_LEVEL: "HL", Task.LOW_LEVEL: "LL"}


def _cosines(anchor: np.ndarray, others: np.ndarray) -> List[float]:
    anchor_norm = np.linalg.norm(anchor)
    other_norms = np.linalg.norm(others, axis=1)
    if anchor_norm == 0 or np.any(other_norms == 0):
        raise ZeroVector("Cosine similarity is undefined for all-zero embeddings")
    return [float(v) for v in np.clip(others @ anchor / (other_norms * anchor_norm), -1.0, 1.0)]


def _examples_for(examples: Sequence[ShotExample], side: str, task: Task) -> List[ShotExample]:
    if side == GENERATOR:
        return [e for e in examples if e.task == task]
    return [e for e in examples if e.task == Task.CRITIQUE and e.critiqued_task == task]


def shot_similarity(
    projects: Mapping[str, ProjectDescription],
    examples: Sequence[ShotExample],
    backend,
) -> ShotSimilarityReport:
    """
    Per ogni (dataset, task): media dei coseni tra l'embedding della
    descrizione del dataset e quello di input+output di ciascun esempio.

    Il README grezzo sostituisce la descrizione quando questa manca.
    """
    rows: List[ShotSimilarityRow] = []
    for dataset_id in sorted(projects):
        project = projects[dataset_id]
        text = project.description or project.raw_readme or ""
        anchor = np.asarray(backend.embed_texts([text]), dtype=float)[0]
        for side in (GENERATOR, CRITIC):
            for task in LOOP_TASKS:
                selected = _examples_for(examples, side, task)
                if not selected:
                    logger.warning(f"No {side} examples for {task.value}; row skipped")
                    continue
                vectors = np.asarray(backend.embed_texts([e.similarity_text for e in selected]), dtype=float)
                cosines = _cosines(anchor, vectors)
                rows.append(ShotSimilarityRow(
                    dataset_id=dataset_id,
                    task=TASK_COLUMNS[task],
                    side=side,
                    average=float(np.mean(cosines)),
                    per_example=cosines,
                ))
    return ShotSimilarityReport(embedder=getattr(backend, "name", "custom"), rows=rows)


def render_shot_similarity(report: ShotSimilarityReport) -> str:
    """Una sezione per lato (generator, critic) con la riga 'Average per Task'"""
    columns = list(TASK_COLUMNS.values())
    header = f"{'Dataset':<20}" + "".join(f"{c:>9}" for c in columns)
    blocks = []
    for side, title in ((GENERATOR, "Generator shot examples"), (CRITIC, "Critic shot examples")):
        table: Dict[str, Dict[str, float]] = {}
        for row in report.rows:
            if row.side == side:
                table.setdefault(row.dataset_id, {})[row.task] = row.average
        if not table:
            continue
        lines = [title, header, "-" * len(header)]
        for dataset_id in sorted(table):
            values = table[dataset_id]
            lines.append(f"{dataset_id:<20}" + "".join(
                f"{values[c]:>9.4f}" if c in values else f"{'-':>9}" for c in columns
            ))
        averages = report.task_averages(side)
        lines.append(f"{'Average per Task':<20}" + "".join(
            f"{averages[c]:>9.4f}" if c in averages else f"{'-':>9}" for c in columns
        ))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
