# =====================================================
# src/services/registry.py - Run registry access for the CLI
# =====================================================
import logging
from contextlib import contextmanager
from typing import Dict, Iterator, List, Sequence

from sqlalchemy.orm import sessionmaker

from src.database.connection import create_registry_engine, create_session_factory, ensure_schema
from src.schemas.evaluation import AblationRow, EvalRow, EvalTask, TaskMetrics
from src.schemas.run import RunManifest
from .ablation import order_rows
from .exceptions import CellMismatch, MissingArtifact
from .unit_of_work import UnitOfWork

logger = logging.getLogger(__name__)


def _metrics_by_task(records, convention: str, embedder: str) -> Dict[str, TaskMetrics]:
    return {
        r.task: TaskMetrics(precision=r.precision, recall=r.recall, f1=r.f1)
        for r in records
        if r.metric_convention == convention and r.embedder == embedder
    }


class RunRegistry:
    """
    Indice durevole di run e valutazioni.

    Ogni operazione apre una propria sessione, quindi un'istanza può
    essere condivisa tra i worker di --matrix.
    """

    def __init__(self, url: str, create_schema: bool = True):
        self.url = url
        self.engine = create_registry_engine(url)
        if create_schema:
            ensure_schema(self.engine)
        self.session_factory: sessionmaker = create_session_factory(self.engine)

    @contextmanager
    def _unit_of_work(self) -> Iterator[UnitOfWork]:
        db = self.session_factory()
        try:
            with UnitOfWork(db).transaction() as uow:
                yield uow
        finally:
            db.close()

    def register(self, manifest: RunManifest, artifact_dir: str) -> None:
        with self._unit_of_work() as uow:
            uow.repositories.runs.register(manifest, artifact_dir)
        logger.debug(f"Registered run {manifest.run_id}")

    def complete(self, manifest: RunManifest) -> None:
        with self._unit_of_work() as uow:
            uow.repositories.runs.mark_completed(manifest)

    def fail(self, manifest: RunManifest, message: str = "") -> None:
        with self._unit_of_work() as uow:
            uow.repositories.runs.mark_failed(manifest.run_id, manifest.failed_phase, message, manifest)

    def record_evaluation(self, run_id: str, rows: Sequence[EvalRow], convention: str, embedder: str) -> None:
        with self._unit_of_work() as uow:
            uow.repositories.evaluations.record_rows(run_id, rows, convention, embedder)

    def is_registered(self, run_id: str) -> bool:
        with self._unit_of_work() as uow:
            return uow.repositories.runs.get_by_run_id(run_id) is not None

    def ablation_rows(self, dataset_id: str, convention: str, embedder: str) -> List[AblationRow]:
        """
        Confronto critic on/off dalle run registrate di un dataset.

        Per ogni strategy usa l'ultima run completata con critic e l'ultima
        senza; le strategy senza la coppia completa vengono saltate.
        """
        rows: List[AblationRow] = []
        missing_in_a, missing_in_b = set(), set()
        with self._unit_of_work() as uow:
            pairs = uow.repositories.runs.get_ablation_pairs(dataset_id)
            evaluations = uow.repositories.evaluations
            for strategy, (with_critic, without_critic) in sorted(pairs.items()):
                if with_critic is None or without_critic is None:
                    logger.warning(f"No critic on/off pair for {dataset_id}/{strategy}")
                    continue
                a = _metrics_by_task(evaluations.get_by_run(with_critic.run_id), convention, embedder)
                b = _metrics_by_task(evaluations.get_by_run(without_critic.run_id), convention, embedder)
                missing_in_b.update((dataset_id, task, strategy) for task in set(a) - set(b))
                missing_in_a.update((dataset_id, task, strategy) for task in set(b) - set(a))
                rows.extend(
                    AblationRow(dataset_id=dataset_id, task=EvalTask(task), strategy=strategy, a=a[task], b=b[task])
                    for task in set(a) & set(b)
                )
        if missing_in_a or missing_in_b:
            raise CellMismatch(missing_in_a, missing_in_b)
        if not rows:
            raise MissingArtifact(f"No evaluated critic on/off run pair for dataset '{dataset_id}'")
        return order_rows(rows)

    def dispose(self) -> None:
        self.engine.dispose()
