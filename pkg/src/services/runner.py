# =====================================================
# src/services/runner.py - Pipeline runs with persisted artifacts
# =====================================================
import logging
import os
from contextlib import closing
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from src.schemas.chat import EndpointRole, TranscriptEntry
from src.schemas.evaluation import EvalReport, EvalRow
from src.schemas.pipeline import LoopConfig, PipelineResult
from src.schemas.run import RunManifest, RunStatus
from src.schemas.run_config import RunConfig
from .embeddings import build_embedder
from .evaluation import build_report, evaluate_run
from .exceptions import PreconditionViolation, StageFailed
from .ground_truth import find_dataset_file, load_api_catalogue, load_ground_truth, load_project
from .llm_gateway import ChatGateway, Transcript, build_provider, utc_now
from .orchestrator import Orchestrator
from .preprocessing import TextPreprocessor
from .prompting import PromptBuilder
from .registry import RunRegistry
from .run_store import API_MAPPINGS, GOAL_MODEL, STAGE_RESULTS, TRANSCRIPT, RunStore, new_run_id

logger = logging.getLogger(__name__)


class RunService:
    """
    Esegue run della pipeline e ne persiste gli artefatti.

    Gli input (progetto, catalogo API, template, esempi) sono validati
    prima di creare la directory della run: un dataset sconosciuto non
    lascia manifest parziali.
    """

    def __init__(
        self,
        config: RunConfig,
        out_dir: Union[str, Path],
        registry: Optional[RunRegistry] = None,
        replay_entries: Optional[List[TranscriptEntry]] = None,
        record: bool = False,
    ):
        self.config = config
        self.store = RunStore(out_dir)
        self.registry = registry
        self.replay_entries = replay_entries
        self.record = record
        self.prompts = PromptBuilder.from_paths(config.paths.templates_dir, config.paths.examples_path)

    def _providers(self) -> Dict[EndpointRole, object]:
        providers = {}
        for role, provider_config in (
            (EndpointRole.GENERATOR, self.config.providers.generator),
            (EndpointRole.CRITIC, self.config.providers.critic),
        ):
            entries = None
            if self.replay_entries is not None:
                entries = [e for e in self.replay_entries if e.request.endpoint_role == role]
            providers[role] = build_provider(role, provider_config, entries)
        return providers

    def run(self, dataset_id: str, loop: Optional[LoopConfig] = None) -> Tuple[RunManifest, PipelineResult]:
        """
        Esegue una run completa.

        Su StageFailed il manifest viene scritto con status failed e la fase,
        gli output parziali restano su disco e l'eccezione viene rilanciata.
        """
        loop = loop or self.config.loop
        project = load_project(self.config.paths.projects_dir, dataset_id)
        endpoints = load_api_catalogue(self.config.paths.api_catalogues_dir, dataset_id)
        with ChatGateway(self._providers(), record=self.record) as gateway:
            return self._execute(dataset_id, loop, project, endpoints, gateway)

    def _execute(self, dataset_id: str, loop: LoopConfig, project, endpoints, gateway: ChatGateway) -> Tuple[RunManifest, PipelineResult]:
        providers = gateway.providers
        run_id = new_run_id(dataset_id, loop.strategy, loop.critic_enabled)
        run_dir = self.store.create_run_dir(run_id)
        gateway.transcript = Transcript(run_id, self.store.transcript_path(run_id))

        manifest = RunManifest(
            run_id=run_id,
            dataset_id=dataset_id,
            strategy=loop.strategy.value,
            critic_enabled=loop.critic_enabled,
            keep=loop.keep.value,
            quality_threshold=loop.quality_threshold,
            max_iterations=loop.max_iterations,
            generator_mode=providers[EndpointRole.GENERATOR].mode,
            critic_mode=providers[EndpointRole.CRITIC].mode,
            started_at=utc_now(),
        )
        self.store.write_manifest(manifest)
        if self.registry is not None:
            self.registry.register(manifest, str(run_dir))
        logger.info(f"Run {run_id}: {dataset_id}, {loop.strategy.short}, critic {'on' if loop.critic_enabled else 'off'}")

        orchestrator = Orchestrator(gateway, self.prompts, loop, checkpoint=self.store.checkpoint_writer(run_id))
        try:
            result = orchestrator.run_pipeline(project, loop, endpoints or None)
        except (StageFailed, PreconditionViolation) as e:
            phase = getattr(e, "phase", None)
            failed = manifest.model_copy(update={
                "status": RunStatus.FAILED,
                "failed_phase": phase,
                "finished_at": utc_now(),
                "artifacts": self._existing_artifacts(run_id),
            })
            self.store.write_manifest(failed)
            if self.registry is not None:
                self.registry.fail(failed, str(e))
            logger.error(f"Run {run_id} failed: {e}")
            raise

        artifacts = self.store.write_result(run_id, result)
        completed = manifest.model_copy(update={
            "status": RunStatus.COMPLETED,
            "finished_at": utc_now(),
            "artifacts": artifacts,
        })
        self.store.write_manifest(completed)
        if self.registry is not None:
            self.registry.complete(completed)
        return completed, result

    def _existing_artifacts(self, run_id: str) -> Dict[str, str]:
        run_dir = self.store.run_dir(run_id)
        names = {"goal_model": GOAL_MODEL, "api_mappings": API_MAPPINGS,
                 "stage_results": STAGE_RESULTS, "transcript": TRANSCRIPT}
        return {key: name for key, name in names.items() if (run_dir / name).exists()}


def evaluate_runs(
    config: RunConfig,
    run_locations: Sequence[Union[str, Path]],
    truth_path: Optional[Union[str, Path]] = None,
    registry: Optional[RunRegistry] = None,
) -> EvalReport:
    """
    Valuta una o più run contro la ground truth del loro dataset.

    Senza `truth_path` la fixture viene cercata in datasets_dir per
    dataset_id del manifest.
    """
    evaluation = config.evaluation
    api_key = os.getenv(evaluation.embedder_api_key_env) if evaluation.embedder_api_key_env else None
    preprocessor = TextPreprocessor.from_file(config.paths.stopwords_path)
    rows: List[EvalRow] = []
    with closing(build_embedder(evaluation, api_key)) as backend:
        for location in run_locations:
            rows.extend(_evaluate_location(config, location, backend, preprocessor, truth_path, registry))
    return build_report(rows, evaluation.metric_convention, backend.name)


def _evaluate_location(config: RunConfig, location, backend, preprocessor, truth_path, registry) -> List[EvalRow]:
    evaluation = config.evaluation
    manifest = RunStore.load_manifest(location)
    model = RunStore.load_goal_model(location)
    path = truth_path or find_dataset_file(config.paths.datasets_dir, manifest.dataset_id)
    if path is None:
        raise PreconditionViolation(f"No ground truth for dataset '{manifest.dataset_id}'")
    truth = load_ground_truth(path)
    run_rows = evaluate_run(
        model,
        truth,
        backend,
        preprocessor=preprocessor,
        convention=evaluation.metric_convention,
        strategy=manifest.strategy,
        critic_enabled=manifest.critic_enabled,
    )
    if registry is not None and registry.is_registered(manifest.run_id):
        registry.record_evaluation(manifest.run_id, run_rows, evaluation.metric_convention.value, backend.name)
    return run_rows
