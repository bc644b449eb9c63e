# =====================================================
# src/services/orchestrator.py - Five-phase pipeline and generator-critic loop
# =====================================================
import json
import logging
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

from src.schemas.chat import Critique, EndpointRole
from src.schemas.goal_model import (
    Actor,
    ApiEndpoint,
    ApiMapping,
    Goal,
    GoalLevel,
    GoalModel,
    ProjectDescription,
    RunProvenance,
    StageProvenance,
)
from src.schemas.pipeline import KeepPolicy, LoopConfig, PipelinePhase, PipelineResult, StageResult
from src.schemas.prompting import LOOP_TASKS, PromptPayload, ShotStrategy, Task
from .exceptions import (
    CritiqueParseFailure,
    GatewayError,
    OutputParseFailure,
    PreconditionViolation,
    PromptingError,
    StageFailed,
)
from .ground_truth import validate_goal_model
from .llm_gateway import ChatGateway, build_request
from .metrics import CRITIC_SCORE, STAGE_ITERATIONS
from .prompting import (
    PromptBuilder,
    render_actors,
    render_endpoints,
    render_high_level_goals,
    render_low_level_goals,
    with_json_reminder,
)
from . import structured_output as so

logger = logging.getLogger(__name__)

SCHEMA_BY_TASK = {
    Task.ACTORS: so.ACTOR_LIST,
    Task.HIGH_LEVEL: so.HIGH_LEVEL_GOALS,
    Task.LOW_LEVEL: so.LOW_LEVEL_GOALS,
    Task.API_MAPPING: so.API_MAPPINGS,
}

Checkpoint = Callable[[PipelineResult], None]


def candidate_text(task: Task, output: Sequence[Any]) -> str:
    """Serializzazione JSON dell'output di uno stage, come la vede il critic"""
    if task == Task.ACTORS:
        return render_actors(output)
    return json.dumps([item.model_dump(mode="json") for item in output], ensure_ascii=False)


class Orchestrator:
    """
    Esegue la pipeline in cinque fasi.

    Le fasi 2-4 passano dal feedback loop generator-critic; preprocess e
    api_mapping sono singole chiamate al generator. Una run è sequenziale.
    """

    def __init__(
        self,
        gateway: ChatGateway,
        prompts: PromptBuilder,
        config: LoopConfig,
        checkpoint: Optional[Checkpoint] = None,
    ):
        self.gateway = gateway
        self.prompts = prompts
        self.config = config
        self.checkpoint = checkpoint

    # ==========================================
    # CALLS
    # ==========================================

    def _generate(self, payload: PromptPayload, schema_id: str) -> Any:
        """Una chiamata al generator; un solo re-prompt se il JSON non è valido"""
        response = self.gateway.chat(build_request(EndpointRole.GENERATOR, payload, schema_id))
        try:
            return so.parse_structured_output(response.raw_text, schema_id)
        except OutputParseFailure as e:
            logger.warning(f"{payload.task.value}: {e}; re-prompting once")

        response = self.gateway.chat(build_request(EndpointRole.GENERATOR, with_json_reminder(payload), schema_id))
        return so.parse_structured_output(response.raw_text, schema_id)

    def _critique(self, task: Task, context: Mapping[str, Any], candidate: str) -> Critique:
        payload = self.prompts.build_critic_prompt(task, context, candidate)
        response = self.gateway.chat(build_request(EndpointRole.CRITIC, payload, so.CRITIQUE))
        try:
            return so.parse_critique(response.raw_text)
        except CritiqueParseFailure as e:
            # un critic rotto non deve buttare una buona generazione
            logger.warning(f"{task.value}: {e}; counting the iteration as score 0")
            return Critique(score=0.0, comment=response.raw_text)

    def _timespan(self, start: int):
        entries = self.gateway.exchanges[start:]
        if not entries:
            return None, None
        return entries[0].timestamp, entries[-1].timestamp

    # ==========================================
    # PHASE 1
    # ==========================================

    def preprocess_readme(self, raw_readme: str, config: Optional[LoopConfig] = None) -> str:
        if raw_readme is None or not raw_readme.strip():
            raise PreconditionViolation("raw_readme must be non-empty")
        payload = self.prompts.build_prompt(Task.PREPROCESS, ShotStrategy.ZERO_SHOT, {"readme": raw_readme})
        response = self.gateway.chat(build_request(EndpointRole.GENERATOR, payload, None))
        return response.raw_text.strip()

    # ==========================================
    # PHASES 2-4
    # ==========================================

    def run_feedback_loop(
        self,
        task: Task,
        context: Mapping[str, Any],
        config: Optional[LoopConfig] = None,
        critic_context: Optional[Mapping[str, Any]] = None,
    ) -> StageResult:
        if task not in LOOP_TASKS:
            raise ValueError(f"Task '{task.value}' does not run in the feedback loop")
        config = config or self.config
        critic_context = critic_context if critic_context is not None else context
        start = len(self.gateway.exchanges)

        outputs: List[Any] = []
        critiques: List[Critique] = []
        prior: Optional[Critique] = None
        try:
            for iteration in range(1, config.max_iterations + 1):
                payload = self.prompts.build_prompt(task, config.strategy, context, prior)
                outputs.append(self._generate(payload, SCHEMA_BY_TASK[task]))
                if not config.critic_enabled:
                    break

                critique = self._critique(task, critic_context, candidate_text(task, outputs[-1]))
                critiques.append(critique)
                CRITIC_SCORE.labels(stage=task.value).observe(critique.score)
                accepted = critique.score >= config.quality_threshold
                logger.info(
                    f"{task.value} iteration {iteration}/{config.max_iterations}: "
                    f"score {critique.score:g} ({'accepted' if accepted else 'below threshold'})"
                )
                if accepted:
                    break
                prior = critique
        except (GatewayError, PromptingError) as e:
            raise StageFailed(task.value, str(e)) from e

        if critiques and config.keep == KeepPolicy.BEST:
            # primo massimo: a parità vince l'iterazione più vecchia
            chosen = max(range(len(critiques)), key=lambda i: (critiques[i].score, -i))
        else:
            chosen = len(outputs) - 1
        final_score = critiques[chosen].score if critiques else None
        converged = final_score is None or final_score >= config.quality_threshold

        STAGE_ITERATIONS.labels(stage=task.value).observe(len(outputs))
        started_at, finished_at = self._timespan(start)
        return StageResult(
            task=task,
            output=outputs[chosen],
            iterations_used=len(outputs),
            final_score=final_score,
            converged=converged,
            critiques=critiques,
            started_at=started_at,
            finished_at=finished_at,
        )

    # ==========================================
    # PHASE 5
    # ==========================================

    def map_goals_to_apis(
        self,
        low_level: Sequence[Goal],
        endpoints: Sequence[ApiEndpoint],
        config: Optional[LoopConfig] = None,
        high_level: Sequence[Goal] = (),
    ) -> List[ApiMapping]:
        """Fase esplorativa: una sola chiamata al generator, nessun critic"""
        if not low_level or not endpoints:
            raise PreconditionViolation("API mapping needs low-level goals and a non-empty endpoint catalogue")
        context = {
            "lowLevelGoals": render_low_level_goals(low_level, high_level),
            "endpoints": render_endpoints(endpoints),
        }
        payload = self.prompts.build_prompt(Task.API_MAPPING, ShotStrategy.ZERO_SHOT, context)
        mappings = self._generate(payload, so.API_MAPPINGS)

        known = {e.name for e in endpoints}
        kept = []
        for mapping in mappings:
            if mapping.api_name not in known:
                logger.warning(f"Dropping mapping to unknown endpoint '{mapping.api_name}'")
                continue
            kept.append(mapping)
        return kept

    # ==========================================
    # PIPELINE
    # ==========================================

    @staticmethod
    def _canonical_actors(items: Sequence[Actor]) -> List[Actor]:
        actors, seen = [], set()
        for actor in items:
            key = actor.name.casefold()
            if key in seen:
                logger.warning(f"Dropping duplicate actor '{actor.name}'")
                continue
            seen.add(key)
            actors.append(actor)
        return actors

    @staticmethod
    def _high_level_goals(items: Sequence[so.HighLevelItem], actors: Sequence[Actor]) -> List[Goal]:
        names = {a.name.casefold(): a.name for a in actors}
        goals = []
        for item in items:
            name = names.get(item.actor.strip().casefold())
            if name is None:
                logger.warning(f"Dropping high-level goal for unknown actor '{item.actor}'")
                continue
            goals.append(Goal(text=item.text, level=GoalLevel.HIGH, actor_ref=name))
        return goals

    @staticmethod
    def _low_level_goals(items: Sequence[so.LowLevelItem], high_level: Sequence[Goal]) -> List[Goal]:
        goals = []
        for item in items:
            if not 0 <= item.parent < len(high_level):
                logger.warning(f"Dropping low-level goal with dangling parent {item.parent}")
                continue
            goals.append(Goal(text=item.text, level=GoalLevel.LOW, parent_ref=item.parent))
        return goals

    def _provenance(self, config: LoopConfig, stages: Dict[str, StageResult]) -> RunProvenance:
        return RunProvenance(
            strategy=config.strategy.value,
            critic_enabled=config.critic_enabled,
            keep=config.keep.value,
            quality_threshold=config.quality_threshold,
            max_iterations=config.max_iterations,
            stages={
                name: StageProvenance(
                    iterations_used=r.iterations_used,
                    final_score=r.final_score,
                    converged=r.converged,
                    started_at=r.started_at,
                    finished_at=r.finished_at,
                )
                for name, r in stages.items()
            },
        )

    def run_pipeline(
        self,
        project: ProjectDescription,
        config: Optional[LoopConfig] = None,
        endpoints: Optional[Sequence[ApiEndpoint]] = None,
    ) -> PipelineResult:
        config = config or self.config
        state: Dict[str, Any] = {
            "description": project.description,
            "actors": [],
            "high_level": [],
            "low_level": [],
            "api_mappings": [],
            "stages": {},
            "completed": [],
        }

        def snapshot() -> PipelineResult:
            return PipelineResult(
                description=state["description"],
                goal_model=GoalModel(
                    project_id=project.project_id,
                    actors=state["actors"],
                    high_level=state["high_level"],
                    low_level=state["low_level"],
                    provenance=self._provenance(config, state["stages"]),
                ),
                api_mappings=state["api_mappings"],
                stage_results=dict(state["stages"]),
                transcript=list(self.gateway.exchanges),
                completed_phases=list(state["completed"]),
            )

        def done(phase: PipelinePhase) -> None:
            state["completed"].append(phase)
            logger.info(f"Phase {phase.number} ({phase.value}) completed")
            if self.checkpoint is not None:
                self.checkpoint(snapshot())

        def persist_partial() -> None:
            if self.checkpoint is not None:
                self.checkpoint(snapshot())

        # Phase 1: solo se manca la descrizione
        if project.needs_preprocessing:
            start = len(self.gateway.exchanges)
            try:
                state["description"] = self.preprocess_readme(project.raw_readme, config)
            except (GatewayError, PromptingError, PreconditionViolation) as e:
                persist_partial()
                raise StageFailed(PipelinePhase.PREPROCESS.value, str(e)) from e
            started_at, finished_at = self._timespan(start)
            state["stages"][PipelinePhase.PREPROCESS.value] = StageResult(
                task=Task.PREPROCESS, output=state["description"], iterations_used=1,
                converged=True, started_at=started_at, finished_at=finished_at,
            )
            done(PipelinePhase.PREPROCESS)

        description = state["description"]

        # Phase 2
        try:
            result = self.run_feedback_loop(Task.ACTORS, {"description": description}, config)
        except StageFailed:
            persist_partial()
            raise
        state["actors"] = self._canonical_actors(result.output)
        state["stages"][PipelinePhase.ACTORS.value] = result
        done(PipelinePhase.ACTORS)

        # Phase 3: una sola chiamata per tutti gli actors
        actors_text = render_actors(state["actors"])
        hl_context = {"description": description, "actors": actors_text}
        try:
            result = self.run_feedback_loop(Task.HIGH_LEVEL, hl_context, config)
        except StageFailed:
            persist_partial()
            raise
        state["high_level"] = self._high_level_goals(result.output, state["actors"])
        state["stages"][PipelinePhase.HIGH_LEVEL.value] = result
        done(PipelinePhase.HIGH_LEVEL)

        # Phase 4: il generator vede solo i goal high-level
        hl_text = render_high_level_goals(state["high_level"])
        try:
            result = self.run_feedback_loop(
                Task.LOW_LEVEL,
                {"highLevelGoals": hl_text},
                config,
                critic_context={"description": description, "actors": actors_text, "highLevelGoals": hl_text},
            )
        except StageFailed:
            persist_partial()
            raise
        state["low_level"] = self._low_level_goals(result.output, state["high_level"])
        state["stages"][PipelinePhase.LOW_LEVEL.value] = result
        done(PipelinePhase.LOW_LEVEL)

        # Phase 5: solo con un catalogo di endpoint
        if endpoints and state["low_level"]:
            start = len(self.gateway.exchanges)
            try:
                state["api_mappings"] = self.map_goals_to_apis(
                    state["low_level"], endpoints, config, high_level=state["high_level"]
                )
            except (GatewayError, PromptingError, PreconditionViolation) as e:
                persist_partial()
                raise StageFailed(PipelinePhase.API_MAPPING.value, str(e)) from e
            started_at, finished_at = self._timespan(start)
            state["stages"][PipelinePhase.API_MAPPING.value] = StageResult(
                task=Task.API_MAPPING, output=state["api_mappings"], iterations_used=1,
                converged=True, started_at=started_at, finished_at=finished_at,
            )
            done(PipelinePhase.API_MAPPING)

        outcome = snapshot()
        violations = validate_goal_model(outcome.goal_model)
        if violations:
            raise StageFailed(PipelinePhase.LOW_LEVEL.value, "; ".join(violations))
        return outcome
