# =====================================================
# src/services/prompting.py - Prompt rendering and shot-example injection
# =====================================================
import json
import logging
import string
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

from pydantic import ValidationError

from src.schemas.chat import Critique
from src.schemas.goal_model import Actor, ApiEndpoint, Goal
from src.schemas.prompting import (
    LOOP_TASKS,
    PromptPayload,
    PromptTemplate,
    ShotExample,
    ShotStrategy,
    Task,
)
from .exceptions import MissingPlaceholder, SchemaError, StoreIncomplete

logger = logging.getLogger(__name__)

CRITIC_EXAMPLE_COUNT = 3
FEEDBACK_HEADER = "--- Previous attempt feedback ---"
FEEDBACK_FOOTER = "--- End of feedback ---"
JSON_REMINDER = "Return only valid JSON matching the schema."


# ==========================================
# LOADING
# ==========================================

def load_templates(templates_dir: Union[str, Path]) -> Dict[Task, PromptTemplate]:
    """Un file <task>.json per task, con chiavi 'system' e 'user'"""
    templates: Dict[Task, PromptTemplate] = {}
    for task in Task:
        path = Path(templates_dir) / f"{task.value}.json"
        if not path.exists():
            continue
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
            templates[task] = PromptTemplate(task=task, **raw)
        except (json.JSONDecodeError, ValidationError, TypeError) as e:
            raise SchemaError(f"Invalid template {path.name}: {e}") from e
    logger.debug(f"Loaded {len(templates)} prompt templates from {templates_dir}")
    return templates


def load_shot_examples(examples_path: Union[str, Path]) -> List[ShotExample]:
    """Store JSON: array di ShotExample, in ordine stabile di configurazione"""
    try:
        raw = json.loads(Path(examples_path).read_text(encoding="utf-8"))
        return [ShotExample.model_validate(item) for item in raw]
    except (json.JSONDecodeError, ValidationError, TypeError) as e:
        raise SchemaError(f"Invalid shot-example store {examples_path}: {e}") from e


# ==========================================
# CONTEXT RENDERING HELPERS
# ==========================================

def _json_text(value: Any) -> str:
    return json.dumps(value, ensure_ascii=False)


def render_actors(actors: Sequence[Actor]) -> str:
    return _json_text([{"name": a.name, "descr": a.description} for a in actors])


def render_high_level_goals(goals: Sequence[Goal]) -> str:
    """Goal numerati con indice 0-based: il LL stage li referenzia come 'parent'"""
    return _json_text([{"index": i, "actor": g.actor_ref, "text": g.text} for i, g in enumerate(goals)])


def render_low_level_goals(goals: Sequence[Goal], high_level: Sequence[Goal] = ()) -> str:
    rendered = []
    for g in goals:
        parent = high_level[g.parent_ref].text if g.parent_ref is not None and g.parent_ref < len(high_level) else None
        rendered.append({"high_level_goal": parent, "text": g.text})
    return _json_text(rendered)


def render_endpoints(endpoints: Sequence[ApiEndpoint]) -> str:
    return _json_text([
        {"name": e.name, "method": e.method, "path": e.path, "description": e.description}
        for e in endpoints
    ])


def _required_fields(text: str) -> List[str]:
    fields = []
    for _, field_name, _, _ in string.Formatter().parse(text):
        if field_name and field_name not in fields:
            fields.append(field_name)
    return fields


def _is_missing(value: Any) -> bool:
    if value is None:
        return True
    if isinstance(value, str):
        return value.strip() == ""
    if isinstance(value, (list, tuple, dict)):
        return len(value) == 0
    return False


def _render(text: str, context: Mapping[str, Any], template_name: str) -> str:
    values = {}
    for field_name in _required_fields(text):
        value = context.get(field_name)
        if _is_missing(value):
            raise MissingPlaceholder(field_name, template_name)
        values[field_name] = value if isinstance(value, str) else _json_text(value)
    return text.format(**values)


# ==========================================
# PROMPT BUILDER
# ==========================================

class PromptBuilder:
    """
    Costruisce tutti i prompt della pipeline.

    Template e shot examples sono caricati una volta e trattati come
    immutabili: build_prompt e build_critic_prompt sono funzioni pure.
    """

    def __init__(self, templates: Mapping[Task, PromptTemplate], examples: Iterable[ShotExample]):
        self.templates = dict(templates)
        self.examples = tuple(examples)

    @classmethod
    def from_paths(cls, templates_dir: Union[str, Path], examples_path: Union[str, Path]) -> "PromptBuilder":
        return cls(load_templates(templates_dir), load_shot_examples(examples_path))

    def _template(self, task: Task) -> PromptTemplate:
        template = self.templates.get(task)
        if template is None:
            raise SchemaError(f"No prompt template for task '{task.value}'")
        return template

    # ------------------------------------------
    # SHOT EXAMPLES
    # ------------------------------------------

    def select_shot_examples(
        self,
        task: Task,
        strategy: ShotStrategy,
        critiqued: Optional[Task] = None,
    ) -> List[ShotExample]:
        """Primi N esempi del task (N = 0/1/3) nell'ordine del file di configurazione"""
        wanted = strategy.example_count
        if wanted == 0:
            return []
        candidates = [
            ex for ex in self.examples
            if ex.task == task and (critiqued is None or ex.critiqued_task == critiqued)
        ]
        if len(candidates) < wanted:
            label = task.value if critiqued is None else f"{task.value}/{critiqued.value}"
            raise StoreIncomplete(
                f"{strategy.value} needs {wanted} examples for '{label}', store has {len(candidates)}"
            )
        return candidates[:wanted]

    @staticmethod
    def _examples_block(examples: Sequence[ShotExample]) -> str:
        if not examples:
            return ""
        parts = ["Here are some examples of the expected answer.", ""]
        for n, ex in enumerate(examples, start=1):
            parts.append(f"### Example {n} ({ex.source_name})")
            parts.append(ex.input_payload)
            parts.append("")
            if ex.task == Task.CRITIQUE:
                parts.append(f"- Candidate: {ex.expected_output}")
                parts.append("")
                parts.append(ex.score_and_comment)
            else:
                parts.append(f"***Output:*** {ex.expected_output}")
            parts.append("")
        return "\n".join(parts) + "\n"

    # ------------------------------------------
    # GENERATOR PROMPTS
    # ------------------------------------------

    def build_prompt(
        self,
        task: Task,
        strategy: ShotStrategy,
        context: Mapping[str, Any],
        prior_critique: Optional[Critique] = None,
    ) -> PromptPayload:
        template = self._template(task)
        examples = self.select_shot_examples(task, strategy) if task in LOOP_TASKS else []

        system_text = _render(template.system, context, task.value)
        user_text = self._examples_block(examples) + _render(template.user, context, task.value)

        if prior_critique is not None:
            user_text += (
                f"\n\n{FEEDBACK_HEADER}\n"
                f"Score: {prior_critique.score:g}/10\n"
                f"Comment: {prior_critique.comment}\n"
                f"{FEEDBACK_FOOTER}"
            )

        return PromptPayload(
            task=task,
            system_text=system_text,
            user_text=user_text,
            embedded_examples=len(examples),
            includes_prior_critique=prior_critique is not None,
        )

    # ------------------------------------------
    # CRITIC PROMPTS
    # ------------------------------------------

    def build_critic_prompt(self, task: Task, context: Mapping[str, Any], candidate_output: Any) -> PromptPayload:
        """Il critic è sempre few-shot: tre esempi di critica per lo stage giudicato"""
        if task not in LOOP_TASKS:
            raise ValueError(f"Task '{task.value}' has no critic")
        if _is_missing(candidate_output):
            raise MissingPlaceholder("candidate", Task.CRITIQUE.value)

        template = self._template(Task.CRITIQUE)
        examples = self.select_shot_examples(Task.CRITIQUE, ShotStrategy.FEW_SHOT, critiqued=task)
        critic_context = dict(context)
        critic_context["candidate"] = candidate_output
        critic_context["stage_label"] = task.label
        if task == Task.ACTORS and _is_missing(critic_context.get("actors")):
            # nello stage actors la lista da giudicare è il candidato stesso
            critic_context["actors"] = candidate_output

        system_text = _render(template.system, critic_context, Task.CRITIQUE.value)
        user_text = self._examples_block(examples) + _render(template.user, critic_context, Task.CRITIQUE.value)

        return PromptPayload(
            task=Task.CRITIQUE,
            system_text=system_text,
            user_text=user_text,
            embedded_examples=len(examples),
        )


def with_json_reminder(payload: PromptPayload) -> PromptPayload:
    """Re-prompt dopo un OutputParseFailure"""
    return payload.model_copy(update={"user_text": f"{payload.user_text}\n\n{JSON_REMINDER}"})
