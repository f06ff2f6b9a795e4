"""
matchbench - Prompt Builder
Splits a dataset into prompt jobs per task scope and renders the four-section
prompt (Introduction, Source Information, Target Information, Task Description).
"""

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple, Union

from pydantic import BaseModel, Field

from ..config.constants import NO_DESCRIPTION
from ..models.schemas import Benchmark, ChatMessage, Dataset, MessageRole, Pair, Schema, TaskScope
from .errors import TemplateError

DEFAULT_TEMPLATE_PATH = Path(__file__).parent.parent / "templates" / "default_prompt.txt"

PLACEHOLDER = re.compile(r"\{\{\s*(\w+)\s*\}\}")
REQUIRED_PLACEHOLDERS = {
    "introduction",
    "definition",
    "source_table",
    "source_attributes",
    "target_table",
    "target_attributes",
    "task",
    "output_schema",
}
OPTIONAL_PLACEHOLDERS = {"source_description", "target_description"}

PERSONA = (
    "You are an expert data engineer. Act as a schema matcher: you identify semantic "
    "correspondences between the attributes of a source table and the attributes of a "
    "target table, using only their names and descriptions."
)

DEFINITION = (
    "A valid 1:1 match is a pair (a, b) of a source attribute a and a target attribute b "
    "such that there exists an invertible function mapping the values of a into the values "
    "of b. A single value of a must be sufficient to determine the value of b, and vice versa."
)

ANSWER_SCALE = (
    'Use "yes" for a match, "no" for a non-match, and "unknown" if there is not enough '
    "information to decide."
)

TASKS: Dict[TaskScope, str] = {
    TaskScope.ONE_TO_ONE: (
        "Decide whether the source attribute and the target attribute above form a valid "
        "1:1 match. Lets think step by step."
    ),
    TaskScope.ONE_TO_N: (
        "For the source attribute above, decide for every target attribute whether the two "
        "form a valid 1:1 match. Lets think step by step."
    ),
    TaskScope.N_TO_ONE: (
        "For the target attribute above, decide for every source attribute whether the two "
        "form a valid 1:1 match. Lets think step by step."
    ),
    TaskScope.N_TO_M: (
        "Decide for every pair of a source attribute and a target attribute whether the two "
        "form a valid 1:1 match. Lets think step by step."
    ),
}

OUTPUT_SCHEMAS: Dict[TaskScope, str] = {
    TaskScope.ONE_TO_ONE: '{"answer": "yes" | "no" | "unknown"}',
    TaskScope.ONE_TO_N: (
        '{"matches": [{"target": "<target attribute name>", "answer": "yes" | "no" | "unknown"}, ...]}'
    ),
    TaskScope.N_TO_ONE: (
        '{"matches": [{"source": "<source attribute name>", "answer": "yes" | "no" | "unknown"}, ...]}'
    ),
    TaskScope.N_TO_M: (
        '{"matches": [{"source": "<source attribute name>", "target": "<target attribute name>", '
        '"answer": "yes" | "no" | "unknown"}, ...]}'
    ),
}

OUTPUT_INSTRUCTION = (
    "{scale} After your reasoning, output your final answer as JSON in a ```json code block "
    "with exactly this structure:\n{schema}"
)


# ============================================
# Data Classes
# ============================================

@dataclass(frozen=True)
class PromptJob:
    """One prompt: a slice of the source and target attributes of a dataset."""
    dataset_id: str
    scope: TaskScope
    source_attrs: Tuple[str, ...]
    target_attrs: Tuple[str, ...]
    job_index: int

    @property
    def pairs(self) -> List[Pair]:
        """Expected pairs in source-major order."""
        return [(s, t) for s in self.source_attrs for t in self.target_attrs]


class PromptTemplate(BaseModel):
    """Prompt wording: template body plus the scope-specific task texts."""
    body: str
    introduction: str = PERSONA
    definition: str = DEFINITION
    tasks: Dict[TaskScope, str] = Field(default_factory=lambda: dict(TASKS))
    output_schemas: Dict[TaskScope, str] = Field(default_factory=lambda: dict(OUTPUT_SCHEMAS))
    attribute_format: str = "- {name}: {description}"
    persona_as_system: bool = False


# ============================================
# Jobs
# ============================================

def build_jobs(d: Dataset, scope: TaskScope) -> List[PromptJob]:
    """Jobs for one dataset; together their expected pairs partition the pair space."""
    sources = tuple(d.source.names)
    targets = tuple(d.target.names)

    if scope is TaskScope.ONE_TO_ONE:
        slices = [((s,), (t,)) for s in sources for t in targets]
    elif scope is TaskScope.ONE_TO_N:
        slices = [((s,), targets) for s in sources]
    elif scope is TaskScope.N_TO_ONE:
        slices = [(sources, (t,)) for t in targets]
    else:
        slices = [(sources, targets)]

    return [
        PromptJob(dataset_id=d.id, scope=scope, source_attrs=src, target_attrs=tgt, job_index=i)
        for i, (src, tgt) in enumerate(slices)
    ]


def expected_pairs(job: PromptJob) -> Set[Pair]:
    """Pairs the job asks the model to vote on."""
    return set(job.pairs)


# ============================================
# Rendering
# ============================================

def load_template(path: Optional[Union[str, Path]] = None, persona_as_system: bool = False) -> PromptTemplate:
    """Read a template body from disk; None loads the bundled default."""
    template_path = Path(path) if path else DEFAULT_TEMPLATE_PATH
    try:
        body = template_path.read_text(encoding="utf-8")
    except OSError as e:
        raise TemplateError(f"Cannot read prompt template {template_path}: {e}") from e
    _check_placeholders(body)
    return PromptTemplate(body=body, persona_as_system=persona_as_system)


def _check_placeholders(body: str) -> None:
    names = set(PLACEHOLDER.findall(body))
    unknown = names - REQUIRED_PLACEHOLDERS - OPTIONAL_PLACEHOLDERS
    if unknown:
        raise TemplateError(f"Template uses unknown placeholders: {sorted(unknown)}")
    missing = REQUIRED_PLACEHOLDERS - names
    if missing:
        raise TemplateError(f"Template lacks placeholders: {sorted(missing)}")


def _describe(text: str) -> str:
    return text.strip() or NO_DESCRIPTION


def _attribute_lines(schema: Schema, names: Tuple[str, ...], fmt: str) -> str:
    lines = []
    for name in names:
        attr = schema.find(name)
        if attr is None:
            raise TemplateError(f"Table {schema.table_name} has no attribute {name}")
        lines.append(fmt.format(name=attr.name, description=_describe(attr.description)))
    return "\n".join(lines)


def _values(job: PromptJob, d: Dataset, tpl: PromptTemplate) -> Dict[str, str]:
    return {
        "introduction": "" if tpl.persona_as_system else tpl.introduction,
        "definition": tpl.definition,
        "source_table": d.source.table_name,
        "source_description": _describe(d.source.table_description),
        "source_attributes": _attribute_lines(d.source, job.source_attrs, tpl.attribute_format),
        "target_table": d.target.table_name,
        "target_description": _describe(d.target.table_description),
        "target_attributes": _attribute_lines(d.target, job.target_attrs, tpl.attribute_format),
        "task": tpl.tasks[job.scope],
        "output_schema": OUTPUT_INSTRUCTION.format(
            scale=ANSWER_SCALE, schema=tpl.output_schemas[job.scope]
        ),
    }


def render(job: PromptJob, b: Benchmark, tpl: PromptTemplate) -> str:
    """Prompt text for a job; deterministic for identical inputs."""
    _check_placeholders(tpl.body)
    try:
        d = b.dataset(job.dataset_id)
    except KeyError:
        raise TemplateError(f"Benchmark has no dataset {job.dataset_id}") from None
    values = _values(job, d, tpl)
    text = PLACEHOLDER.sub(lambda m: values[m.group(1)], tpl.body)
    # an empty introduction leaves a blank line behind
    return re.sub(r"\n{3,}", "\n\n", text).strip() + "\n"


def render_messages(job: PromptJob, b: Benchmark, tpl: PromptTemplate) -> List[ChatMessage]:
    """Single-turn chat; the persona moves into a system message when configured."""
    messages = []
    if tpl.persona_as_system:
        messages.append(ChatMessage(role=MessageRole.SYSTEM, content=tpl.introduction))
    messages.append(ChatMessage(role=MessageRole.USER, content=render(job, b, tpl)))
    return messages
