"""Prompt assembly for DSL generation and diagnostic-feedback retries.

One template pair (system + user) is used for every model so comparisons
stay fair; retries append a feedback section instead of rewriting the
original request.  Templates are plain text with ``{{placeholder}}`` slots
and ship in ``data/templates/``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources

from .diagnostics import Diagnostic

SYSTEM_ROLE = "system"
USER_ROLE = "user"

DEFAULT_PREAMBLE = (
    "You are a DSL generator. Given a user's intent to create a website or "
    "system, you must generate a DSL-style data model."
)

DEFAULT_RULES = (
    "Only output the DSL. Do not add explanations, comments, or extra text.",
    "Follow the grammar for generation. The output must comply with the "
    "rules given below.",
    "Analyze the user input and expand the idea so the data model covers "
    "all necessary aspects, entities, and relationships.",
    "Use the exact syntax and style shown in the example:",
    "  - 'main concept' for the central concept",
    "  - 'concept' for entities",
    "  - 'enum' for enumerations",
    "  - 'one', 'some', 'lone' for cardinality",
    "  - '-->' for one-way references",
    "  - '<>-->' for many-to-many or one-to-many bidirectional associations",
    "  - 'isId' to mark identifiers",
    "  - 'subset of' to indicate constrained relationships",
    "  - provide default values for enums or primitives where applicable",
)


def _data_text(name: str) -> str:
    return resources.files("dslgen.data").joinpath(name).read_text(encoding="utf-8")


def default_grammar_text() -> str:
    return _data_text("grammar.ebnf")


def default_example_pair() -> tuple[str, str]:
    """The shipped few-shot pair (authored for this toolchain, see README)."""
    return (
        _data_text("example_input.txt").strip(),
        _data_text("example_model.dsl"),
    )


@dataclass(frozen=True)
class PromptSpec:
    """Everything needed to render one generation (or retry) prompt."""

    grammar_text: str
    user_input: str
    examples: tuple[tuple[str, str], ...]
    rules: tuple[str, ...] = DEFAULT_RULES
    role_preamble: str = DEFAULT_PREAMBLE
    feedback: str | None = None
    prior_output: str | None = None

    def __post_init__(self) -> None:
        if not self.grammar_text.strip():
            raise ValueError("grammar_text must be non-empty")
        if not self.user_input.strip():
            raise ValueError("user_input must be non-empty")
        if not self.examples:
            raise ValueError("at least one example pair is required")


def default_spec(user_input: str, **overrides) -> PromptSpec:
    return PromptSpec(
        grammar_text=default_grammar_text(),
        user_input=user_input,
        examples=(default_example_pair(),),
        **overrides,
    )


@dataclass(frozen=True)
class RenderedPrompt:
    messages: tuple[tuple[str, str], ...]
    template_hash: str

    def as_text(self) -> str:
        """Collapse to a single string for completion-only backends."""
        return "\n\n".join(content for _, content in self.messages)


def _hash_spec(spec: PromptSpec) -> str:
    payload = json.dumps({
        "preamble": spec.role_preamble,
        "rules": list(spec.rules),
        "grammar": spec.grammar_text,
        "examples": [list(pair) for pair in spec.examples],
        "user_input": spec.user_input,
        "feedback": spec.feedback,
        "prior_output": spec.prior_output,
    }, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _render(template_name: str, mapping: dict[str, str]) -> str:
    text = _data_text(f"templates/{template_name}")
    for key, value in mapping.items():
        text = text.replace("{{" + key + "}}", value)
    return text.rstrip("\n")


def _examples_block(examples) -> str:
    blocks = []
    for example_input, example_dsl in examples:
        blocks.append(f"Example:\nInput: {example_input}\nDSL:\n{example_dsl.rstrip()}")
    return "\n\n".join(blocks)


def build_generation_prompt(spec: PromptSpec) -> RenderedPrompt:
    """System message: preamble + rules + grammar.  User message: examples in
    order, then the request line quoting the user input."""
    system = _render("system.txt", {
        "preamble": spec.role_preamble,
        "rules": "\n".join(f"- {rule}" for rule in spec.rules),
        "grammar": spec.grammar_text.rstrip(),
    })
    user = _render("user.txt", {
        "examples": _examples_block(spec.examples),
        "user_input": spec.user_input,
    })
    return RenderedPrompt(
        messages=((SYSTEM_ROLE, system), (USER_ROLE, user)),
        template_hash=_hash_spec(spec),
    )


def render_diagnostic_line(diag: Diagnostic) -> str:
    line = (f"line {diag.span.line}, col {diag.span.column}: "
            f"[{diag.code}] {diag.message}")
    if diag.expected:
        line += f" (expected: {', '.join(diag.expected)})"
    return line


def build_retry_prompt(spec: PromptSpec, prior_output: str,
                       diagnostics: list[Diagnostic]) -> RenderedPrompt:
    """The full generation prompt plus one more user message: the failed
    output verbatim, every diagnostic, and an instruction to correct them."""
    if not diagnostics:
        raise ValueError("retry prompt requires at least one diagnostic")
    base = build_generation_prompt(spec)
    feedback_lines = "\n".join(render_diagnostic_line(d) for d in diagnostics)
    retry_spec = PromptSpec(
        grammar_text=spec.grammar_text,
        user_input=spec.user_input,
        examples=spec.examples,
        rules=spec.rules,
        role_preamble=spec.role_preamble,
        feedback=feedback_lines,
        prior_output=prior_output,
    )
    feedback = _render("feedback.txt", {
        "prior_output": prior_output.rstrip("\n"),
        "diagnostics": feedback_lines,
    })
    return RenderedPrompt(
        messages=base.messages + ((USER_ROLE, feedback),),
        template_hash=_hash_spec(retry_spec),
    )


def render_feedback(diagnostics: list[Diagnostic], source: str) -> str:
    """Human-oriented rendering: quoted source line, caret underline, message."""
    if not diagnostics:
        return ""
    lines = source.split("\n")
    blocks = []
    for diag in diagnostics:
        if diag.span.line > len(lines):
            raise ValueError(f"span line {diag.span.line} outside source")
        source_line = lines[diag.span.line - 1]
        if diag.span.column > len(source_line) + 1:
            raise ValueError(f"span column {diag.span.column} outside line "
                             f"{diag.span.line}")
        caret = " " * (diag.span.column - 1) + "^" * diag.span.length
        blocks.append(f"{source_line}\n{caret}\n{render_diagnostic_line(diag)}")
    return "\n\n".join(blocks)
