"""Prompt assembly from semantic facts, few-shot examples, and ablation flags.

The prompt is a fixed-order sequence of bracket-tagged sections. Three flags
gate the optional sections: the call graph, the inner-function bodies, and
the identifier/contract-metadata pair. The rendered text is deterministic
for a given input so runs can be compared byte for byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .callgraph import CallNode, CallTree
from .retrieval import EmbeddingVector, EmptyIndex, RetrievalIndex, embed, top_k_matches
from .semfacts import SemanticFacts

DEFAULT_INNER_FN_LINE_BUDGET = 60

ROLE_TEXT = ("You are an expert Solidity engineer. You write precise, "
             "faithful one-sentence summaries of smart contract functions.")
INSTRUCTION_TEXT = ("Summarize the target function in one concise sentence "
                    "describing what it does.")

TRUNCATION_MARKER = "…truncated…"


@dataclass(frozen=True)
class AblationMask:
    include_cfg: bool = True
    include_inner_functions: bool = True
    include_identifiers_and_globals: bool = True


FULL_MASK = AblationMask(True, True, True)

# Canonical ablation conditions, in presentation order.
ABLATION_ROWS: tuple[tuple[str, AblationMask], ...] = (
    ("ALL", AblationMask(True, True, True)),
    ("-CFG", AblationMask(False, True, True)),
    ("-IF", AblationMask(True, False, True)),
    ("-Id&MGV", AblationMask(True, True, False)),
    ("-ALL", AblationMask(False, False, False)),
)


@dataclass(frozen=True)
class PromptBundle:
    sections: tuple[tuple[str, str], ...]  # (tag, text), render order
    shots: tuple[tuple[str, str], ...]  # (example code, example comment)
    attachment: Optional[str]
    token_count: int
    mask: AblationMask


_WORD_RUN_RE = re.compile(r"\w+")
_PUNCT_RE = re.compile(r"[^\w\s]")


def count_tokens(text: str) -> int:
    """Approximate LLM token count: maximal alphanumeric/underscore runs
    plus individual non-whitespace punctuation characters."""
    return len(_WORD_RUN_RE.findall(text)) + len(_PUNCT_RE.findall(text))


def render_sections(sections: Sequence[tuple[str, str]]) -> str:
    return "\n\n".join(f"[{tag}]\n{text}" for tag, text in sections) + "\n"


def render_prompt(bundle: PromptBundle) -> str:
    return render_sections(bundle.sections)


def _edge_lines(node: CallNode, depth: int, out: list[str]) -> None:
    for child in node.children:
        suffix = ""
        if child.count > 1:
            suffix += f" (x{child.count})"
        if child.cycle:
            suffix += " (cycle)"
        out.append(f"{'  ' * depth}{node.function} -> {child.function}{suffix}")
        _edge_lines(child, depth + 1, out)


def call_graph_text(tree: CallTree) -> str:
    """Indented caller -> callee edge list for the whole tree."""
    lines: list[str] = []
    _edge_lines(tree.root, 0, lines)
    if not lines:
        return "(no internal calls)"
    return "\n".join(lines)


def _truncate_body(body: str, line_budget: int) -> str:
    lines = body.split("\n")
    if len(lines) <= line_budget:
        return body
    return "\n".join(lines[:line_budget] + [TRUNCATION_MARKER])


def _contract_section(facts: SemanticFacts) -> str:
    lines = [f"Contract: {facts.contract_name}", "Global member variables:"]
    if facts.global_vars:
        for name, type_name, visibility in facts.global_vars:
            lines.append(f"- {name}: {type_name} ({visibility})")
    else:
        lines.append("(none)")
    return "\n".join(lines)


def _identifiers_section(facts: SemanticFacts) -> str:
    if not facts.identifiers:
        return "(none)"
    lines = []
    for fact in facts.identifiers:
        if fact.type_name:
            lines.append(f"- {fact.role} {fact.name}: {fact.type_name}")
        else:
            lines.append(f"- {fact.role} {fact.name}")
    return "\n".join(lines)


def _inner_functions_section(facts: SemanticFacts, line_budget: int) -> str:
    if not facts.inner_functions:
        return "(none)"
    return "\n\n".join(_truncate_body(f.body_text, line_budget)
                       for f in facts.inner_functions)


def _examples_section(shots: Sequence[tuple[str, str]]) -> str:
    blocks = []
    for i, (code, comment) in enumerate(shots, start=1):
        blocks.append(f"Example {i} code:\n{code}\nExample {i} summary:\n{comment}")
    return "\n\n".join(blocks)


def build_prompt(facts: SemanticFacts, target_code: str,
                 shots: Sequence[tuple[str, str]], mask: AblationMask,
                 attachment: Optional[str] = None,
                 inner_fn_line_budget: int = DEFAULT_INNER_FN_LINE_BUDGET) -> PromptBundle:
    """Assemble prompt sections in fixed order, honoring the ablation mask.
    The attachment (a rendered call-graph image path) is recorded only when
    the call graph section itself is enabled."""
    sections: list[tuple[str, str]] = [("ROLE", ROLE_TEXT)]
    if mask.include_identifiers_and_globals:
        sections.append(("CONTRACT", _contract_section(facts)))
        sections.append(("IDENTIFIERS", _identifiers_section(facts)))
    if mask.include_cfg:
        sections.append(("CALL_GRAPH", call_graph_text(facts.call_tree)))
    if mask.include_inner_functions:
        sections.append(("INNER_FUNCTIONS",
                         _inner_functions_section(facts, inner_fn_line_budget)))
    if shots:
        sections.append(("EXAMPLES", _examples_section(shots)))
    sections.append(("TARGET", target_code))
    sections.append(("INSTRUCTION", INSTRUCTION_TEXT))
    rendered = render_sections(sections)
    return PromptBundle(
        sections=tuple(sections),
        shots=tuple(shots),
        attachment=attachment if mask.include_cfg else None,
        token_count=count_tokens(rendered),
        mask=mask,
    )


def assemble_few_shot(repo, index: RetrievalIndex, target, k: int,
                      provider=None) -> list[tuple[str, str]]:
    """Top-k most similar (code, comment) pairs from the index, excluding the
    target itself. The query vector is the target's stored embedding, or is
    computed with the given provider."""
    if k == 0:
        return []
    if not index.entries:
        raise EmptyIndex("cannot assemble shots from an empty index")
    if target.embedding is not None:
        query = EmbeddingVector(len(target.embedding), tuple(target.embedding))
    elif provider is not None:
        query = embed(provider, target.code)
    else:
        raise ValueError("target has no embedding and no provider was given")
    candidates = RetrievalIndex(
        tuple(e for e in index.entries if e[0] != target.uuid), index.provider_id)
    if not candidates.entries:
        raise EmptyIndex("index holds only the target itself")
    result = top_k_matches(candidates, query, k, query_id=target.uuid)
    pairs = []
    for uuid, _sim in result.matches:
        sample = repo.load_sample(uuid)
        pairs.append((sample.code, sample.comment))
    return pairs
