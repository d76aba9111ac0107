"""Argument-informed answering pipeline.

From a user prompt: elicit three candidate answers with three supporting
arguments each, query the model pairwise for inconsistencies, assemble an
argumentation framework, keep the acceptable arguments (grounded extension,
falling back to a preferred one when grounded is empty), and produce the
final chain-of-thought answer with the accepted material injected.
"""

from __future__ import annotations

import enum
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence, Tuple

from . import core
from .core import ArgumentationFramework, Extension, Semantics
from .formats import serialize_apx
from .llm import ChatBackend, ChatMessage, GenerationParams, Role, user

COT_TRIGGER = "Let's think step by step"

GENERATION_TEMPLATE = """\
Consider the question below. Produce exactly three short candidate answers, \
and list exactly three supporting arguments for each answer. Use exactly this \
layout and nothing else:

Answer 1: <first candidate answer>
Support 1.1: <argument supporting answer 1>
Support 1.2: <argument supporting answer 1>
Support 1.3: <argument supporting answer 1>
Answer 2: <second candidate answer>
Support 2.1: <argument supporting answer 2>
Support 2.2: <argument supporting answer 2>
Support 2.3: <argument supporting answer 2>
Answer 3: <third candidate answer>
Support 3.1: <argument supporting answer 3>
Support 3.2: <argument supporting answer 3>
Support 3.3: <argument supporting answer 3>

Question: {question}"""

GENERATION_RETRY_REMINDER = (
    "Your previous reply did not follow the required layout. Reply again using "
    "exactly three 'Answer N:' lines, each followed by exactly three "
    "'Support N.M:' lines, and no other text."
)

CONFLICT_TEMPLATE = """\
Statement A: {first}

Statement B: {second}

Do these two statements convey inconsistent or conflicting information? \
Reply with YES or NO as the first word."""

CONFLICT_RETRY_REMINDER = "Reply with exactly one word: YES or NO."

SUMMARY_TEMPLATE = """\
Summarize the following points into a single compact factual paragraph of at \
most {word_cap} words. Keep only the information itself, no preamble:

{points}"""

CONTEXT_BLOCK_HEADER = "Consider the following verified points:"


class ArgumentKind(enum.Enum):
    ANSWER = "answer"
    SUPPORT = "support"


class SemanticsUsed(enum.Enum):
    GROUNDED = "grounded"
    PREFERRED = "preferred"


@dataclass(frozen=True)
class GeneratedArgument:
    name: str  # synthetic id a0..aN
    text: str
    kind: ArgumentKind
    parent: Optional[str]  # support's answer name
    turn: int
    contains_code: bool = False


@dataclass(frozen=True)
class ConflictVerdict:
    source: str
    target: str
    conflicting: bool
    raw_judgment: str


@dataclass
class PipelineConfig:
    generation_temperature: float = 0.7
    conflict_temperature: float = 0.0
    summary_temperature: float = 0.3
    final_temperature: float = 0.3
    max_tokens: int = 1024
    parallelism: int = 4
    summary_word_cap: int = 200
    preferred_fallback: bool = True
    generation_template: str = GENERATION_TEMPLATE
    conflict_template: str = CONFLICT_TEMPLATE
    summary_template: str = SUMMARY_TEMPLATE

    def manifest(self) -> Dict[str, object]:
        return {
            "generation_temperature": self.generation_temperature,
            "conflict_temperature": self.conflict_temperature,
            "summary_temperature": self.summary_temperature,
            "final_temperature": self.final_temperature,
            "max_tokens": self.max_tokens,
            "parallelism": self.parallelism,
            "summary_word_cap": self.summary_word_cap,
            "preferred_fallback": self.preferred_fallback,
        }


@dataclass
class PipelineTrace:
    """Everything a run produced, stage by stage; enough to replay it."""

    user_prompt: str
    turn: int = 1
    raw_generation: Optional[str] = None
    arguments: Optional[List[GeneratedArgument]] = None
    verdicts: Optional[List[ConflictVerdict]] = None
    af_apx: Optional[str] = None
    sidecar: Optional[Dict[str, str]] = None
    extension_members: Optional[List[str]] = None
    semantics_used: Optional[str] = None
    summary: Optional[str] = None
    final_prompt: Optional[str] = None
    final_answer: Optional[str] = None
    events: List[str] = field(default_factory=list)
    manifest: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> str:
        data = asdict(self)
        if self.arguments is not None:
            data["arguments"] = [
                {**asdict(a), "kind": a.kind.value} for a in self.arguments
            ]
        return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


class FormatError(RuntimeError):
    """The model's structured output stayed malformed after the retry."""


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception, trace: PipelineTrace):
        super().__init__(f"pipeline failed at stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.trace = trace


# -- argument generation and parsing -------------------------------------

_ANSWER_RE = re.compile(r"Answer\s+(\d+)\s*:\s*(.*)")
_SUPPORT_RE = re.compile(r"Support\s+(\d+)\.(\d+)\s*:\s*(.*)")
_FENCE_RE = re.compile(r"\s*```")


def parse_generated_arguments(text: str, turn: int = 1) -> List[GeneratedArgument]:
    """Parse the numbered 3-answers / 3-supports-each layout.

    Fenced code blocks are atomic: header-looking lines inside a fence stay
    part of the current argument, which is then flagged as containing code.
    Raises FormatError unless exactly the 3x(1+3) structure comes out.
    """
    blocks: List[Tuple[str, int, Optional[int], List[str]]] = []
    current: Optional[List[str]] = None
    in_fence = False
    for line in text.splitlines():
        if not in_fence:
            m = _ANSWER_RE.fullmatch(line.strip())
            if m:
                current = [m.group(2)]
                blocks.append(("answer", int(m.group(1)), None, current))
                continue
            m = _SUPPORT_RE.fullmatch(line.strip())
            if m:
                current = [m.group(3)]
                blocks.append(("support", int(m.group(1)), int(m.group(2)), current))
                continue
        if _FENCE_RE.match(line):
            in_fence = not in_fence
        if current is not None:
            current.append(line)

    answers: Dict[int, str] = {}
    supports: Dict[int, Dict[int, str]] = {}
    for kind, num, sub, lines in blocks:
        body = "\n".join(lines).strip()
        if not body:
            raise FormatError(f"empty {kind} {num}{'.' + str(sub) if sub else ''}")
        if kind == "answer":
            if num in answers:
                raise FormatError(f"answer {num} repeated")
            answers[num] = body
        else:
            if sub in supports.setdefault(num, {}):
                raise FormatError(f"support {num}.{sub} repeated")
            supports[num][sub] = body

    if sorted(answers) != [1, 2, 3]:
        raise FormatError(f"expected answers 1..3, got {sorted(answers)}")
    for num in (1, 2, 3):
        if sorted(supports.get(num, {})) != [1, 2, 3]:
            raise FormatError(
                f"expected supports {num}.1..{num}.3, got {sorted(supports.get(num, {}))}"
            )

    out: List[GeneratedArgument] = []
    counter = 0
    for num in (1, 2, 3):
        answer_name = f"a{counter}"
        out.append(
            GeneratedArgument(
                answer_name, answers[num], ArgumentKind.ANSWER, None, turn,
                _contains_code(answers[num]),
            )
        )
        counter += 1
        for sub in (1, 2, 3):
            body = supports[num][sub]
            out.append(
                GeneratedArgument(
                    f"a{counter}", body, ArgumentKind.SUPPORT, answer_name, turn,
                    _contains_code(body),
                )
            )
            counter += 1
    return out


def _contains_code(text: str) -> bool:
    if "```" in text:
        return True
    return any(line.startswith(("    ", "\t")) for line in text.splitlines()[1:])


def generate_arguments(
    user_prompt: str,
    history: Sequence[ChatMessage],
    backend: ChatBackend,
    config: PipelineConfig,
    trace: Optional[PipelineTrace] = None,
    turn: int = 1,
) -> List[GeneratedArgument]:
    """One generation call (one retry with a stricter reminder on parse failure)."""
    if not user_prompt.strip():
        raise ValueError("user prompt must be non-empty")
    params = GenerationParams(config.generation_temperature, config.max_tokens)
    prompt = config.generation_template.format(question=user_prompt)
    transcript = list(history) + [user(prompt)]
    reply = backend.generate(transcript, params)
    if trace is not None:
        trace.raw_generation = reply.content
    try:
        return parse_generated_arguments(reply.content, turn)
    except FormatError as first_err:
        retry_transcript = transcript + [reply, user(GENERATION_RETRY_REMINDER)]
        retry = backend.generate(retry_transcript, params)
        if trace is not None:
            trace.events.append(f"generation retried: {first_err}")
            trace.raw_generation = retry.content
        return parse_generated_arguments(retry.content, turn)


# -- conflict detection --------------------------------------------------

_YES_NO_RE = re.compile(r"^\W*(yes|no)\b", re.IGNORECASE)


def parse_verdict(raw: str) -> Optional[bool]:
    m = _YES_NO_RE.match(raw.strip())
    if not m:
        return None
    return m.group(1).lower() == "yes"


def conflict_pairs(args: Sequence[GeneratedArgument]) -> List[Tuple[int, int]]:
    """Unordered index pairs to query, skipping support/parent-answer pairs."""
    by_name = {a.name: i for i, a in enumerate(args)}
    pairs = []
    for i in range(len(args)):
        for j in range(i + 1, len(args)):
            x, y = args[i], args[j]
            if x.kind is ArgumentKind.SUPPORT and x.parent == y.name:
                continue
            if y.kind is ArgumentKind.SUPPORT and y.parent == x.name:
                continue
            pairs.append((i, j))
    return pairs


def detect_conflicts(
    args: Sequence[GeneratedArgument],
    backend: ChatBackend,
    config: PipelineConfig,
    trace: Optional[PipelineTrace] = None,
) -> List[ConflictVerdict]:
    """Query every non-sibling unordered pair for inconsistency.

    A pair whose reply stays unparseable after one retry defaults to
    no-conflict and the event is recorded. Queries may run concurrently;
    verdicts come back in canonical pair order regardless.
    """
    if len(args) < 2:
        raise ValueError("need at least 2 arguments for conflict detection")
    params = GenerationParams(config.conflict_temperature, config.max_tokens)
    pairs = conflict_pairs(args)
    events: List[Optional[str]] = [None] * len(pairs)

    def query(k: int) -> ConflictVerdict:
        i, j = pairs[k]
        prompt = config.conflict_template.format(first=args[i].text, second=args[j].text)
        reply = backend.generate([user(prompt)], params)
        verdict = parse_verdict(reply.content)
        if verdict is None:
            retry = backend.generate(
                [user(prompt + "\n\n" + CONFLICT_RETRY_REMINDER)], params
            )
            verdict = parse_verdict(retry.content)
            reply = retry
            if verdict is None:
                events[k] = (
                    f"unparseable verdict for pair ({args[i].name},{args[j].name}); "
                    "defaulted to no-conflict"
                )
                verdict = False
        return ConflictVerdict(args[i].name, args[j].name, verdict, reply.content)

    workers = max(1, config.parallelism)
    if workers == 1:
        verdicts = [query(k) for k in range(len(pairs))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(query, range(len(pairs))))
    if trace is not None:
        trace.events.extend(e for e in events if e)
    return verdicts


def build_af(
    args: Sequence[GeneratedArgument], verdicts: Sequence[ConflictVerdict]
) -> ArgumentationFramework:
    """Nodes from the arguments, mutual attacks from each conflicting verdict."""
    attacks = set()
    for v in verdicts:
        if v.conflicting:
            attacks.add((v.source, v.target))
            attacks.add((v.target, v.source))
    return ArgumentationFramework([a.name for a in args], sorted(attacks))


def select_acceptable(
    af: ArgumentationFramework, preferred_fallback: bool = True
) -> Tuple[Extension, SemanticsUsed]:
    """Grounded extension, or (when it is empty) one preferred extension:
    the largest, ties broken by canonical order."""
    grounded = core.grounded_extension(af)
    if grounded.members or not preferred_fallback:
        return grounded, SemanticsUsed.GROUNDED
    preferred = core.preferred_extensions(af)
    # max cardinality; among equals, the canonically first one
    chosen = min(preferred, key=lambda e: (-len(e.members), e.sort_key(af)))
    return chosen, SemanticsUsed.PREFERRED


def summarize_arguments(
    accepted: Sequence[GeneratedArgument],
    backend: ChatBackend,
    config: PipelineConfig,
) -> str:
    if not accepted:
        raise ValueError("nothing to summarize")
    points = "\n".join(f"- {a.text}" for a in accepted)
    prompt = config.summary_template.format(word_cap=config.summary_word_cap, points=points)
    params = GenerationParams(config.summary_temperature, config.max_tokens)
    return backend.generate([user(prompt)], params).content


def compose_final_prompt(user_prompt: str, summary: Optional[str]) -> str:
    """The final user message; always ends with the exact CoT trigger."""
    parts = [user_prompt.rstrip()]
    if summary:
        parts.append(f"{CONTEXT_BLOCK_HEADER}\n{summary.rstrip()}")
    parts.append(COT_TRIGGER)
    return "\n\n".join(parts)


def final_answer(
    user_prompt: str,
    history: Sequence[ChatMessage],
    summary: Optional[str],
    backend: ChatBackend,
    config: PipelineConfig,
    trace: Optional[PipelineTrace] = None,
) -> str:
    prompt = compose_final_prompt(user_prompt, summary)
    if trace is not None:
        trace.final_prompt = prompt
    params = GenerationParams(config.final_temperature, config.max_tokens)
    transcript = list(history) + [user(prompt)]
    return backend.generate(transcript, params).content


# -- orchestration -------------------------------------------------------


def run(
    user_prompt: str,
    history: Sequence[ChatMessage],
    backend: ChatBackend,
    config: Optional[PipelineConfig] = None,
) -> Tuple[str, PipelineTrace]:
    """Execute the whole pipeline, recording every stage in the trace.

    Deterministic under the mock backend (with fingerprint scripts or
    parallelism 1). Any stage failure raises PipelineError with the partial
    trace attached.
    """
    if not user_prompt.strip():
        raise ValueError("user prompt must be non-empty")
    config = config or PipelineConfig()
    turn = 1 + sum(1 for m in history if m.role is Role.USER)
    trace = PipelineTrace(user_prompt=user_prompt, turn=turn, manifest=config.manifest())

    stage = "generate_arguments"
    try:
        args = generate_arguments(user_prompt, history, backend, config, trace, turn)
        trace.arguments = args

        stage = "detect_conflicts"
        verdicts = detect_conflicts(args, backend, config, trace)
        trace.verdicts = verdicts

        stage = "build_af"
        af = build_af(args, verdicts)
        trace.af_apx = serialize_apx(af)
        trace.sidecar = {a.name: a.text for a in args}

        stage = "select_acceptable"
        extension, used = select_acceptable(af, config.preferred_fallback)
        trace.extension_members = sorted(extension.members, key=af.index_of)
        trace.semantics_used = used.value

        summary: Optional[str] = None
        if extension.members:
            stage = "summarize_arguments"
            accepted = [a for a in args if a.name in extension.members]
            summary = summarize_arguments(accepted, backend, config)
            trace.summary = summary
        else:
            trace.events.append("empty extension: answering with plain zero-shot CoT")

        stage = "final_answer"
        answer = final_answer(user_prompt, history, summary, backend, config, trace)
        trace.final_answer = answer
    except Exception as exc:
        raise PipelineError(stage, exc, trace) from exc
    return answer, trace
