"""Multi-turn benchmark harness with LLM-as-judge scoring.

Answers from each system are graded on a 1-10 scale by repeated judge
sampling; the official grade is the unique modal score once it has appeared
at least three times, otherwise the turn stays unresolved and is excluded
from the means (flagged for a human second marker, never imputed).
"""

from __future__ import annotations

import enum
import json
import os
import re
from dataclasses import dataclass, asdict
from decimal import Decimal, ROUND_DOWN, ROUND_HALF_UP
from importlib import resources
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .llm import ChatBackend, ChatMessage, GenerationParams, user

AnswerFn = Callable[[str, List[ChatMessage]], str]

MT_BENCH_CATEGORIES = (
    "writing", "roleplay", "reasoning", "math",
    "coding", "extraction", "stem", "humanities",
)


class System(enum.Enum):
    BASELINE = "baseline"
    PIPELINE = "pipeline"


class RecordStatus(enum.Enum):
    SCORED = "scored"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class BenchQuestion:
    question_id: int
    category: str
    turns: Tuple[str, ...]
    reference: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if not 1 <= len(self.turns) <= 2:
            raise ValueError(f"question {self.question_id}: need 1 or 2 turns")
        if self.reference is not None and len(self.reference) != len(self.turns):
            raise ValueError(
                f"question {self.question_id}: reference must align with turns"
            )


@dataclass(frozen=True)
class JudgeSample:
    raw: str
    score: Optional[int]


@dataclass
class EvalRecord:
    question_id: int
    system: str
    category: str
    answers: List[str]
    samples: List[List[JudgeSample]]  # one inner list per turn
    scores: List[Optional[int]]  # final per-turn score, None when unresolved
    status: str  # scored iff every turn has a score

    def to_json(self) -> str:
        data = asdict(self)
        return json.dumps(data, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "EvalRecord":
        data = json.loads(line)
        data["samples"] = [
            [JudgeSample(**s) for s in turn] for turn in data["samples"]
        ]
        return cls(**data)


class QuestionFileError(ValueError):
    def __init__(self, problems: List[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def load_questions(path: str) -> List[BenchQuestion]:
    """Parse a JSON-lines question file: {question_id, category, turns, reference?}."""
    problems: List[str] = []
    questions: List[BenchQuestion] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                ref = data.get("reference")
                q = BenchQuestion(
                    question_id=int(data["question_id"]),
                    category=str(data["category"]),
                    turns=tuple(str(t) for t in data["turns"]),
                    reference=tuple(str(r) for r in ref) if ref else None,
                )
            except (ValueError, KeyError, TypeError) as exc:
                problems.append(f"line {lineno}: {exc}")
                continue
            questions.append(q)
    if problems:
        raise QuestionFileError(problems)
    return questions


# -- judge scoring -------------------------------------------------------

_RATING_BRACKET_RE = re.compile(r"Rating:\s*\[\[(\d+)\]\]")
_RATING_PLAIN_RE = re.compile(r"Rating:\s*(\d+)")
_LONE_INT_RE = re.compile(r"^\W*(\d{1,2})\W*$")


def extract_score(raw: str) -> Optional[int]:
    """Pull a 1-10 rating out of judge text.

    Accepted forms, first match wins: "Rating: [[N]]", "Rating: N", or a
    lone integer on the final non-empty line.
    """
    for pattern in (_RATING_BRACKET_RE, _RATING_PLAIN_RE):
        m = pattern.search(raw)
        if m and 1 <= int(m.group(1)) <= 10:
            return int(m.group(1))
    lines = [ln for ln in raw.strip().splitlines() if ln.strip()]
    if lines:
        m = _LONE_INT_RE.match(lines[-1].strip())
        if m and 1 <= int(m.group(1)) <= 10:
            return int(m.group(1))
    return None


def resolve_mode(scores: Sequence[Optional[int]]) -> Optional[int]:
    """The unique modal score, provided it appears at least three times.

    None scores are ignored; an ambiguous mode (two values tied at the top
    multiplicity) does not resolve.
    """
    counts: Dict[int, int] = {}
    for s in scores:
        if s is not None:
            counts[s] = counts.get(s, 0) + 1
    if not counts:
        return None
    top = max(counts.values())
    if top < 3:
        return None
    winners = [v for v, c in counts.items() if c == top]
    return winners[0] if len(winners) == 1 else None


def default_templates() -> Tuple[str, str]:
    pkg = resources.files("argengine") / "templates"
    return (
        (pkg / "judge_single.txt").read_text(encoding="utf-8"),
        (pkg / "judge_reference.txt").read_text(encoding="utf-8"),
    )


@dataclass
class EvalConfig:
    n_samples: int = 5
    sample_cap: int = 7
    judge_temperature: float = 0.7
    judge_max_tokens: int = 1024
    single_template: Optional[str] = None
    reference_template: Optional[str] = None

    def __post_init__(self):
        if self.n_samples < 3:
            raise ValueError("n_samples must be >= 3")
        if self.sample_cap < self.n_samples:
            raise ValueError("sample_cap must be >= n_samples")
        if self.single_template is None or self.reference_template is None:
            single, ref = default_templates()
            self.single_template = self.single_template or single
            self.reference_template = self.reference_template or ref


def judge_answer(
    question: str,
    answer: str,
    reference: Optional[str],
    judge_backend: ChatBackend,
    config: Optional[EvalConfig] = None,
) -> Tuple[Optional[int], List[JudgeSample]]:
    """Sample the judge until a score is the mode at least three times.

    Starts with n_samples calls, then adds samples one at a time up to the
    cap. Returns (score or None, all samples); backend failures leave the
    turn unresolved rather than aborting the run.
    """
    config = config or EvalConfig()
    if reference is not None:
        prompt = config.reference_template.format(
            question=question, answer=answer, reference=reference
        )
    else:
        prompt = config.single_template.format(question=question, answer=answer)
    params = GenerationParams(config.judge_temperature, config.judge_max_tokens)
    samples: List[JudgeSample] = []

    def draw() -> bool:
        try:
            reply = judge_backend.generate([user(prompt)], params)
        except Exception as exc:
            samples.append(JudgeSample(f"<judge call failed: {exc}>", None))
            return False
        samples.append(JudgeSample(reply.content, extract_score(reply.content)))
        return True

    for _ in range(config.n_samples):
        if not draw():
            return None, samples
    while resolve_mode([s.score for s in samples]) is None and len(samples) < config.sample_cap:
        if not draw():
            return None, samples
    return resolve_mode([s.score for s in samples]), samples


# -- aggregation ---------------------------------------------------------


@dataclass
class ScoreTable:
    categories: List[str]
    baseline_means: Dict[str, float]
    pipeline_means: Dict[str, float]
    deltas: Dict[str, float]
    baseline_overall: float
    pipeline_overall: float
    headline_delta_pct: float  # from the rounded overall averages
    unrounded_delta_pct: float  # from the untruncated overall averages
    unresolved_turns: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    def render_text(self) -> str:
        width = max((len(c) for c in self.categories), default=8) + 2
        lines = [
            f"{'Category':<{width}}{'Baseline':>10}{'Pipeline':>10}{'Delta':>10}"
        ]
        for cat in self.categories:
            lines.append(
                f"{cat:<{width}}{self.baseline_means[cat]:>10.2f}"
                f"{self.pipeline_means[cat]:>10.2f}{self.deltas[cat]:>+10.2f}"
            )
        lines.append(
            f"{'Average':<{width}}{self.baseline_overall:>10.2f}"
            f"{self.pipeline_overall:>10.2f}{self.headline_delta_pct:>+9.2f}%"
        )
        lines.append(f"(unrounded delta {self.unrounded_delta_pct:+.2f}%)")
        if self.unresolved_turns:
            lines.append(f"unresolved turns excluded from means: {self.unresolved_turns}")
        return "\n".join(lines) + "\n"


def _round2(x: float) -> float:
    return float(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _truncate2(x: float) -> float:
    return float(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_DOWN))


def overall_average(category_means: Sequence[float]) -> float:
    """Headline overall score: mean of the category means, truncated to 2
    decimals (round-then-divide table arithmetic)."""
    if not category_means:
        raise ValueError("no category means")
    return _truncate2(sum(category_means) / len(category_means))


def score_table_from_means(
    baseline: Dict[str, float],
    pipeline: Dict[str, float],
    unresolved_turns: int = 0,
) -> ScoreTable:
    if set(baseline) != set(pipeline) or not baseline:
        raise ValueError("baseline and pipeline must cover the same non-empty categories")
    categories = [c for c in MT_BENCH_CATEGORIES if c in baseline]
    categories += sorted(set(baseline) - set(categories))
    base_overall = overall_average(list(baseline.values()))
    pipe_overall = overall_average(list(pipeline.values()))
    base_exact = sum(baseline.values()) / len(baseline)
    pipe_exact = sum(pipeline.values()) / len(pipeline)
    return ScoreTable(
        categories=categories,
        baseline_means={c: _round2(baseline[c]) for c in categories},
        pipeline_means={c: _round2(pipeline[c]) for c in categories},
        deltas={c: _round2(pipeline[c] - baseline[c]) for c in categories},
        baseline_overall=base_overall,
        pipeline_overall=pipe_overall,
        headline_delta_pct=_round2((pipe_overall - base_overall) / base_overall * 100.0),
        unrounded_delta_pct=_round2((pipe_exact - base_exact) / base_exact * 100.0),
        unresolved_turns=unresolved_turns,
    )


def aggregate(records: Sequence[EvalRecord]) -> ScoreTable:
    """Per-category means (all scored turn scores, rounded to 2 decimals),
    overall averages and deltas. Unresolved turns are excluded and counted."""
    per: Dict[str, Dict[str, List[int]]] = {}
    unresolved = 0
    for rec in records:
        bucket = per.setdefault(rec.system, {}).setdefault(rec.category, [])
        for score in rec.scores:
            if score is None:
                unresolved += 1
            else:
                bucket.append(score)
    for sysname in (System.BASELINE.value, System.PIPELINE.value):
        if sysname not in per:
            raise ValueError(f"no records for system {sysname!r}")
    means = {}
    for sysname, cats in per.items():
        empties = [c for c, scores in cats.items() if not scores]
        if empties:
            raise ValueError(f"system {sysname!r}: no scored turns in categories {empties}")
        means[sysname] = {c: _round2(sum(v) / len(v)) for c, v in cats.items()}
    return score_table_from_means(
        means[System.BASELINE.value], means[System.PIPELINE.value], unresolved
    )


# -- runner --------------------------------------------------------------


def baseline_system(backend: ChatBackend, temperature: float = 0.3,
                    max_tokens: int = 1024) -> AnswerFn:
    """Plain zero-shot chain-of-thought answering, no argument engine."""
    from .pipeline import compose_final_prompt

    def answer(prompt: str, history: List[ChatMessage]) -> str:
        params = GenerationParams(temperature, max_tokens)
        transcript = list(history) + [user(compose_final_prompt(prompt, None))]
        return backend.generate(transcript, params).content

    return answer


def pipeline_system(backend: ChatBackend, config=None) -> AnswerFn:
    from . import pipeline as pl

    def answer(prompt: str, history: List[ChatMessage]) -> str:
        result, _trace = pl.run(prompt, history, backend, config)
        return result

    return answer


def run_eval(
    questions: Sequence[BenchQuestion],
    systems: Dict[str, AnswerFn],
    judge_backend: ChatBackend,
    config: Optional[EvalConfig] = None,
    out_dir: Optional[str] = None,
) -> Tuple[List[EvalRecord], ScoreTable]:
    """Answer and judge every question with every system.

    Records are appended to out_dir/records.jsonl as soon as each one
    completes; a re-run over the same directory skips (question, system)
    pairs that already have a record, so interrupted runs resume cleanly.
    """
    config = config or EvalConfig()
    records: List[EvalRecord] = []
    done = set()
    records_path = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        records_path = os.path.join(out_dir, "records.jsonl")
        if os.path.exists(records_path):
            with open(records_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = EvalRecord.from_json(line)
                        records.append(rec)
                        done.add((rec.question_id, rec.system))

    from .llm import assistant as assistant_msg

    for question in questions:
        for sysname, answer_fn in systems.items():
            if (question.question_id, sysname) in done:
                continue
            answers: List[str] = []
            samples: List[List[JudgeSample]] = []
            scores: List[Optional[int]] = []
            history: List[ChatMessage] = []
            failed = False
            for t, turn_prompt in enumerate(question.turns):
                try:
                    answer = answer_fn(turn_prompt, history)
                except Exception as exc:
                    answers.append(f"<answer generation failed: {exc}>")
                    samples.append([])
                    scores.append(None)
                    failed = True
                    break
                history = history + [user(turn_prompt), assistant_msg(answer)]
                ref = question.reference[t] if question.reference else None
                score, turn_samples = judge_answer(
                    turn_prompt, answer, ref, judge_backend, config
                )
                answers.append(answer)
                samples.append(turn_samples)
                scores.append(score)
            status = (
                RecordStatus.SCORED
                if not failed and all(s is not None for s in scores)
                else RecordStatus.UNRESOLVED
            )
            rec = EvalRecord(
                question_id=question.question_id,
                system=sysname,
                category=question.category,
                answers=answers,
                samples=samples,
                scores=scores,
                status=status.value,
            )
            records.append(rec)
            if records_path:
                with open(records_path, "a", encoding="utf-8") as fh:
                    fh.write(rec.to_json() + "\n")

    table = aggregate(records)
    if out_dir is not None:
        with open(os.path.join(out_dir, "score_table.json"), "w", encoding="utf-8") as fh:
            fh.write(table.to_json())
        with open(os.path.join(out_dir, "score_table.txt"), "w", encoding="utf-8") as fh:
            fh.write(table.render_text())
    return records, table
