import json
import random

import pytest

from argengine.evaluation import (
    BenchQuestion,
    EvalConfig,
    EvalRecord,
    JudgeSample,
    QuestionFileError,
    aggregate,
    baseline_system,
    extract_score,
    judge_answer,
    load_questions,
    overall_average,
    pipeline_system,
    resolve_mode,
    run_eval,
    score_table_from_means,
)
from argengine.llm import MockBackend

BASE_MEANS = {
    "writing": 8.15, "roleplay": 6.80, "reasoning": 4.05, "math": 2.80,
    "coding": 5.30, "extraction": 5.55, "stem": 7.35, "humanities": 7.75,
}
PIPE_MEANS = {
    "writing": 8.05, "roleplay": 6.75, "reasoning": 4.25, "math": 2.80,
    "coding": 5.50, "extraction": 5.70, "stem": 7.60, "humanities": 8.10,
}


# -- questions -----------------------------------------------------------

def write_questions(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def test_load_questions_valid(tmp_path):
    path = tmp_path / "q.jsonl"
    write_questions(path, [
        {"question_id": 1, "category": "writing", "turns": ["t1", "t2"]},
        {"question_id": 2, "category": "math", "turns": ["t1"], "reference": ["r1"]},
    ])
    questions = load_questions(str(path))
    assert len(questions) == 2
    assert questions[0].turns == ("t1", "t2")
    assert questions[1].reference == ("r1",)


def test_load_questions_rejects_three_turns(tmp_path):
    path = tmp_path / "q.jsonl"
    write_questions(path, [{"question_id": 1, "category": "x", "turns": ["a", "b", "c"]}])
    with pytest.raises(QuestionFileError) as err:
        load_questions(str(path))
    assert "line 1" in err.value.problems[0]


def test_load_questions_per_line_diagnostics(tmp_path):
    path = tmp_path / "q.jsonl"
    with open(path, "w") as fh:
        fh.write('{"question_id": 1, "category": "x", "turns": ["a"]}\n')
        fh.write("not json\n")
        fh.write('{"category": "missing id", "turns": ["a"]}\n')
    with pytest.raises(QuestionFileError) as err:
        load_questions(str(path))
    assert len(err.value.problems) == 2


def test_reference_must_align_with_turns():
    with pytest.raises(ValueError):
        BenchQuestion(1, "math", ("a", "b"), reference=("only one",))


# -- score extraction ----------------------------------------------------

@pytest.mark.parametrize("raw,expected", [
    ("The answer is decent.\nRating: [[7]]", 7),
    ("Rating: 9", 9),
    ("Good work overall.\n\n8", 8),
    ("Rating: [[3]] but really Rating: [[9]]", 3),  # first match wins
    ("Rating: [[11]]", None),  # out of range
    ("I cannot rate this.", None),
    ("Rating: [[10]]", 10),
    ("the score is around seven", None),
])
def test_extract_score(raw, expected):
    assert extract_score(raw) == expected


def test_extract_score_bracket_beats_lone_int():
    assert extract_score("2\nRating: [[6]]") == 6


# -- mode rule -----------------------------------------------------------

def test_mode_examples_from_protocol():
    assert resolve_mode([7, 7, 7, 5]) == 7
    assert resolve_mode([6, 7, 6, 7, 6]) == 6
    assert resolve_mode([5, 6, 7, 8, 9, 4, 3]) is None


def test_mode_ignores_unparsed_samples():
    assert resolve_mode([7, None, 7, None, 7]) == 7
    assert resolve_mode([None, None, None]) is None


def test_mode_ambiguous_tie_unresolved():
    assert resolve_mode([7, 7, 7, 5, 5, 5]) is None


def brute_force_mode(scores):
    present = [s for s in scores if s is not None]
    best, best_count = None, 0
    tie = False
    for v in set(present):
        c = present.count(v)
        if c > best_count:
            best, best_count, tie = v, c, False
        elif c == best_count:
            tie = True
    if best_count >= 3 and not tie:
        return best
    return None


def test_mode_matches_brute_force_oracle():
    rng = random.Random(99)
    for _ in range(2000):
        n = rng.randint(0, 9)
        scores = [rng.choice([None] + list(range(1, 11))) for _ in range(n)]
        assert resolve_mode(scores) == brute_force_mode(scores)


# -- judge_answer --------------------------------------------------------

def rated(n):
    return f"Looks fine.\nRating: [[{n}]]"


def test_judge_answer_resolves_at_n_samples():
    backend = MockBackend([rated(7), rated(7), rated(7)])
    score, samples = judge_answer("q", "a", None, backend, EvalConfig(n_samples=3))
    assert score == 7
    assert [s.score for s in samples] == [7, 7, 7]


def test_judge_answer_keeps_sampling_to_cap():
    backend = MockBackend([rated(7), rated(5), rated(7), rated(6), rated(7)])
    score, samples = judge_answer(
        "q", "a", None, backend, EvalConfig(n_samples=3, sample_cap=7)
    )
    assert score == 7
    assert len(samples) == 5


def test_judge_answer_unresolved_at_cap():
    backend = MockBackend([rated(n) for n in (5, 6, 7, 8, 9, 4, 3)])
    score, samples = judge_answer(
        "q", "a", None, backend, EvalConfig(n_samples=5, sample_cap=7)
    )
    assert score is None
    assert len(samples) == 7


def test_judge_answer_backend_failure_is_unresolved():
    backend = MockBackend([rated(7)])  # exhausted on the second call
    score, samples = judge_answer("q", "a", None, backend, EvalConfig(n_samples=3))
    assert score is None
    assert samples[-1].score is None


def test_judge_answer_uses_reference_template():
    backend = MockBackend([rated(8)] * 3)
    judge_answer("the question", "the answer", "the reference", backend,
                 EvalConfig(n_samples=3))
    prompt = backend.calls[0].messages[-1].content
    assert "the reference" in prompt
    assert "Reference Answer" in prompt


def test_judge_answer_single_template_without_reference():
    backend = MockBackend([rated(8)] * 3)
    judge_answer("the question", "the answer", None, backend, EvalConfig(n_samples=3))
    prompt = backend.calls[0].messages[-1].content
    assert "Reference Answer" not in prompt
    assert "the question" in prompt and "the answer" in prompt


def test_eval_config_validates_sampling():
    with pytest.raises(ValueError):
        EvalConfig(n_samples=2)
    with pytest.raises(ValueError):
        EvalConfig(n_samples=5, sample_cap=4)


# -- aggregation ---------------------------------------------------------

def test_overall_average_reproduces_reported_figures():
    assert overall_average(list(BASE_MEANS.values())) == 5.96
    assert overall_average(list(PIPE_MEANS.values())) == 6.09


def test_score_table_headline_delta():
    table = score_table_from_means(BASE_MEANS, PIPE_MEANS)
    assert table.baseline_overall == 5.96
    assert table.pipeline_overall == 6.09
    assert table.headline_delta_pct == 2.18  # round-then-divide
    assert table.unrounded_delta_pct == 2.09


def test_score_table_per_category_deltas():
    table = score_table_from_means(BASE_MEANS, PIPE_MEANS)
    assert table.deltas["humanities"] == 0.35
    assert table.deltas["writing"] == -0.10
    assert table.deltas["math"] == 0.00


def test_score_table_render_layout():
    text = score_table_from_means(BASE_MEANS, PIPE_MEANS).render_text()
    lines = text.strip().splitlines()
    assert lines[0].split() == ["Category", "Baseline", "Pipeline", "Delta"]
    assert len([ln for ln in lines if ln.startswith(tuple(BASE_MEANS))]) == 8
    assert any("Average" in ln and "5.96" in ln and "6.09" in ln and "+2.18%" in ln
               for ln in lines)
    assert any("+2.09%" in ln for ln in lines)


def _record(question_id, system, category, scores):
    return EvalRecord(
        question_id=question_id, system=system, category=category,
        answers=["x"] * len(scores),
        samples=[[] for _ in scores],
        scores=list(scores),
        status="scored" if all(s is not None for s in scores) else "unresolved",
    )


def test_aggregate_means_and_unresolved_exclusion():
    records = [
        _record(1, "baseline", "writing", [6, 8]),
        _record(1, "pipeline", "writing", [7, None]),
        _record(2, "baseline", "math", [4, 4]),
        _record(2, "pipeline", "math", [5, 5]),
    ]
    table = aggregate(records)
    assert table.baseline_means["writing"] == 7.00
    assert table.pipeline_means["writing"] == 7.00  # the None turn is excluded
    assert table.unresolved_turns == 1


def test_aggregate_empty_category_error():
    records = [
        _record(1, "baseline", "writing", [6]),
        _record(1, "pipeline", "writing", [None]),
    ]
    with pytest.raises(ValueError):
        aggregate(records)


def test_aggregate_requires_both_systems():
    with pytest.raises(ValueError):
        aggregate([_record(1, "baseline", "writing", [6])])


# -- run_eval ------------------------------------------------------------

GOOD_REPLY_LINES = []
for i in (1, 2, 3):
    GOOD_REPLY_LINES.append(f"Answer {i}: candidate {i}")
    for j in (1, 2, 3):
        GOOD_REPLY_LINES.append(f"Support {i}.{j}: support {i}.{j}")
GOOD_REPLY = "\n".join(GOOD_REPLY_LINES)


def pipeline_turn_script(final):
    return [GOOD_REPLY] + ["NO"] * 57 + ["summary"] + [final]


@pytest.fixture
def two_questions():
    return [
        BenchQuestion(1, "writing", ("w turn 1", "w turn 2")),
        BenchQuestion(2, "math", ("m turn 1", "m turn 2"), reference=("r1", "r2")),
    ]


def make_systems():
    from argengine.pipeline import PipelineConfig

    baseline_backend = MockBackend([f"baseline answer {i}" for i in range(4)])
    pipeline_backend = MockBackend(
        pipeline_turn_script("pipe answer 0") + pipeline_turn_script("pipe answer 1")
        + pipeline_turn_script("pipe answer 2") + pipeline_turn_script("pipe answer 3")
    )
    return {
        "baseline": baseline_system(baseline_backend),
        "pipeline": pipeline_system(pipeline_backend, PipelineConfig(parallelism=1)),
    }


def judge_script():
    # 2 questions x 2 systems x 2 turns x 3 samples, all unanimous
    return [rated(7)] * 24


def test_run_eval_hermetic(tmp_path, two_questions):
    records, table = run_eval(
        two_questions, make_systems(), MockBackend(judge_script()),
        EvalConfig(n_samples=3), str(tmp_path / "out"),
    )
    assert len(records) == 4
    assert sum(len(r.scores) for r in records) == 8  # 8 turn-level results
    assert all(r.status == "scored" for r in records)
    assert table.baseline_means == {"writing": 7.0, "math": 7.0}
    assert table.headline_delta_pct == 0.0
    out = tmp_path / "out"
    assert (out / "records.jsonl").exists()
    assert (out / "score_table.json").exists()
    assert (out / "score_table.txt").exists()


def test_run_eval_resume_skips_scored(tmp_path, two_questions):
    out = str(tmp_path / "out")
    run_eval(two_questions, make_systems(), MockBackend(judge_script()),
             EvalConfig(n_samples=3), out)
    # resuming: exhausted backends would blow up if any call were re-issued
    exhausted = {"baseline": lambda p, h: (_ for _ in ()).throw(AssertionError),
                 "pipeline": lambda p, h: (_ for _ in ()).throw(AssertionError)}
    records, _table = run_eval(
        two_questions, exhausted, MockBackend([]), EvalConfig(n_samples=3), out
    )
    assert len(records) == 4  # no duplicates appended
    with open(f"{out}/records.jsonl") as fh:
        assert sum(1 for line in fh if line.strip()) == 4


def test_run_eval_turn2_gets_turn1_history(tmp_path, two_questions):
    baseline_backend = MockBackend([f"b{i}" for i in range(4)])
    systems = {"baseline": baseline_system(baseline_backend),
               "pipeline": baseline_system(MockBackend([f"p{i}" for i in range(4)]))}
    run_eval(two_questions, systems, MockBackend(judge_script()),
             EvalConfig(n_samples=3))
    turn2_call = baseline_backend.calls[1]
    contents = [m.content for m in turn2_call.messages]
    assert any("w turn 1" in c for c in contents[:-1])
    assert "b0" in contents[1]
    assert "w turn 2" in contents[-1]


def test_run_eval_answer_failure_recorded_run_continues(tmp_path, two_questions):
    def broken(prompt, history):
        raise RuntimeError("backend down")

    systems = {"baseline": baseline_system(MockBackend([f"b{i}" for i in range(4)])),
               "pipeline": broken}
    judge = MockBackend([rated(7)] * 12)
    with pytest.raises(ValueError):
        # pipeline has no scored turns at all, so aggregation reports it
        run_eval(two_questions, systems, judge, EvalConfig(n_samples=3))


def test_record_json_round_trip():
    rec = EvalRecord(1, "baseline", "math", ["ans"], [[JudgeSample("Rating: [[7]]", 7)]],
                     [7], "scored")
    assert EvalRecord.from_json(rec.to_json()) == rec


def test_baseline_system_uses_cot_trigger():
    backend = MockBackend(["the answer"])
    answer = baseline_system(backend)("what?", [])
    assert answer == "the answer"
    prompt = backend.calls[0].messages[-1].content
    assert prompt.endswith("Let's think step by step")
