"""Tiny hermetic benchmark run: two systems, scripted answers, scripted
judge, and the aggregated score table."""

from argengine.evaluation import (
    BenchQuestion,
    EvalConfig,
    baseline_system,
    run_eval,
)
from argengine.llm import MockBackend

questions = [
    BenchQuestion(1, "writing", ("Draft a short toast.", "Now make it rhyme.")),
    BenchQuestion(2, "math", ("What is 17 * 23?",), reference=("391",)),
]

systems = {
    "baseline": baseline_system(MockBackend(["toast v1", "toast v2", "it is 391"])),
    "pipeline": baseline_system(MockBackend(["toast v1+", "toast v2+", "391, verified"])),
}

# The judge is sampled repeatedly; a score becomes official once it is the
# mode with multiplicity three. Scripts here are unanimous per turn.
judge_scores = [7, 7, 7, 8, 8, 8, 6, 6, 6, 9, 9, 9, 5, 5, 5, 10, 10, 10]
judge = MockBackend([f"Rating: [[{s}]]" for s in judge_scores])

records, table = run_eval(questions, systems, judge, EvalConfig(n_samples=3))

for rec in records:
    print(f"q{rec.question_id} {rec.system:<9} {rec.category:<8} scores={rec.scores}")
print()
print(table.render_text())
