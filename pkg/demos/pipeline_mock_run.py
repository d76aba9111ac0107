"""Hermetic pipeline run against a scripted mock backend.

The script plays the model's part: one argument-generation reply, 57
pairwise conflict verdicts, a summary, and the final answer. Two of the
candidate answers are scripted to conflict, so the solver has real work."""

from argengine.formats import parse_apx
from argengine.llm import MockBackend
from argengine.pipeline import PipelineConfig, conflict_pairs, parse_generated_arguments, run

generation_reply = "\n".join(
    line
    for i in (1, 2, 3)
    for line in [f"Answer {i}: the route via option {i} is best"]
    + [f"Support {i}.{j}: reason {i}.{j}" for j in (1, 2, 3)]
)

# Mark the pair (answer 1, answer 2) as inconsistent, everything else fine.
args = parse_generated_arguments(generation_reply)
pairs = conflict_pairs(args)
verdict_script = [
    "YES, they recommend different options." if (args[i].name, args[j].name) == ("a0", "a4") else "NO"
    for i, j in pairs
]

script = (
    [generation_reply]
    + verdict_script
    + ["Option routes 1 and 3 are both viable; their reasons do not clash."]
    + ["Taking the verified points into account, option 3 is the safest choice."]
)

config = PipelineConfig(parallelism=1)
answer, trace = run("Which route should we take?", [], MockBackend(script), config)

print("final answer:", answer)
print("\nframework built from the verdicts:")
print(trace.af_apx)
af = parse_apx(trace.af_apx)
print("attacks:", sorted(af.attacks))
print("semantics used:", trace.semantics_used)
print("accepted arguments:", trace.extension_members)
print("summary injected:", trace.summary)
print("\nfinal prompt sent to the model:")
print(trace.final_prompt)
