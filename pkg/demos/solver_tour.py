"""Tour of the argumentation solver: build a framework, compute semantics,
and cross-check the fast enumeration against the brute-force oracle."""

import random

from argengine import (
    ArgumentationFramework,
    Semantics,
    brute_force_extensions,
    complete_extensions,
    grounded_extension,
    preferred_extensions,
    stable_extensions,
    witness_framework,
)


def show(label, extensions):
    sets = sorted(sorted(e.members) for e in extensions)
    print(f"  {label:<10} {sets}")


# The classic worked example: a and b attack each other and jointly attack
# c and d; e stands alone.
W = witness_framework()
print("witness framework:", W)
print("  attacks:", sorted(W.attacks))
show("grounded", [grounded_extension(W)])
show("complete", complete_extensions(W))
show("preferred", preferred_extensions(W))
show("stable", stable_extensions(W))

# A self-attacker admits no stable extension at all.
loop = ArgumentationFramework(["x"], [("x", "x")])
print("\nself-attacker:", sorted(e.members for e in stable_extensions(loop)) or "no stable extension")

# An odd cycle: grounded comes up empty, preferred keeps the empty set.
cycle = ArgumentationFramework(["p", "q", "r"], [("p", "q"), ("q", "r"), ("r", "p")])
print("3-cycle grounded:", sorted(grounded_extension(cycle).members) or "{}")
show("preferred", preferred_extensions(cycle))

# Every enumeration is validated against exhaustive subset search.
rng = random.Random(1)
names = [f"n{i}" for i in range(8)]
attacks = [(a, b) for a in names for b in names if rng.random() < 0.3]
af = ArgumentationFramework(names, attacks)
print(f"\nrandom framework with {len(af.attacks)} attacks:")
for sem, fast in [
    (Semantics.COMPLETE, complete_extensions),
    (Semantics.PREFERRED, preferred_extensions),
    (Semantics.STABLE, stable_extensions),
]:
    fast_sets = {e.members for e in fast(af)}
    brute_sets = {e.members for e in brute_force_extensions(af, sem)}
    print(f"  {sem.value:<10} fast == brute-force: {fast_sets == brute_sets}"
          f"  ({len(fast_sets)} extensions)")
