"""Abstract argumentation frameworks and their standard acceptability semantics.

A framework is a set of named arguments plus a directed attack relation.
The fast enumeration path works on bitmask adjacency rows; a subset-by-subset
brute-force oracle (independent of the fast path) is provided for
cross-validation of every enumeration operation.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Sequence, Tuple

BRUTE_FORCE_LIMIT = 20


class Semantics(enum.Enum):
    CONFLICT_FREE = "conflict-free"
    ADMISSIBLE = "admissible"
    COMPLETE = "complete"
    GROUNDED = "grounded"
    PREFERRED = "preferred"
    STABLE = "stable"


class UnknownArgumentError(ValueError):
    """A referenced argument name is not declared in the framework."""


class DuplicateArgumentError(ValueError):
    """The same argument name was declared twice."""


class SizeLimitError(ValueError):
    """Framework too large for exhaustive subset enumeration."""


class Label(enum.Enum):
    IN = "in"
    OUT = "out"
    UNDEC = "undec"


@dataclass(frozen=True)
class Extension:
    """A set of argument names together with the semantics that produced it."""

    members: FrozenSet[str]
    semantics: Semantics

    def sort_key(self, af: "ArgumentationFramework") -> Tuple[int, Tuple[int, ...]]:
        ids = tuple(sorted(af.index_of(name) for name in self.members))
        return (len(ids), ids)


class ArgumentationFramework:
    """Immutable pair of arguments and attacks.

    Argument names are unique whitespace-free tokens; internally each name
    maps to a dense index 0..n-1 in declaration order. Attack endpoints must
    be declared arguments; duplicate attack pairs are deduplicated silently,
    duplicate argument names are an error.
    """

    __slots__ = ("_names", "_index", "_attacks", "_attackers_mask", "_targets_mask")

    def __init__(self, arguments: Sequence[str], attacks: Iterable[Tuple[str, str]] = ()):
        names = list(arguments)
        index = {}
        for name in names:
            if not name or any(ch.isspace() for ch in name):
                raise ValueError(f"invalid argument name: {name!r}")
            if name in index:
                raise DuplicateArgumentError(f"duplicate argument name: {name!r}")
            index[name] = len(index)
        attack_ids = set()
        for src, dst in attacks:
            if src not in index:
                raise UnknownArgumentError(f"unknown attacker: {src!r}")
            if dst not in index:
                raise UnknownArgumentError(f"unknown attack target: {dst!r}")
            attack_ids.add((index[src], index[dst]))
        n = len(names)
        attackers = [0] * n
        targets = [0] * n
        for src, dst in attack_ids:
            attackers[dst] |= 1 << src
            targets[src] |= 1 << dst
        self._names = tuple(names)
        self._index = index
        self._attacks = frozenset(attack_ids)
        self._attackers_mask = tuple(attackers)
        self._targets_mask = tuple(targets)

    # -- basic accessors -------------------------------------------------

    @property
    def arguments(self) -> Tuple[str, ...]:
        return self._names

    @property
    def attacks(self) -> FrozenSet[Tuple[str, str]]:
        return frozenset((self._names[s], self._names[t]) for s, t in self._attacks)

    @property
    def attack_ids(self) -> FrozenSet[Tuple[int, int]]:
        return self._attacks

    def __len__(self) -> int:
        return len(self._names)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArgumentationFramework):
            return NotImplemented
        return self._names == other._names and self._attacks == other._attacks

    def __hash__(self) -> int:
        return hash((self._names, self._attacks))

    def __repr__(self) -> str:
        return f"ArgumentationFramework({len(self._names)} arguments, {len(self._attacks)} attacks)"

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownArgumentError(f"unknown argument: {name!r}") from None

    def name_of(self, idx: int) -> str:
        return self._names[idx]

    def attackers_of(self, name: str) -> FrozenSet[str]:
        mask = self._attackers_mask[self.index_of(name)]
        return self._mask_to_names(mask)

    def targets_of(self, name: str) -> FrozenSet[str]:
        mask = self._targets_mask[self.index_of(name)]
        return self._mask_to_names(mask)

    # -- bitmask helpers -------------------------------------------------

    def names_to_mask(self, names: Iterable[str]) -> int:
        mask = 0
        for name in names:
            mask |= 1 << self.index_of(name)
        return mask

    def _mask_to_names(self, mask: int) -> FrozenSet[str]:
        return frozenset(self._names[i] for i in _bits(mask))

    def _attacked_by(self, mask: int) -> int:
        out = 0
        for i in _bits(mask):
            out |= self._targets_mask[i]
        return out

    def _conflict_free_mask(self, mask: int) -> bool:
        return self._attacked_by(mask) & mask == 0

    def _characteristic_mask(self, mask: int) -> int:
        attacked = self._attacked_by(mask)
        result = 0
        for i in range(len(self._names)):
            if self._attackers_mask[i] & ~attacked == 0:
                result |= 1 << i
        return result

    def _extension(self, mask: int, semantics: Semantics) -> Extension:
        return Extension(self._mask_to_names(mask), semantics)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# -- decision operations -------------------------------------------------


def is_conflict_free(members: Iterable[str], af: ArgumentationFramework) -> bool:
    """True iff no member of the set attacks another member (or itself)."""
    return af._conflict_free_mask(af.names_to_mask(members))


def is_acceptable(name: str, members: Iterable[str], af: ArgumentationFramework) -> bool:
    """True iff every attacker of `name` is attacked by some member of the set."""
    idx = af.index_of(name)
    attacked = af._attacked_by(af.names_to_mask(members))
    return af._attackers_mask[idx] & ~attacked == 0


def characteristic_set(members: Iterable[str], af: ArgumentationFramework) -> FrozenSet[str]:
    """All arguments acceptable with respect to the given set. Monotone."""
    return af._mask_to_names(af._characteristic_mask(af.names_to_mask(members)))


def is_admissible(members: Iterable[str], af: ArgumentationFramework) -> bool:
    mask = af.names_to_mask(members)
    return af._conflict_free_mask(mask) and mask & ~af._characteristic_mask(mask) == 0


def is_complete(members: Iterable[str], af: ArgumentationFramework) -> bool:
    mask = af.names_to_mask(members)
    return af._conflict_free_mask(mask) and af._characteristic_mask(mask) == mask


def is_stable(members: Iterable[str], af: ArgumentationFramework) -> bool:
    mask = af.names_to_mask(members)
    full = (1 << len(af)) - 1
    return af._conflict_free_mask(mask) and (mask | af._attacked_by(mask)) == full


# -- enumeration ---------------------------------------------------------


def grounded_extension(af: ArgumentationFramework) -> Extension:
    """Least fixpoint of the characteristic function, starting from the empty set.

    Always exists and is unique; the iteration adds at least one argument per
    round, so it terminates within |arguments| rounds.
    """
    mask = 0
    while True:
        nxt = af._characteristic_mask(mask)
        if nxt == mask:
            return af._extension(mask, Semantics.GROUNDED)
        mask = nxt


def complete_extensions(af: ArgumentationFramework) -> Tuple[Extension, ...]:
    """All complete extensions, via labelling backtracking with propagation."""
    masks = _complete_in_masks(af)
    exts = [af._extension(m, Semantics.COMPLETE) for m in masks]
    return tuple(sorted(exts, key=lambda e: e.sort_key(af)))


def preferred_extensions(af: ArgumentationFramework) -> Tuple[Extension, ...]:
    """Subset-maximal complete extensions. Never empty."""
    masks = _complete_in_masks(af)
    maximal = [m for m in masks if not any(m != o and m & ~o == 0 for o in masks)]
    exts = [af._extension(m, Semantics.PREFERRED) for m in maximal]
    return tuple(sorted(exts, key=lambda e: e.sort_key(af)))


def stable_extensions(af: ArgumentationFramework) -> Tuple[Extension, ...]:
    """Conflict-free sets attacking every outside argument. May be empty."""
    full = (1 << len(af)) - 1
    masks = [m for m in _complete_in_masks(af) if m | af._attacked_by(m) == full]
    exts = [af._extension(m, Semantics.STABLE) for m in masks]
    return tuple(sorted(exts, key=lambda e: e.sort_key(af)))


def _complete_in_masks(af: ArgumentationFramework) -> list:
    """Enumerate the In-sets of all legal complete labellings.

    Backtracking over In/Out/Undec with unit propagation: an argument whose
    attackers are all Out must be In, and an argument with an In attacker
    must be Out.
    """
    n = len(af)
    if n == 0:
        return [0]
    attackers = af._attackers_mask
    results = []

    def propagate(labels):
        changed = True
        while changed:
            changed = False
            for i in range(n):
                if labels[i] is not None:
                    continue
                in_mask = _label_mask(labels, Label.IN)
                out_mask = _label_mask(labels, Label.OUT)
                if attackers[i] & in_mask:
                    labels[i] = Label.OUT
                    changed = True
                elif attackers[i] & ~out_mask == 0:
                    labels[i] = Label.IN
                    changed = True
        return _consistent(labels)

    def _consistent(labels):
        in_mask = _label_mask(labels, Label.IN)
        undec_mask = _label_mask(labels, Label.UNDEC)
        for i in range(n):
            lab = labels[i]
            if lab is Label.IN and attackers[i] & (in_mask | undec_mask):
                return False
            if lab is Label.UNDEC and attackers[i] & in_mask:
                return False
        return True

    def legal(labels):
        in_mask = _label_mask(labels, Label.IN)
        out_mask = _label_mask(labels, Label.OUT)
        for i in range(n):
            lab = labels[i]
            if lab is Label.IN and attackers[i] & ~out_mask:
                return False
            if lab is Label.OUT and not attackers[i] & in_mask:
                return False
            if lab is Label.UNDEC:
                if attackers[i] & in_mask or not attackers[i] & ~out_mask:
                    return False
        return True

    def search(labels):
        if not propagate(labels):
            return
        try:
            pivot = labels.index(None)
        except ValueError:
            if legal(labels):
                results.append(_label_mask(labels, Label.IN))
            return
        for choice in (Label.IN, Label.OUT, Label.UNDEC):
            trial = list(labels)
            trial[pivot] = choice
            search(trial)

    search([None] * n)
    return sorted(set(results))


def _label_mask(labels, which: Label) -> int:
    mask = 0
    for i, lab in enumerate(labels):
        if lab is which:
            mask |= 1 << i
    return mask


# -- brute-force oracle --------------------------------------------------


def brute_force_extensions(
    af: ArgumentationFramework, semantics: Semantics
) -> Tuple[Extension, ...]:
    """Ground truth by exhaustive subset enumeration.

    Applies the defining predicate of each semantics directly to every subset
    of the arguments, using plain set scans over the attack pairs rather than
    the bitmask fast path, so the two routes stay independent.
    """
    if len(af) > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(
            f"brute force limited to {BRUTE_FORCE_LIMIT} arguments, got {len(af)}"
        )
    names = af.arguments
    attacks = af.attacks
    attackers_of = {x: set() for x in names}
    for src, dst in attacks:
        attackers_of[dst].add(src)

    def cf(s):
        return all(not (attackers_of[x] & s) for x in s)

    def acceptable(x, s):
        return all(attackers_of[y] & s for y in attackers_of[x])

    def admissible(s):
        return cf(s) and all(acceptable(x, s) for x in s)

    def complete(s):
        return cf(s) and all((x in s) == acceptable(x, s) for x in names)

    def stable(s):
        if not cf(s):
            return False
        return all(x in s or attackers_of[x] & s for x in names)

    subsets = []
    for r in range(len(names) + 1):
        subsets.extend(frozenset(c) for c in itertools.combinations(names, r))

    if semantics is Semantics.CONFLICT_FREE:
        hits = [s for s in subsets if cf(s)]
    elif semantics is Semantics.ADMISSIBLE:
        hits = [s for s in subsets if admissible(s)]
    elif semantics is Semantics.COMPLETE:
        hits = [s for s in subsets if complete(s)]
    elif semantics is Semantics.GROUNDED:
        # the unique subset-minimal complete set
        comp = [s for s in subsets if complete(s)]
        hits = [s for s in comp if all(s <= o for o in comp)]
    elif semantics is Semantics.PREFERRED:
        comp = [s for s in subsets if complete(s)]
        hits = [s for s in comp if not any(s < o for o in comp)]
    elif semantics is Semantics.STABLE:
        hits = [s for s in subsets if stable(s)]
    else:
        raise ValueError(f"unsupported semantics: {semantics}")

    exts = [Extension(s, semantics) for s in hits]
    return tuple(sorted(exts, key=lambda e: e.sort_key(af)))


WITNESS_ARGUMENTS = ("a", "b", "c", "d", "e")
WITNESS_ATTACKS = (("a", "b"), ("b", "a"), ("a", "c"), ("b", "c"), ("a", "d"), ("b", "d"))


def witness_framework() -> ArgumentationFramework:
    """Five-argument framework used throughout the tests and demos.

    Its extensions: grounded {e}; complete {e}, {a,e}, {b,e}; preferred and
    stable {a,e}, {b,e}.
    """
    return ArgumentationFramework(WITNESS_ARGUMENTS, WITNESS_ATTACKS)
