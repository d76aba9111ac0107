"""Abstract argumentation solver with an LLM pipeline and eval harness."""

from .core import (
    ArgumentationFramework,
    Extension,
    Semantics,
    brute_force_extensions,
    characteristic_set,
    complete_extensions,
    grounded_extension,
    is_acceptable,
    is_admissible,
    is_complete,
    is_conflict_free,
    is_stable,
    preferred_extensions,
    stable_extensions,
    witness_framework,
)
from .formats import parse_apx, parse_tgf, serialize_apx, serialize_tgf

__version__ = "0.1.0"

__all__ = [
    "ArgumentationFramework",
    "Extension",
    "Semantics",
    "brute_force_extensions",
    "characteristic_set",
    "complete_extensions",
    "grounded_extension",
    "is_acceptable",
    "is_admissible",
    "is_complete",
    "is_conflict_free",
    "is_stable",
    "preferred_extensions",
    "stable_extensions",
    "witness_framework",
    "parse_apx",
    "parse_tgf",
    "serialize_apx",
    "serialize_tgf",
]
