"""APX and TGF text formats for argumentation frameworks.

Both parsers are total: any input yields either a framework or a ParseError
carrying located diagnostics, never a partial framework. Output is
deterministic (declaration order for arguments, canonical order for attacks)
and LF-normalized, so parse(serialize(af)) == af.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .core import ArgumentationFramework

NAME_RE = re.compile(r"[A-Za-z0-9_]+")
APX_ARG_RE = re.compile(r"arg\(\s*([A-Za-z0-9_]+)\s*\)\.")
APX_ATT_RE = re.compile(r"att\(\s*([A-Za-z0-9_]+)\s*,\s*([A-Za-z0-9_]+)\s*\)\.")


class DiagnosticKind(enum.Enum):
    SYNTAX = "syntax"
    DUPLICATE_ARGUMENT = "duplicate-argument"
    UNKNOWN_ARGUMENT = "unknown-argument"
    EMPTY_INPUT = "empty-input"


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int  # 1-based
    column: int  # 1-based
    kind: DiagnosticKind
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.kind.value}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: List[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def _lines(text: str) -> List[str]:
    return text.replace("\r\n", "\n").replace("\r", "\n").split("\n")


def parse_apx(text: str) -> ArgumentationFramework:
    """Parse `arg(NAME).` / `att(NAME,NAME).` lines; `%` starts a comment."""
    diags: List[ParseDiagnostic] = []
    arguments: List[str] = []
    seen = set()
    attacks: List[Tuple[str, str]] = []
    pending_attacks: List[Tuple[str, str, int, str]] = []
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.split("%", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        m = APX_ARG_RE.fullmatch(stripped)
        if m:
            name = m.group(1)
            if name in seen:
                diags.append(
                    ParseDiagnostic(
                        lineno, col, DiagnosticKind.DUPLICATE_ARGUMENT,
                        f"argument {name!r} declared twice",
                    )
                )
            else:
                seen.add(name)
                arguments.append(name)
            continue
        m = APX_ATT_RE.fullmatch(stripped)
        if m:
            pending_attacks.append((m.group(1), m.group(2), lineno, line))
            continue
        diags.append(
            ParseDiagnostic(
                lineno, col, DiagnosticKind.SYNTAX,
                f"expected 'arg(NAME).' or 'att(NAME,NAME).', got {stripped!r}",
            )
        )
    for src, dst, lineno, line in pending_attacks:
        for name in (src, dst):
            if name not in seen:
                col = line.find(name) + 1
                diags.append(
                    ParseDiagnostic(
                        lineno, max(col, 1), DiagnosticKind.UNKNOWN_ARGUMENT,
                        f"attack references undeclared argument {name!r}",
                    )
                )
        if src in seen and dst in seen:
            attacks.append((src, dst))
    if diags:
        raise ParseError(diags)
    return ArgumentationFramework(arguments, attacks)


def parse_tgf(text: str) -> ArgumentationFramework:
    """Parse TGF: node ids one per line, a `#` separator, then `src dst` pairs."""
    diags: List[ParseDiagnostic] = []
    lines = _lines(text)
    if not text.strip():
        raise ParseError(
            [ParseDiagnostic(1, 1, DiagnosticKind.EMPTY_INPUT, "empty TGF input")]
        )
    sep_index = None
    for i, raw in enumerate(lines):
        if raw.strip() == "#":
            sep_index = i
            break
    if sep_index is None:
        raise ParseError(
            [
                ParseDiagnostic(
                    len(lines), 1, DiagnosticKind.SYNTAX,
                    "missing '#' separator between nodes and edges",
                )
            ]
        )
    arguments: List[str] = []
    seen = set()
    for lineno, raw in enumerate(lines[:sep_index], start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        if not NAME_RE.fullmatch(stripped):
            diags.append(
                ParseDiagnostic(
                    lineno, col, DiagnosticKind.SYNTAX,
                    f"invalid node id {stripped!r}",
                )
            )
            continue
        if stripped in seen:
            diags.append(
                ParseDiagnostic(
                    lineno, col, DiagnosticKind.DUPLICATE_ARGUMENT,
                    f"node {stripped!r} declared twice",
                )
            )
            continue
        seen.add(stripped)
        arguments.append(stripped)
    attacks: List[Tuple[str, str]] = []
    for lineno, raw in enumerate(lines[sep_index + 1 :], start=sep_index + 2):
        stripped = raw.strip()
        if not stripped:
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        parts = stripped.split()
        if len(parts) != 2 or not all(NAME_RE.fullmatch(p) for p in parts):
            diags.append(
                ParseDiagnostic(
                    lineno, col, DiagnosticKind.SYNTAX,
                    f"expected 'attacker target', got {stripped!r}",
                )
            )
            continue
        src, dst = parts
        ok = True
        for name in parts:
            if name not in seen:
                diags.append(
                    ParseDiagnostic(
                        lineno, raw.find(name) + 1, DiagnosticKind.UNKNOWN_ARGUMENT,
                        f"edge references undeclared node {name!r}",
                    )
                )
                ok = False
        if ok:
            attacks.append((src, dst))
    if diags:
        raise ParseError(diags)
    return ArgumentationFramework(arguments, attacks)


def _canonical_attacks(af: ArgumentationFramework) -> List[Tuple[str, str]]:
    pairs = sorted(af.attack_ids)
    return [(af.name_of(s), af.name_of(t)) for s, t in pairs]


def serialize_apx(af: ArgumentationFramework) -> str:
    lines = [f"arg({name})." for name in af.arguments]
    lines += [f"att({src},{dst})." for src, dst in _canonical_attacks(af)]
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_tgf(af: ArgumentationFramework) -> str:
    lines = list(af.arguments)
    lines.append("#")
    lines += [f"{src} {dst}" for src, dst in _canonical_attacks(af)]
    return "\n".join(lines) + "\n"


def dump_sidecar(mapping: Dict[str, str]) -> str:
    """Serialize the synthetic-name -> full-text mapping as a JSON object."""
    return json.dumps(mapping, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def load_sidecar(text: str) -> Dict[str, str]:
    data = json.loads(text)
    if not isinstance(data, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in data.items()
    ):
        raise ValueError("sidecar must be a JSON object mapping names to texts")
    return data
