"""Problem files: a sectioned, line-oriented text format.

    # comment
    [alphabet]
    names = e1 e2 e3
    [endomorphism]
    e1 = "e2"
    e2 = "e2^-1 e3 e2"
    e3 = "e2 e1^-1 e2"
    [subgroup]
    g1 = "t"
    g2 = "e3^-1 e1"
    [options]
    depth = 8
    trace = true

Errors carry 1-based line and column numbers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from mtorus.freegroup import Alphabet, Endo, Word, WordSyntaxError, parse_tokens
from mtorus.torus import TorusWord, parse_torus

SECTIONS = ("alphabet", "endomorphism", "subgroup", "options")
OPTION_KEYS = {"depth", "trace", "jobs"}

_SECTION = re.compile(r"\[\s*([A-Za-z_]+)\s*\]\s*\Z")
_KEY = re.compile(r"([A-Za-z][A-Za-z0-9_]*)\s*=\s*")


class ProblemError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1, source: str = "<problem>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column


@dataclass
class Problem:
    alphabet: Alphabet
    phi: Endo
    subgroup: list[TorusWord] = field(default_factory=list)
    subgroup_names: list[str] = field(default_factory=list)
    depth: Optional[int] = None
    trace: bool = False
    jobs: Optional[int] = None


@dataclass
class _Entry:
    key: str
    value: str
    line: int
    key_col: int
    value_col: int  # column of the first character inside the quotes, or of the bare value


def _split_lines(text: str, source: str) -> dict[str, list[_Entry]]:
    sections: dict[str, list[_Entry]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip())
        m = _SECTION.match(stripped)
        if m:
            name = m.group(1).lower()
            if name not in SECTIONS:
                raise ProblemError(f"unknown section [{name}]", lineno, indent + 1, source)
            if name in sections:
                raise ProblemError(f"duplicate section [{name}]", lineno, indent + 1, source)
            sections[name] = []
            current = name
            continue
        if current is None:
            raise ProblemError("entry outside any section", lineno, indent + 1, source)
        m = _KEY.match(stripped)
        if not m:
            raise ProblemError("expected 'key = value'", lineno, indent + 1, source)
        rest = stripped[m.end():]
        col = indent + m.end() + 1
        if rest.startswith('"'):
            end = rest.find('"', 1)
            if end < 0:
                raise ProblemError("unterminated string", lineno, col, source)
            tail = rest[end + 1:].strip()
            if tail and not tail.startswith("#"):
                raise ProblemError("unexpected text after string", lineno, col + end + 1, source)
            value, vcol = rest[1:end], col + 1
        else:
            value, vcol = rest.split("#", 1)[0].rstrip(), col
        if any(e.key == m.group(1) for e in sections[current]):
            raise ProblemError(f"duplicate key {m.group(1)!r}", lineno, indent + 1, source)
        sections[current].append(_Entry(m.group(1), value, lineno, indent + 1, vcol))
    return sections


def parse_problem(text: str, source: str = "<problem>", need_subgroup: bool = True) -> Problem:
    sections = _split_lines(text, source)
    if "alphabet" not in sections:
        raise ProblemError("missing [alphabet] section", 1, 1, source)
    names_entry = next((e for e in sections["alphabet"] if e.key == "names"), None)
    if names_entry is None:
        raise ProblemError("[alphabet] needs a 'names = ...' entry", 1, 1, source)
    for e in sections["alphabet"]:
        if e.key != "names":
            raise ProblemError(f"unknown key {e.key!r} in [alphabet]", e.line, e.key_col, source)
    try:
        alphabet = Alphabet(names_entry.value.split())
    except ValueError as exc:
        raise ProblemError(str(exc), names_entry.line, names_entry.value_col, source) from None
    if alphabet.rank == 0:
        raise ProblemError("empty alphabet", names_entry.line, names_entry.value_col, source)

    if "endomorphism" not in sections:
        raise ProblemError("missing [endomorphism] section", 1, 1, source)
    images: dict[str, Word] = {}
    for e in sections["endomorphism"]:
        if e.key not in alphabet:
            raise ProblemError(f"{e.key!r} is not a generator", e.line, e.key_col, source)
        images[e.key] = Word(_parse(lambda s: parse_tokens(s, alphabet._index), e, source))
    missing = [n for n in alphabet.names if n not in images]
    if missing:
        raise ProblemError(f"no image given for {', '.join(missing)}", sections_line(sections, "endomorphism"), 1,
                           source)
    phi = Endo(tuple(images[n] for n in alphabet.names))

    problem = Problem(alphabet, phi)
    for e in sections.get("subgroup", []):
        problem.subgroup.append(_parse(lambda s: parse_torus(s, alphabet), e, source))
        problem.subgroup_names.append(e.key)
    if need_subgroup and not problem.subgroup:
        raise ProblemError("empty [subgroup] section", sections_line(sections, "subgroup"), 1, source)

    for e in sections.get("options", []):
        if e.key not in OPTION_KEYS:
            raise ProblemError(f"unknown option {e.key!r}", e.line, e.key_col, source)
        if e.key == "trace":
            if e.value.lower() not in ("true", "false"):
                raise ProblemError("trace must be true or false", e.line, e.value_col, source)
            problem.trace = e.value.lower() == "true"
        else:
            try:
                n = int(e.value)
            except ValueError:
                raise ProblemError(f"{e.key} must be an integer", e.line, e.value_col, source) from None
            if n < 1:
                raise ProblemError(f"{e.key} must be at least 1", e.line, e.value_col, source)
            setattr(problem, e.key, n)
    return problem


def sections_line(sections: dict[str, list[_Entry]], name: str) -> int:
    entries = sections.get(name) or []
    return entries[0].line if entries else 1


def _parse(fn, entry: _Entry, source: str):
    try:
        return fn(entry.value)
    except WordSyntaxError as exc:
        raise ProblemError(str(exc), entry.line, entry.value_col + exc.column, source) from None
