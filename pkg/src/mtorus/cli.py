"""Command line front end.

    mtorus fold WORD ... [--alphabet NAMES] [--words-file F] [--dot-dir D] [--machine]
    mtorus present PROBLEM [--depth D] [--jobs N] [--dot-dir D] [--machine] [-o DOC]
    mtorus verify DOC PROBLEM
    mtorus normalize PROBLEM WORD ...
    mtorus reduce PROBLEM [--machine]

Exit status: 0 success, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

from mtorus.freegroup import Alphabet, Endo, WordSyntaxError, format_tokens
from mtorus.graph import basis, bouquet, rank, tighten_graph, to_dot
from mtorus.pair import pair_to_dot
from mtorus.presentation import (DEFAULT_DEPTH, Presentation, format_human, present_subgroup, presentation_from_dict,
                                 presentation_to_dict, verify_presentation)
from mtorus.problem import Problem, ProblemError, parse_problem
from mtorus.torus import FreeCase, SubgroupReduction, TCase, format_torus, normalize, parse_torus, reduce_subgroup

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _natural_key(name: str):
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name)]


def _load_problem(path: str, need_subgroup: bool = True) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return parse_problem(text, source=path, need_subgroup=need_subgroup)
    except ProblemError as exc:
        raise InputError(str(exc)) from None


def _require_injective(problem: Problem) -> None:
    if not problem.phi.injective:
        raise InputError("endomorphism is not injective; refusing to build the mapping torus")


def _endo_dict(phi: Endo, names: Sequence[str]) -> dict:
    return {n: format_tokens(w, names) for n, w in zip(names, phi.images)}


def _reduction_dict(red: SubgroupReduction, names: Sequence[str]) -> dict:
    if isinstance(red, FreeCase):
        return {"case": "free", "k": red.k, "basis": [format_tokens(w, names) for w in red.basis]}
    return {"case": "t", "m": red.m, "p": red.p, "b": format_tokens(red.b, names),
            "theta": _endo_dict(red.theta, names), "bezout": list(red.bezout),
            "rewritten": [format_torus(w, names, "s") for w in red.rewritten]}


def _is_trivial(red: TCase) -> bool:
    return red.m == 1 and red.p == 0 and not red.b


def _reduction_lines(red: SubgroupReduction, names: Sequence[str]) -> list[str]:
    if isinstance(red, FreeCase):
        lines = [f"free case: every generator has zero t-exponent; conjugating by t^{red.k} lands in the free group",
                 f"free basis ({len(red.basis)}):"]
        lines += [f"  {format_tokens(w, names)}" for w in red.basis]
        return lines
    lines = [f"t case: m = {red.m}, p = {red.p}, b = {format_tokens(red.b, names)}",
             f"bezout coefficients: {' '.join(map(str, red.bezout))}",
             "theta: " + ", ".join(f"{n} -> {format_tokens(w, names)}" for n, w in zip(names, red.theta.images)),
             "rewritten generators (stable letter s):"]
    lines += [f"  {format_torus(w, names, 's')}" for w in red.rewritten]
    return lines


def _target(problem: Problem, red: TCase):
    """Endomorphism, generators and stable letter name the presentation is built over."""
    if _is_trivial(red):
        return problem.phi, list(problem.subgroup), "t"
    return red.theta, list(red.rewritten), "s"


def _write_dots(dot_dir: Optional[str], graphs) -> None:
    if dot_dir is None:
        return
    d = Path(dot_dir)
    d.mkdir(parents=True, exist_ok=True)
    for i, text in enumerate(graphs):
        (d / f"step_{i:04d}.dot").write_text(text)


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False)


# -- fold ----------------------------------------------------------------------

def cmd_fold(args) -> int:
    raw = list(args.words)
    if args.words_file:
        try:
            lines = Path(args.words_file).read_text().splitlines()
        except OSError as exc:
            raise InputError(f"{args.words_file}: {exc.strerror}") from None
        raw += [ln for ln in lines]
        sources = [("<arg>", i + 1) for i in range(len(args.words))] + \
                  [(args.words_file, i + 1) for i in range(len(lines))]
    else:
        sources = [("<arg>", i + 1) for i in range(len(raw))]
    if args.alphabet is not None:
        try:
            alphabet = Alphabet(args.alphabet.replace(",", " ").split())
        except ValueError as exc:
            raise InputError(str(exc)) from None
    else:
        found = set()
        for text in raw:
            for tok in text.split():
                name = tok[:-3] if tok.endswith("^-1") else tok
                if re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
                    found.add(name)
        try:
            alphabet = Alphabet(sorted(found, key=_natural_key))
        except ValueError as exc:
            raise InputError(str(exc)) from None
    words = []
    for text, (src, line) in zip(raw, sources):
        if not text.strip() or text.strip().startswith("#"):
            continue
        try:
            w = alphabet.parse(text)
        except WordSyntaxError as exc:
            raise InputError(f"{src}:{line}:{exc.column + 1}: {exc}") from None
        if w:
            words.append(w)
    g = bouquet(words)
    tight, trace = tighten_graph(g)
    names = alphabet.names
    b = basis(tight)
    if args.dot_dir:
        _write_dots(args.dot_dir, (to_dot(h, names=names, title=f"step_{i:04d}")
                                   for i, h in enumerate(trace.replay(g))))
    if args.machine:
        print(_dump({"alphabet": list(names), "rank": rank(tight), "basis": [format_tokens(w, names) for w in b],
                     "folds": [str(r) for r in trace]}))
        return EXIT_OK
    print(f"rank {rank(tight)}")
    print(f"basis ({len(b)}):")
    for w in b:
        print(f"  {format_tokens(w, names)}")
    print(f"folds: {len(trace)}")
    for r in trace:
        print(f"  {r}")
    return EXIT_OK


# -- present -------------------------------------------------------------------

def _present_document(problem: Problem, red: SubgroupReduction, pres: Optional[Presentation], stable: str) -> dict:
    names = problem.alphabet.names
    doc = {"alphabet": list(names), "stable_letter": stable, "endomorphism": _endo_dict(problem.phi, names),
           "reduction": _reduction_dict(red, names)}
    if pres is not None:
        doc.update(presentation_to_dict(pres, names, stable))
    return doc


def cmd_present(args) -> int:
    problem = _load_problem(args.problem)
    _require_injective(problem)
    depth = args.depth if args.depth is not None else (problem.depth or DEFAULT_DEPTH)
    jobs = args.jobs if args.jobs is not None else (problem.jobs or 1)
    if depth < 1:
        raise InputError("--depth must be at least 1")
    names = problem.alphabet.names
    try:
        red = reduce_subgroup(problem.subgroup, problem.phi)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if isinstance(red, FreeCase):
        doc = _present_document(problem, red, None, "t")
        _emit(args, doc, _reduction_lines(red, names))
        return EXIT_OK
    theta, gens, stable = _target(problem, red)
    pres = present_subgroup(gens, theta, depth, jobs)
    report = verify_presentation(pres, theta)
    if args.dot_dir:
        pairs = [pres.traces[0].start] + [s.pair for tr in pres.traces for s in tr.steps]
        _write_dots(args.dot_dir, (pair_to_dot(p, names, f"step_{i:04d}") for i, p in enumerate(pairs)))
    doc = _present_document(problem, red, pres, stable)
    lines = []
    if not _is_trivial(red):
        lines += _reduction_lines(red, names) + [""]
    lines.append(format_human(pres, names, stable))
    lines.append(f"restarts: {pres.restart_count} (initial relative rank {pres.initial_rr})")
    if problem.trace or args.trace:
        for k, tr in enumerate(pres.traces):
            lines.append(f"trace {k}:")
            lines += ["  " + s.describe(names) for s in tr.steps]
    lines += report.lines()
    lines += ["  " + d for d in report.details]
    _emit(args, doc, lines)
    return EXIT_OK if report.passed else EXIT_FAIL


def _emit(args, doc: dict, lines: list[str]) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(_dump(doc) + "\n")
    if args.machine:
        print(_dump(doc))
    else:
        print("\n".join(lines))


# -- verify --------------------------------------------------------------------

def cmd_verify(args) -> int:
    problem = _load_problem(args.problem)
    _require_injective(problem)
    try:
        doc = json.loads(Path(args.document).read_text())
    except OSError as exc:
        raise InputError(f"{args.document}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.document}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    names = problem.alphabet.names
    if doc.get("alphabet") != list(names):
        raise InputError("document alphabet does not match the problem file")
    if doc.get("endomorphism") != _endo_dict(problem.phi, names):
        raise InputError("document endomorphism does not match the problem file")
    try:
        red = reduce_subgroup(problem.subgroup, problem.phi)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if doc.get("reduction") != _reduction_dict(red, names):
        raise InputError("document reduction does not match the problem file")
    if isinstance(red, FreeCase):
        print("free case: nothing to verify beyond the reduction, which matches")
        return EXIT_OK
    theta, _, stable = _target(problem, red)
    if doc.get("stable_letter") != stable:
        raise InputError(f"document stable letter should be {stable!r}")
    try:
        pres = presentation_from_dict(doc, problem.alphabet, stable)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.document}: malformed presentation document ({exc})") from None
    report = verify_presentation(pres, theta)
    for line in report.lines() + ["  " + d for d in report.details]:
        print(line)
    return EXIT_OK if report.passed else EXIT_FAIL


# -- normalize / reduce --------------------------------------------------------

def cmd_normalize(args) -> int:
    problem = _load_problem(args.problem, need_subgroup=False)
    _require_injective(problem)
    names = problem.alphabet.names
    for i, text in enumerate(args.words, start=1):
        try:
            w = parse_torus(text, problem.alphabet)
        except WordSyntaxError as exc:
            raise InputError(f"<arg>:{i}:{exc.column + 1}: {exc}") from None
        print(normalize(w, problem.phi).format(names))
    return EXIT_OK


def cmd_reduce(args) -> int:
    problem = _load_problem(args.problem)
    _require_injective(problem)
    try:
        red = reduce_subgroup(problem.subgroup, problem.phi)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    names = problem.alphabet.names
    if args.machine:
        print(_dump({"alphabet": list(names), "reduction": _reduction_dict(red, names)}))
    else:
        print("\n".join(_reduction_lines(red, names)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtorus",
                                     description="Presentations of subgroups of free-by-cyclic and ascending HNN groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fold", help="fold the bouquet of some words and print a basis")
    p.add_argument("words", nargs="*", help="quoted words, e.g. 'e2 e1 e3'")
    p.add_argument("--words-file", help="file with one word per line")
    p.add_argument("--alphabet", help="generator names in label order (default: natural sort of names used)")
    p.add_argument("--dot-dir", help="write step_####.dot for the bouquet and each fold")
    p.add_argument("--machine", action="store_true", help="print a JSON document")
    p.set_defaults(func=cmd_fold)

    p = sub.add_parser("present", help="compute a presentation for the subgroup in a problem file")
    p.add_argument("problem")
    p.add_argument("--depth", type=int, help=f"certification depth (default {DEFAULT_DEPTH})")
    p.add_argument("--jobs", type=int, help="worker processes for certification levels")
    p.add_argument("--dot-dir", help="write step_####.dot for every pair in the tightening traces")
    p.add_argument("--machine", action="store_true", help="print the JSON document instead of the human form")
    p.add_argument("--trace", action="store_true", help="list every fold of the tightening traces")
    p.add_argument("-o", "--output", help="also write the JSON document to this file")
    p.set_defaults(func=cmd_present)

    p = sub.add_parser("verify", help="check a presentation document against its problem file")
    p.add_argument("document")
    p.add_argument("problem")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("normalize", help="normal forms t^-q x t^r of mapping-torus words")
    p.add_argument("problem")
    p.add_argument("words", nargs="+")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("reduce", help="reduce the subgroup to the free or t-containing case")
    p.add_argument("problem")
    p.add_argument("--machine", action="store_true")
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
