"""Command-line front end.

Exit codes: 0 yes/success, 1 no, 2 input or validation error, 3 resource cap
exceeded, 4 the ``--oracle-check`` cross-check disagreed with the main route.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .characterization import (
    CharacterizationError,
    CharacterizationMode,
    NoSoundCharacterization,
    exists_perfect,
    max_sound,
    min_complete,
    semantic_existence_test,
)
from .chase import CHASE_CAP_ENV, ChaseLimitError
from .model import Dataset, ObdmSystem, QueryError, UnionQuery, make_system, validate_system
from .reductions import GraphError, gen_coloring_instance, gen_odd_clique_instance
from .rewriting import DEFAULT_TUPLE_CAP, TupleLimitError, certain_answers, is_consistent
from .syntax import (
    ParseError,
    parse_database,
    parse_dataset,
    parse_graph,
    parse_mapping,
    parse_ontology,
    parse_ucq,
    serialize_database,
    serialize_dataset,
    serialize_mapping,
    serialize_ontology,
    serialize_ucq,
)

EXIT_YES = 0
EXIT_NO = 1
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_DIVERGENCE = 4


@dataclass(frozen=True)
class CommandResult:
    exit_code: int
    output: str = ""
    error: str = ""


class InputError(Exception):
    pass


class Divergence(Exception):
    pass


def _read(path: Optional[str], what: str) -> str:
    if path is None:
        raise InputError(f"missing {what} file")
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read {what} file {path}: {e}") from None


def _parse(path: str, what: str, parser, *args):
    text = _read(path, what)
    try:
        return parser(text, *args)
    except ParseError as e:
        raise InputError(f"{path}: {e}") from None


def load_system(args) -> ObdmSystem:
    mapping = _parse(args.mapping, "mapping", parse_mapping)
    onto_sig = {a.predicate for m in mapping for a in m.target.body}
    if args.ontology is None:
        ontology = None
    else:
        ontology = _parse(args.ontology, "ontology", lambda t: parse_ontology(t, signature=onto_sig))
    schema = {a.predicate for m in mapping for a in m.source.body}
    db = _parse(args.database, "database", lambda t: parse_database(t, schema))
    system = make_system(ontology, mapping, db.facts, schema=db.schema)
    problems = validate_system(system)
    if problems:
        raise InputError("\n".join(str(v) for v in problems))
    return system


def load_dataset(args, system: ObdmSystem) -> Dataset:
    dataset = _parse(args.dataset, "dataset", parse_dataset)
    problems = validate_system(system, dataset)
    if problems:
        raise InputError("\n".join(str(v) for v in problems))
    return dataset


def load_query(args, system: ObdmSystem) -> UnionQuery:
    return _parse(args.query, "query", lambda t: parse_ucq(t, system.ontology.signature))


def _rows(rows) -> str:
    return " ".join(f"({','.join(t.name for t in r)})" for r in sorted(rows, key=lambda r: tuple(t.sort_key() for t in r)))


def _cert(system: ObdmSystem, q: UnionQuery, args) -> set:
    cert = certain_answers(system, q, args.tuple_cap)
    if args.oracle_check:
        for method in ("chase", "oracle"):
            other = certain_answers(system, q, args.tuple_cap, method=method, depth=args.depth)
            if other != cert:
                raise Divergence(
                    f"{method} route disagrees: only rewriting {_rows(cert - other) or '-'}, "
                    f"only {method} {_rows(other - cert) or '-'}"
                )
    return cert


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_consistency(args) -> CommandResult:
    if is_consistent(load_system(args)):
        return CommandResult(EXIT_YES, "consistent\n")
    return CommandResult(EXIT_NO, "inconsistent\n")


def cmd_cert(args) -> CommandResult:
    system = load_system(args)
    q = load_query(args, system)
    cert = _cert(system, q, args)
    return CommandResult(EXIT_YES, serialize_dataset(Dataset(q.arity, frozenset(cert))))


def cmd_verify(args) -> CommandResult:
    system = load_system(args)
    dataset = load_dataset(args, system)
    q = load_query(args, system)
    if q.arity != dataset.arity:
        raise InputError(f"query arity {q.arity} differs from dataset arity {dataset.arity}")
    mode = CharacterizationMode(args.mode)
    cert = _cert(system, q, args)
    lam = set(dataset.tuples)
    missing = lam - cert if mode is not CharacterizationMode.SOUND else set()
    extra = cert - lam if mode is not CharacterizationMode.COMPLETE else set()
    lines = []
    if missing:
        lines.append(f"missing: {_rows(missing)}")
    if extra:
        lines.append(f"extra: {_rows(extra)}")
    ok = not missing and not extra
    return CommandResult(EXIT_YES if ok else EXIT_NO, "\n".join(["yes" if ok else "no"] + lines) + "\n")


def _check_existence(system: ObdmSystem, dataset: Dataset, exists: bool, args):
    if args.oracle_check and is_consistent(system):
        semantic = semantic_existence_test(system, dataset, args.tuple_cap, args.depth)
        if semantic != exists:
            raise Divergence(f"semantic test says {'yes' if semantic else 'no'}, rewriting route says {'yes' if exists else 'no'}")


def _write_query(args, q: UnionQuery) -> str:
    text = serialize_ucq(q) + "\n"
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot write {args.output}: {e}") from None
    return text


def cmd_characterize(args) -> CommandResult:
    system = load_system(args)
    dataset = load_dataset(args, system)
    if args.mode == "min-complete":
        q = min_complete(system, dataset)
    elif args.mode == "max-sound":
        try:
            q = max_sound(system, dataset, args.tuple_cap)
        except NoSoundCharacterization as e:
            return CommandResult(EXIT_NO, f"no\n{e}\n")
    else:
        answer = exists_perfect(system, dataset, args.tuple_cap)
        _check_existence(system, dataset, answer.exists, args)
        if not answer.exists:
            return CommandResult(EXIT_NO, "no\n")
        q = answer.witness
    if args.oracle_check:
        _cert(system, q, args)
    return CommandResult(EXIT_YES, _write_query(args, q))


def cmd_exists(args) -> CommandResult:
    system = load_system(args)
    dataset = load_dataset(args, system)
    answer = exists_perfect(system, dataset, args.tuple_cap)
    _check_existence(system, dataset, answer.exists, args)
    if answer.exists:
        return CommandResult(EXIT_YES, "yes\n" + serialize_ucq(answer.witness) + "\n")
    detail = ""
    if is_consistent(system):
        candidate = min_complete(system, dataset)
        extra = certain_answers(system, candidate, args.tuple_cap) - set(dataset.tuples)
        detail = f"extra: {_rows(extra)}\n"
    return CommandResult(EXIT_NO, "no\n" + detail)


def _write_files(out_dir: str, files: dict) -> str:
    root = Path(out_dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (root / name).write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write to {out_dir}: {e}") from None
    return "".join(f"{root / name}\n" for name in files)


def _system_files(system: ObdmSystem, dataset: Dataset) -> dict:
    return {
        "system.onto": serialize_ontology(system.ontology),
        "system.map": serialize_mapping(system.mapping),
        "system.db": serialize_database(system.database),
        "lambda.set": serialize_dataset(dataset),
    }


def cmd_gen(args) -> CommandResult:
    g = _parse(args.graph, "graph", parse_graph)
    try:
        if args.kind == "coloring":
            system, dataset, q = gen_coloring_instance(g)
            files = _system_files(system, dataset)
            files["query.ucq"] = serialize_ucq(q) + "\n"
        else:
            system, dataset = gen_odd_clique_instance(g)
            files = _system_files(system, dataset)
    except GraphError as e:
        raise InputError(str(e)) from None
    return CommandResult(EXIT_YES, _write_files(args.out_dir, files))


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def _nonnegative(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("-O", "--ontology", help="ontology file (empty ontology when omitted)")
    common.add_argument("-M", "--mapping", required=True, help="mapping file")
    common.add_argument("-D", "--database", required=True, help="source database file")
    common.add_argument("--chase-cap", type=_nonnegative, help=f"atom cap for chases (also {CHASE_CAP_ENV})")
    common.add_argument("--tuple-cap", type=_nonnegative, default=DEFAULT_TUPLE_CAP, help="cap on |dom(D)|^n")
    common.add_argument("--oracle-check", action="store_true", help="cross-check against the chase routes")
    common.add_argument("--depth", type=_nonnegative, help="oracle chase depth override")

    parser = _ArgumentParser(prog="qdef", description="Ontological characterizations of datasets over OBDM systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("consistency", parents=[common], help="is the system consistent")
    p.set_defaults(run=cmd_consistency)

    p = sub.add_parser("cert", parents=[common], help="certain answers of a UCQ")
    p.add_argument("-q", "--query", required=True)
    p.set_defaults(run=cmd_cert)

    p = sub.add_parser("verify", parents=[common], help="check a UCQ against a dataset")
    p.add_argument("--mode", required=True, choices=[m.value for m in CharacterizationMode])
    p.add_argument("-q", "--query", required=True)
    p.add_argument("-L", "--dataset", required=True)
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("characterize", parents=[common], help="compute a characterization")
    p.add_argument("--mode", required=True, choices=["min-complete", "max-sound", "perfect"])
    p.add_argument("-L", "--dataset", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_characterize)

    p = sub.add_parser("exists", parents=[common], help="does a perfect characterization exist")
    p.add_argument("-L", "--dataset", required=True)
    p.set_defaults(run=cmd_exists)

    p = sub.add_parser("gen", help="generate reduction instances from a graph")
    p.add_argument("kind", choices=["coloring", "odd-clique"])
    p.add_argument("-G", "--graph", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(run=cmd_gen)
    return parser


@contextlib.contextmanager
def _chase_cap(cap: Optional[int]) -> Iterator[None]:
    if cap is None:
        yield
        return
    old = os.environ.get(CHASE_CAP_ENV)
    os.environ[CHASE_CAP_ENV] = str(cap)
    try:
        yield
    finally:
        if old is None:
            del os.environ[CHASE_CAP_ENV]
        else:
            os.environ[CHASE_CAP_ENV] = old


def run_command(argv: Sequence[str]) -> CommandResult:
    try:
        args = build_parser().parse_args(list(argv))
        with _chase_cap(getattr(args, "chase_cap", None)):
            return args.run(args)
    except InputError as e:
        return CommandResult(EXIT_INPUT, error=f"error: {e}\n")
    except (CharacterizationError, QueryError, ValueError) as e:
        return CommandResult(EXIT_INPUT, error=f"error: {e}\n")
    except (ChaseLimitError, TupleLimitError) as e:
        return CommandResult(EXIT_CAP, error=f"cap exceeded: {e}\n")
    except Divergence as e:
        return CommandResult(EXIT_DIVERGENCE, error=f"oracle check failed: {e}\n")
    except RecursionError:
        return CommandResult(EXIT_CAP, error="cap exceeded: recursion limit\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if any(a in ("-h", "--help") for a in argv):
        try:
            build_parser().parse_args(list(argv))
        except SystemExit as e:
            return int(e.code or 0)
    result = run_command(argv)
    sys.stdout.write(result.output)
    sys.stderr.write(result.error)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
