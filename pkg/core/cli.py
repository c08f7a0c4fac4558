# core/cli.py
"""
Command-line front end: one subcommand per pipeline stage.

    enhance   basic trees -> enhanced graphs by heuristic rules
    decode    edge probabilities -> enhanced graphs
    connect   repair fragmented graphs
    ensemble  combine basic-tree predictions
    evaluate  ELAS / EULAS of a system file against gold
    validate  CoNLL-U well-formedness plus full reachability
    pipeline  (enhance | decode) -> connect -> evaluate

Inputs and outputs default to stdin / stdout. Exit codes:
0 success, 1 usage, 2 input format error, 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

from core.config import STRATEGIES, ToolkitConfig, get_default_config
from core.conllu import Sentence, read_conllu, serialize_document, write_conllu
from core.enhancer import RuleSet, best_rule_subset, enhance_document
from core.errors import EudkitError, StageError, UsageError
from core.eud_graph import from_sentence, reachability
from core.eval_elas import ElasReport, LabelMode, report_to_dict, score
from core.graph_connect import connect_document
from core.sdp_decode import decode_document, load_probabilities
from core.tree_ensemble import EnsembleInput, combine

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("enhance", "decode", "connect", "ensemble", "evaluate", "validate", "pipeline")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
STDIO = "-"


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; usage errors exit 1 here."""

    def error(self, message):
        raise UsageError(message)


# ============================================================
# Command config
# ============================================================

@dataclass(frozen=True)
class CommandConfig:
    subcommand: str
    inputs: Tuple[str, ...] = ()
    output: str = STDIO
    rules: str = "none"
    gold: Optional[str] = None
    probs: Optional[str] = None
    weights: Optional[Tuple[float, ...]] = None
    json: bool = False
    toolkit: ToolkitConfig = field(default_factory=get_default_config)

    @property
    def label_mode(self) -> LabelMode:
        return LabelMode(self.toolkit.label_mode)

    def input_paths(self) -> List[str]:
        paths = list(self.inputs)
        paths += [p for p in (self.gold, self.probs) if p is not None]
        return paths

    def validate(self) -> None:
        """Raise UsageError before any file is read or written."""
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")

        if self.rules != "auto":
            try:
                RuleSet.parse(self.rules)
            except ValueError as e:
                raise UsageError(f"--rules: {e}") from None
        elif self.gold is None:
            raise UsageError("--rules=auto needs --gold")

        if self.subcommand == "decode" and self.probs is None:
            raise UsageError("decode needs --probs")
        if self.subcommand == "pipeline" and self.gold is None:
            raise UsageError("pipeline needs --gold")
        if self.weights is not None:
            if len(self.weights) != len(self.inputs):
                raise UsageError(f"{len(self.weights)} weights for {len(self.inputs)} input files")
            if any(not w > 0 for w in self.weights):
                raise UsageError("--weights must be positive")

        paths = self.input_paths()
        if paths.count(STDIO) > 1:
            raise UsageError("only one input may be read from stdin")
        for p in paths:
            if p != STDIO and not Path(p).is_file():
                raise UsageError(f"no such file: {p}")
        if self.output != STDIO:
            out = Path(self.output).resolve()
            if any(p != STDIO and Path(p).resolve() == out for p in paths):
                raise UsageError(f"output {self.output} would overwrite an input")


def _parse_weights(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(w) for w in text.split(","))
    except ValueError:
        raise UsageError(f"--weights: not a comma list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    defaults = get_default_config()

    common = _ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=STDIO, help="output file (default: stdout)")
    common.add_argument("--log-level", default="WARNING", choices=LOG_LEVELS)

    parser = _ArgumentParser(prog="eudkit", description="Enhanced UD toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("enhance", parents=[common], help="heuristic enhancement of basic trees")
    p.add_argument("input", nargs="?", default=STDIO)
    p.add_argument("--rules", default="none", help='comma list of rules, "none" or "auto"')
    p.add_argument("--gold", help="gold development file for --rules=auto")

    p = sub.add_parser("decode", parents=[common], help="decode edge probabilities")
    p.add_argument("input", nargs="?", default=STDIO, help="CoNLL-U file supplying the tokens")
    p.add_argument("--probs", required=True, help="JSON-lines probability records")
    p.add_argument("--threshold", type=float, default=defaults.threshold)

    p = sub.add_parser("connect", parents=[common], help="make every node reachable from ROOT")
    p.add_argument("input", nargs="?", default=STDIO)
    p.add_argument("--strategy", choices=STRATEGIES, default=defaults.strategy)
    p.add_argument("--max-nodes", type=int, default=defaults.oracle_max_nodes)

    p = sub.add_parser("ensemble", parents=[common], help="combine basic-tree predictions")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--weights", type=_parse_weights)

    p = sub.add_parser("evaluate", parents=[common], help="ELAS of system against gold")
    p.add_argument("gold_file")
    p.add_argument("system", nargs="?", default=STDIO)
    p.add_argument("--coarse", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("validate", parents=[common], help="check format and reachability")
    p.add_argument("input", nargs="?", default=STDIO)

    p = sub.add_parser("pipeline", parents=[common], help="enhance or decode, connect, evaluate")
    p.add_argument("input", nargs="?", default=STDIO)
    p.add_argument("--gold", required=True)
    p.add_argument("--probs")
    p.add_argument("--rules", default="none")
    p.add_argument("--threshold", type=float, default=defaults.threshold)
    p.add_argument("--strategy", choices=STRATEGIES, default=defaults.strategy)
    p.add_argument("--max-nodes", type=int, default=defaults.oracle_max_nodes)
    p.add_argument("--coarse", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--repaired", help="also write the repaired CoNLL-U here")
    return parser


def config_from_args(args: argparse.Namespace) -> CommandConfig:
    toolkit = get_default_config()
    overrides = {}
    for attr, key in (("threshold", "threshold"), ("strategy", "strategy"), ("max_nodes", "oracle_max_nodes")):
        if getattr(args, attr, None) is not None:
            overrides[key] = getattr(args, attr)
    if getattr(args, "coarse", False):
        overrides["label_mode"] = LabelMode.COARSE.value
    try:
        toolkit = replace(toolkit, **overrides)
    except ValueError as e:
        raise UsageError(str(e)) from None

    if args.subcommand == "ensemble":
        inputs = tuple(args.inputs)
    elif args.subcommand == "evaluate":
        inputs = (args.system,)
    else:
        inputs = (args.input,)

    gold = getattr(args, "gold", None)
    if args.subcommand == "evaluate":
        gold = args.gold_file

    extra_outputs = getattr(args, "repaired", None)
    cfg = CommandConfig(
        subcommand=args.subcommand,
        inputs=inputs,
        output=args.output,
        rules=getattr(args, "rules", "none"),
        gold=gold,
        probs=getattr(args, "probs", None),
        weights=getattr(args, "weights", None),
        json=getattr(args, "json", False),
        toolkit=toolkit,
    )
    cfg.validate()
    if extra_outputs is not None:
        replace(cfg, output=extra_outputs).validate()
    return cfg


# ============================================================
# Stages
# ============================================================

@contextlib.contextmanager
def stage(name: str) -> Iterator[None]:
    try:
        yield
    except StageError:
        raise
    except EudkitError as e:
        raise StageError(name, e) from e


def _read(path: str) -> List[Sentence]:
    with stage(f"read {path}"):
        return read_conllu(path)


def _read_text(path: str) -> bytes:
    if path == STDIO:
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _emit_text(text: str, path: str) -> None:
    if path == STDIO:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _enhance(cfg: CommandConfig, sentences: List[Sentence]) -> List[Sentence]:
    with stage("enhance"):
        if cfg.rules == "auto":
            rules, _ = best_rule_subset(_read(cfg.gold), sentences)
        else:
            rules = RuleSet.parse(cfg.rules)
        logger.info("[CLI] enhancing with rules %s", rules)
        return enhance_document(sentences, rules)


def _decode(cfg: CommandConfig, templates: List[Sentence]) -> List[Sentence]:
    with stage("decode"):
        probs = load_probabilities(_read_text(cfg.probs))
        return decode_document(probs, templates, cfg.toolkit.threshold)


def _connect(cfg: CommandConfig, sentences: List[Sentence]) -> List[Sentence]:
    with stage("connect"):
        repaired, _ = connect_document(
            sentences, cfg.toolkit.strategy, cfg.toolkit.oracle_max_nodes
        )
        return repaired


def _evaluate(cfg: CommandConfig, gold: List[Sentence], system: List[Sentence]) -> ElasReport:
    with stage("evaluate"):
        return score(gold, system, cfg.label_mode)


def format_report(report: ElasReport, as_json: bool) -> str:
    if as_json:
        return json.dumps(report_to_dict(report), sort_keys=True) + "\n"
    return (
        f"ELAS ({report.mode.value}) tp {report.tp} fp {report.fp} fn {report.fn}\n"
        f"P {report.precision:.2f} R {report.recall:.2f} F1 {report.f1:.2f}\n"
    )


def validate_document(sentences: Sequence[Sentence]) -> Optional[str]:
    """First reachability violation as a message, or None."""
    for i, s in enumerate(sentences, start=1):
        with stage("validate"):
            report = reachability(from_sentence(s))
        if not report.is_connected:
            where = f" ({s.sent_id})" if s.sent_id else ""
            nodes = ", ".join(str(n) for n in sorted(report.unreachable))
            return f"sentence {i}{where}: nodes {nodes} are not reachable from ROOT"
    return None


def execute(cfg: CommandConfig, repaired_path: Optional[str] = None) -> int:
    cmd = cfg.subcommand

    if cmd == "enhance":
        write_conllu(_enhance(cfg, _read(cfg.inputs[0])), cfg.output)
    elif cmd == "decode":
        write_conllu(_decode(cfg, _read(cfg.inputs[0])), cfg.output)
    elif cmd == "connect":
        write_conllu(_connect(cfg, _read(cfg.inputs[0])), cfg.output)
    elif cmd == "ensemble":
        members = [_read(p) for p in cfg.inputs]
        with stage("ensemble"):
            combined = combine(EnsembleInput(tuple(tuple(m) for m in members), cfg.weights))
        write_conllu(combined, cfg.output)
    elif cmd == "evaluate":
        gold, system = _read(cfg.gold), _read(cfg.inputs[0])
        _emit_text(format_report(_evaluate(cfg, gold, system), cfg.json), cfg.output)
    elif cmd == "validate":
        sentences = _read(cfg.inputs[0])
        problem = validate_document(sentences)
        if problem is not None:
            print(f"eudkit: invalid: {problem}", file=sys.stderr)
            return 2
        _emit_text(f"valid: {len(sentences)} sentences\n", cfg.output)
    elif cmd == "pipeline":
        base = _read(cfg.inputs[0])
        gold = _read(cfg.gold)
        graphs = _decode(cfg, base) if cfg.probs is not None else _enhance(cfg, base)
        repaired = _connect(cfg, graphs)
        report = _evaluate(cfg, gold, repaired)
        if repaired_path is not None:
            with stage("write"):
                _emit_text(serialize_document(repaired), repaired_path)
        _emit_text(format_report(report, cfg.json), cfg.output)
    return 0


def _configure_logging(level: str) -> None:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s %(message)s")
    logging.getLogger("core").setLevel(getattr(logging, level))


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        _configure_logging(args.log_level)
        cfg = config_from_args(args)
        return execute(cfg, getattr(args, "repaired", None))
    except UsageError as e:
        print(f"eudkit: error: {e}", file=sys.stderr)
        return UsageError.exit_code
    except EudkitError as e:
        print(f"eudkit: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"eudkit: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
