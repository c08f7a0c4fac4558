# core/conllu.py
"""
Lossless CoNLL-U reader / writer.

Keeps comments, multiword-token ranges, empty nodes and the DEPS column.
Types are frozen dataclasses; a parsed document can be shared freely.
Column values go through the `conllu` package parsers; sentence blocks
are split here so that errors carry line numbers and comment lines stay
verbatim.

Canonical order, applied when a Token is built:
  - FEATS sorted case-insensitively by key, "_" when empty
  - DEPS sorted by head (empty node b.s after word b), then by label
"""
from __future__ import annotations

import logging
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from conllu.exceptions import ParseException
from conllu.models import Token as ConlluToken
from conllu.models import TokenList
from conllu.parser import parse_dict_value, parse_id_value, parse_int_value, parse_paired_list_value
from conllu.serializer import serialize_field

from core.errors import ConlluParseError, InvariantViolation

logger = logging.getLogger(__name__)

N_COLUMNS = 10


# ============================================================
# Token identities
# ============================================================

@dataclass(frozen=True)
class Word:
    """Regular word id. ``Word(0)`` only ever appears as a DEPS head (ROOT)."""
    index: int

    def __post_init__(self):
        if int(self.index) < 0:
            raise ValueError(f"word index must be non-negative, got {self.index}")

    def __str__(self) -> str:
        return str(self.index)

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.index, 0)


@dataclass(frozen=True)
class MultiwordRange:
    start: int
    end: int

    def __post_init__(self):
        if not 1 <= int(self.start) < int(self.end):
            raise ValueError(f"malformed multiword range {self.start}-{self.end}")

    def __str__(self) -> str:
        return f"{self.start}-{self.end}"

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.start, -1)


@dataclass(frozen=True)
class Empty:
    base: int
    sub: int

    def __post_init__(self):
        if int(self.base) < 0 or int(self.sub) < 1:
            raise ValueError(f"malformed empty node id {self.base}.{self.sub}")

    def __str__(self) -> str:
        return f"{self.base}.{self.sub}"

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.base, self.sub)


TokenId = Union[Word, MultiwordRange, Empty]
DepsHead = Union[Word, Empty]

ROOT = Word(0)

_CONLLU_ERRORS = (ParseException, ValueError, TypeError, IndexError)


def _from_conllu_id(value) -> TokenId:
    """Map a ``conllu`` id value (int, or (a, "-", b) / (a, ".", b)) onto a TokenId."""
    if isinstance(value, int):
        return Word(value)
    if isinstance(value, tuple) and len(value) == 3:
        first, sep, second = value
        if sep == "-":
            return MultiwordRange(int(first), int(second))
        if sep == ".":
            return Empty(int(first), int(second))
    raise ValueError(f"malformed id {value!r}")


def parse_token_id(text: str) -> TokenId:
    # the conllu id parser has no notion of the DEPS-only ROOT id
    if text == "0":
        return ROOT
    try:
        value = parse_id_value(text)
        tid = _from_conllu_id(value)
    except _CONLLU_ERRORS:
        raise ValueError(f"malformed id {text!r}") from None
    if str(tid) != text:
        raise ValueError(f"malformed id {text!r}")
    return tid


def _deps_head(head: TokenId, text: str) -> DepsHead:
    if isinstance(head, MultiwordRange):
        raise ValueError(f"enhanced head {text} points at a multiword range")
    return head


def _deps_from_conllu(pairs) -> Tuple[Tuple[DepsHead, str], ...]:
    out = []
    for label, head_value in pairs:
        head = _from_conllu_id(head_value)
        out.append((_deps_head(head, str(head)), str(label)))
    return tuple(out)


def parse_deps(text: str) -> Tuple[Tuple[DepsHead, str], ...]:
    """
    Parse a DEPS cell; "_" is the empty list.

    The ``conllu`` paired-list parser is tried first. Its label pattern is
    narrower than what treebanks carry (non-ASCII case lemmas, three-part
    labels), so anything it declines is split item by item.
    """
    if text == "_":
        return ()
    try:
        pairs = parse_paired_list_value(text)
    except _CONLLU_ERRORS:
        pairs = None
    if isinstance(pairs, list) and pairs:
        try:
            deps = _deps_from_conllu(pairs)
        except _CONLLU_ERRORS:
            deps = None
        if deps is not None and "|".join(f"{h}:{label}" for h, label in deps) == text:
            return deps

    out = []
    for item in text.split("|"):
        head_text, sep, label = item.partition(":")
        if not sep or not label:
            raise ValueError(f"malformed DEPS entry {item!r}")
        out.append((_deps_head(parse_token_id(head_text), head_text), label))
    return tuple(out)


def _feats_from_conllu(value) -> Tuple[Tuple[str, str], ...]:
    if value is None:
        return ()
    items = tuple(value.items())
    for key, val in items:
        if not key or not isinstance(val, str) or not val:
            raise ValueError(f"malformed FEATS entry {key}={val}")
    return items


def parse_feats(text: str) -> Tuple[Tuple[str, str], ...]:
    if text == "_":
        return ()
    try:
        feats = _feats_from_conllu(parse_dict_value(text))
    except _CONLLU_ERRORS:
        raise ValueError(f"malformed FEATS {text!r}") from None
    # the dict parser silently folds repeated keys and drops empty ones
    if len(feats) != text.count("|") + 1:
        raise ValueError(f"malformed FEATS {text!r}")
    return feats


# ============================================================
# Token / Sentence
# ============================================================

@dataclass(frozen=True)
class Token:
    id: TokenId
    form: str = "_"
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: Tuple[Tuple[str, str], ...] = ()
    head: Optional[int] = None
    deprel: str = "_"
    deps: Tuple[Tuple[DepsHead, str], ...] = ()
    misc: str = "_"

    def __post_init__(self):
        feats = tuple(sorted(((str(k), str(v)) for k, v in self.feats), key=lambda kv: kv[0].lower()))
        keys = [k for k, _ in feats]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate FEATS key")

        deps = tuple((h, str(label)) for h, label in self.deps)
        if len(set(deps)) != len(deps):
            raise ValueError("duplicate DEPS entry")
        deps = tuple(sorted(deps, key=lambda d: (d[0].sort_key, d[1])))

        if isinstance(self.id, MultiwordRange):
            if self.head is not None or self.deprel != "_" or deps:
                raise ValueError("multiword token must not carry HEAD, DEPREL or DEPS")
        if self.head is not None and int(self.head) < 0:
            raise ValueError(f"negative head {self.head}")

        object.__setattr__(self, "feats", feats)
        object.__setattr__(self, "deps", deps)

    @property
    def is_word(self) -> bool:
        return isinstance(self.id, Word)

    @property
    def is_empty(self) -> bool:
        return isinstance(self.id, Empty)

    @property
    def is_multiword(self) -> bool:
        return isinstance(self.id, MultiwordRange)

    def feat(self, key: str) -> Optional[str]:
        for k, v in self.feats:
            if k == key:
                return v
        return None

    def feats_text(self) -> str:
        if not self.feats:
            return "_"
        return "|".join(f"{k}={v}" for k, v in self.feats)

    def deps_text(self) -> str:
        if not self.deps:
            return "_"
        return "|".join(f"{h}:{label}" for h, label in self.deps)

    def to_line(self) -> str:
        head = "_" if self.head is None else str(self.head)
        return "\t".join([
            str(self.id), self.form, self.lemma, self.upos, self.xpos,
            self.feats_text(), head, self.deprel, self.deps_text(), self.misc,
        ])


_META_RE = re.compile(r"^#\s*(sent_id|text)\s*=\s?(.*)$")


@dataclass(frozen=True)
class Sentence:
    tokens: Tuple[Token, ...] = ()
    comments: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "comments", tuple(self.comments))

    def _meta(self, key: str) -> Optional[str]:
        for line in self.comments:
            m = _META_RE.match(line)
            if m and m.group(1) == key:
                return m.group(2)
        return None

    @property
    def sent_id(self) -> Optional[str]:
        return self._meta("sent_id")

    @property
    def text(self) -> Optional[str]:
        return self._meta("text")

    def words(self) -> List[Token]:
        return [t for t in self.tokens if t.is_word]

    def empty_nodes(self) -> List[Token]:
        return [t for t in self.tokens if t.is_empty]

    @property
    def n_words(self) -> int:
        return sum(1 for t in self.tokens if t.is_word)

    def forms(self) -> List[str]:
        return [t.form for t in self.tokens if t.is_word]

    def without_empty_nodes(self) -> "Sentence":
        """Drop empty nodes and every DEPS entry that points at one."""
        if not any(t.is_empty for t in self.tokens):
            return self
        kept = []
        for t in self.tokens:
            if t.is_empty:
                continue
            if t.deps:
                t = replace(t, deps=tuple(d for d in t.deps if not isinstance(d[0], Empty)))
            kept.append(t)
        return replace(self, tokens=tuple(kept))

    def to_text(self) -> str:
        lines = list(self.comments) + [t.to_line() for t in self.tokens]
        return "\n".join(lines) + "\n\n"


# ============================================================
# Sentence-level validation
# ============================================================

def find_violation(tokens: Sequence[Token]) -> Optional[Tuple[int, str]]:
    """
    Return (token position, reason) for the first structural problem,
    or None when the sentence is well-formed.
    """
    next_word = 1
    next_sub = 1
    covered_until = 0
    ranges: List[Tuple[int, MultiwordRange]] = []

    for pos, tok in enumerate(tokens):
        tid = tok.id
        if isinstance(tid, Word):
            if tid.index != next_word:
                return pos, f"non-consecutive word id {tid}, expected {next_word}"
            next_word += 1
            next_sub = 1
        elif isinstance(tid, Empty):
            if tid.base != next_word - 1 or tid.sub != next_sub:
                return pos, (
                    f"non-consecutive empty node id {tid}, "
                    f"expected {next_word - 1}.{next_sub}"
                )
            next_sub += 1
        else:
            if tid.start != next_word:
                return pos, f"multiword range {tid} does not precede word {tid.start}"
            if tid.start <= covered_until:
                return pos, f"multiword range {tid} overlaps a previous range"
            covered_until = tid.end
            ranges.append((pos, tid))

    n_words = next_word - 1
    if n_words == 0:
        return (0 if tokens else -1), "sentence has no words"

    for pos, rng in ranges:
        if rng.end > n_words:
            return pos, f"multiword range {rng} extends past the last word {n_words}"

    empty_ids = {t.id for t in tokens if t.is_empty}
    for pos, tok in enumerate(tokens):
        if tok.head is not None and tok.head > n_words:
            return pos, f"head {tok.head} out of range 0..{n_words}"
        for head, _ in tok.deps:
            if isinstance(head, Word) and head.index > n_words:
                return pos, f"enhanced head {head} out of range 0..{n_words}"
            if isinstance(head, Empty) and head not in empty_ids:
                return pos, f"enhanced head {head} is not an empty node of this sentence"
            if head == tok.id:
                return pos, f"enhanced self-loop on {tok.id}"
    return None


# ============================================================
# Parsing
# ============================================================

def _parse_head(text: str) -> Optional[int]:
    if text == "_":
        return None
    try:
        value = parse_int_value(text)
    except _CONLLU_ERRORS:
        value = None
    if not isinstance(value, int) or str(value) != text:
        raise ValueError(f"malformed head {text!r}")
    return value


def _parse_token_line(line: str, line_no: int) -> Token:
    # tab split only: the conllu line splitter also breaks on runs of spaces
    cols = line.split("\t")
    if len(cols) != N_COLUMNS:
        raise ConlluParseError(
            line_no, f"expected {N_COLUMNS} tab-separated columns, found {len(cols)}"
        )
    tid_text, form, lemma, upos, xpos, feats, head, deprel, deps, misc = cols
    try:
        return Token(
            id=parse_token_id(tid_text), form=form, lemma=lemma, upos=upos, xpos=xpos,
            feats=parse_feats(feats), head=_parse_head(head), deprel=deprel,
            deps=parse_deps(deps), misc=misc,
        )
    except ValueError as e:
        raise ConlluParseError(line_no, str(e)) from None


def _as_text(source) -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ConlluParseError(data[: e.start].count(b"\n") + 1, "input is not valid UTF-8") from None


def parse_document(source) -> List[Sentence]:
    """
    Parse a CoNLL-U document.

    ``source`` may be a str, bytes, or a readable stream (text or binary).
    Sentences are separated by blank lines; CRLF line endings are accepted.
    """
    text = _as_text(source)
    if text.startswith("\ufeff"):
        text = text[1:]

    sentences: List[Sentence] = []
    comments: List[str] = []
    tokens: List[Token] = []
    token_lines: List[int] = []
    block_start = 1

    def flush():
        if not tokens:
            if comments:
                raise ConlluParseError(block_start, "comment block without token lines")
            return
        problem = find_violation(tokens)
        if problem is not None:
            pos, reason = problem
            raise ConlluParseError(token_lines[max(pos, 0)], reason)
        sentences.append(Sentence(tokens=tuple(tokens), comments=tuple(comments)))

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    for line_no, raw in enumerate(lines, start=1):
        line = raw[:-1] if raw.endswith("\r") else raw
        if not line.strip():
            flush()
            comments, tokens, token_lines = [], [], []
            block_start = line_no + 1
            continue
        if line.startswith("#"):
            if tokens:
                raise ConlluParseError(line_no, "comment line inside token lines")
            comments.append(line)
            continue
        tokens.append(_parse_token_line(line, line_no))
        token_lines.append(line_no)
    flush()

    logger.debug("[CONLLU] parsed %d sentences", len(sentences))
    return sentences


# ============================================================
# Serialization
# ============================================================

def serialize_document(sentences: Iterable[Sentence]) -> str:
    """Render sentences in canonical CoNLL-U with LF line endings."""
    parts = []
    for sent in sentences:
        problem = find_violation(sent.tokens)
        if problem is not None:
            pos, reason = problem
            name = str(sent.tokens[pos].id) if 0 <= pos < len(sent.tokens) else "<none>"
            raise InvariantViolation(name, reason)
        parts.append(sent.to_text())
    return "".join(parts)


def read_conllu(path: Union[str, Path]) -> List[Sentence]:
    """Read a CoNLL-U file; "-" reads stdin."""
    if str(path) == "-":
        return parse_document(sys.stdin.buffer.read())
    return parse_document(Path(path).read_bytes())


def write_conllu(sentences: Iterable[Sentence], path: Union[str, Path]) -> None:
    """Write a CoNLL-U file; "-" writes stdout."""
    text = serialize_document(sentences)
    if str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


# ============================================================
# conllu package interop
# ============================================================

def _field_text(value) -> str:
    if value is None:
        return "_"
    if isinstance(value, str):
        return value
    return serialize_field(value) or "_"


def _to_conllu_id(tid: TokenId):
    if isinstance(tid, MultiwordRange):
        return (tid.start, "-", tid.end)
    if isinstance(tid, Empty):
        return (tid.base, ".", tid.sub)
    return tid.index


def token_from_conllu(record) -> Token:
    """Build a Token from a ``conllu`` token record (a dict keyed by column name)."""
    feats = record.get("feats")
    deps = record.get("deps")
    head = record.get("head")
    return Token(
        id=_from_conllu_id(record["id"]),
        form=_field_text(record.get("form")),
        lemma=_field_text(record.get("lemma")),
        upos=_field_text(record.get("upos")),
        xpos=_field_text(record.get("xpos")),
        feats=parse_feats(feats) if isinstance(feats, str) else _feats_from_conllu(feats),
        head=None if head is None else int(head),
        deprel=_field_text(record.get("deprel")),
        deps=parse_deps(deps) if isinstance(deps, str) else _deps_from_conllu(deps or ()),
        misc=_field_text(record.get("misc")),
    )


def sentence_from_tokenlist(tokenlist: TokenList) -> Sentence:
    """Convert a ``conllu`` TokenList, e.g. from ``conllu.parse_incr``; metadata become comments."""
    metadata = getattr(tokenlist, "metadata", None) or {}
    comments = tuple(
        f"# {key}" if value is None else f"# {key} = {value}"
        for key, value in metadata.items()
    )
    return Sentence(tokens=tuple(token_from_conllu(t) for t in tokenlist), comments=comments)


def to_tokenlist(sentence: Sentence) -> TokenList:
    records = []
    for t in sentence.tokens:
        records.append(ConlluToken([
            ("id", _to_conllu_id(t.id)),
            ("form", t.form),
            ("lemma", t.lemma),
            ("upos", t.upos),
            ("xpos", t.xpos),
            ("feats", dict(t.feats) or None),
            ("head", t.head),
            ("deprel", t.deprel),
            ("deps", [(label, _to_conllu_id(h)) for h, label in t.deps] or None),
            ("misc", t.misc),
        ]))
    metadata = {}
    for line in sentence.comments:
        m = _META_RE.match(line)
        if m:
            metadata[m.group(1)] = m.group(2)
    return TokenList(records, metadata=metadata)
