# core/sdp_decode.py
"""
Decode enhanced graphs from per-sentence edge-existence probabilities.

Input matrices are indexed [dependent][head] over the dense node space
(0 = ROOT, words, then empty nodes). Decoding is local:
  - every head j != i with edge_prob[i][j] > threshold is kept
  - a node with no such head takes its single most probable head
    (smallest index on ties; ROOT is a legal fallback)
No spanning-tree search, no cycle removal: the result may be fragmented.

Interchange format: JSON lines, one record per sentence with
sent_id, n_words, n_empty, labels, edge_prob, best_label.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.config import get_default_config
from core.conllu import Sentence
from core.errors import ProbabilityFormatError, ShapeMismatchError, TokenizationMismatch
from core.eud_graph import Edge, EnhancedGraph, from_sentence, reachability, to_sentence
from core.eval_elas import LabelMode, score

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = get_default_config().threshold

_EMPTY_DROP_LOGGED = False  # log once per process


# ============================================================
# Probability matrices
# ============================================================

@dataclass(frozen=True, eq=False)
class EdgeProbabilities:
    n_words: int
    n_empty: int
    edge_prob: np.ndarray
    best_label: np.ndarray
    label_vocab: Tuple[str, ...]
    sent_id: Optional[str] = None

    def __post_init__(self):
        if self.n_words < 0 or self.n_empty < 0:
            raise ProbabilityFormatError(None, "node counts must be non-negative")
        n = self.n_nodes
        probs = np.array(self.edge_prob, dtype=float)
        labels = np.array(self.best_label)

        if probs.shape != (n, n):
            raise ShapeMismatchError(None, f"edge_prob has shape {probs.shape}, expected ({n}, {n})")
        if labels.shape != (n, n):
            raise ShapeMismatchError(None, f"best_label has shape {labels.shape}, expected ({n}, {n})")
        if not np.all(np.isfinite(probs)) or probs.min() < 0.0 or probs.max() > 1.0:
            raise ProbabilityFormatError(None, "probability outside [0, 1]")
        if np.any(probs[0] != 0.0):
            raise ProbabilityFormatError(None, "row 0 (ROOT as dependent) must be all zeros")

        if labels.dtype.kind not in "iu":
            if labels.dtype.kind != "f" or not np.all(np.mod(labels, 1) == 0):
                raise ProbabilityFormatError(None, "best_label entries must be integers")
            labels = labels.astype(int)
        vocab = tuple(str(v) for v in self.label_vocab)
        if labels.min() < 0 or labels.max() >= len(vocab):
            raise ProbabilityFormatError(None, f"best_label index outside vocabulary of size {len(vocab)}")

        probs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "edge_prob", probs)
        object.__setattr__(self, "best_label", labels)
        object.__setattr__(self, "label_vocab", vocab)

    @property
    def n_nodes(self) -> int:
        return self.n_words + self.n_empty + 1


def decode(p: EdgeProbabilities, threshold: float = DEFAULT_THRESHOLD) -> EnhancedGraph:
    if not 0.0 < float(threshold) < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")

    candidates = p.edge_prob.copy()
    np.fill_diagonal(candidates, -np.inf)   # no self-edges
    candidates[0, :] = -np.inf              # ROOT is never a dependent
    chosen = candidates > threshold

    edges = []
    for i in range(1, p.n_nodes):
        heads = np.flatnonzero(chosen[i])
        if heads.size == 0:
            heads = [int(np.argmax(candidates[i]))]
        for j in heads:
            j = int(j)
            edges.append(Edge(j, i, p.label_vocab[int(p.best_label[i, j])]))
    return EnhancedGraph(p.n_words, p.n_empty, frozenset(edges))


# ============================================================
# Head direction / distance features
# ============================================================

class Direction(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class DistanceBucket(str, Enum):
    SHORT = "short"            # 1-4
    MEDIUM = "medium"          # 5-9
    FAR = "far"                # 10-14
    LONG_RANGE = "long_range"  # 15 and beyond


@dataclass(frozen=True)
class HeadFeature:
    direction: Direction
    bucket: DistanceBucket


def distance_bucket(distance: int) -> DistanceBucket:
    d = abs(int(distance))
    if d < 1:
        raise ValueError("distance must be non-zero")
    if d <= 4:
        return DistanceBucket.SHORT
    if d <= 9:
        return DistanceBucket.MEDIUM
    if d <= 14:
        return DistanceBucket.FAR
    return DistanceBucket.LONG_RANGE


def head_feature(dependent_index: int, head_index: int) -> HeadFeature:
    """Signed distance head - dependent; negative means the head is on the left."""
    if dependent_index < 1 or head_index < 0:
        raise ValueError(f"invalid indices dependent={dependent_index} head={head_index}")
    if dependent_index == head_index:
        raise ValueError("head and dependent indices must differ")
    distance = head_index - dependent_index
    direction = Direction.LEFT if distance < 0 else Direction.RIGHT
    return HeadFeature(direction, distance_bucket(distance))


def basic_head_features(sentence: Sentence) -> List[Optional[HeadFeature]]:
    """Features of each word's basic-tree head; None where HEAD is missing."""
    return [
        None if tok.head is None else head_feature(tok.id.index, tok.head)
        for tok in sentence.words()
    ]


# ============================================================
# Interchange records
# ============================================================

class ProbabilityRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    sent_id: Optional[str] = None
    n_words: int = Field(ge=0)
    n_empty: int = Field(default=0, ge=0)
    labels: List[str]
    edge_prob: List[Union[List[float], float]]
    best_label: List[Union[List[int], int]]

    def to_edge_probabilities(self) -> EdgeProbabilities:
        n = self.n_words + self.n_empty + 1
        return EdgeProbabilities(
            n_words=self.n_words,
            n_empty=self.n_empty,
            edge_prob=_square(self.edge_prob, n, "edge_prob", float),
            best_label=_square(self.best_label, n, "best_label", int),
            label_vocab=tuple(self.labels),
            sent_id=self.sent_id,
        )


def _square(values: list, n: int, name: str, dtype) -> np.ndarray:
    """Accept a row-major flat list of n*n values or a list of n rows."""
    nested = [isinstance(v, list) for v in values]
    if any(nested):
        if not all(nested):
            raise ShapeMismatchError(None, f"{name} mixes rows and scalars")
        if len(values) != n:
            raise ShapeMismatchError(None, f"{name} has {len(values)} rows, expected {n}")
        bad = next((len(r) for r in values if len(r) != n), None)
        if bad is not None:
            raise ShapeMismatchError(None, f"{name} row of length {bad}, expected {n}")
        return np.array(values, dtype=dtype)
    if len(values) != n * n:
        raise ShapeMismatchError(None, f"{name} has {len(values)} values, expected {n * n}")
    return np.array(values, dtype=dtype).reshape(n, n)


def _as_lines(source) -> List[str]:
    if isinstance(source, str):
        return source.split("\n")
    data = bytes(source) if isinstance(source, (bytes, bytearray)) else source.read()
    if isinstance(data, str):
        return data.split("\n")
    try:
        return data.decode("utf-8").split("\n")
    except UnicodeDecodeError as e:
        raise ProbabilityFormatError(data[: e.start].count(b"\n") + 1, "input is not valid UTF-8") from None


def load_probabilities(source) -> List[EdgeProbabilities]:
    """Read JSON-lines probability records; blank lines are skipped."""
    out = []
    for line_no, line in enumerate(_as_lines(source), start=1):
        if not line.strip():
            continue
        try:
            record = ProbabilityRecord.model_validate_json(line)
        except ValidationError as e:
            raise ProbabilityFormatError(line_no, f"malformed record: {e.errors()[0]['msg']}") from None
        try:
            out.append(record.to_edge_probabilities())
        except ProbabilityFormatError as e:
            raise type(e)(line_no, e.reason) from None
    logger.debug("[DECODE] loaded %d probability records", len(out))
    return out


def dump_probabilities(items: Iterable[EdgeProbabilities]) -> str:
    lines = []
    for p in items:
        lines.append(json.dumps({
            "sent_id": p.sent_id,
            "n_words": p.n_words,
            "n_empty": p.n_empty,
            "labels": list(p.label_vocab),
            "edge_prob": p.edge_prob.ravel().tolist(),
            "best_label": p.best_label.ravel().tolist(),
        }))
    return "".join(line + "\n" for line in lines)


# ============================================================
# Documents
# ============================================================

def _template_for(p: EdgeProbabilities, template: Sentence, index: int) -> Sentence:
    if p.n_words != template.n_words:
        raise TokenizationMismatch(
            index, f"record has {p.n_words} words, sentence has {template.n_words}"
        )
    n_empty = len(template.empty_nodes())
    if p.n_empty == n_empty:
        return template
    if p.n_empty == 0:
        global _EMPTY_DROP_LOGGED
        if not _EMPTY_DROP_LOGGED:
            logger.info("[DECODE] records without empty nodes: dropping empty nodes from the templates")
            _EMPTY_DROP_LOGGED = True
        return template.without_empty_nodes()
    raise TokenizationMismatch(
        index, f"record has {p.n_empty} empty nodes, sentence has {n_empty}"
    )


def decode_document(
    probs: Sequence[EdgeProbabilities],
    templates: Sequence[Sentence],
    threshold: float = DEFAULT_THRESHOLD,
) -> List[Sentence]:
    """Decode every record and write the graph into the matching sentence's DEPS."""
    if len(probs) != len(templates):
        raise TokenizationMismatch(
            None, f"{len(probs)} probability records for {len(templates)} sentences"
        )
    out = []
    for i, (p, template) in enumerate(zip(probs, templates)):
        if p.sent_id and template.sent_id and p.sent_id != template.sent_id:
            logger.warning("[DECODE] sent_id %s paired with sentence %s", p.sent_id, template.sent_id)
        base = _template_for(p, template, i)
        out.append(to_sentence(decode(p, threshold), base))
    return out


def threshold_sweep(
    probs: Sequence[EdgeProbabilities],
    templates: Sequence[Sentence],
    gold: Sequence[Sentence],
    thresholds: Iterable[float] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
    mode: Union[LabelMode, str] = LabelMode.FULL,
) -> pd.DataFrame:
    """Edge count, fragmented sentences and ELAS for each threshold."""
    rows = []
    for t in thresholds:
        system = decode_document(probs, templates, t)
        graphs = [from_sentence(s) for s in system]
        report = score(gold, system, mode)
        rows.append({
            "threshold": float(t),
            "edges": sum(len(g.edges) for g in graphs),
            "fragmented": sum(1 for g in graphs if not reachability(g).is_connected),
            "precision": report.precision,
            "recall": report.recall,
            "f1": report.f1,
        })
    return pd.DataFrame(rows)
