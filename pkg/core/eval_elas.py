# core/eval_elas.py
"""
ELAS / EULAS scoring of enhanced graphs.

Edges are compared as (head id, dependent id, label) triples per sentence.
Full mode keeps the whole DEPS label; coarse mode truncates it at the first
":" ("nmod:of" -> "nmod"). Ids are the literal CoNLL-U ids, so empty nodes
only match when both sides realise the same "b.s" id.

Word tokenization must be identical on both sides; no alignment is done.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Set, Tuple, Union

import pandas as pd

from core.conllu import Sentence
from core.errors import InvariantViolation, TokenizationMismatch

logger = logging.getLogger(__name__)


class LabelMode(str, Enum):
    FULL = "full"
    COARSE = "coarse"


def _ratio(num: int, den: int) -> float:
    return 100.0 * num / den if den else 0.0


@dataclass(frozen=True)
class ElasReport:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    mode: LabelMode = LabelMode.FULL

    def __post_init__(self):
        object.__setattr__(self, "mode", LabelMode(self.mode))

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "ElasReport") -> "ElasReport":
        if self.mode != other.mode:
            raise ValueError("cannot add reports of different label modes")
        return ElasReport(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.mode)

    def to_dict(self) -> Dict[str, object]:
        return {
            "mode": self.mode.value,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": round(self.precision, 4),
            "recall": round(self.recall, 4),
            "f1": round(self.f1, 4),
        }


def coarse_label(label: str) -> str:
    return label.split(":", 1)[0]


def enhanced_edges(sentence: Sentence, mode: LabelMode = LabelMode.FULL) -> Set[Tuple[str, str, str]]:
    mode = LabelMode(mode)
    out = set()
    for tok in sentence.tokens:
        if tok.is_multiword:
            continue
        for head, label in tok.deps:
            out.add((str(head), str(tok.id), coarse_label(label) if mode is LabelMode.COARSE else label))
    return out


def check_tokenization(gold: Sequence[Sentence], system: Sequence[Sentence]) -> None:
    """Raise TokenizationMismatch unless both sides have the same words."""
    if len(gold) != len(system):
        raise TokenizationMismatch(
            None, f"gold has {len(gold)} sentences, system has {len(system)}"
        )
    for i, (g, s) in enumerate(zip(gold, system)):
        gf, sf = g.forms(), s.forms()
        if gf == sf:
            continue
        if len(gf) != len(sf):
            raise TokenizationMismatch(i, f"gold has {len(gf)} words, system has {len(sf)}")
        k = next(k for k, (a, b) in enumerate(zip(gf, sf)) if a != b)
        raise TokenizationMismatch(i, f"word {k + 1} differs: gold {gf[k]!r}, system {sf[k]!r}")


def score(
    gold: Sequence[Sentence],
    system: Sequence[Sentence],
    mode: Union[LabelMode, str] = LabelMode.FULL,
) -> ElasReport:
    mode = LabelMode(mode)
    check_tokenization(gold, system)
    tp = fp = fn = 0
    for g, s in zip(gold, system):
        ge, se = enhanced_edges(g, mode), enhanced_edges(s, mode)
        tp += len(ge & se)
        fp += len(se - ge)
        fn += len(ge - se)
    report = ElasReport(tp, fp, fn, mode)
    logger.debug("[EVAL] %s tp=%d fp=%d fn=%d f1=%.2f", mode.value, tp, fp, fn, report.f1)
    return report


def per_label_scores(
    gold: Sequence[Sentence],
    system: Sequence[Sentence],
    mode: Union[LabelMode, str] = LabelMode.FULL,
) -> pd.DataFrame:
    """Per-label tp/fp/fn and P/R/F1; rows sorted by gold support, then label."""
    mode = LabelMode(mode)
    check_tokenization(gold, system)
    counts: Dict[str, List[int]] = {}
    for g, s in zip(gold, system):
        ge, se = enhanced_edges(g, mode), enhanced_edges(s, mode)
        for _, _, label in ge & se:
            counts.setdefault(label, [0, 0, 0])[0] += 1
        for _, _, label in se - ge:
            counts.setdefault(label, [0, 0, 0])[1] += 1
        for _, _, label in ge - se:
            counts.setdefault(label, [0, 0, 0])[2] += 1

    rows = []
    for label, (tp, fp, fn) in counts.items():
        r = ElasReport(tp, fp, fn, mode)
        rows.append({
            "label": label, "support": tp + fn, "tp": tp, "fp": fp, "fn": fn,
            "precision": r.precision, "recall": r.recall, "f1": r.f1,
        })
    df = pd.DataFrame(rows, columns=["label", "support", "tp", "fp", "fn", "precision", "recall", "f1"])
    if df.empty:
        return df
    return df.sort_values(["support", "label"], ascending=[False, True]).reset_index(drop=True)


# ============================================================
# Macro averaging over treebanks
# ============================================================

ScoreLike = Union[ElasReport, float]


def _f1_of(item: ScoreLike) -> float:
    return float(item.f1) if isinstance(item, ElasReport) else float(item)


@dataclass(frozen=True)
class MacroReport:
    per_treebank: Tuple[Tuple[str, ScoreLike], ...]
    treebank_average: float
    language_average: float
    language_of: Dict[str, str]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for name, item in self.per_treebank:
            is_report = isinstance(item, ElasReport)
            rows.append({
                "treebank": name,
                "language": self.language_of.get(name, ""),
                "precision": item.precision if is_report else float("nan"),
                "recall": item.recall if is_report else float("nan"),
                "f1": _f1_of(item),
            })
        return pd.DataFrame(rows, columns=["treebank", "language", "precision", "recall", "f1"])

    def to_dict(self) -> Dict[str, object]:
        return {
            "treebank_average": round(self.treebank_average, 4),
            "language_average": round(self.language_average, 4),
            "per_treebank": [
                {"treebank": name, "language": self.language_of.get(name, ""), "f1": round(_f1_of(item), 4)}
                for name, item in self.per_treebank
            ],
        }


def macro(reports: Iterable[Tuple[str, str, ScoreLike]]) -> MacroReport:
    """
    Treebank average = mean F1 over treebanks.
    Language average = mean over languages of the mean F1 of their treebanks.

    A bare number is accepted in place of a report and read as an F1 score.
    """
    items = list(reports)
    if not items:
        raise ValueError("macro() needs at least one treebank")

    df = pd.DataFrame(
        [{"treebank": tb, "language": lang, "f1": _f1_of(rep)} for tb, lang, rep in items]
    )
    treebank_average = float(df["f1"].mean())
    language_average = float(df.groupby("language", sort=True)["f1"].mean().mean())

    return MacroReport(
        per_treebank=tuple((tb, rep) for tb, _, rep in items),
        treebank_average=treebank_average,
        language_average=language_average,
        language_of={tb: lang for tb, lang, _ in items},
    )


def export_report_xlsx(report: MacroReport, target) -> None:
    """Write per-treebank scores and averages to an .xlsx file or binary buffer."""
    summary = pd.DataFrame([
        {"average": "treebank", "f1": report.treebank_average},
        {"average": "language", "f1": report.language_average},
    ])
    with pd.ExcelWriter(target, engine="openpyxl") as writer:
        report.to_frame().to_excel(writer, sheet_name="treebanks", index=False)
        summary.to_excel(writer, sheet_name="averages", index=False)


# ============================================================
# Repair comparison
# ============================================================

def _edge_set(sentences: Sequence[Sentence], mode: LabelMode) -> Set[Tuple[int, str, str, str]]:
    return {(i,) + e for i, s in enumerate(sentences) for e in enhanced_edges(s, mode)}


def precision_delta(
    gold: Sequence[Sentence],
    naive_fixed: Sequence[Sentence],
    greedy_fixed: Sequence[Sentence],
    mode: Union[LabelMode, str] = LabelMode.FULL,
) -> Tuple[float, float]:
    """
    ELAS precision of two repaired versions of the same system output.

    When the greedy edges are a subset of the naive ones and the extra naive
    edges are all wrong, greedy precision can never be lower.
    """
    mode = LabelMode(mode)
    p_naive = score(gold, naive_fixed, mode).precision
    p_greedy = score(gold, greedy_fixed, mode).precision

    naive_edges = _edge_set(naive_fixed, mode)
    greedy_edges = _edge_set(greedy_fixed, mode)
    if greedy_edges <= naive_edges and not ((naive_edges - greedy_edges) & _edge_set(gold, mode)):
        if p_greedy + 1e-9 < p_naive:
            raise InvariantViolation(
                "precision_delta", f"greedy precision {p_greedy:.4f} below naive {p_naive:.4f}"
            )
    return p_naive, p_greedy


def report_to_dict(report: Union[ElasReport, MacroReport]) -> Dict[str, object]:
    """JSON-ready view of a single or macro report."""
    return report.to_dict()
